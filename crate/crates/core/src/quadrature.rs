//! Periodic-grid quadrature, cumulative integrals, discrete Fourier
//! coefficients and the geometric-series tail used to resum the history of
//! infinitely many earlier drive periods.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Smallest admissible number of nodes per period.
pub const MIN_GRID: usize = 64;

/// `|ratio|` at or above this is treated as a non-convergent tail.
const TAIL_LIMIT: f64 = 1.0 - 1e-12;

/// Uniform grid over one drive period, nodes `t_i = -T/2 + i T / n`.
///
/// The right end `T/2` is not a node; it is identified with `-T/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodGrid {
    n: usize,
    period: f64,
}

impl PeriodGrid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::config(format!("period grid needs at least {MIN_GRID} nodes, got {n}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::config(format!("period must be positive and finite, got {period}")));
        }
        Ok(Self { n, period })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn start(&self) -> f64 {
        -0.5 * self.period
    }

    /// Node `i`; `i == n` gives the closing point `T/2`.
    pub fn node(&self, i: usize) -> f64 {
        self.start() + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Folds `t` into `[-T/2, T/2)`.
    pub fn reduce(&self, t: f64) -> f64 {
        reduce_to_period(t, self.period)
    }

    /// Index of the cell `[t_i, t_{i+1})` containing the reduced time, and the reduced time.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let tr = self.reduce(t);
        let i = (((tr - self.start()) / self.spacing()).floor() as usize).min(self.n - 1);
        (i, tr)
    }

    /// Linear interpolation of periodic node data at an arbitrary time.
    pub fn interpolate(&self, values: &[C64], t: f64) -> Result<C64> {
        self.check(values)?;
        let (i, tr) = self.locate(t);
        let frac = (tr - self.node(i)) / self.spacing();
        let next = values[(i + 1) % self.n];
        Ok(values[i] + (next - values[i]) * frac)
    }

    fn check(&self, values: &[C64]) -> Result<()> {
        if values.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: values.len() });
        }
        Ok(())
    }
}

/// Folds `t` into `[-T/2, T/2)`.
pub fn reduce_to_period(t: f64, period: f64) -> f64 {
    let shifted = t + 0.5 * period;
    let r = shifted - period * (shifted / period).floor();
    // floor can round so that r == period
    let r = if r >= period { r - period } else { r };
    r - 0.5 * period
}

/// Trapezoid rule over one period of periodic samples.
pub fn integrate_period(values: &[C64], grid: &PeriodGrid) -> Result<C64> {
    grid.check(values)?;
    Ok(values.iter().sum::<C64>() * grid.spacing())
}

/// Cumulative trapezoid `F(t_i) = ∫_{-T/2}^{t_i} f dt`.
///
/// Returns `n + 1` values; the last one closes the period using the wrap-around
/// sample, so it equals [`integrate_period`].
pub fn cumulative_integral(values: &[C64], grid: &PeriodGrid) -> Result<Vec<C64>> {
    grid.check(values)?;
    let h = grid.spacing();
    let mut out = Vec::with_capacity(grid.len() + 1);
    let mut acc = C64::new(0.0, 0.0);
    out.push(acc);
    for i in 0..grid.len() {
        let next = values[(i + 1) % grid.len()];
        acc += (values[i] + next) * (0.5 * h);
        out.push(acc);
    }
    Ok(out)
}

/// Sum over all earlier periods, `x (r + r^2 + ...) = x r / (1 - r)`.
pub fn geometric_tail(period_integral: C64, ratio: C64) -> Result<C64> {
    let magnitude = ratio.norm();
    if !(magnitude < TAIL_LIMIT) {
        return Err(Error::DivergentTail { magnitude });
    }
    Ok(period_integral * ratio / (C64::new(1.0, 0.0) - ratio))
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F>(a: f64, b: f64, mut f: F) -> C64
where
    F: FnMut(f64) -> C64,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += (f(mid - half * x) + f(mid + half * x)) * *w;
    }
    acc * half
}

/// Gauss-Legendre on `[a, b]`, split at every breakpoint strictly inside.
///
/// `breaks` must be sorted.
pub fn gauss_legendre_split<F>(a: f64, b: f64, breaks: &[f64], mut f: F) -> C64
where
    F: FnMut(f64) -> C64,
{
    let mut lo = a;
    let mut acc = C64::new(0.0, 0.0);
    for &x in breaks.iter().filter(|&&x| x > a && x < b) {
        acc += gauss_legendre(lo, x, &mut f);
        lo = x;
    }
    acc + gauss_legendre(lo, b, &mut f)
}

/// Fourier coefficients `c_m = (1/T) ∫ f(t) e^{i m Ω t} dt` of samples taken on
/// the nodes `-T/2 + jT/N`, returned in FFT order (`m = k` for `k <= N/2`,
/// `m = k - N` above).
pub fn fourier_coefficients(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let m = signed_index(k, n);
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *c *= sign * inv_n;
    }
    buf
}

/// Harmonic number belonging to FFT slot `k`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, omega: f64) -> PeriodGrid {
        PeriodGrid::new(n, 2.0 * PI / omega).unwrap()
    }

    #[test]
    fn constant_integrates_to_period() {
        let g = grid(128, 1.7);
        let v = vec![C64::new(1.0, 0.0); 128];
        assert!((integrate_period(&v, &g).unwrap() - g.period()).norm() < 1e-13);
    }

    #[test]
    fn pure_harmonics_vanish() {
        let omega = 2.3;
        let g = grid(256, omega);
        for m in 1..10 {
            let v: Vec<C64> = g
                .nodes()
                .iter()
                .map(|&t| C64::from_polar(1.0, m as f64 * omega * t))
                .collect();
            assert!(integrate_period(&v, &g).unwrap().norm() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn cos_squared_gives_half_period() {
        let omega = 0.4;
        let g = grid(64, omega);
        let v: Vec<C64> = g.nodes().iter().map(|&t| C64::new((omega * t).cos().powi(2), 0.0)).collect();
        assert!((integrate_period(&v, &g).unwrap().re - g.period() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = grid(64, 1.0);
        let v = vec![C64::new(0.0, 0.0); 63];
        assert_eq!(
            integrate_period(&v, &g),
            Err(Error::LengthMismatch { expected: 64, got: 63 })
        );
        assert!(cumulative_integral(&v, &g).is_err());
    }

    #[test]
    fn cumulative_of_constant_is_linear() {
        let g = grid(64, 1.0);
        let v = vec![C64::new(1.0, 0.0); 64];
        let f = cumulative_integral(&v, &g).unwrap();
        assert_eq!(f.len(), 65);
        for (i, fi) in f.iter().enumerate() {
            assert!((fi.re - (g.node(i) + g.period() / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_of_cosine() {
        let omega = 1.3;
        let g = grid(1024, omega);
        let v: Vec<C64> = g.nodes().iter().map(|&t| C64::new((omega * t).cos(), 0.0)).collect();
        let f = cumulative_integral(&v, &g).unwrap();
        let h = g.spacing();
        for i in 0..=g.len() {
            let exact = (omega * g.node(i)).sin() / omega;
            // sin(-π) = 0, trapezoid error is O(h^2)
            assert!((f[i].re - exact).abs() < h * h, "i = {i}");
        }
    }

    #[test]
    fn odd_integrand_closes_to_zero() {
        let omega = 1.0;
        let g = grid(128, omega);
        let v: Vec<C64> = g.nodes().iter().map(|&t| C64::new((omega * t).sin() + (3.0 * omega * t).sin(), 0.0)).collect();
        let f = cumulative_integral(&v, &g).unwrap();
        assert!(f[g.len()].norm() < 1e-13);
    }

    #[test]
    fn geometric_tail_cases() {
        let one = C64::new(1.0, 0.0);
        assert!((geometric_tail(one, C64::new(0.5, 0.0)).unwrap() - one).norm() < 1e-15);
        assert_eq!(geometric_tail(one, C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(
            geometric_tail(one, C64::new(0.0, 1.0)),
            Err(Error::DivergentTail { .. })
        ));
        assert!(geometric_tail(one, C64::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn geometric_tail_reproduces_constant_coupling_tail() {
        // ∫_{-∞}^{-T/2} e^{-i z t} dt = e^{i z T/2} / (-i z) for z = δ + iΓ
        let (delta, gamma, omega) = (0.7, 1.1, 2.0);
        let period = 2.0 * PI / omega;
        let z = C64::new(delta, gamma);
        let i = C64::new(0.0, 1.0);
        let c0 = ((-i * z * (period / 2.0)).exp() - (i * z * (period / 2.0)).exp()) / (-i * z);
        let ratio = (i * z * period).exp();
        let tail = geometric_tail(c0, ratio).unwrap();
        let exact = (i * z * (period / 2.0)).exp() / (-i * z);
        assert!((tail - exact).norm() < 1e-13);
        // the form written with e^{-i z T} - 1 in the denominator
        assert!((tail - c0 / ((-i * z * period).exp() - 1.0)).norm() < 1e-13);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let v = gauss_legendre(-1.0, 2.0, |x| C64::new(x.powi(15) - 3.0 * x.powi(4), 0.0));
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v.re - exact).abs() < 1e-9);
    }

    #[test]
    fn split_rule_handles_a_step() {
        let step = |x: f64| C64::new(if x < 0.3 { 1.0 } else { 5.0 }, 0.0);
        let v = gauss_legendre_split(0.0, 1.0, &[0.3, 2.0], step);
        assert!((v.re - (0.3 + 5.0 * 0.7)).abs() < 1e-14);
    }

    #[test]
    fn fourier_coefficients_of_shifted_cosine() {
        // f(t) = 1 + cos Ωt on 64 nodes
        let omega = 3.0;
        let g = grid(64, omega);
        let s: Vec<C64> = g.nodes().iter().map(|&t| C64::new(1.0 + (omega * t).cos(), 0.0)).collect();
        let c = fourier_coefficients(&s);
        assert!((c[0] - 1.0).norm() < 1e-14);
        assert!((c[1] - 0.5).norm() < 1e-14);
        assert!((c[63] - 0.5).norm() < 1e-14);
        assert!(c[2..63].iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn reduce_maps_into_half_open_period() {
        let t = 2.0 * PI;
        for x in [-7.0 * PI, -PI, 0.0, PI, 3.2, 1e3] {
            let r = reduce_to_period(x, t);
            assert!((-PI..PI).contains(&r), "{x} -> {r}");
            assert!((((x - r) / t).round() * t - (x - r)).abs() < 1e-9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tail_is_self_consistent(xr in -5.0..5.0f64, xi in -5.0..5.0f64, mag in 0.0..0.99f64, arg in -3.2..3.2f64) {
                let x = C64::new(xr, xi);
                let r = C64::from_polar(mag, arg);
                let s = geometric_tail(x, r).unwrap();
                prop_assert!((x * r + s * r - s).norm() < 1e-10 * (1.0 + s.norm()));
            }
        }
    }
}
