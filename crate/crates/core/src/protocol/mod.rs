//! Periodic coupling protocols `g(t)` and the decay-rate kernel derived from them.
//!
//! Each waveform implements [`CouplingShape`] as a function of the drive phase;
//! [`CouplingProtocol`] attaches a drive frequency to a shape. Shapes are
//! looked up by name through [`ShapeRegistry`].

mod kernel;
mod registry;
pub mod shapes;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{fourier_coefficients, gauss_legendre_split, reduce_to_period, C64};

pub use kernel::RateKernel;
pub use registry::{ShapeBuilder, ShapeParams, ShapeRegistry};

/// A real, `2π`-periodic coupling waveform of the drive phase `θ ∈ [-π, π)`.
pub trait CouplingShape: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn value(&self, phase: f64) -> f64;

    /// One-sided limit at `phase`; differs from [`value`](Self::value) only at breakpoints.
    fn limit(&self, phase: f64, from_above: bool) -> f64 {
        let _ = from_above;
        self.value(phase)
    }

    /// `dg/dθ`.
    fn phase_derivative(&self, phase: f64) -> f64;

    /// Sorted jump locations in `(-π, π)`; empty for smooth shapes.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn is_smooth(&self) -> bool {
        self.breakpoints().is_empty()
    }

    /// Upper bound of `|g|`, used to set relative thresholds.
    fn scale(&self) -> f64;

    /// Period average of `g²`.
    fn mean_square(&self) -> f64 {
        let breaks = self.breakpoints();
        let cells = 256;
        let h = 2.0 * PI / cells as f64;
        let mut acc = 0.0;
        for c in 0..cells {
            let a = -PI + c as f64 * h;
            acc += gauss_legendre_split(a, a + h, &breaks, |p| C64::new(self.value(p).powi(2), 0.0)).re;
        }
        acc / (2.0 * PI)
    }
}

/// A coupling shape driven at angular frequency `Ω`.
#[derive(Clone)]
pub struct CouplingProtocol {
    shape: Arc<dyn CouplingShape>,
    omega: f64,
}

impl fmt::Debug for CouplingProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingProtocol")
            .field("shape", &self.shape)
            .field("omega", &self.omega)
            .finish()
    }
}

impl CouplingProtocol {
    pub fn new(shape: Arc<dyn CouplingShape>, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::config(format!("drive frequency must be positive, got {omega}")));
        }
        Ok(Self { shape, omega })
    }

    /// Drive at `Ω = β Γ⁽⁰⁾`. The mean rate depends only on the shape, so no
    /// iteration is needed.
    pub fn with_beta(shape: Arc<dyn CouplingShape>, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::config(format!("beta must be positive, got {beta}")));
        }
        let gamma0 = PI * shape.mean_square();
        if !(gamma0 > 0.0) {
            return Err(Error::DegenerateKernel { gamma0 });
        }
        Self::new(shape, beta * gamma0)
    }

    pub fn shape(&self) -> &Arc<dyn CouplingShape> {
        &self.shape
    }

    pub fn name(&self) -> &str {
        self.shape.name()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Closed-form or quadrature value of `π ⟨g²⟩`.
    pub fn mean_rate(&self) -> f64 {
        PI * self.shape.mean_square()
    }

    pub fn is_smooth(&self) -> bool {
        self.shape.is_smooth()
    }

    pub fn scale(&self) -> f64 {
        self.shape.scale()
    }

    fn phase(&self, t: f64) -> f64 {
        reduce_to_period(self.omega * t, 2.0 * PI)
    }

    /// `g(t)`.
    pub fn sample(&self, t: f64) -> f64 {
        self.shape.value(self.phase(t))
    }

    pub fn sample_limit(&self, t: f64, from_above: bool) -> f64 {
        self.shape.limit(self.phase(t), from_above)
    }

    /// `dg/dt`.
    pub fn derivative(&self, t: f64) -> f64 {
        self.omega * self.shape.phase_derivative(self.phase(t))
    }

    /// Instantaneous decay rate `Γ(t) = π g²(t)`.
    pub fn rate(&self, t: f64) -> f64 {
        PI * self.sample(t).powi(2)
    }

    /// Jump times inside `(-T/2, T/2)`, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.shape.breakpoints().into_iter().map(|p| p / self.omega).collect()
    }

    /// Jump times inside `(a, b)` for an arbitrary window, sorted.
    pub fn breakpoints_between(&self, a: f64, b: f64) -> Vec<f64> {
        let period = self.period();
        let base = self.breakpoints();
        if base.is_empty() || b <= a {
            return Vec::new();
        }
        let k0 = ((a + 0.5 * period) / period).floor() as i64 - 1;
        let k1 = ((b + 0.5 * period) / period).ceil() as i64 + 1;
        let mut out = Vec::new();
        for k in k0..=k1 {
            for &t in &base {
                let x = t + k as f64 * period;
                if x > a && x < b {
                    out.push(x);
                }
            }
        }
        out
    }

    /// `g(t) ≈ 0` relative to the waveform scale.
    pub fn vanishes_at(&self, t: f64) -> bool {
        self.sample(t).abs() <= 1e-12 * self.scale()
    }

    /// Fourier coefficients `g⁽ᵐ⁾`, `m = -M..M`, from a DFT on at least `8M` samples.
    pub fn harmonics(&self, max_order: usize) -> Result<HarmonicSpectrum> {
        if max_order < 1 {
            return Err(Error::config("harmonic order must be at least 1"));
        }
        let n = (8 * max_order).max(64).next_power_of_two();
        let period = self.period();
        let samples: Vec<C64> = (0..n)
            .map(|j| C64::new(self.sample(-0.5 * period + period * j as f64 / n as f64), 0.0))
            .collect();
        let c = fourier_coefficients(&samples);
        let at = |m: i64| c[m.rem_euclid(n as i64) as usize];
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * max_order + 1];
        coeffs[max_order] = C64::new(at(0).re, 0.0);
        for m in 1..=max_order as i64 {
            let sym = 0.5 * (at(m) + at(-m).conj());
            coeffs[max_order + m as usize] = sym;
            coeffs[max_order - m as usize] = sym.conj();
        }
        Ok(HarmonicSpectrum { max_order, omega: self.omega, coeffs })
    }

    /// `|ġ/g| / sqrt(δ² + Γ²)`; infinite where the coupling vanishes.
    pub fn adiabaticity_margin(&self, delta: f64, t: f64) -> f64 {
        if self.vanishes_at(t) {
            return f64::INFINITY;
        }
        let g = self.sample(t);
        let gamma = PI * g * g;
        (self.derivative(t) / g).abs() / (delta * delta + gamma * gamma).sqrt()
    }

    /// Largest [`adiabaticity_margin`](Self::adiabaticity_margin) over the
    /// memory window `[s, t]` with `∫_s^t Γ = depth`. Infinite if the window
    /// contains a discontinuity or a zero of `g`, or exceeds 64 periods.
    pub fn history_margin(&self, delta: f64, t: f64, depth: f64) -> f64 {
        let h = self.period() / 1024.0;
        let mut margin = self.adiabaticity_margin(delta, t);
        let (mut s, mut acc) = (t, 0.0);
        for _ in 0..64 * 1024 {
            if acc >= depth || !margin.is_finite() {
                return margin;
            }
            let next = s - h;
            if !self.breakpoints_between(next, s).is_empty() {
                return f64::INFINITY;
            }
            acc += 0.5 * h * (self.rate(s) + self.rate(next));
            s = next;
            margin = margin.max(self.adiabaticity_margin(delta, s));
        }
        if acc >= depth { margin } else { f64::INFINITY }
    }

    pub fn rate_kernel(&self, n_grid: usize) -> Result<RateKernel> {
        RateKernel::new(self.clone(), n_grid)
    }
}

/// Truncated harmonic expansion `g(t) = Σ_{m=-M}^{M} g⁽ᵐ⁾ e^{-i m Ω t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum {
    max_order: usize,
    omega: f64,
    coeffs: Vec<C64>,
}

impl HarmonicSpectrum {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn coefficient(&self, m: i64) -> C64 {
        let idx = m + self.max_order as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[idx as usize]
    }

    /// Largest violation of `g⁽⁻ᵐ⁾ = conj(g⁽ᵐ⁾)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..=self.max_order as i64)
            .map(|m| (self.coefficient(-m) - self.coefficient(m).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn resynthesize(&self, t: f64) -> f64 {
        let m0 = self.max_order as i64;
        (-m0..=m0)
            .map(|m| self.coefficient(m) * C64::from_polar(1.0, -(m as f64) * self.omega * t))
            .sum::<C64>()
            .re
    }
}

#[cfg(test)]
mod tests {
    use super::shapes::*;
    use super::*;

    fn proto(shape: impl CouplingShape + 'static, omega: f64) -> CouplingProtocol {
        CouplingProtocol::new(Arc::new(shape), omega).unwrap()
    }

    #[test]
    fn sample_examples() {
        assert_eq!(proto(OnOffCosine { g0: 1.0 }, 1.0).sample(0.0), 2.0);
        assert!(proto(SignChangeCosine { g0: 1.0 }, 1.0).sample(0.5 * PI).abs() < 1e-15);
        let rect = proto(Rectangular::on_off(1.0, 0.2, 0.5).unwrap(), 1.0);
        assert_eq!(rect.sample(0.9 * PI), 0.2);
        assert_eq!(rect.sample(0.0), 1.0);
        assert_eq!(proto(Constant { g0: 0.7 }, 3.0).sample(123.4), 0.7);
    }

    #[test]
    fn invalid_omega_is_a_config_error() {
        for w in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                CouplingProtocol::new(Arc::new(Constant { g0: 1.0 }), w),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn beta_fixes_the_drive_frequency() {
        let p = CouplingProtocol::with_beta(Arc::new(OnOffCosine { g0: 1.0 }), 2.0).unwrap();
        assert!((p.omega() - 2.0 * 1.5 * PI).abs() < 1e-14);
        let zero = CouplingProtocol::with_beta(Arc::new(Constant { g0: 0.0 }), 1.0);
        assert!(matches!(zero, Err(Error::DegenerateKernel { .. })));
    }

    #[test]
    fn periodic_sampling() {
        let shapes: Vec<Arc<dyn CouplingShape>> = vec![
            Arc::new(OnOffCosine { g0: 0.8 }),
            Arc::new(SignChangeCosine { g0: 1.3 }),
            Arc::new(Rectangular::on_off(1.0, 0.2, 0.3).unwrap()),
            Arc::new(Rectangular::sign_change(1.0, 0.5).unwrap()),
        ];
        for s in shapes {
            let p = CouplingProtocol::new(s, 1.7).unwrap();
            for k in 0..40 {
                let t = -2.0 + 0.11 * k as f64;
                assert!((p.sample(t) - p.sample(t + 3.0 * p.period())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonics_of_cosines() {
        let on_off = proto(OnOffCosine { g0: 1.0 }, 1.0).harmonics(4).unwrap();
        assert!((on_off.coefficient(0) - 1.0).norm() < 1e-14);
        assert!((on_off.coefficient(1) - 0.5).norm() < 1e-14);
        assert!((on_off.coefficient(-1) - 0.5).norm() < 1e-14);
        assert!((2..=4).all(|m| on_off.coefficient(m).norm() < 1e-14));

        let sign = proto(SignChangeCosine { g0: 1.0 }, 2.5).harmonics(3).unwrap();
        assert!(sign.coefficient(0).norm() < 1e-14);
        assert!((sign.coefficient(1) - 0.5).norm() < 1e-14);

        let c = proto(Constant { g0: 0.7 }, 1.0).harmonics(5).unwrap();
        assert!((c.coefficient(0) - 0.7).norm() < 1e-15);
        assert!((1..=5).all(|m| c.coefficient(m).norm() < 1e-15));
        assert!(proto(Constant { g0: 0.7 }, 1.0).harmonics(0).is_err());
    }

    #[test]
    fn resynthesis_matches_sampling_for_smooth_kinds() {
        let shapes: Vec<Arc<dyn CouplingShape>> = vec![
            Arc::new(Constant { g0: 0.4 }),
            Arc::new(OnOffCosine { g0: 1.0 }),
            Arc::new(SignChangeCosine { g0: 0.6 }),
            Arc::new(Sampled::new("smooth", |p: f64| 0.5 + 0.3 * (p.sin()).exp()).unwrap()),
        ];
        for s in shapes {
            let p = CouplingProtocol::new(s, 0.9).unwrap();
            let spec = p.harmonics(32).unwrap();
            assert!(spec.hermitian_defect() == 0.0);
            for i in 0..1024 {
                let t = -0.5 * p.period() + p.period() * i as f64 / 1024.0;
                assert!((spec.resynthesize(t) - p.sample(t)).abs() < 1e-10, "{}", p.name());
            }
        }
    }

    #[test]
    fn adiabaticity_margin_cases() {
        let c = proto(Constant { g0: 1.0 }, 1.0);
        assert_eq!(c.adiabaticity_margin(0.3, 1.2), 0.0);
        let on_off = CouplingProtocol::with_beta(Arc::new(OnOffCosine { g0: 1.0 }), 0.1).unwrap();
        assert_eq!(on_off.adiabaticity_margin(0.0, 0.0), 0.0);
        let sign = proto(SignChangeCosine { g0: 1.0 }, 1.0);
        let near = [0.4, 0.1, 0.01, 0.001].map(|e| sign.adiabaticity_margin(0.0, 0.5 * PI - e));
        assert!(near.windows(2).all(|w| w[1] > w[0]));
        assert!(near[3] > 1e6);
        assert_eq!(on_off.adiabaticity_margin(0.0, 0.5 * on_off.period()), f64::INFINITY);
    }

    #[test]
    fn history_margin_looks_back() {
        let c = proto(Constant { g0: 1.0 }, 1.0);
        assert_eq!(c.history_margin(0.0, 0.3, 5.0), 0.0);
        let on_off = CouplingProtocol::with_beta(Arc::new(OnOffCosine { g0: 1.0 }), 0.1).unwrap();
        let t = -0.05 * on_off.period();
        let h = on_off.history_margin(0.0, t, 5.0);
        assert!(h > on_off.adiabaticity_margin(0.0, t) && h < 0.05);
        // fast drive: the window reaches back past the quench
        let fast = CouplingProtocol::with_beta(Arc::new(OnOffCosine { g0: 1.0 }), 10.0).unwrap();
        assert_eq!(fast.history_margin(0.0, 0.0, 5.0), f64::INFINITY);
        let rect = proto(Rectangular::on_off(1.0, 0.2, 0.5).unwrap(), 0.01);
        let edge = 0.5 * PI / rect.omega();
        assert_eq!(rect.history_margin(0.0, edge + 0.01, 5.0), f64::INFINITY);
        assert_eq!(rect.history_margin(0.0, edge - 0.2 * edge, 5.0), 0.0);
    }

    #[test]
    fn breakpoints_between_windows() {
        let p = proto(Rectangular::on_off(1.0, 0.2, 0.5).unwrap(), 1.0);
        assert_eq!(p.breakpoints(), vec![-0.5 * PI, 0.5 * PI]);
        let b = p.breakpoints_between(-3.0 * PI, PI);
        assert_eq!(b.len(), 4);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rect_mean_rate_is_closed_form() {
        let r = Rectangular::on_off(1.0, 0.2, 0.5).unwrap();
        let numeric = {
            let breaks = r.breakpoints();
            let h = 2.0 * PI / 64.0;
            (0..64)
                .map(|c| {
                    let a = -PI + c as f64 * h;
                    gauss_legendre_split(a, a + h, &breaks, |p| C64::new(r.value(p).powi(2), 0.0)).re
                })
                .sum::<f64>()
                / (2.0 * PI)
        };
        assert!((numeric - r.mean_square()).abs() < 1e-14);
    }
}
