//! Single-photon envelope `A(τc)`, with transmission `t = 1 + A` and
//! reflection `r = A`.
//!
//! The envelope is `A(t) = -π g(t) P(t)` where `P(t) = e^{-f1(t)} W(t)` and
//! `W(t) = ∫_{-∞}^t e^{f1(s)} g(s) ds`. `P` is periodic and obeys
//! `Ṗ = (iδ - Γ(t)) P + g(t)`, so it is propagated cell by cell with an exact
//! decay factor and Gauss-Legendre sources. The history before the first cell
//! is a geometric series with ratio `e^{i(δ + iΓ⁽⁰⁾)T}`. No exponent with a
//! large real part is ever formed.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::protocol::{CouplingProtocol, RateKernel};
use crate::quadrature::{gauss_legendre_split, geometric_tail, PeriodGrid, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Physical inputs of a scattering run.
#[derive(Debug, Clone)]
pub struct ScatterParams {
    /// Detuning `δ = ω0 - ωc`.
    pub delta: f64,
    /// Kerr nonlinearity.
    pub u: f64,
    kernel: Arc<RateKernel>,
}

impl ScatterParams {
    pub fn new(kernel: RateKernel, delta: f64, u: f64) -> Result<Self> {
        if !(delta.is_finite() && u.is_finite()) {
            return Err(Error::config("detuning and nonlinearity must be finite"));
        }
        Ok(Self { delta, u, kernel: Arc::new(kernel) })
    }

    pub fn from_protocol(protocol: CouplingProtocol, delta: f64, u: f64, n_grid: usize) -> Result<Self> {
        Self::new(protocol.rate_kernel(n_grid)?, delta, u)
    }

    /// Same kernel, different detuning or nonlinearity.
    pub fn with_inputs(&self, delta: f64, u: f64) -> Self {
        Self { delta, u, kernel: Arc::clone(&self.kernel) }
    }

    pub fn kernel(&self) -> &RateKernel {
        &self.kernel
    }

    pub fn protocol(&self) -> &CouplingProtocol {
        self.kernel.protocol()
    }

    pub fn gamma0(&self) -> f64 {
        self.kernel.gamma0()
    }

    pub fn period(&self) -> f64 {
        self.kernel.period()
    }

    /// `z = δ + iΓ⁽⁰⁾`.
    pub fn z(&self) -> C64 {
        C64::new(self.delta, self.kernel.gamma0())
    }

    pub fn g(&self, t: f64) -> f64 {
        self.protocol().sample(t)
    }

    /// `f1(t) = -i(δ + iΓ⁽⁰⁾) t + f_osc(t)`.
    pub fn f1(&self, t: f64) -> C64 {
        -I * self.z() * t + self.kernel.fosc(t)
    }

    /// `f1(a) - f1(b)` without forming either term.
    pub fn f1_diff(&self, a: f64, b: f64) -> C64 {
        -I * self.z() * (a - b) + (self.kernel.fosc(a) - self.kernel.fosc(b))
    }
}

/// `f1(t)`.
pub fn f1_eval(params: &ScatterParams, t: f64) -> C64 {
    params.f1(t)
}

/// The periodic product `P(t) = e^{-f1(t)} W(t)` tabulated on one period.
#[derive(Debug, Clone)]
pub struct PeriodicAmplitude {
    params: ScatterParams,
    grid: PeriodGrid,
    breaks: Vec<f64>,
    /// `n + 1` values; the last one is the propagated value at `T/2`.
    nodes: Vec<C64>,
}

impl PeriodicAmplitude {
    pub fn solve(params: &ScatterParams, grid: PeriodGrid) -> Result<Self> {
        if (grid.period() - params.period()).abs() > 1e-12 * params.period() {
            return Err(Error::config("grid period differs from the drive period"));
        }
        let breaks = params.protocol().breakpoints();
        let mut s = Self { params: params.clone(), grid, breaks, nodes: Vec::new() };

        let n = grid.len();
        let mut zero_start = Vec::with_capacity(n + 1);
        zero_start.push(C64::new(0.0, 0.0));
        for i in 0..n {
            let next = s.step(grid.node(i), grid.node(i + 1), zero_start[i]);
            zero_start.push(next);
        }
        let one_period = zero_start[n];
        let ratio = (I * params.z() * grid.period()).exp();
        let start = one_period + geometric_tail(one_period, ratio)?;

        let t0 = grid.node(0);
        s.nodes = (0..=n)
            .map(|i| (params.f1_diff(t0, grid.node(i))).exp() * start + zero_start[i])
            .collect();
        Ok(s)
    }

    /// Propagates `P` from `a` to `b` (both inside the base period, `a <= b`).
    pub(crate) fn step(&self, a: f64, b: f64, pa: C64) -> C64 {
        let p = &self.params;
        let source = gauss_legendre_split(a, b, &self.breaks, |s| p.f1_diff(s, b).exp() * p.g(s));
        p.f1_diff(a, b).exp() * pa + source
    }

    pub fn params(&self) -> &ScatterParams {
        &self.params
    }

    pub fn grid(&self) -> &PeriodGrid {
        &self.grid
    }

    /// `P` on the grid nodes plus the closing value at `T/2`.
    pub fn node_values(&self) -> &[C64] {
        &self.nodes
    }

    /// `P(t)` at an arbitrary time.
    pub fn p_at(&self, t: f64) -> C64 {
        let (i, tr) = self.grid.locate(t);
        self.step(self.grid.node(i), tr, self.nodes[i])
    }

    /// `A(t) = -π g(t) P(t)`.
    pub fn amplitude(&self, t: f64) -> C64 {
        -PI * self.params.g(t) * self.p_at(t)
    }

    /// `W(t) = e^{f1(t)} P(t)`; overflows when `Γ⁽⁰⁾ |t|` is of order 700.
    pub fn w_at(&self, t: f64) -> C64 {
        self.params.f1(t).exp() * self.p_at(t)
    }

    pub fn envelope_grid(&self) -> EnvelopeGrid {
        let n = self.grid.len();
        let proto = self.params.protocol();
        let h = self.grid.spacing();
        let tau_c = self.grid.nodes();
        let a: Vec<C64> = (0..n).map(|i| -PI * proto.sample(tau_c[i]) * self.nodes[i]).collect();
        let mut jumps = Vec::new();
        for &b in &self.breaks {
            let k = ((b - self.grid.start()) / h).round() as usize;
            if k < n && (self.grid.node(k) - b).abs() < 1e-9 * h {
                let below = -PI * proto.sample_limit(b, false) * self.nodes[k];
                let above = -PI * proto.sample_limit(b, true) * self.nodes[k];
                jumps.push(Jump { index: k, below, above });
            }
        }
        let closing = -PI * proto.sample(self.grid.node(n)) * self.nodes[n];
        EnvelopeGrid { period: self.grid.period(), tau_c, a, jumps, closing }
    }
}

/// One-sided envelope values at a node where the coupling jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub index: usize,
    pub below: C64,
    pub above: C64,
}

/// Sampled envelope over one period `[-T/2, T/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeGrid {
    period: f64,
    tau_c: Vec<f64>,
    a: Vec<C64>,
    jumps: Vec<Jump>,
    closing: C64,
}

impl EnvelopeGrid {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn tau_c(&self) -> &[f64] {
        &self.tau_c
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Reflection amplitudes `r = A`.
    pub fn r_amp(&self) -> &[C64] {
        &self.a
    }

    /// Transmission amplitudes `t = 1 + A`.
    pub fn t_amp(&self) -> Vec<C64> {
        self.a.iter().map(|a| 1.0 + a).collect()
    }

    /// `|A(-T/2) - A(T/2)|` with the right end propagated through the whole period.
    pub fn wraparound_residual(&self) -> f64 {
        (self.closing - self.a[0]).norm()
    }

    /// Trapezoid mean of `φ(A)`; at jump nodes the two one-sided values are averaged.
    fn period_mean(&self, phi: impl Fn(C64) -> f64) -> f64 {
        let mut values: Vec<f64> = self.a.iter().map(|&a| phi(a)).collect();
        for j in &self.jumps {
            values[j.index] = 0.5 * (phi(j.below) + phi(j.above));
        }
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// `|(1/T) ∫ (|t|² + |r|²) dτc - 1|`.
pub fn normalization_residual(env: &EnvelopeGrid) -> f64 {
    (env.period_mean(|a| (1.0 + a).norm_sqr() + a.norm_sqr()) - 1.0).abs()
}

/// `|(1/T) (∫ |A|² + Re ∫ A)|`, the photon-number identity in terms of `A` alone.
pub fn identity_residual(env: &EnvelopeGrid) -> f64 {
    env.period_mean(|a| a.norm_sqr() + a.re).abs()
}

/// `W(t_i)` on every node of `grid`.
pub fn w_period(params: &ScatterParams, grid: PeriodGrid) -> Result<Vec<C64>> {
    let amp = PeriodicAmplitude::solve(params, grid)?;
    Ok((0..grid.len())
        .map(|i| params.f1(grid.node(i)).exp() * amp.nodes[i])
        .collect())
}

pub fn envelope(params: &ScatterParams, grid: PeriodGrid) -> Result<EnvelopeGrid> {
    Ok(PeriodicAmplitude::solve(params, grid)?.envelope_grid())
}

/// Instantaneous amplitude with its first adiabatic correction,
/// `-iΓ/(δ + iΓ) [1 - i (ġ/g) (δ - iΓ)/(δ + iΓ)²]`.
pub fn adiabatic_envelope(params: &ScatterParams, tau_c: f64) -> Result<C64> {
    let proto = params.protocol();
    if proto.vanishes_at(tau_c) {
        return Err(Error::UndefinedApproximation { t: tau_c });
    }
    let g = proto.sample(tau_c);
    let gamma = PI * g * g;
    let w = C64::new(params.delta, gamma);
    let w_conj = C64::new(params.delta, -gamma);
    let correction = I * (proto.derivative(tau_c) / g) * w_conj / (w * w);
    Ok(-I * gamma / w * (1.0 - correction))
}

/// Equal-time first-order coherences `(g¹_r, g¹_l) = (|α|²/L)(|t|², |r|²)`.
pub fn g1_coherences(env: &EnvelopeGrid, alpha: C64, length: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(length > 0.0) {
        return Err(Error::config(format!("pulse length must be positive, got {length}")));
    }
    let density = alpha.norm_sqr() / length;
    let right = env.a.iter().map(|a| density * (1.0 + a).norm_sqr()).collect();
    let left = env.a.iter().map(|a| density * a.norm_sqr()).collect();
    Ok((right, left))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::shapes::{Constant, OnOffCosine, Rectangular, SignChangeCosine};
    use crate::protocol::CouplingShape;

    fn params(shape: impl CouplingShape + 'static, beta: f64, delta_rel: f64, n: usize) -> ScatterParams {
        let p = CouplingProtocol::with_beta(Arc::new(shape), beta).unwrap();
        let k = p.rate_kernel(n).unwrap();
        let g0 = k.gamma0();
        ScatterParams::new(k, delta_rel * g0, 0.0).unwrap()
    }

    fn grid(p: &ScatterParams, n: usize) -> PeriodGrid {
        PeriodGrid::new(n, p.period()).unwrap()
    }

    #[test]
    fn f1_for_constant_coupling_is_linear() {
        let p = params(Constant { g0: 1.0 }, 1.0, 0.0, 64);
        for t in [-1.0, 0.0, 0.3, 2.5] {
            assert!((f1_eval(&p, t) - C64::new(p.gamma0() * t, 0.0)).norm() < 1e-13);
        }
        let q = params(OnOffCosine { g0: 1.0 }, 1.0, 0.4, 64);
        assert!(f1_eval(&q, 0.0).norm() < 1e-14);
    }

    #[test]
    fn f1_on_off_matches_symbolic_phase() {
        let proto = CouplingProtocol::new(Arc::new(OnOffCosine { g0: 1.0 }), 1.0).unwrap();
        let p = ScatterParams::from_protocol(proto, 0.0, 0.0, 256).unwrap();
        let t = 0.5 * PI;
        let expect = 1.5 * PI * t + PI * (2.0 * t.sin() + 0.25 * (2.0 * t).sin());
        assert!((f1_eval(&p, t) - expect).norm() < 1e-12);
    }

    #[test]
    fn constant_w_is_a_pure_exponential() {
        let p = params(Constant { g0: 0.8 }, 2.0, 0.0, 64);
        let gamma = PI * 0.64;
        let w = w_period(&p, grid(&p, 128)).unwrap();
        for (i, wi) in w.iter().enumerate() {
            let t = grid(&p, 128).node(i);
            let exact = 0.8 * (gamma * t).exp() / gamma;
            assert!((wi - exact).norm() < 1e-12 * exact, "i = {i}");
        }
    }

    #[test]
    fn constant_coupling_envelope_is_closed_form() {
        for delta_rel in [0.0, 1.0, -2.5] {
            let p = params(Constant { g0: 1.0 }, 1.0, delta_rel, 64);
            let env = envelope(&p, grid(&p, 256)).unwrap();
            let z = p.z();
            let exact = -I * p.gamma0() / z;
            assert!(env.a().iter().all(|a| (a - exact).norm() < 1e-12));
            assert!(normalization_residual(&env) < 1e-12);
        }
        let p = params(Constant { g0: 1.0 }, 1.0, 1.0, 64);
        let env = envelope(&p, grid(&p, 64)).unwrap();
        assert!((env.a()[5] - C64::new(-0.5, -0.5)).norm() < 1e-12);
        assert!((env.a()[5].norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn on_off_is_transparent_at_the_quench() {
        let p = params(OnOffCosine { g0: 1.0 }, 1.0, 0.0, 2048);
        let env = envelope(&p, grid(&p, 2048)).unwrap();
        assert!(env.a()[0].norm() < 1e-14);
        let amp = PeriodicAmplitude::solve(&p, grid(&p, 2048)).unwrap();
        assert!(amp.amplitude(0.5 * p.period()).norm() < 1e-14);
    }

    #[test]
    fn envelope_is_periodic() {
        for beta in [0.1, 1.0, 10.0] {
            let p = params(SignChangeCosine { g0: 1.0 }, beta, 0.5, 1024);
            let env = envelope(&p, grid(&p, 1024)).unwrap();
            assert!(env.wraparound_residual() < 1e-10, "beta {beta}");
            let amp = PeriodicAmplitude::solve(&p, grid(&p, 1024)).unwrap();
            for t in [-0.3, 0.11, 1.7] {
                let shifted = amp.amplitude(t + 3.0 * p.period());
                assert!((shifted - amp.amplitude(t)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn off_node_evaluation_agrees_with_a_finer_grid() {
        let p = params(OnOffCosine { g0: 1.0 }, 1.0, 0.3, 2048);
        let coarse = PeriodicAmplitude::solve(&p, grid(&p, 64)).unwrap();
        let fine = PeriodicAmplitude::solve(&p, grid(&p, 4096)).unwrap();
        for k in 0..37 {
            let t = -0.49 * p.period() + 0.0271 * p.period() * k as f64;
            assert!((coarse.amplitude(t) - fine.amplitude(t)).norm() < 1e-11);
        }
    }

    #[test]
    fn normalization_on_smooth_and_rect_protocols() {
        let p = params(OnOffCosine { g0: 1.0 }, 1.0, 0.0, 2048);
        let env = envelope(&p, grid(&p, 2048)).unwrap();
        assert!(normalization_residual(&env) < 1e-8);
        assert!(identity_residual(&env) < 1e-8);

        let r = params(Rectangular::sign_change(1.0, 0.5).unwrap(), 3.0, 0.0, 4096);
        let env = envelope(&r, grid(&r, 4096)).unwrap();
        assert_eq!(env.jumps().len(), 2);
        assert!(normalization_residual(&env) < 1e-6);
    }

    #[test]
    fn adiabatic_envelope_cases() {
        let p = params(Constant { g0: 1.0 }, 1.0, 0.0, 64);
        assert!((adiabatic_envelope(&p, 0.3).unwrap() + 1.0).norm() < 1e-15);
        let q = params(Constant { g0: 1.0 }, 1.0, 1.0, 64);
        assert!((adiabatic_envelope(&q, 0.3).unwrap() - C64::new(-0.5, -0.5)).norm() < 1e-15);

        let slow = params(OnOffCosine { g0: 1.0 }, 0.1, 0.0, 2048);
        let full = PeriodicAmplitude::solve(&slow, grid(&slow, 2048)).unwrap().amplitude(0.0);
        let adiabatic = adiabatic_envelope(&slow, 0.0).unwrap();
        assert!((full - adiabatic).norm() < 0.02 * adiabatic.norm());

        let quench = slow.period() / 2.0;
        assert!(matches!(
            adiabatic_envelope(&slow, quench),
            Err(Error::UndefinedApproximation { .. })
        ));
    }

    #[test]
    fn g1_cases() {
        let p = params(Constant { g0: 1.0 }, 1.0, 0.0, 64);
        let env = envelope(&p, grid(&p, 64)).unwrap();
        let (r0, l0) = g1_coherences(&env, C64::new(0.0, 0.0), 1.0).unwrap();
        assert!(r0.iter().chain(l0.iter()).all(|v| *v == 0.0));
        let (r1, l1) = g1_coherences(&env, C64::new(0.6, 0.8), 1.0).unwrap();
        assert!(r1.iter().all(|v| v.abs() < 1e-24));
        assert!(l1.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(g1_coherences(&env, C64::new(1.0, 0.0), 0.0).is_err());
    }
}
