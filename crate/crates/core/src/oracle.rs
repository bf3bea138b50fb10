//! Brute-force reference evaluators. They integrate the defining time
//! integrals directly over a truncated history with the composite trapezoid
//! rule and use nothing from the production path except protocol sampling.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::protocol::CouplingProtocol;
use crate::quadrature::C64;
use crate::single_photon::ScatterParams;

const I: C64 = C64::new(0.0, 1.0);

/// Default ceiling on `steps_per_period² · n_periods` for [`brute_bbar`].
pub const DEFAULT_BBAR_BUDGET: u64 = 1 << 42;

/// History window and resolution of a brute-force evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub n_periods: usize,
    pub steps_per_period: usize,
}

impl TruncationSpec {
    pub fn new(n_periods: usize, steps_per_period: usize) -> Result<Self> {
        if n_periods < 1 {
            return Err(Error::config("n_periods must be at least 1"));
        }
        if steps_per_period < 256 {
            return Err(Error::config(format!(
                "steps_per_period must be at least 256, got {steps_per_period}"
            )));
        }
        Ok(Self { n_periods, steps_per_period })
    }

    /// Smallest window with `Γ⁽⁰⁾ · window ≥ 30`.
    pub fn for_window(gamma0: f64, period: f64, steps_per_period: usize) -> Result<Self> {
        let n = (30.0 / (gamma0 * period)).ceil().max(1.0);
        if !n.is_finite() || n > 1e7 {
            return Err(Error::DegenerateKernel { gamma0 });
        }
        Self::new(n as usize, steps_per_period)
    }

    pub fn envelope_default(params: &ScatterParams) -> Result<Self> {
        Self::for_window(params.gamma0(), params.period(), 1024)
    }

    pub fn bbar_default(params: &ScatterParams) -> Result<Self> {
        Self::for_window(params.gamma0(), params.period(), 512)
    }

    /// Window and resolution aiming at an absolute error of about `tol` for
    /// [`brute_envelope`]: the truncation bound is kept below `tol/10` and
    /// the step below `√(12 tol)/ν`, with rate scale
    /// `ν = πg²_max + |δ| + |U| + 2Ω`.
    pub fn for_tolerance(params: &ScatterParams, tol: f64) -> Result<Self> {
        Self::tolerance_spec(params, tol, false)
    }

    /// As [`TruncationSpec::for_tolerance`] for [`brute_bbar`].
    pub fn bbar_for_tolerance(params: &ScatterParams, tol: f64) -> Result<Self> {
        Self::tolerance_spec(params, tol, true)
    }

    fn tolerance_spec(params: &ScatterParams, tol: f64, two_photon: bool) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::config(format!("tolerance must be positive, got {tol}")));
        }
        let protocol = params.protocol();
        let period = protocol.period();
        let path = Path::new(protocol, -0.5 * period, 0.5 * period, period / 1024.0);
        let lam = path.exponent(0.0, C64::new(0.0, 0.0));
        let stats = history_stats(&path, &lam, period);
        if !(stats.gamma0 > 0.0) {
            return Err(Error::DegenerateKernel { gamma0: stats.gamma0 });
        }
        let k = stats.prefactor();
        let k = if two_photon { k * k * (1.0 + 2.0 * stats.spread.exp()) } else { k };
        let decay = (k * 10.0 / tol).ln().max(30.0);
        let n_periods = (decay / (stats.gamma0 * period)).ceil().max(1.0) as usize;

        let nu = PI * stats.g_max * stats.g_max + params.delta.abs() + params.u.abs() + 2.0 * protocol.omega();
        let h = (12.0 * tol).sqrt() / nu;
        let steps = ((period / h).ceil() as usize).next_power_of_two().max(256);
        Self::new(n_periods, steps)
    }

    pub fn window(&self, period: f64) -> f64 {
        self.n_periods as f64 * period
    }

    pub fn cost(&self) -> u64 {
        (self.steps_per_period as u64).pow(2) * self.n_periods as u64
    }
}

/// Value with an upper bound on the error caused by truncating the history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: C64,
    pub truncation_bound: f64,
}

/// Trapezoid nodes along `[a, b]`, split at the coupling discontinuities.
/// `right[k]` is `g(t_k⁺)`, `left[k]` is `g(t_k⁻)`.
struct Path {
    t: Vec<f64>,
    right: Vec<f64>,
    left: Vec<f64>,
}

impl Path {
    fn new(protocol: &CouplingProtocol, a: f64, b: f64, step: f64) -> Self {
        let mut edges = vec![a];
        edges.extend(protocol.breakpoints_between(a, b).into_iter().filter(|&x| x > a && x < b));
        edges.push(b);
        let mut path = Path { t: vec![a], right: Vec::new(), left: vec![f64::NAN] };
        path.right.push(protocol.sample_limit(a, true));
        for w in edges.windows(2) {
            let (s, e) = (w[0], w[1]);
            let cells = ((e - s) / step).ceil().max(1.0) as usize;
            for k in 1..=cells {
                let t = if k == cells { e } else { s + (e - s) * k as f64 / cells as f64 };
                path.t.push(t);
                if k == cells {
                    path.left.push(protocol.sample_limit(t, false));
                    path.right.push(protocol.sample_limit(t, true));
                } else {
                    let g = protocol.sample(t);
                    path.left.push(g);
                    path.right.push(g);
                }
            }
        }
        path
    }

    fn len(&self) -> usize {
        self.t.len()
    }

    fn h(&self, k: usize) -> f64 {
        self.t[k + 1] - self.t[k]
    }

    /// `Λ(t_k) = ∫_{t_0}^{t_k} (π g² - iδ)`, continuing from `start`.
    fn exponent(&self, delta: f64, start: C64) -> Vec<C64> {
        let mut lam = Vec::with_capacity(self.len());
        lam.push(start);
        for k in 0..self.len() - 1 {
            let gl = self.right[k];
            let gr = self.left[k + 1];
            let rate = 0.5 * PI * (gl * gl + gr * gr);
            lam.push(lam[k] + C64::new(rate, -delta) * self.h(k));
        }
        lam
    }

    /// `∫ e^{Λ(t) - reference} g(t) dt` over the whole path.
    fn weighted_integral(&self, lam: &[C64], reference: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.len() - 1 {
            let fa = (lam[k] - reference).exp() * self.right[k];
            let fb = (lam[k + 1] - reference).exp() * self.left[k + 1];
            acc += 0.5 * self.h(k) * (fa + fb);
        }
        acc
    }
}

/// Spread of `∫ (π g² - Γ⁽⁰⁾)` and the peak coupling along a whole number of periods.
struct HistoryStats {
    gamma0: f64,
    spread: f64,
    g_max: f64,
}

fn history_stats(path: &Path, lam: &[C64], window: f64) -> HistoryStats {
    let t0 = path.t[0];
    let gamma0 = (lam[lam.len() - 1] - lam[0]).re / window;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, l) in path.t.iter().zip(lam) {
        let dev = l.re - gamma0 * (t - t0);
        lo = lo.min(dev);
        hi = hi.max(dev);
    }
    let g_max = path.right.iter().chain(&path.left[1..]).fold(0.0f64, |m, g| m.max(g.abs()));
    HistoryStats { gamma0, spread: hi - lo, g_max }
}

impl HistoryStats {
    /// Prefactor `K` with `|A_truncated - A| ≤ K e^{-Γ⁽⁰⁾ W}`.
    fn prefactor(&self) -> f64 {
        PI * self.g_max * self.g_max * self.spread.exp() / self.gamma0
    }
}

/// `A(τc) = -π g(τc) ∫_{-∞}^{τc} e^{f1(t) - f1(τc)} g(t) dt`, truncated.
pub fn brute_envelope(params: &ScatterParams, tau_c: f64, spec: TruncationSpec) -> Result<OracleValue> {
    let protocol = params.protocol();
    let period = protocol.period();
    let window = spec.window(period);
    let path = Path::new(protocol, tau_c - window, tau_c, period / spec.steps_per_period as f64);
    let lam = path.exponent(params.delta, C64::new(0.0, 0.0));
    let stats = history_stats(&path, &lam, window);
    if !(stats.gamma0 > 0.0) {
        return Err(Error::DegenerateKernel { gamma0: stats.gamma0 });
    }
    let e = path.weighted_integral(&lam, lam[lam.len() - 1]);
    Ok(OracleValue {
        value: -PI * protocol.sample(tau_c) * e,
        truncation_bound: stats.prefactor() * (-stats.gamma0 * window).exp(),
    })
}

/// [`brute_bbar`] with the default cost budget.
pub fn brute_bbar(params: &ScatterParams, tau_c: f64, tau_d: f64, spec: TruncationSpec) -> Result<OracleValue> {
    brute_bbar_with_budget(params, tau_c, tau_d, spec, DEFAULT_BBAR_BUDGET)
}

/// `B̄(τc, τd)` from the time-ordered two-photon integral,
/// `π² g(τc + τd) g(τc) [S₁ + 2 S₂]`, with
/// `S₁ = ∫_{τc}^{τc+τd} e^{Λ(t₂) - Λ(τc+τd)} g(t₂) dt₂ · ∫_{-∞}^{τc} e^{Λ(t₄) - Λ(τc)} g(t₄) dt₄`
/// and
/// `S₂ = e^{Λ(τc) - Λ(τc+τd)} ∫_{-∞}^{τc} dt₂ e^{-iU(τc - t₂)} e^{Λ(t₂) - Λ(τc)} g(t₂)
///       ∫_{-∞}^{t₂} e^{Λ(t₄) - Λ(τc)} g(t₄) dt₄`,
/// where `Λ' = π g² - iδ`.
pub fn brute_bbar_with_budget(
    params: &ScatterParams,
    tau_c: f64,
    tau_d: f64,
    spec: TruncationSpec,
    budget: u64,
) -> Result<OracleValue> {
    if !(tau_d >= 0.0 && tau_d.is_finite()) {
        return Err(Error::config(format!("delay must be non-negative, got {tau_d}")));
    }
    if spec.cost() > budget {
        return Err(Error::CostBudget { cost: spec.cost(), budget });
    }
    let protocol = params.protocol();
    let period = protocol.period();
    let window = spec.window(period);
    let step = period / spec.steps_per_period as f64;
    let later = tau_c + tau_d;

    let past = Path::new(protocol, tau_c - window, tau_c, step);
    let lam = past.exponent(params.delta, C64::new(0.0, 0.0));
    let stats = history_stats(&past, &lam, window);
    if !(stats.gamma0 > 0.0) {
        return Err(Error::DegenerateKernel { gamma0: stats.gamma0 });
    }
    let lam_c = lam[lam.len() - 1];
    let past_integral = past.weighted_integral(&lam, lam_c);

    let (delay_integral, lam_d) = if tau_d > 0.0 {
        let gap = Path::new(protocol, tau_c, later, step);
        let lam2 = gap.exponent(params.delta, lam_c);
        let lam_d = lam2[lam2.len() - 1];
        (gap.weighted_integral(&lam2, lam_d), lam_d)
    } else {
        (C64::new(0.0, 0.0), lam_c)
    };
    let s1 = delay_integral * past_integral;

    // inner integral as a running trapezoid sum along the history
    let u = params.u;
    let weight = |k: usize, g: f64| (lam[k] - lam_c - I * u * (tau_c - past.t[k])).exp() * g;
    let inner = |k: usize, g: f64| (lam[k] - lam_c).exp() * g;
    let mut running = C64::new(0.0, 0.0);
    let mut outer = C64::new(0.0, 0.0);
    for k in 0..past.len() - 1 {
        let h = past.h(k);
        let before = running;
        running += 0.5 * h * (inner(k, past.right[k]) + inner(k + 1, past.left[k + 1]));
        outer += 0.5 * h * (weight(k, past.right[k]) * before + weight(k + 1, past.left[k + 1]) * running);
    }
    let s2 = (lam_c - lam_d).exp() * outer;

    let k = stats.prefactor();
    Ok(OracleValue {
        value: PI * PI * protocol.sample(later) * protocol.sample(tau_c) * (s1 + 2.0 * s2),
        truncation_bound: k * k * (1.0 + 2.0 * stats.spread.exp()) * (-stats.gamma0 * window).exp(),
    })
}
