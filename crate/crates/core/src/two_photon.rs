//! Two-photon observables: the inelastic kernel `B(τc, τd)`, the full
//! `B̄ = B + A(τc) A(τc + τd)` and the second-order coherences of the
//! transmitted (`rr`) and reflected (`ll`) light.
//!
//! `B` is evaluated through the periodic function
//! `Q(t) = ∫_{-∞}^t P²(s) e^{2(f1(s) - f1(t)) + iU(s - t)} ds`, so that
//! `B = -iU π² g(τc) g(τc + τd) e^{f1(τc) - f1(τc + τd)} Q(τc)`.
//! `Q` obeys `Q̇ = P² - (2 ḟ1 + iU) Q` and is propagated exactly like `P`,
//! with history ratio `e^{(2i(δ + iΓ⁽⁰⁾) - iU) T}`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_split, geometric_tail, PeriodGrid, C64};
use crate::single_photon::{PeriodicAmplitude, ScatterParams};

const I: C64 = C64::new(0.0, 1.0);

/// Relative threshold below which a `t` or `r` factor counts as a node.
pub const DENOMINATOR_EPS: f64 = 1e-6;

/// Absolute floor for the same test; catches factors that vanish identically.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Tabulated `P` and `Q` over one period; evaluates `B`, `B̄` and `g²` anywhere.
#[derive(Debug, Clone)]
pub struct TwoPhotonSolver {
    amp: PeriodicAmplitude,
    breaks: Vec<f64>,
    q_nodes: Vec<C64>,
}

impl TwoPhotonSolver {
    pub fn solve(params: &ScatterParams, grid: PeriodGrid) -> Result<Self> {
        let amp = PeriodicAmplitude::solve(params, grid)?;
        let breaks = params.protocol().breakpoints();
        let mut s = Self { amp, breaks, q_nodes: Vec::new() };

        let n = grid.len();
        let mut zero_start = Vec::with_capacity(n + 1);
        zero_start.push(C64::new(0.0, 0.0));
        for i in 0..n {
            let next = s.step(i, grid.node(i + 1), zero_start[i]);
            zero_start.push(next);
        }
        let one_period = zero_start[n];
        let ratio = ((2.0 * I * params.z() - I * params.u) * grid.period()).exp();
        let start = one_period + geometric_tail(one_period, ratio)?;
        let t0 = grid.node(0);
        s.q_nodes = (0..=n)
            .map(|i| s.decay(t0, grid.node(i)) * start + zero_start[i])
            .collect();
        Ok(s)
    }

    /// Solver on the kernel's own grid.
    pub fn for_params(params: &ScatterParams) -> Result<Self> {
        Self::solve(params, *params.kernel().grid())
    }

    pub fn params(&self) -> &ScatterParams {
        self.amp.params()
    }

    pub fn amplitude_solver(&self) -> &PeriodicAmplitude {
        &self.amp
    }

    /// `e^{2(f1(a) - f1(b)) + iU(a - b)}`.
    fn decay(&self, a: f64, b: f64) -> C64 {
        let p = self.params();
        (2.0 * p.f1_diff(a, b) + I * p.u * (a - b)).exp()
    }

    /// Propagates `Q` from node `i` to `b` inside the same cell.
    fn step(&self, i: usize, b: f64, qa: C64) -> C64 {
        let grid = self.amp.grid();
        let a = grid.node(i);
        let pa = self.amp.node_values()[i];
        let source = gauss_legendre_split(a, b, &self.breaks, |s| {
            let ps = self.amp.step(a, s, pa);
            ps * ps * self.decay(s, b)
        });
        self.decay(a, b) * qa + source
    }

    /// `Q(t)`.
    pub fn q_at(&self, t: f64) -> C64 {
        let (i, tr) = self.amp.grid().locate(t);
        self.step(i, tr, self.q_nodes[i])
    }

    pub fn amplitude(&self, t: f64) -> C64 {
        self.amp.amplitude(t)
    }

    fn check_delay(tau_d: f64) -> Result<()> {
        if !(tau_d >= 0.0 && tau_d.is_finite()) {
            return Err(Error::config(format!("delay must be non-negative, got {tau_d}")));
        }
        Ok(())
    }

    /// Inelastic part `B(τc, τd)`.
    pub fn inelastic_b(&self, tau_c: f64, tau_d: f64) -> Result<C64> {
        Self::check_delay(tau_d)?;
        Ok(self.inelastic_unchecked(tau_c, tau_d, self.q_at(tau_c)))
    }

    fn inelastic_unchecked(&self, tau_c: f64, tau_d: f64, q: C64) -> C64 {
        let p = self.params();
        if p.u == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let later = tau_c + tau_d;
        -I * p.u * PI * PI * p.g(tau_c) * p.g(later) * p.f1_diff(tau_c, later).exp() * q
    }

    /// `B̄ = B + A(τc) A(τc + τd)`.
    pub fn bbar(&self, tau_c: f64, tau_d: f64) -> Result<C64> {
        Ok(self.inelastic_b(tau_c, tau_d)? + self.amplitude(tau_c) * self.amplitude(tau_c + tau_d))
    }

    /// Two-level (`|U| → ∞`) limit of `B`,
    /// `π g(τc + τd) A(τc) P(τc) e^{f1(τc) - f1(τc + τd)}`. Equal to
    /// `-(g(τc + τd)/g(τc)) A²(τc) e^{f_osc(τc) - f_osc(τc + τd)} e^{i(δ + iΓ⁽⁰⁾)τd}`
    /// wherever `g(τc) ≠ 0`, and finite where it vanishes.
    pub fn large_u_b(&self, tau_c: f64, tau_d: f64) -> Result<C64> {
        Self::check_delay(tau_d)?;
        let p = self.params();
        let later = tau_c + tau_d;
        let pc = self.amp.p_at(tau_c);
        let ac = -PI * p.g(tau_c) * pc;
        Ok(PI * p.g(later) * ac * pc * p.f1_diff(tau_c, later).exp())
    }

    /// Evaluates `B`, `g²_rr` and `g²_ll` on a rectangle, rows in parallel.
    pub fn coherence_grid(&self, spec: &GridSpec) -> Result<CoherenceGrid> {
        spec.validate()?;
        let rows: Vec<Row> = spec
            .tau_c
            .par_iter()
            .map(|&tc| {
                let q = self.q_at(tc);
                let ac = self.amplitude(tc);
                let later: Vec<C64> = spec.tau_d.iter().map(|&td| self.amplitude(tc + td)).collect();
                let b = spec.tau_d.iter().map(|&td| self.inelastic_unchecked(tc, td, q)).collect();
                Row { ac, later, b }
            })
            .collect();

        let max_t = rows
            .iter()
            .flat_map(|r| std::iter::once(r.ac).chain(r.later.iter().copied()))
            .map(|a| (1.0 + a).norm())
            .fold(0.0, f64::max);
        let max_r = rows
            .iter()
            .flat_map(|r| std::iter::once(r.ac).chain(r.later.iter().copied()))
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        let eps_t = (DENOMINATOR_EPS * max_t).max(DENOMINATOR_FLOOR);
        let eps_r = (DENOMINATOR_EPS * max_r).max(DENOMINATOR_FLOOR);

        let cols = spec.tau_d.len();
        let mut b = Vec::with_capacity(rows.len() * cols);
        let mut g2_rr = Vec::with_capacity(rows.len() * cols);
        let mut g2_ll = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            for (bij, ad) in row.b.iter().zip(&row.later) {
                b.push(*bij);
                g2_rr.push(coherence(*bij, 1.0 + row.ac, 1.0 + ad, eps_t));
                g2_ll.push(coherence(*bij, row.ac, *ad, eps_r));
            }
        }
        Ok(CoherenceGrid {
            tau_c: spec.tau_c.clone(),
            tau_d: spec.tau_d.clone(),
            b,
            g2_rr,
            g2_ll,
        })
    }
}

struct Row {
    ac: C64,
    later: Vec<C64>,
    b: Vec<C64>,
}

/// `|1 + B/(x y)|²`, or NaN when either factor is below `eps`.
fn coherence(b: C64, x: C64, y: C64, eps: f64) -> f64 {
    if x.norm() < eps || y.norm() < eps {
        return f64::NAN;
    }
    (1.0 + b / (x * y)).norm_sqr()
}

/// Sample positions of a coherence grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub tau_c: Vec<f64>,
    pub tau_d: Vec<f64>,
}

impl GridSpec {
    /// `n_tauc` points over the closed period `[-T/2, T/2]` and `n_taud`
    /// points over `[0, horizon]`.
    pub fn uniform(period: f64, n_tauc: usize, horizon: f64, n_taud: usize) -> Result<Self> {
        if n_tauc < 2 || n_taud < 2 {
            return Err(Error::config("coherence grid needs at least two points per axis"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::config(format!("delay horizon must be positive, got {horizon}")));
        }
        Ok(Self {
            tau_c: linspace(-0.5 * period, 0.5 * period, n_tauc),
            tau_d: linspace(0.0, horizon, n_taud),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.tau_c.is_empty() || self.tau_d.is_empty() {
            return Err(Error::config("empty coherence grid"));
        }
        if let Some(bad) = self.tau_d.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(Error::config(format!("delay must be non-negative, got {bad}")));
        }
        Ok(())
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Default delay horizon: four drive periods for fast drives (`β > 1`),
/// otherwise `10/Γ⁽⁰⁾`.
pub fn default_horizon(params: &ScatterParams) -> f64 {
    if params.kernel().beta() > 1.0 {
        4.0 * params.period()
    } else {
        10.0 / params.gamma0()
    }
}

/// `B`, `g²_rr` and `g²_ll` on a `(τc, τd)` rectangle, stored row-major with
/// `τc` as the slow index. Undefined coherences are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceGrid {
    pub tau_c: Vec<f64>,
    pub tau_d: Vec<f64>,
    pub b: Vec<C64>,
    pub g2_rr: Vec<f64>,
    pub g2_ll: Vec<f64>,
}

impl CoherenceGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.tau_d.len() + j
    }

    pub fn g2_ll_at(&self, i: usize, j: usize) -> f64 {
        self.g2_ll[self.index(i, j)]
    }

    pub fn g2_rr_at(&self, i: usize, j: usize) -> f64 {
        self.g2_rr[self.index(i, j)]
    }
}

/// `B(τc, τd)` on the kernel grid.
pub fn inelastic_b(params: &ScatterParams, tau_c: f64, tau_d: f64) -> Result<C64> {
    TwoPhotonSolver::for_params(params)?.inelastic_b(tau_c, tau_d)
}

pub fn bbar(params: &ScatterParams, tau_c: f64, tau_d: f64) -> Result<C64> {
    TwoPhotonSolver::for_params(params)?.bbar(tau_c, tau_d)
}

pub fn large_u_b(params: &ScatterParams, tau_c: f64, tau_d: f64) -> Result<C64> {
    TwoPhotonSolver::for_params(params)?.large_u_b(tau_c, tau_d)
}

pub fn coherence_grid(params: &ScatterParams, spec: &GridSpec) -> Result<CoherenceGrid> {
    TwoPhotonSolver::for_params(params)?.coherence_grid(spec)
}

/// Inelastic kernel for constant coupling,
/// `-A² U/(U - 2(δ + iΓ)) e^{i(δ + iΓ)τd}` with `A = -iΓ/(δ + iΓ)`.
pub fn constant_coupling_b(gamma: f64, delta: f64, u: f64, tau_d: f64) -> Result<C64> {
    if !(gamma > 0.0) {
        return Err(Error::DegenerateKernel { gamma0: gamma });
    }
    let z = C64::new(delta, gamma);
    let a = -I * gamma / z;
    Ok(-a * a * u / (u - 2.0 * z) * (I * z * tau_d).exp())
}
