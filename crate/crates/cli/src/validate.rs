//! Invariant suite behind `chopper validate`. Each function returns checks
//! with the measured value, the bound and the verdict.

use std::f64::consts::PI;

use floquet_chopper::oracle::{brute_bbar, brute_envelope, TruncationSpec};
use floquet_chopper::protocol::{CouplingProtocol, ShapeParams, ShapeRegistry};
use floquet_chopper::quadrature::C64;
use floquet_chopper::single_photon::{
    adiabatic_envelope, normalization_residual, PeriodicAmplitude, ScatterParams,
};
use floquet_chopper::two_photon::{constant_coupling_b, GridSpec, TwoPhotonSolver};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands;
use crate::error::CliError;
use crate::presets;

/// Built-in kinds covered by the suite; `custom` needs user harmonics.
pub const KINDS: [&str; 5] = ["constant", "on_off_cosine", "sign_change_cosine", "rect_on_off", "rect_sign_change"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    AtMost,
    Above,
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::Below => measured < tolerance,
            Relation::AtMost => measured <= tolerance,
            Relation::Above => measured > tolerance,
            Relation::AtLeast => measured >= tolerance,
        };
        Self { name: name.into(), measured, relation, tolerance, passed, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub level: Level,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Test hook: scales `f_osc` in the normalization runs.
    pub corrupt_fosc: Option<f64>,
}

pub fn run(level: Level, options: Options) -> Result<Report, CliError> {
    let mut checks = normalization(options.corrupt_fosc)?;
    checks.extend(closed_forms()?);
    checks.extend(fast_drive()?);
    checks.extend(slow_drive()?);
    checks.extend(adiabatic()?);
    checks.extend(oracle_envelope()?);
    checks.extend(large_u()?);
    if level == Level::Full {
        checks.extend(oracle_bbar()?);
        checks.extend(figures()?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { level, passed, checks })
}

pub fn params(kind: &str, beta: f64, delta_rel: f64, u_rel: f64, n_grid: usize) -> Result<ScatterParams, CliError> {
    let shape = ShapeRegistry::with_builtins().build(kind, &ShapeParams::with_g0(1.0))?;
    let kernel = CouplingProtocol::with_beta(shape, beta)?.rate_kernel(n_grid)?;
    let g0 = kernel.gamma0();
    Ok(ScatterParams::new(kernel, delta_rel * g0, u_rel * g0)?)
}

fn is_rect(kind: &str) -> bool {
    kind.starts_with("rect")
}

fn cell_centres(period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -0.5 * period + period * (i as f64 + 0.5) / n as f64).collect()
}

/// Photon-number conservation over kinds × `β ∈ {0.1, 1, 10}` × `δ/Γ⁽⁰⁾ ∈ {0, ±1}`.
pub fn normalization(corrupt_fosc: Option<f64>) -> Result<Vec<Check>, CliError> {
    let mut cases = Vec::new();
    for kind in KINDS {
        for beta in [0.1, 1.0, 10.0] {
            for delta in [-1.0, 0.0, 1.0] {
                cases.push((kind, beta, delta));
            }
        }
    }
    cases
        .par_iter()
        .map(|&(kind, beta, delta)| {
            let (n, tol) = if is_rect(kind) { (4096, 1e-4) } else { (2048, 1e-6) };
            let mut p = params(kind, beta, delta, 0.0, n)?;
            if let Some(f) = corrupt_fosc {
                p = ScatterParams::new(p.kernel().with_fosc_scaled(f), p.delta, p.u)?;
            }
            let env = PeriodicAmplitude::solve(&p, *p.kernel().grid())?.envelope_grid();
            let name = format!("normalization/{kind}/beta={beta}/delta={delta}");
            Ok(Check::new(name, normalization_residual(&env), Relation::Below, tol))
        })
        .collect()
}

/// Constant coupling: envelope, inelastic kernel and `g²_ll(0)`.
pub fn closed_forms() -> Result<Vec<Check>, CliError> {
    let mut env_err = 0.0f64;
    let mut b_err = 0.0f64;
    for delta in [-1.0, 0.0, 1.0, 2.5] {
        for u in [-3.0, 2.0, 4.0, 40.0] {
            let p = params("constant", 1.0, delta, u, 1024)?;
            let s = TwoPhotonSolver::for_params(&p)?;
            let gamma = p.gamma0();
            let exact = -C64::i() * gamma / p.z();
            for t in cell_centres(p.period(), 16) {
                env_err = env_err.max((s.amplitude(t) - exact).norm());
                for td in [0.0, 0.5 / gamma, 2.0 / gamma] {
                    let b = s.inelastic_b(t, td)?;
                    b_err = b_err.max((b - constant_coupling_b(gamma, p.delta, p.u, td)?).norm());
                }
            }
        }
    }
    let p = params("constant", 1.0, 0.0, 4.0, 1024)?;
    let grid = TwoPhotonSolver::for_params(&p)?.coherence_grid(&GridSpec { tau_c: vec![0.0], tau_d: vec![0.0] })?;
    Ok(vec![
        Check::new("closed_form/constant_envelope", env_err, Relation::Below, 1e-10),
        Check::new("closed_form/constant_inelastic_b", b_err, Relation::Below, 1e-9),
        Check::new("closed_form/constant_g2_ll_zero_delay", (grid.g2_ll[0] - 0.2).abs(), Relation::Below, 1e-9),
    ])
}

fn envelope_on_cells(kind: &str, beta: f64, n_points: usize) -> Result<(ScatterParams, Vec<(f64, C64)>), CliError> {
    let p = params(kind, beta, 0.0, 0.0, 2048)?;
    let amp = PeriodicAmplitude::solve(&p, *p.kernel().grid())?;
    let values = cell_centres(p.period(), n_points).into_iter().map(|t| (t, amp.amplitude(t))).collect();
    Ok((p, values))
}

/// Fast-drive asymptotes at `β = 100`.
pub fn fast_drive() -> Result<Vec<Check>, CliError> {
    Ok(vec![fast_drive_on_off()?, fast_drive_sign_change()?])
}

pub fn fast_drive_on_off() -> Result<Check, CliError> {
    let (p, values) = envelope_on_cells("on_off_cosine", 100.0, 1024)?;
    let omega = p.protocol().omega();
    let err = values
        .iter()
        .map(|(t, a)| (a + 2.0 / 3.0 * (1.0 + (omega * t).cos())).norm())
        .fold(0.0, f64::max);
    Ok(Check::new("fast_drive/on_off_cosine", err, Relation::AtMost, 0.05))
}

pub fn fast_drive_sign_change() -> Result<Check, CliError> {
    let beta = 100.0;
    let (p, values) = envelope_on_cells("sign_change_cosine", beta, 1024)?;
    let omega = p.protocol().omega();
    let err = values
        .iter()
        .map(|(t, a)| (a + (2.0 * omega * t).sin() / beta).norm())
        .fold(0.0, f64::max);
    Ok(Check::new("fast_drive/sign_change_cosine", err, Relation::AtMost, 0.2 / beta))
}

/// Overshoot, extra node and plateau at slow drive.
pub fn slow_drive() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for beta in [0.1, 0.3, 0.5, 1.0] {
        let (_, values) = envelope_on_cells("on_off_cosine", beta, 2048)?;
        let max_r = values.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max);
        checks.push(Check::new(format!("slow_drive/overshoot/beta={beta}"), max_r, Relation::Above, 1.0));
    }
    checks.push(extra_node(0.5)?);

    let (_, values) = envelope_on_cells("on_off_cosine", 0.1, 4096)?;
    let inside = values.iter().filter(|(_, a)| (a + 1.0).norm() < 0.05).count();
    let fraction = inside as f64 / values.len() as f64;
    checks.push(Check::new("slow_drive/plateau/beta=0.1", fraction, Relation::AtLeast, 0.2));
    Ok(checks)
}

/// Zero of the (real, at `δ = 0`) sign-change envelope with `Ωτc ∈ (-π/2, 0)`.
/// The measured value is `|A|` at the bisected root.
pub fn extra_node(beta: f64) -> Result<Check, CliError> {
    let p = params("sign_change_cosine", beta, 0.0, 0.0, 2048)?;
    let amp = PeriodicAmplitude::solve(&p, *p.kernel().grid())?;
    let omega = p.protocol().omega();
    let n = 512;
    // stay clear of the quench at -π/2 and of the centre
    let phases: Vec<f64> = (1..n).map(|k| -0.5 * PI + 0.5 * PI * k as f64 / n as f64).collect();
    let value = |phase: f64| amp.amplitude(phase / omega).re;
    let bracket = phases.windows(2).find(|w| value(w[0]).signum() != value(w[1]).signum());
    let name = format!("slow_drive/extra_node/beta={beta}");
    let Some(w) = bracket else {
        return Ok(Check::new(name, f64::INFINITY, Relation::Below, 1e-8).with_detail("no sign change found"));
    };
    let (mut lo, mut hi) = (w[0], w[1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if value(mid).signum() == value(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let a = amp.amplitude(root / omega).norm();
    Ok(Check::new(name, a, Relation::Below, 1e-8).with_detail(format!("node at Omega tau_c / pi = {:.4}", root / PI)))
}

/// Memory depth `∫Γ` over which the adiabatic margin must hold.
pub const ADIABATIC_DEPTH: f64 = 5.0;
pub const ADIABATIC_BETAS: [f64; 4] = [0.01, 0.1, 0.3, 1.0];

fn adiabatic_cases() -> Vec<(&'static str, f64, f64)> {
    let mut cases = Vec::new();
    for kind in KINDS {
        for beta in ADIABATIC_BETAS {
            for delta in [-1.0, 0.0, 1.0] {
                cases.push((kind, beta, delta));
            }
        }
    }
    cases
}

/// Largest `|A - A_adiabatic|` over points passing `margin < 0.05`, and the
/// number of such points. `history` selects the memory-window margin.
fn adiabatic_error(kind: &str, beta: f64, delta: f64, history: bool) -> Result<(f64, usize), CliError> {
    let p = params(kind, beta, delta, 0.0, 2048)?;
    let amp = PeriodicAmplitude::solve(&p, *p.kernel().grid())?;
    let protocol = p.protocol();
    let (mut worst, mut count) = (0.0f64, 0);
    for t in cell_centres(p.period(), 256) {
        let margin = if history {
            protocol.history_margin(p.delta, t, ADIABATIC_DEPTH)
        } else {
            protocol.adiabaticity_margin(p.delta, t)
        };
        if margin < 0.05 {
            count += 1;
            worst = worst.max((amp.amplitude(t) - adiabatic_envelope(&p, t)?).norm());
        }
    }
    Ok((worst, count))
}

/// Adiabatic agreement per kind, with the margin required over the memory window.
pub fn adiabatic() -> Result<Vec<Check>, CliError> {
    let results: Vec<(&str, f64, usize)> = adiabatic_cases()
        .par_iter()
        .map(|&(kind, beta, delta)| adiabatic_error(kind, beta, delta, true).map(|(w, c)| (kind, w, c)))
        .collect::<Result<_, CliError>>()?;
    Ok(KINDS
        .iter()
        .map(|kind| {
            let (worst, count) = results
                .iter()
                .filter(|r| r.0 == *kind)
                .fold((0.0f64, 0), |(w, c), r| (w.max(r.1), c + r.2));
            Check::new(format!("adiabatic/{kind}"), worst, Relation::Below, 0.05)
                .with_detail(format!("{count} points in the adiabatic regime"))
        })
        .collect())
}

/// The same comparison gated by the instantaneous margin only.
pub fn adiabatic_pointwise() -> Result<(f64, usize), CliError> {
    adiabatic_cases()
        .par_iter()
        .filter(|c| !is_rect(c.0))
        .map(|&(kind, beta, delta)| adiabatic_error(kind, beta, delta, false))
        .try_reduce(|| (0.0, 0), |a, b| Ok((a.0.max(b.0), a.1 + b.1)))
}

/// Production envelope against direct truncated integration, 64 points.
pub fn oracle_envelope() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for kind in KINDS {
        for beta in [1.0, 10.0] {
            let n = if is_rect(kind) { 4096 } else { 2048 };
            let p = params(kind, beta, 0.0, 0.0, n)?;
            let amp = PeriodicAmplitude::solve(&p, *p.kernel().grid())?;
            let spec = TruncationSpec::for_tolerance(&p, 1e-6)?;
            let err = cell_centres(p.period(), 64)
                .par_iter()
                .map(|&t| Ok((brute_envelope(&p, t, spec)?.value - amp.amplitude(t)).norm()))
                .try_reduce(|| 0.0, |a: f64, b| Ok::<_, CliError>(a.max(b)))?;
            checks.push(
                Check::new(format!("oracle/envelope/{kind}/beta={beta}"), err, Relation::Below, 1e-6)
                    .with_detail(format!("{} periods, {} steps per period", spec.n_periods, spec.steps_per_period)),
            );
        }
    }
    Ok(checks)
}

/// Production `B̄` against the time-ordered double integral on a 6×6 grid.
pub fn oracle_bbar() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for kind in KINDS {
        for beta in [1.0, 10.0] {
            for u in [2.0, 4.0] {
                let p = params(kind, beta, 0.0, u, 2048)?;
                let solver = TwoPhotonSolver::for_params(&p)?;
                let spec = TruncationSpec::bbar_for_tolerance(&p, 1e-4)?;
                let delays: Vec<f64> = (0..6).map(|j| 3.0 / p.gamma0() * j as f64 / 5.0).collect();
                let points: Vec<(f64, f64)> = cell_centres(p.period(), 6)
                    .into_iter()
                    .flat_map(|tc| delays.iter().map(move |&td| (tc, td)))
                    .collect();
                let err = points
                    .par_iter()
                    .map(|&(tc, td)| Ok((brute_bbar(&p, tc, td, spec)?.value - solver.bbar(tc, td)?).norm()))
                    .try_reduce(|| 0.0, |a: f64, b| Ok::<_, CliError>(a.max(b)))?;
                checks.push(
                    Check::new(format!("oracle/bbar/{kind}/beta={beta}/U={u}"), err, Relation::Below, 1e-4)
                        .with_detail(format!("{} periods, {} steps per period", spec.n_periods, spec.steps_per_period)),
                );
            }
        }
    }
    Ok(checks)
}

pub const LARGE_U: [f64; 3] = [10.0, 50.0, 200.0];

/// Convergence of `B` to its two-level limit on an 8×8 grid, `τd ≤ 2/Γ⁽⁰⁾`.
/// The relative error is `‖B - B∞‖₂ / ‖B∞‖₂` over the grid.
pub fn large_u() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for kind in ["on_off_cosine", "sign_change_cosine"] {
        let mut pointwise: Vec<Vec<f64>> = Vec::new();
        let mut relative = Vec::new();
        for u in LARGE_U {
            let p = params(kind, 1.0, 0.0, u, 2048)?;
            let s = TwoPhotonSolver::for_params(&p)?;
            let delays: Vec<f64> = (0..8).map(|j| 2.0 / p.gamma0() * j as f64 / 7.0).collect();
            let (mut num, mut den, mut diffs) = (0.0, 0.0, Vec::new());
            for tc in cell_centres(p.period(), 8) {
                for &td in &delays {
                    let limit = s.large_u_b(tc, td)?;
                    let d = (s.inelastic_b(tc, td)? - limit).norm();
                    num += d * d;
                    den += limit.norm_sqr();
                    diffs.push(d);
                }
            }
            pointwise.push(diffs);
            relative.push((num / den).sqrt());
        }
        let worst_ratio = (0..pointwise[0].len())
            .flat_map(|k| [pointwise[1][k] / pointwise[0][k], pointwise[2][k] / pointwise[1][k]])
            .fold(0.0, f64::max);
        checks.push(
            Check::new(format!("large_u/{kind}/monotone"), worst_ratio, Relation::Below, 1.0)
                .with_detail("largest ratio of successive |B - B_inf| over the spot grid"),
        );
        checks.push(
            Check::new(format!("large_u/{kind}/relative_at_200"), relative[2], Relation::Below, 0.02)
                .with_detail(format!("relative errors at U = 10, 50, 200: {:.3e} {:.3e} {:.3e}", relative[0], relative[1], relative[2])),
        );
    }
    Ok(checks)
}

fn preset_artifact(name: &str) -> Result<crate::output::Artifact, CliError> {
    let run = presets::find(name)?.runs().remove(0);
    commands::g2(&run.config)
}

/// Splits a long-format g2 artifact into `(τc/T, τd Γ⁽⁰⁾, g2_ll, g2_rr)` rows.
fn columns(a: &crate::output::Artifact) -> Vec<[f64; 4]> {
    a.table.rows.iter().map(|r| [r[0], r[1], r[2], r[3]]).collect()
}

/// Qualitative properties of the two-photon figure presets.
pub fn figures() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    // fig4a: large bunching, recurring at τc ≈ 0 and ±T/2, both regimes present
    let a = preset_artifact("fig4a")?;
    let rows = columns(&a);
    let defined: Vec<&[f64; 4]> = rows.iter().filter(|r| !r[2].is_nan()).collect();
    let max = defined.iter().map(|r| r[2]).fold(0.0, f64::max);
    checks.push(Check::new("figures/fig4a/max_g2_ll", max, Relation::Above, 10.0));
    let peak_near = |centre: f64| {
        defined.iter().filter(|r| (r[0] - centre).abs() < 0.05).map(|r| r[2]).fold(0.0, f64::max)
    };
    let recurring = peak_near(0.0).min(peak_near(-0.5).max(peak_near(0.5)));
    checks.push(
        Check::new("figures/fig4a/recurring_peaks", recurring, Relation::Above, 10.0)
            .with_detail("smaller of the peak heights near tau_c = 0 and tau_c = +-T/2"),
    );
    let below = defined.iter().filter(|r| r[2] < 1.0).count() as f64 / defined.len() as f64;
    let above = defined.iter().filter(|r| r[2] > 1.0).count() as f64 / defined.len() as f64;
    checks.push(
        Check::new("figures/fig4a/mixed_statistics", below.min(above), Relation::Above, 0.0)
            .with_detail(format!("fractions below / above 1: {below:.3} / {above:.3}")),
    );

    // the opposite sign of U gives the same bunching structure
    let mut run = presets::find("fig4a")?.runs().remove(0);
    run.config.u_over_gamma0 = -run.config.u_over_gamma0;
    let rows = columns(&commands::g2(&run.config)?);
    let values: Vec<f64> = rows.iter().map(|r| r[2]).filter(|v| !v.is_nan()).collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let mixed = values.iter().any(|&v| v < 1.0) && values.iter().any(|&v| v > 1.0);
    checks.push(
        Check::new("figures/fig4a/negative_u_max_g2_ll", if mixed { max } else { 0.0 }, Relation::Above, 10.0)
            .with_detail("U = -4 Gamma0; zero if either g2 < 1 or g2 > 1 regions are missing"),
    );

    // fig3: driven curve against the unmodulated antibunching curve
    let a = preset_artifact("fig3")?;
    let u = a.config.u_over_gamma0;
    let (mut dev, mut scale, mut pointwise, mut sign_changes) = (0.0f64, 0.0f64, 0.0f64, 0);
    let mut last = 0.0f64;
    for r in columns(&a) {
        // constant coupling in units of Γ⁽⁰⁾: B/A² = -U/(U - 2i) e^{-τd}
        let ratio = -u / C64::new(u, -2.0) * (-r[1]).exp();
        let reference = (1.0 + ratio).norm_sqr();
        let diff = r[2] - reference;
        dev = dev.max(diff.abs());
        scale = scale.max(reference);
        pointwise = pointwise.max(diff.abs() / reference);
        if diff * last < 0.0 {
            sign_changes += 1;
        }
        if diff != 0.0 {
            last = diff;
        }
    }
    checks.push(
        Check::new("figures/fig3/relative_deviation", dev / scale, Relation::Below, 0.2).with_detail(format!(
            "max |g2 - g2_const| / max g2_const; pointwise max relative {pointwise:.3}; {sign_changes} crossings"
        )),
    );

    // fig5: g2_rr bunching maxima recur in every drive period of τd
    let a = preset_artifact("fig5")?;
    let rows = columns(&a);
    let beta = a.derived.beta;
    let period_in_gamma = 2.0 * PI / beta;
    let (argmax_tc, _) = rows
        .iter()
        .filter(|r| !r[3].is_nan())
        .fold((0.0, 0.0), |acc, r| if r[3] > acc.1 { (r[0], r[3]) } else { acc });
    let cut: Vec<&[f64; 4]> = rows.iter().filter(|r| r[0] == argmax_tc).collect();
    let periods = (cut.last().map(|r| r[1]).unwrap_or(0.0) / period_in_gamma).floor() as usize;
    let mut weakest = f64::INFINITY;
    for k in 0..periods {
        let lo = k as f64 * period_in_gamma;
        let hi = lo + period_in_gamma;
        let peak = (1..cut.len() - 1)
            .filter(|&j| cut[j][1] >= lo && cut[j][1] < hi)
            .filter(|&j| cut[j][3] > cut[j - 1][3] && cut[j][3] >= cut[j + 1][3])
            .map(|j| cut[j][3])
            .fold(0.0, f64::max);
        weakest = weakest.min(peak);
    }
    checks.push(
        Check::new("figures/fig5/recurring_g2_rr_maxima", weakest, Relation::Above, 1.0)
            .with_detail(format!("smallest per-period g2_rr maximum over {periods} periods at tau_c/T = {argmax_tc:.4}")),
    );

    // fig4b: decorrelation at τd = 15/Γ⁽⁰⁾
    let a = preset_artifact("fig4b")?;
    let rows = columns(&a);
    let last = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    let dev = rows
        .iter()
        .filter(|r| r[1] == last)
        .flat_map(|r| [r[2], r[3]])
        .filter(|v| !v.is_nan())
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(
        Check::new("figures/fig4b/decorrelation", dev, Relation::Below, 0.05)
            .with_detail(format!("max |g2 - 1| at tau_d Gamma0 = {last:.3}")),
    );
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::new("a", 1.0, Relation::AtMost, 1.0).passed);
        assert!(!Check::new("a", 1.0, Relation::Below, 1.0).passed);
        assert!(!Check::new("a", f64::NAN, Relation::Below, 1.0).passed);
        assert!(Check::new("a", 2.0, Relation::Above, 1.0).passed);
    }

    #[test]
    fn corrupted_phase_breaks_normalization() {
        let checks = normalization(Some(1.5)).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
        assert!(normalization(None).unwrap().iter().all(|c| c.passed));
    }
}
