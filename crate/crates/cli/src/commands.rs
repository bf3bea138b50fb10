use floquet_chopper::single_photon::PeriodicAmplitude;
use floquet_chopper::two_photon::{linspace, GridSpec, TwoPhotonSolver};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Artifact, Derived, Table};

pub const ENVELOPE_COLUMNS: &[&str] = &["tauc_over_T", "re_A", "im_A", "abs_r", "abs_t", "phase_r"];
pub const G2_COLUMNS: &[&str] = &["tauc_over_T", "taud_gamma0", "g2_ll", "g2_rr", "re_B", "im_B"];

/// Central times in units of `T`: the explicit cuts, or `n` points from `-1/2`.
fn envelope_cuts(cfg: &RunConfig) -> Vec<f64> {
    match &cfg.tauc_over_t {
        Some(c) => c.clone(),
        None => (0..cfg.n_tauc).map(|k| -0.5 + k as f64 / cfg.n_tauc as f64).collect(),
    }
}

/// Single-photon envelope `A(τc)` with `|r| = |A|`, `|t| = |1 + A|` and `arg r`.
pub fn envelope(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let params = cfg.scatter_params()?;
    let amp = PeriodicAmplitude::solve(&params, *params.kernel().grid())?;
    let period = params.period();
    let rows = envelope_cuts(cfg)
        .par_iter()
        .map(|&x| {
            let a = amp.amplitude(x * period);
            vec![x, a.re, a.im, a.norm(), (1.0 + a).norm(), a.arg()]
        })
        .collect();
    let mut config = cfg.resolved(&params);
    config.taud_horizon = cfg.taud_horizon;
    Ok(Artifact { config, derived: Derived::of(&params), table: Table { columns: ENVELOPE_COLUMNS, rows } })
}

/// Two-photon coherences in long format, `τc` major.
pub fn g2(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let params = cfg.scatter_params()?;
    let config = cfg.resolved(&params);
    let solver = TwoPhotonSolver::for_params(&params)?;
    let period = params.period();
    let gamma0 = params.gamma0();
    let horizon = config.taud_horizon.expect("resolved") / gamma0;
    let tau_c = match &cfg.tauc_over_t {
        Some(c) => c.iter().map(|x| x * period).collect(),
        None => linspace(-0.5 * period, 0.5 * period, cfg.n_tauc),
    };
    let spec = GridSpec { tau_c, tau_d: linspace(0.0, horizon, cfg.n_taud) };
    let grid = solver.coherence_grid(&spec)?;
    let mut rows = Vec::with_capacity(grid.b.len());
    for (i, tc) in grid.tau_c.iter().enumerate() {
        for (j, td) in grid.tau_d.iter().enumerate() {
            let k = grid.index(i, j);
            rows.push(vec![tc / period, td * gamma0, grid.g2_ll[k], grid.g2_rr[k], grid.b[k].re, grid.b[k].im]);
        }
    }
    Ok(Artifact { config, derived: Derived::of(&params), table: Table { columns: G2_COLUMNS, rows } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coupling_reflects_fully() {
        let mut cfg = RunConfig::new("constant", 1.0);
        cfg.n_tauc = 16;
        cfg.n_grid = 64;
        let a = envelope(&cfg).unwrap();
        assert_eq!(a.table.rows.len(), 16);
        for row in &a.table.rows {
            assert!((row[3] - 1.0).abs() < 1e-12);
            assert!(row[4] < 1e-12);
        }
        assert!(a.config.taud_horizon.is_none());
    }

    #[test]
    fn coherent_light_without_nonlinearity() {
        let mut cfg = RunConfig::new("sign_change_cosine", 3.0);
        cfg.n_tauc = 16;
        cfg.n_taud = 16;
        cfg.n_grid = 256;
        let a = g2(&cfg).unwrap();
        assert_eq!(a.table.rows.len(), 256);
        for row in &a.table.rows {
            for v in [row[2], row[3]].into_iter().filter(|v| !v.is_nan()) {
                assert!((v - 1.0).abs() < 1e-9);
            }
            assert_eq!((row[4], row[5]), (0.0, 0.0));
        }
    }

    #[test]
    fn explicit_cut() {
        let mut cfg = RunConfig::new("on_off_cosine", 10.0);
        cfg.tauc_over_t = Some(vec![0.0]);
        cfg.u_over_gamma0 = 4.0;
        cfg.taud_horizon = Some(5.0);
        cfg.n_grid = 512;
        let a = g2(&cfg).unwrap();
        assert_eq!(a.table.rows.len(), cfg.n_taud);
        assert!((a.table.rows.last().unwrap()[1] - 5.0).abs() < 1e-12);
    }
}
