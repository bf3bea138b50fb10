//! Parameter sets reproducing the figures. All use `g0 = 1`, `δ = 0` and,
//! where a nonlinearity enters, `U > 0`.

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Envelope,
    G2,
}

#[derive(Debug, Clone)]
pub struct PresetRun {
    pub stem: String,
    pub kind: Kind,
    pub config: RunConfig,
}

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> Vec<PresetRun>,
}

impl Preset {
    pub fn runs(&self) -> Vec<PresetRun> {
        (self.build)()
    }
}

/// Drive speeds of the envelope figures.
pub const ENVELOPE_BETAS: [f64; 4] = [0.3, 1.0, 3.0, 10.0];

pub const PRESETS: &[Preset] = &[
    Preset { name: "fig1b", summary: "on_off_cosine envelopes, beta in {0.3, 1, 3, 10}", build: fig1b },
    Preset { name: "fig1d", summary: "sign_change_cosine envelopes, beta in {0.3, 1, 3, 10}", build: fig1d },
    Preset {
        name: "fig2",
        summary: "rect_on_off (g_off = g0/5) and rect_sign_change envelopes, duty 0.5, beta in {0.3, 1, 3, 10}",
        build: fig2,
    },
    Preset { name: "fig3", summary: "on_off_cosine g2 at tauc = 0, beta = 10, U = +4 Gamma0, taud up to 5/Gamma0", build: fig3 },
    Preset { name: "fig4a", summary: "sign_change_cosine g2 map, beta = 10, U = +4 Gamma0, taud up to 4T", build: fig4a },
    Preset { name: "fig4b", summary: "sign_change_cosine g2 map, beta = 1, U = +4 Gamma0, taud up to 15/Gamma0", build: fig4b },
    Preset { name: "fig5", summary: "on_off_cosine g2 map, beta = 10, U = +2 Gamma0, taud up to 4T", build: fig5 },
];

pub fn find(name: &str) -> Result<&'static Preset, CliError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Config(format!("unknown preset '{name}' (known: {})", known.join(", ")))
    })
}

fn beta_label(beta: f64) -> String {
    format!("beta{beta}")
}

fn envelope_sweep(prefix: &str, protocol: &str, n_grid: usize, tweak: fn(&mut RunConfig)) -> Vec<PresetRun> {
    ENVELOPE_BETAS
        .iter()
        .map(|&beta| {
            let mut config = RunConfig::new(protocol, beta);
            config.n_grid = n_grid;
            tweak(&mut config);
            PresetRun { stem: format!("{prefix}_{}", beta_label(beta)), kind: Kind::Envelope, config }
        })
        .collect()
}

fn fig1b() -> Vec<PresetRun> {
    envelope_sweep("fig1b", "on_off_cosine", 2048, |_| {})
}

fn fig1d() -> Vec<PresetRun> {
    envelope_sweep("fig1d", "sign_change_cosine", 2048, |_| {})
}

fn fig2() -> Vec<PresetRun> {
    let mut runs = envelope_sweep("fig2_on_off", "rect_on_off", 4096, |c| {
        c.g_off = Some(0.2);
        c.duty = Some(0.5);
    });
    runs.extend(envelope_sweep("fig2_sign_change", "rect_sign_change", 4096, |c| c.duty = Some(0.5)));
    runs
}

fn g2_run(stem: &str, protocol: &str, beta: f64, u: f64, horizon: Option<f64>) -> PresetRun {
    let mut config = RunConfig::new(protocol, beta);
    config.u_over_gamma0 = u;
    config.taud_horizon = horizon;
    PresetRun { stem: stem.to_owned(), kind: Kind::G2, config }
}

fn fig3() -> Vec<PresetRun> {
    let mut run = g2_run("fig3", "on_off_cosine", 10.0, 4.0, Some(5.0));
    run.config.tauc_over_t = Some(vec![0.0]);
    vec![run]
}

fn fig4a() -> Vec<PresetRun> {
    vec![g2_run("fig4a", "sign_change_cosine", 10.0, 4.0, None)]
}

fn fig4b() -> Vec<PresetRun> {
    vec![g2_run("fig4b", "sign_change_cosine", 1.0, 4.0, Some(15.0))]
}

fn fig5() -> Vec<PresetRun> {
    vec![g2_run("fig5", "on_off_cosine", 10.0, 2.0, None)]
}
