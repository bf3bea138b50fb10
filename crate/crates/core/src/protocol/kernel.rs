use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{fourier_coefficients, gauss_legendre_split, PeriodGrid, C64};

use super::CouplingProtocol;

/// Relative size below which spectral terms of `f_osc` are dropped.
const SPECTRAL_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone)]
enum Fosc {
    /// `f_osc(t) = 2 Re Σ_{m>0} c_m e^{-i m Ω t}`.
    Spectral { terms: Vec<(f64, C64)> },
    /// Cumulative integral on the nodes, refined between nodes by exact
    /// cell quadrature of the piecewise-smooth rate.
    Cumulative { nodes: Vec<f64>, mean: f64 },
}

/// Decay-rate kernel of a protocol: `Γ(t) = π g²(t)`, its mean `Γ⁽⁰⁾` and the
/// zero-mean phase `f_osc` with `ḟ_osc = Γ - Γ⁽⁰⁾`.
#[derive(Debug, Clone)]
pub struct RateKernel {
    protocol: CouplingProtocol,
    grid: PeriodGrid,
    gamma0: f64,
    gamma_samples: Vec<f64>,
    fosc_samples: Vec<f64>,
    fosc: Fosc,
    fosc_scale: f64,
}

impl RateKernel {
    pub fn new(protocol: CouplingProtocol, n_grid: usize) -> Result<Self> {
        if !n_grid.is_power_of_two() {
            return Err(Error::config(format!("kernel grid must be a power of two, got {n_grid}")));
        }
        let grid = PeriodGrid::new(n_grid, protocol.period())?;
        let gamma_samples: Vec<f64> = grid.nodes().iter().map(|&t| protocol.rate(t)).collect();
        if protocol.is_smooth() {
            Self::spectral(protocol, grid, gamma_samples)
        } else {
            Self::cumulative(protocol, grid, gamma_samples)
        }
    }

    fn spectral(protocol: CouplingProtocol, grid: PeriodGrid, gamma_samples: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        let samples: Vec<C64> = gamma_samples.iter().map(|&g| C64::new(g, 0.0)).collect();
        let c = fourier_coefficients(&samples);
        let gamma0 = c[0].re;
        check_gamma0(gamma0, &protocol)?;
        let biggest = c[1..n / 2].iter().map(|x| x.norm()).fold(0.0, f64::max);
        let omega = protocol.omega();
        let terms = (1..n / 2)
            .filter(|&m| c[m].norm() > SPECTRAL_CUTOFF * biggest.max(gamma0))
            .map(|m| {
                let mf = m as f64;
                // Γ⁽ᵐ⁾ and Γ⁽⁻ᵐ⁾ averaged for exact Hermitian symmetry
                let gm = 0.5 * (c[m] + c[n - m].conj());
                (mf, C64::new(0.0, 1.0) * gm / (mf * omega))
            })
            .collect();
        let mut k = Self {
            protocol,
            grid,
            gamma0,
            gamma_samples,
            fosc_samples: Vec::new(),
            fosc: Fosc::Spectral { terms },
            fosc_scale: 1.0,
        };
        k.fosc_samples = k.grid.nodes().iter().map(|&t| k.fosc(t)).collect();
        Ok(k)
    }

    fn cumulative(protocol: CouplingProtocol, grid: PeriodGrid, gamma_samples: Vec<f64>) -> Result<Self> {
        let breaks = protocol.breakpoints();
        let cell = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| gauss_legendre_split(a, b, &breaks, |t| C64::new(f(t), 0.0)).re;
        let rate = |t: f64| protocol.rate(t);

        let mut running = vec![0.0; grid.len() + 1];
        for i in 0..grid.len() {
            running[i + 1] = running[i] + cell(grid.node(i), grid.node(i + 1), &rate);
        }
        let period = grid.period();
        let gamma0 = running[grid.len()] / period;
        check_gamma0(gamma0, &protocol)?;

        let nodes: Vec<f64> = (0..=grid.len())
            .map(|i| running[i] - gamma0 * (grid.node(i) - grid.start()))
            .collect();
        // period mean of F equals -(1/T) ∫ t (Γ - Γ⁽⁰⁾) dt since F vanishes at both ends
        let moment: f64 = (0..grid.len())
            .map(|i| cell(grid.node(i), grid.node(i + 1), &|t| t * (protocol.rate(t) - gamma0)))
            .sum();
        let mean = -moment / period;
        let fosc_samples = nodes[..grid.len()].iter().map(|f| f - mean).collect();
        Ok(Self {
            protocol,
            grid,
            gamma0,
            gamma_samples,
            fosc_samples,
            fosc: Fosc::Cumulative { nodes, mean },
            fosc_scale: 1.0,
        })
    }

    pub fn protocol(&self) -> &CouplingProtocol {
        &self.protocol
    }

    pub fn grid(&self) -> &PeriodGrid {
        &self.grid
    }

    pub fn period(&self) -> f64 {
        self.grid.period()
    }

    /// `Γ⁽⁰⁾`.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// `β = Ω / Γ⁽⁰⁾`.
    pub fn beta(&self) -> f64 {
        self.protocol.omega() / self.gamma0
    }

    pub fn gamma_samples(&self) -> &[f64] {
        &self.gamma_samples
    }

    pub fn fosc_samples(&self) -> &[f64] {
        &self.fosc_samples
    }

    pub fn gamma(&self, t: f64) -> f64 {
        self.protocol.rate(t)
    }

    /// `f_osc(t)` at an arbitrary time.
    pub fn fosc(&self, t: f64) -> f64 {
        let v = match &self.fosc {
            Fosc::Spectral { terms } => {
                let phase = self.protocol.omega() * self.grid.reduce(t);
                terms
                    .iter()
                    .map(|(m, c)| 2.0 * (c * C64::from_polar(1.0, -m * phase)).re)
                    .sum()
            }
            Fosc::Cumulative { nodes, mean } => {
                let (i, tr) = self.grid.locate(t);
                let breaks = self.protocol.breakpoints();
                let g0 = self.gamma0;
                let partial = gauss_legendre_split(self.grid.node(i), tr, &breaks, |s| {
                    C64::new(self.protocol.rate(s) - g0, 0.0)
                })
                .re;
                nodes[i] + partial - mean
            }
        };
        v * self.fosc_scale
    }

    /// Copy with `f_osc` multiplied by `factor`. Breaks `ḟ_osc = Γ - Γ⁽⁰⁾`;
    /// used as a negative control for the validation suite.
    #[doc(hidden)]
    pub fn with_fosc_scaled(&self, factor: f64) -> Self {
        let mut k = self.clone();
        k.fosc_scale *= factor;
        k.fosc_samples.iter_mut().for_each(|f| *f *= factor);
        k
    }
}

fn check_gamma0(gamma0: f64, protocol: &CouplingProtocol) -> Result<()> {
    // relative to the rate the waveform scale would give
    let reference = PI * protocol.scale().powi(2);
    if !(gamma0 > 1e-14 * reference) || !gamma0.is_finite() {
        return Err(Error::DegenerateKernel { gamma0 });
    }
    Ok(())
}
