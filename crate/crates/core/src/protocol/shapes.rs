//! Built-in coupling waveforms. All of them are written as functions of the
//! drive phase `θ = Ω t` folded into `[-π, π)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{fourier_coefficients, C64};

use super::CouplingShape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub g0: f64,
}

impl CouplingShape for Constant {
    fn name(&self) -> &str {
        "constant"
    }

    fn value(&self, _phase: f64) -> f64 {
        self.g0
    }

    fn phase_derivative(&self, _phase: f64) -> f64 {
        0.0
    }

    fn scale(&self) -> f64 {
        self.g0.abs()
    }

    fn mean_square(&self) -> f64 {
        self.g0 * self.g0
    }
}

/// `g0 (1 + cos θ)`: the coupling is quenched to zero once per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnOffCosine {
    pub g0: f64,
}

impl CouplingShape for OnOffCosine {
    fn name(&self) -> &str {
        "on_off_cosine"
    }

    fn value(&self, phase: f64) -> f64 {
        self.g0 * (1.0 + phase.cos())
    }

    fn phase_derivative(&self, phase: f64) -> f64 {
        -self.g0 * phase.sin()
    }

    fn scale(&self) -> f64 {
        2.0 * self.g0.abs()
    }

    fn mean_square(&self) -> f64 {
        1.5 * self.g0 * self.g0
    }
}

/// `g0 cos θ`: the coupling changes sign twice per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChangeCosine {
    pub g0: f64,
}

impl CouplingShape for SignChangeCosine {
    fn name(&self) -> &str {
        "sign_change_cosine"
    }

    fn value(&self, phase: f64) -> f64 {
        self.g0 * phase.cos()
    }

    fn phase_derivative(&self, phase: f64) -> f64 {
        -self.g0 * phase.sin()
    }

    fn scale(&self) -> f64 {
        self.g0.abs()
    }

    fn mean_square(&self) -> f64 {
        0.5 * self.g0 * self.g0
    }
}

/// Two-level square wave: `high` on the closed window `|θ| <= duty π`, `low` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangular {
    name: &'static str,
    high: f64,
    low: f64,
    duty: f64,
}

impl Rectangular {
    pub fn on_off(g0: f64, g_off: f64, duty: f64) -> Result<Self> {
        Self::new("rect_on_off", g0, g_off, duty)
    }

    pub fn sign_change(g0: f64, duty: f64) -> Result<Self> {
        Self::new("rect_sign_change", g0, -g0, duty)
    }

    fn new(name: &'static str, high: f64, low: f64, duty: f64) -> Result<Self> {
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::config(format!("duty must lie in (0, 1), got {duty}")));
        }
        Ok(Self { name, high, low, duty })
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    fn edge(&self) -> f64 {
        self.duty * PI
    }
}

impl CouplingShape for Rectangular {
    fn name(&self) -> &str {
        self.name
    }

    fn value(&self, phase: f64) -> f64 {
        if phase.abs() <= self.edge() {
            self.high
        } else {
            self.low
        }
    }

    fn limit(&self, phase: f64, from_above: bool) -> f64 {
        let e = self.edge();
        if at_edge(phase, e) {
            return if from_above { self.low } else { self.high };
        }
        if at_edge(phase, -e) {
            return if from_above { self.high } else { self.low };
        }
        self.value(phase)
    }

    fn phase_derivative(&self, phase: f64) -> f64 {
        if at_edge(phase.abs(), self.edge()) {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-self.edge(), self.edge()]
    }

    fn scale(&self) -> f64 {
        self.high.abs().max(self.low.abs())
    }

    fn mean_square(&self) -> f64 {
        self.duty * self.high * self.high + (1.0 - self.duty) * self.low * self.low
    }
}

/// Phases produced by `Ω (θ_edge / Ω)` round-trip only to a few ulps.
fn at_edge(phase: f64, edge: f64) -> bool {
    (phase - edge).abs() <= 1e-12
}

/// Real waveform given by a finite harmonic list, `g(θ) = Σ_m c_m e^{-i m θ}`
/// with `c_{-m} = conj(c_m)`. Only `m >= 0` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    coeffs: Vec<C64>,
}

impl Harmonic {
    /// Builds from `(m, re, im)` triples with `m >= 0`; repeated orders add up.
    pub fn from_triples(triples: &[(u32, f64, f64)]) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::config("harmonic list is empty"));
        }
        let order = triples.iter().map(|t| t.0).max().unwrap_or(0) as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        for &(m, re, im) in triples {
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::config(format!("non-finite coefficient for m = {m}")));
            }
            coeffs[m as usize] += C64::new(re, im);
        }
        if coeffs[0].im != 0.0 {
            return Err(Error::config("zeroth harmonic must be real"));
        }
        Ok(Self { coeffs })
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }
}

impl CouplingShape for Harmonic {
    fn name(&self) -> &str {
        "custom"
    }

    fn value(&self, phase: f64) -> f64 {
        let mut v = self.coeffs[0].re;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            v += 2.0 * (c * C64::from_polar(1.0, -(m as f64) * phase)).re;
        }
        v
    }

    fn phase_derivative(&self, phase: f64) -> f64 {
        let mut v = 0.0;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let mf = m as f64;
            v += 2.0 * (c * C64::new(0.0, -mf) * C64::from_polar(1.0, -mf * phase)).re;
        }
        v
    }

    fn scale(&self) -> f64 {
        self.coeffs[0].re.abs() + 2.0 * self.coeffs.iter().skip(1).map(|c| c.norm()).sum::<f64>()
    }

    fn mean_square(&self) -> f64 {
        self.coeffs[0].re.powi(2) + 2.0 * self.coeffs.iter().skip(1).map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// User waveform supplied as a callback of the phase. Must be smooth and
/// `2π`-periodic; derivatives come from a spectral fit.
#[derive(Clone)]
pub struct Sampled {
    name: String,
    sampler: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    fit: Harmonic,
}

const SAMPLED_FIT_NODES: usize = 1024;

impl Sampled {
    pub fn new<F>(name: impl Into<String>, sampler: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let n = SAMPLED_FIT_NODES;
        let samples: Vec<C64> = (0..n)
            .map(|j| C64::new(sampler(-PI + 2.0 * PI * j as f64 / n as f64), 0.0))
            .collect();
        if samples.iter().any(|s| !s.re.is_finite()) {
            return Err(Error::config("sampler returned a non-finite value"));
        }
        // c_m of e^{+imθ} convention equals the stored coefficient of e^{-imθ}
        let c = fourier_coefficients(&samples);
        let coeffs: Vec<C64> = (0..n / 2)
            .map(|m| if m == 0 { C64::new(c[0].re, 0.0) } else { c[m] })
            .collect();
        Ok(Self { name: name.into(), sampler: Arc::new(sampler), fit: Harmonic { coeffs } })
    }
}

impl fmt::Debug for Sampled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sampled").field("name", &self.name).finish_non_exhaustive()
    }
}

impl CouplingShape for Sampled {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, phase: f64) -> f64 {
        (self.sampler)(phase)
    }

    fn phase_derivative(&self, phase: f64) -> f64 {
        self.fit.phase_derivative(phase)
    }

    fn scale(&self) -> f64 {
        self.fit.scale()
    }

    fn mean_square(&self) -> f64 {
        self.fit.mean_square()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangular_edges_belong_to_the_high_level() {
        let r = Rectangular::on_off(1.0, 0.2, 0.5).unwrap();
        assert_eq!(r.value(0.5 * PI), 1.0);
        assert_eq!(r.value(-0.5 * PI), 1.0);
        assert_eq!(r.limit(0.5 * PI, true), 0.2);
        assert_eq!(r.limit(-0.5 * PI, false), 0.2);
        assert_eq!(r.value(0.9 * PI), 0.2);
    }

    #[test]
    fn rectangular_rejects_bad_duty() {
        for d in [0.0, 1.0, -0.1, 1.2, f64::NAN] {
            assert!(Rectangular::sign_change(1.0, d).is_err(), "duty {d}");
        }
    }

    #[test]
    fn harmonic_matches_cosine() {
        let h = Harmonic::from_triples(&[(0, 1.0, 0.0), (1, 0.5, 0.0)]).unwrap();
        let c = OnOffCosine { g0: 1.0 };
        for k in 0..50 {
            let p = -PI + 0.13 * k as f64;
            assert!((h.value(p) - c.value(p)).abs() < 1e-14);
            assert!((h.phase_derivative(p) - c.phase_derivative(p)).abs() < 1e-14);
        }
        assert!((h.mean_square() - c.mean_square()).abs() < 1e-15);
    }

    #[test]
    fn harmonic_requires_real_mean() {
        assert!(Harmonic::from_triples(&[(0, 1.0, 0.1)]).is_err());
        assert!(Harmonic::from_triples(&[]).is_err());
    }

    #[test]
    fn sampled_fit_gives_spectral_derivative() {
        let s = Sampled::new("bump", |p: f64| (p.cos()).exp()).unwrap();
        for k in 0..20 {
            let p = -3.0 + 0.3 * k as f64;
            let exact = -p.sin() * p.cos().exp();
            assert!((s.phase_derivative(p) - exact).abs() < 1e-12);
        }
    }
}
