use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::shapes::{Constant, Harmonic, OnOffCosine, Rectangular, SignChangeCosine};
use super::CouplingShape;

/// Default duty cycle of the rectangular protocols.
pub const DEFAULT_DUTY: f64 = 0.5;

/// Parameters a shape builder may read. Unused fields are ignored by builders
/// that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub g0: f64,
    #[serde(default)]
    pub duty: Option<f64>,
    #[serde(default)]
    pub g_off: Option<f64>,
    /// `(m, re, im)` with `m >= 0`.
    #[serde(default)]
    pub harmonics: Vec<(u32, f64, f64)>,
}

impl ShapeParams {
    pub fn with_g0(g0: f64) -> Self {
        Self { g0, duty: None, g_off: None, harmonics: Vec::new() }
    }
}

pub type ShapeBuilder = fn(&ShapeParams) -> Result<Arc<dyn CouplingShape>>;

struct Entry {
    builder: ShapeBuilder,
    summary: &'static str,
}

/// Name-indexed table of coupling waveforms.
pub struct ShapeRegistry {
    entries: BTreeMap<String, Entry>,
}

impl Default for ShapeRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl ShapeRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("constant", "g(t) = g0", |p| {
            Ok(Arc::new(Constant { g0: finite_g0(p)? }))
        });
        r.register("on_off_cosine", "g(t) = g0 (1 + cos Ωt)", |p| {
            Ok(Arc::new(OnOffCosine { g0: finite_g0(p)? }))
        });
        r.register("sign_change_cosine", "g(t) = g0 cos Ωt", |p| {
            Ok(Arc::new(SignChangeCosine { g0: finite_g0(p)? }))
        });
        r.register("rect_on_off", "g0 on the duty window, g_off (default g0/5) elsewhere", |p| {
            let g0 = finite_g0(p)?;
            let g_off = p.g_off.unwrap_or(g0 / 5.0);
            Ok(Arc::new(Rectangular::on_off(g0, g_off, p.duty.unwrap_or(DEFAULT_DUTY))?))
        });
        r.register("rect_sign_change", "g0 on the duty window, -g0 elsewhere", |p| {
            Ok(Arc::new(Rectangular::sign_change(finite_g0(p)?, p.duty.unwrap_or(DEFAULT_DUTY))?))
        });
        r.register("custom", "finite harmonic list (m, re, im), m >= 0", |p| {
            Ok(Arc::new(Harmonic::from_triples(&p.harmonics)?))
        });
        r
    }

    /// Adds or replaces a waveform.
    pub fn register(&mut self, name: &str, summary: &'static str, builder: ShapeBuilder) {
        self.entries.insert(name.to_owned(), Entry { builder, summary });
    }

    pub fn build(&self, name: &str, params: &ShapeParams) -> Result<Arc<dyn CouplingShape>> {
        let entry = self.entries.get(name).ok_or_else(|| {
            Error::config(format!(
                "unknown protocol '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        (entry.builder)(params)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn summary(&self, name: &str) -> Option<&'static str> {
        self.entries.get(name).map(|e| e.summary)
    }
}

fn finite_g0(p: &ShapeParams) -> Result<f64> {
    if !p.g0.is_finite() {
        return Err(Error::config(format!("g0 must be finite, got {}", p.g0)));
    }
    Ok(p.g0)
}
