//! Quasistationary few-photon scattering off a waveguide-coupled Kerr cavity
//! whose coupling `g(t)` is modulated periodically.

pub mod error;
pub mod oracle;
pub mod protocol;
pub mod quadrature;
pub mod single_photon;
pub mod two_photon;

pub use error::{Error, Result};
