//! Numerical verification toolkit for the conformal fractional
//! sub-Laplacian on groups of Heisenberg type.
//!
//! The crate evaluates the hypersingular operator
//! `𝓛_s u(g) = ½ ∫ [2u(g) − u(gh) − u(gh⁻¹)] |h|^{−Q−2s} dh`, the heat and
//! Riesz kernels behind it, the explicit bubble solutions of the fractional
//! Yamabe equation, and checks identities, constants and decay laws.

pub mod config;
pub mod error;
pub mod field;
pub mod fraclap;
pub mod group;
pub mod heat;
pub mod measure;
pub mod quadrature;
pub mod report;
pub mod runner;
pub mod special;
pub mod yamabe;

pub use config::{QuadMode, QuadratureConfig};
pub use error::{Error, Result};
pub use field::ScalarField;
pub use group::{GaugeValue, GroupPoint, GroupSpec};
pub use quadrature::Estimate;
pub use report::{CheckRecord, CheckSet, Provenance, Status, VerificationReport};
