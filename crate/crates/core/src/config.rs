//! Quadrature settings shared by every integral evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMode {
    Tensor,
    MonteCarlo,
    Auto,
}

impl std::str::FromStr for QuadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tensor" => Ok(QuadMode::Tensor),
            "monte_carlo" | "mc" => Ok(QuadMode::MonteCarlo),
            "auto" => Ok(QuadMode::Auto),
            other => Err(Error::Config(format!("unknown quadrature mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Inner radius factor: the hypersingular split uses
    /// `δ = split_radius · max(1, |g|)`.
    pub split_radius: f64,
    /// Outer truncation radius before the analytic tail correction.
    pub r_max: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub mode: QuadMode,
    pub shells_per_decade: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            split_radius: 0.1,
            r_max: 1.0e3,
            mc_samples: 1 << 16,
            seed: 0x5eed_0001,
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            mode: QuadMode::Auto,
            shells_per_decade: 4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, why: String| Err(Error::Config(format!("quad.{k}: {why}")));
        if !(self.split_radius > 0.0) || !self.split_radius.is_finite() {
            return bad("split_radius", format!("must be positive, got {}", self.split_radius));
        }
        if !(self.r_max > self.split_radius) || !self.r_max.is_finite() {
            return bad("r_max", format!("must be finite and exceed split_radius, got {}", self.r_max));
        }
        if self.mc_samples == 0 {
            return bad("mc_samples", "must be positive".into());
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol", format!("must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol", format!("must be positive, got {}", self.abs_tol));
        }
        if self.shells_per_decade == 0 {
            return bad("shells_per_decade", "must be positive".into());
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        QuadratureConfig { seed, ..self.clone() }
    }

    pub fn with_mode(&self, mode: QuadMode) -> Self {
        QuadratureConfig { mode, ..self.clone() }
    }

    pub fn with_samples(&self, mc_samples: usize) -> Self {
        QuadratureConfig { mc_samples, ..self.clone() }
    }
}
