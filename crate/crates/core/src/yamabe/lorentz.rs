//! Lorentz norms of the gauge cut-offs `ρ_{α,R}(g) = |g|^{−α} 1_{|g|≥R}`.
//!
//! The distribution function is `μ(λ) = (σ_Q/Q)(λ^{−Q/α} − R^Q)` for
//! `0 < λ ≤ R^{−α}`, the rearrangement is `ρ*(t) = (Qt/σ_Q + R^Q)^{−α/Q}`,
//! and with `t = ω_Q R^Q x`
//! `‖ρ‖_{L^{p,σ}}^σ = ∫ (t^{1/p} ρ*(t))^σ dt/t
//!                = ω_Q^{σ/p} R^{−σ(α−Q/p)} B(σ/p, σ(α/Q − 1/p))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::measure::{box_integral_mc, sigma_q};
use crate::quadrature::{integrate_breaks, Estimate};
use crate::special::beta;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LorentzCutoffSpec {
    pub q: f64,
    /// `σ_Q`, the surface measure of the unit gauge sphere.
    pub sigma_q: f64,
    pub alpha: f64,
    pub r: f64,
    pub p: f64,
    /// Second Lorentz index; `f64::INFINITY` selects the weak norm.
    pub sigma_exp: f64,
}

impl LorentzCutoffSpec {
    pub fn new(spec: &GroupSpec, alpha: f64, r: f64, p: f64, sigma_exp: f64) -> Result<Self> {
        let cut = LorentzCutoffSpec { q: spec.qf(), sigma_q: sigma_q(spec), alpha, r, p, sigma_exp };
        cut.validate()?;
        Ok(cut)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidInput(format!("cut-off radius must be positive, got {}", self.r)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) || !(self.sigma_exp >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "Lorentz indices need p ≥ 1 finite and σ ≥ 1, got p = {}, σ = {}",
                self.p, self.sigma_exp
            )));
        }
        if !(self.alpha > self.q / self.p) {
            return Err(Error::domain(
                "lorentz_cutoff_norm",
                format!("α = {} must exceed Q/p = {}", self.alpha, self.q / self.p),
            ));
        }
        Ok(())
    }

    fn omega(&self) -> f64 {
        self.sigma_q / self.q
    }
}

/// `μ(λ) = |{ρ_{α,R} > λ}|`.
pub fn distribution_function(cut: &LorentzCutoffSpec, lambda: f64) -> f64 {
    if lambda >= cut.r.powf(-cut.alpha) {
        0.0
    } else if lambda <= 0.0 {
        f64::INFINITY
    } else {
        cut.omega() * (lambda.powf(-cut.q / cut.alpha) - cut.r.powf(cut.q))
    }
}

/// `ρ*(t) = (Qt/σ_Q + R^Q)^{−α/Q}`.
pub fn rearrangement(cut: &LorentzCutoffSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("rearrangement needs t ≥ 0, got {t}")));
    }
    Ok((t / cut.omega() + cut.r.powf(cut.q)).powf(-cut.alpha / cut.q))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LorentzNorm {
    pub closed_form: f64,
    pub quadrature: Estimate,
    /// `C_{Q,σ}` in `‖ρ_{α,R}‖ = C_{Q,σ} R^{−(α−Q/p)}`.
    pub constant: f64,
}

/// Closed form of the norm.
pub fn lorentz_cutoff_norm(cut: &LorentzCutoffSpec) -> Result<f64> {
    cut.validate()?;
    let LorentzCutoffSpec { q, alpha, r, p, sigma_exp: s, .. } = *cut;
    let w = cut.omega();
    let decay = r.powf(-(alpha - q / p));
    if s.is_infinite() {
        // sup_x (ω R^Q x)^{1/p} R^{−α} (1 + x)^{−α/Q} at x = (1/p)/(α/Q − 1/p).
        let x = (1.0 / p) / (alpha / q - 1.0 / p);
        return Ok(w.powf(1.0 / p) * x.powf(1.0 / p) * (1.0 + x).powf(-alpha / q) * decay);
    }
    let b = beta(s / p, s * (alpha / q - 1.0 / p))?;
    Ok(w.powf(1.0 / p) * b.powf(1.0 / s) * decay)
}

/// `[∫ (t^{1/p} ρ*(t))^σ dt/t]^{1/σ}` by adaptive quadrature in `ln t`, the
/// rearrangement evaluated directly.
pub fn lorentz_norm_quadrature(cut: &LorentzCutoffSpec) -> Result<LorentzNorm> {
    let closed = lorentz_cutoff_norm(cut)?;
    let LorentzCutoffSpec { q, alpha, r, p, sigma_exp: s, .. } = *cut;
    let constant = closed * r.powf(alpha - q / p);
    if s.is_infinite() {
        // The weak norm is a supremum; report the closed form alone.
        return Ok(LorentzNorm { closed_form: closed, quadrature: Estimate::exact(closed), constant });
    }
    let t0 = (cut.omega() * r.powf(q)).ln();
    // Integrand ~ e^{σv/p} on the left and e^{−σ(α/Q−1/p)v} on the right
    // of v = ln t − t0; cut where both are below e^{−45}.
    let lo = t0 - 45.0 * p / s;
    let hi = t0 + 45.0 / (s * (alpha / q - 1.0 / p));
    let mut f = |v: f64| {
        let t = v.exp();
        let rs = rearrangement(cut, t).unwrap_or(0.0);
        (t.powf(1.0 / p) * rs).powf(s)
    };
    let breaks: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
    let i = integrate_breaks(&mut f, &breaks, 0.0, 1e-13, 2000);
    if !i.converged {
        return Err(Error::Precision("Lorentz quadrature did not converge".into()));
    }
    let v = i.value.powf(1.0 / s);
    let err = v * (i.error / i.value) / s;
    Ok(LorentzNorm { closed_form: closed, quadrature: Estimate::new(v, err), constant })
}

/// Monte Carlo `μ(λ)` at each level: the measure of `{ρ_{α,R} > λ}`
/// sampled in a coordinate box containing the gauge ball of radius
/// `λ_min^{−1/α}`.
pub fn lorentz_distribution_mc(
    spec: &GroupSpec,
    cut: &LorentzCutoffSpec,
    levels: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    cut.validate()?;
    if levels.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidInput("distribution levels must be positive".into()));
    }
    let lmin = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    let big = lmin.powf(-1.0 / cut.alpha) * (1.0 + 1e-9);
    let (a, b) = (big, big * big / 4.0);
    Ok(levels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let f = |g: &crate::group::GroupPoint| {
                let r = spec.gauge_unchecked(g);
                if r >= cut.r && r.powf(-cut.alpha) > l {
                    1.0
                } else {
                    0.0
                }
            };
            box_integral_mc(spec, f, a, b, samples, seed.wrapping_add(i as u64))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1_cut(p: f64, s: f64) -> LorentzCutoffSpec {
        LorentzCutoffSpec::new(&GroupSpec::heisenberg(1), 5.0, 2.0, p, s).unwrap()
    }

    #[test]
    fn rearrangement_endpoints() {
        let c = h1_cut(2.0, 1.0);
        assert!((rearrangement(&c, 0.0).unwrap() - 2f64.powf(-5.0)).abs() < 1e-16);
        // ρ* inverts μ.
        for t in [0.1, 1.0, 30.0] {
            let l = rearrangement(&c, t).unwrap();
            assert!((distribution_function(&c, l) - t).abs() < 1e-10 * t);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for (p, s) in [(1.0, 1.0), (2.0, 1.0), (2.0, 3.0), (4.0, 2.5)] {
            let n = lorentz_norm_quadrature(&h1_cut(p, s)).unwrap();
            assert!((n.quadrature.value / n.closed_form - 1.0).abs() < 1e-10, "{p} {s} {n:?}");
        }
    }

    #[test]
    fn l_p_p_is_the_lebesgue_norm() {
        // ‖ρ‖_{L^{p,p}} = ‖ρ‖_p = (σ_Q R^{Q−αp}/(αp−Q))^{1/p}.
        let spec = GroupSpec::heisenberg(1);
        let c = LorentzCutoffSpec::new(&spec, 3.0, 1.5, 2.0, 2.0).unwrap();
        let direct = (sigma_q(&spec) * 1.5f64.powf(4.0 - 6.0) / 2.0).sqrt();
        assert!((lorentz_cutoff_norm(&c).unwrap() / direct - 1.0).abs() < 1e-13);
    }

    #[test]
    fn divergent_indices_are_domain_errors() {
        let spec = GroupSpec::heisenberg(1);
        assert!(matches!(LorentzCutoffSpec::new(&spec, 1.0, 1.0, 2.0, 1.0), Err(Error::Domain { .. })));
    }
}
