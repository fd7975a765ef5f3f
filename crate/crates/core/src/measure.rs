//! Haar measure in logarithmic coordinates: gauge-ball volume, annulus
//! integrals and Monte Carlo helpers.
//!
//! Lebesgue measure `dz dσ` is bi-invariant, and the polar formula reads
//! `∫ f = ∫_0^∞ ∫_S f(δ_ρ ω) ρ^{Q−1} dω dρ` with `|S| = σ_Q = Q ω_Q`.

use rand::Rng;
use serde::Serialize;

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::group::{GroupPoint, GroupSpec};
use crate::quadrature::{integrate, mean_and_se, Estimate, SphereSampler};
use crate::special::{euclidean_ball_volume, sphere_area};

/// Cached `ω_Q = |B₁|` with its error bar.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BallVolume {
    pub omega: f64,
    pub error: f64,
}

/// Shellwise quadrature of the unit gauge ball:
/// `ω_Q = ∫_0^1 |S^{m−1}| r^{m−1} V_k ((1 − r⁴)^{1/2}/4)^k dr`.
pub fn ball_volume_shellwise(spec: &GroupSpec) -> Estimate {
    let (m, k) = (spec.m(), spec.k());
    let sm = sphere_area(m);
    if k == 0 {
        return Estimate::exact(sm / m as f64);
    }
    let vk = euclidean_ball_volume(k);
    let r = integrate(
        |r: f64| {
            let h = (1.0 - r.powi(4)).max(0.0).sqrt() / 4.0;
            sm * r.powi(m as i32 - 1) * vk * h.powi(k as i32)
        },
        0.0,
        1.0,
        1e-15,
        1e-15,
        400,
    );
    Estimate::new(r.value, r.error)
}

/// Hit-or-miss Monte Carlo volume of the unit gauge ball from the bounding
/// box `{|z_i| ≤ 1, |σ_a| ≤ 1/4}`.
pub fn ball_volume_mc(spec: &GroupSpec, samples: usize, seed: u64) -> Estimate {
    let mut rng = SphereSampler::rng(seed);
    let box_vol = 2f64.powi(spec.m() as i32) * 0.5f64.powi(spec.k() as i32);
    let mut p = spec.identity();
    let mut hits = 0usize;
    for _ in 0..samples {
        for x in p.z.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        for x in p.sigma.iter_mut() {
            *x = rng.gen_range(-0.25..0.25);
        }
        if spec.gauge_unchecked(&p) <= 1.0 {
            hits += 1;
        }
    }
    let n = samples as f64;
    let f = hits as f64 / n;
    Estimate::new(box_vol * f, box_vol * (f * (1.0 - f) / n).sqrt())
}

fn cached(spec: &GroupSpec) -> BallVolume {
    *spec.ball_volume_cell().get_or_init(|| {
        let e = ball_volume_shellwise(spec);
        BallVolume { omega: e.value, error: e.error }
    })
}

/// `ω_Q`, the Haar volume of the unit gauge ball.
pub fn omega_q(spec: &GroupSpec) -> f64 {
    cached(spec).omega
}

pub fn omega_q_estimate(spec: &GroupSpec) -> Estimate {
    let c = cached(spec);
    Estimate::new(c.omega, c.error)
}

/// `σ_Q = Q ω_Q`, the polar measure of the unit gauge sphere.
pub fn sigma_q(spec: &GroupSpec) -> f64 {
    spec.qf() * omega_q(spec)
}

/// `|B₁|` estimated by Monte Carlo, or by shellwise quadrature when the
/// total dimension is at most 4 or the configured mode is `tensor`.
pub fn unit_ball_volume(spec: &GroupSpec, quad: &QuadratureConfig) -> Result<Estimate> {
    if quad.mc_samples < 10_000 {
        return Err(Error::Precondition(format!(
            "unit_ball_volume needs at least 10^4 samples, got {}",
            quad.mc_samples
        )));
    }
    use crate::config::QuadMode;
    let deterministic = match quad.mode {
        QuadMode::Tensor => true,
        QuadMode::MonteCarlo => false,
        QuadMode::Auto => spec.dim() <= 4,
    };
    if deterministic {
        Ok(ball_volume_shellwise(spec))
    } else {
        Ok(ball_volume_mc(spec, quad.mc_samples, quad.seed))
    }
}

/// Numeric and closed-form values of `∫_{r<|g|<R} |g|^{−γ} dg`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnnulusIntegral {
    pub numeric: Estimate,
    pub closed_form: f64,
    pub rel_discrepancy: f64,
}

impl AnnulusIntegral {
    /// Agreement within `max(floor, k·SE)` absolute-relative mix.
    pub fn agrees(&self, floor: f64, k: f64) -> bool {
        let diff = (self.numeric.value - self.closed_form).abs();
        diff <= (floor * self.closed_form.abs()).max(k * self.numeric.error)
    }
}

/// `σ_Q (R^{Q−γ} − r^{Q−γ})/(Q−γ)`, or `σ_Q ln(R/r)` when `γ = Q`.
pub fn annulus_closed_form(spec: &GroupSpec, gamma: f64, r: f64, big_r: f64) -> f64 {
    let q = spec.qf();
    let sq = sigma_q(spec);
    let e = q - gamma;
    if e.abs() < 1e-12 {
        sq * (big_r / r).ln()
    } else {
        sq * (big_r.powf(e) - r.powf(e)) / e
    }
}

pub fn gauge_annulus_integral(
    spec: &GroupSpec,
    gamma: f64,
    r: f64,
    big_r: f64,
    quad: &QuadratureConfig,
) -> Result<AnnulusIntegral> {
    if !(r > 0.0) || !(big_r > r) || !big_r.is_finite() || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("need 0 < r < R, got r={r}, R={big_r}")));
    }
    // Rejection sampling, stratified into shells of ratio at most 2^{1/4}
    // with one tight box {|z_i| ≤ ρ, |σ_a| ≤ ρ²/4} per shell of outer radius
    // ρ. Thin shells keep |g|^{−γ} nearly constant within each stratum.
    let mut rng = SphereSampler::rng(quad.seed ^ 0xa11e_5eed);
    let shells = ((4.0 * (big_r / r).log2()).ceil() as usize).max(1);
    let ratio = (big_r / r).powf(1.0 / shells as f64);
    let per = (quad.mc_samples.max(1000) / shells).max(1000);
    let (mut mean, mut var) = (0.0, 0.0);
    let mut vals = Vec::with_capacity(per);
    let mut p = spec.identity();
    for j in 0..shells {
        let lo = r * ratio.powi(j as i32);
        let hi = if j + 1 == shells { big_r } else { lo * ratio };
        let box_vol = (2.0 * hi).powi(spec.m() as i32) * (0.5 * hi * hi).powi(spec.k() as i32);
        vals.clear();
        for _ in 0..per {
            for x in p.z.iter_mut() {
                *x = rng.gen_range(-hi..hi);
            }
            for x in p.sigma.iter_mut() {
                *x = rng.gen_range(-0.25 * hi * hi..0.25 * hi * hi);
            }
            let g = spec.gauge_unchecked(&p);
            vals.push(if g > lo && g <= hi { box_vol * g.powf(-gamma) } else { 0.0 });
        }
        let (m, se) = mean_and_se(&vals);
        mean += m;
        var += se * se;
    }
    let se = var.sqrt();
    let closed = annulus_closed_form(spec, gamma, r, big_r);
    Ok(AnnulusIntegral {
        numeric: Estimate::new(mean, se),
        closed_form: closed,
        rel_discrepancy: ((mean - closed) / closed).abs(),
    })
}

/// Plain Monte Carlo `∫ f dg` over the box `{|z_i| ≤ a, |σ_j| ≤ b}` in
/// logarithmic coordinates.
pub fn box_integral_mc(
    spec: &GroupSpec,
    f: impl Fn(&GroupPoint) -> f64,
    a: f64,
    b: f64,
    samples: usize,
    seed: u64,
) -> Estimate {
    let mut rng = SphereSampler::rng(seed);
    let vol = (2.0 * a).powi(spec.m() as i32) * (2.0 * b).powi(spec.k() as i32);
    let mut vals = Vec::with_capacity(samples);
    let mut p = spec.identity();
    for _ in 0..samples {
        for x in p.z.iter_mut() {
            *x = rng.gen_range(-a..a);
        }
        for x in p.sigma.iter_mut() {
            *x = rng.gen_range(-b..b);
        }
        vals.push(vol * f(&p));
    }
    let (m, se) = mean_and_se(&vals);
    Estimate::new(m, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `|S^{m−1}| V_k 4^{−k} / 4 · B(m/4, k/2 + 1)`.
    fn closed_volume(m: usize, k: usize) -> f64 {
        sphere_area(m) * euclidean_ball_volume(k) * 4f64.powi(-(k as i32)) / 4.0
            * crate::special::beta(m as f64 / 4.0, k as f64 / 2.0 + 1.0).unwrap()
    }

    #[test]
    fn shellwise_matches_beta_closed_form() {
        let h = GroupSpec::heisenberg(1);
        let v = ball_volume_shellwise(&h);
        assert!((v.value - PI * PI / 8.0).abs() < 1e-13, "{}", v.value);
        assert!((v.value - closed_volume(2, 1)).abs() < 1e-13);
        let qh = GroupSpec::quaternionic(1).unwrap();
        let v = ball_volume_shellwise(&qh);
        assert!((v.value - PI.powi(3) / 240.0).abs() < 1e-13);
        let h2 = GroupSpec::heisenberg(2);
        assert!((ball_volume_shellwise(&h2).value / closed_volume(4, 1) - 1.0).abs() < 1e-12);
        assert!((sigma_q(&h) - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_volumes() {
        let q = QuadratureConfig::default();
        assert!((unit_ball_volume(&GroupSpec::euclidean(2), &q).unwrap().value - PI).abs() < 1e-14);
        assert!((unit_ball_volume(&GroupSpec::euclidean(3), &q).unwrap().value - 4.0 * PI / 3.0).abs() < 1e-14);
        let mc = ball_volume_mc(&GroupSpec::euclidean(3), 200_000, 3);
        assert!((mc.value - 4.0 * PI / 3.0).abs() < 4.0 * mc.error);
    }

    #[test]
    fn mc_and_shellwise_agree() {
        for spec in [GroupSpec::heisenberg(1), GroupSpec::quaternionic(1).unwrap()] {
            let mc = ball_volume_mc(&spec, 400_000, 11);
            let sh = ball_volume_shellwise(&spec);
            assert!(mc.agrees_with(&sh, 3.0), "{:?} vs {:?}", mc, sh);
        }
    }

    #[test]
    fn small_sample_counts_are_rejected() {
        let mut q = QuadratureConfig::default();
        q.mc_samples = 100;
        assert!(unit_ball_volume(&GroupSpec::heisenberg(1), &q).is_err());
    }

    #[test]
    fn annulus_rejects_bad_radii() {
        let q = QuadratureConfig::default();
        assert!(gauge_annulus_integral(&GroupSpec::heisenberg(1), 1.0, 2.0, 1.0, &q).is_err());
    }

    #[test]
    fn annulus_closed_form_limits() {
        let h = GroupSpec::heisenberg(1);
        let s = 0.3;
        let q = h.qf();
        let far = annulus_closed_form(&h, q + 2.0 * s, 1.0, 1e8);
        assert!((far - sigma_q(&h) / (2.0 * s)).abs() / far < 1e-4);
        let v0 = annulus_closed_form(&h, 0.0, 1.0, 2.0);
        assert!((v0 - omega_q(&h) * (16.0 - 1.0)).abs() < 1e-12);
    }
}
