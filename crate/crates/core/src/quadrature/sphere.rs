//! Rules on the unit gauge sphere `{|ω| = 1}` for the polar measure `dω`,
//! normalized so that the weights add up to `σ_Q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gauss_legendre;
use crate::group::{dilate_unchecked, inverse_unchecked, GroupPoint, GroupSpec};

#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<GroupPoint>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether a deterministic product rule exists for this group.
    pub fn has_tensor(spec: &GroupSpec) -> bool {
        (spec.k() == 0 && spec.m() <= 3) || (spec.k() == 1 && spec.m() == 2)
    }

    /// Product rule with `n_beta` latitude and `n_phi` longitude nodes.
    pub fn tensor(spec: &GroupSpec, n_beta: usize, n_phi: usize) -> Option<SphereRule> {
        use std::f64::consts::{FRAC_PI_2, PI};
        let sigma_q = crate::measure::sigma_q(spec);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let dphi = 2.0 * PI / n_phi as f64;
        let phis: Vec<f64> = (0..n_phi).map(|j| (j as f64 + 0.5) * dphi).collect();
        match (spec.m(), spec.k()) {
            (1, 0) => {
                points.push(GroupPoint::new(&[1.0], &[]));
                points.push(GroupPoint::new(&[-1.0], &[]));
                weights.extend([1.0, 1.0]);
            }
            (2, 0) => {
                for &p in &phis {
                    points.push(GroupPoint::new(&[p.cos(), p.sin()], &[]));
                    weights.push(dphi);
                }
            }
            (3, 0) => {
                let gl = gauss_legendre(n_beta);
                for (u, w) in gl.nodes.iter().zip(&gl.weights) {
                    let r = (1.0 - u * u).sqrt();
                    for &p in &phis {
                        points.push(GroupPoint::new(&[r * p.cos(), r * p.sin(), *u], &[]));
                        weights.push(w * dphi);
                    }
                }
            }
            (2, 1) => {
                // |z| = cos β, σ = sin β √(1 + cos²β) / 4, β ∈ (−π/2, π/2).
                let gl = gauss_legendre(n_beta);
                for (t, w) in gl.nodes.iter().zip(&gl.weights) {
                    let b = FRAC_PI_2 * t;
                    let (sb, cb) = b.sin_cos();
                    let root = (1.0 + cb * cb).sqrt();
                    let wb = FRAC_PI_2 * w * cb / (2.0 * root);
                    let sigma = sb * root / 4.0;
                    for &p in &phis {
                        points.push(GroupPoint::new(&[cb * p.cos(), cb * p.sin()], &[sigma]));
                        weights.push(wb * dphi);
                    }
                }
            }
            _ => return None,
        }
        let total: f64 = weights.iter().sum();
        let c = sigma_q / total;
        weights.iter_mut().for_each(|w| *w *= c);
        Some(SphereRule { points, weights })
    }

    /// Equal-weight random rule from `n` antithetic pairs `(ω, ω⁻¹)`.
    pub fn monte_carlo(spec: &GroupSpec, n: usize, rng: &mut ChaCha8Rng) -> SphereRule {
        let sigma_q = crate::measure::sigma_q(spec);
        let mut points = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let w = SphereSampler::direction(spec, rng);
            points.push(inverse_unchecked(&w));
            points.push(w);
        }
        let w = sigma_q / points.len() as f64;
        SphereRule { weights: vec![w; points.len()], points }
    }
}

/// Uniform sampling of the gauge ball and of the polar measure on its boundary.
pub struct SphereSampler;

impl SphereSampler {
    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Uniform point of the unit gauge ball by rejection from
    /// `{|z_i| ≤ 1, |σ_a| ≤ 1/4}`.
    pub fn ball_point(spec: &GroupSpec, rng: &mut ChaCha8Rng) -> GroupPoint {
        let mut p = spec.identity();
        loop {
            for x in p.z.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            for x in p.sigma.iter_mut() {
                *x = rng.gen_range(-0.25..0.25);
            }
            let r = spec.gauge_unchecked(&p);
            if r <= 1.0 && r > 0.0 {
                return p;
            }
        }
    }

    /// A point of the unit gauge sphere distributed as `dω / σ_Q`.
    pub fn direction(spec: &GroupSpec, rng: &mut ChaCha8Rng) -> GroupPoint {
        let p = Self::ball_point(spec, rng);
        let r = spec.gauge_unchecked(&p);
        dilate_unchecked(1.0 / r, &p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_points_lie_on_sphere() {
        for spec in [GroupSpec::heisenberg(1), GroupSpec::euclidean(2), GroupSpec::euclidean(3)] {
            let r = SphereRule::tensor(&spec, 8, 12).unwrap();
            for p in &r.points {
                assert!((spec.gauge_unchecked(p) - 1.0).abs() < 1e-14);
            }
            let total: f64 = r.weights.iter().sum();
            assert!((total - crate::measure::sigma_q(&spec)).abs() < 1e-12);
        }
        assert!(SphereRule::tensor(&GroupSpec::quaternionic(1).unwrap(), 4, 4).is_none());
    }

    #[test]
    fn tensor_rule_moments_h1() {
        // ∫_S |z|² dω equals (Q+2)·∫_{B₁} |z|² dg.
        let spec = GroupSpec::heisenberg(1);
        let r = SphereRule::tensor(&spec, 24, 8).unwrap();
        let num: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p.z_norm_sq()).sum();
        // ∫_{B₁}|z|² = |S¹| V₁ 4^{-1}/4 · B(1, 3/2) · (shell factor) computed by 1-D quadrature.
        let ball = crate::quadrature::integrate(
            |rr: f64| 2.0 * std::f64::consts::PI * rr.powi(3) * 2.0 * ((1.0 - rr.powi(4)).max(0.0)).sqrt() / 4.0,
            0.0,
            1.0,
            1e-14,
            1e-14,
            200,
        )
        .value;
        assert!((num - 6.0 * ball).abs() < 1e-10, "{num} vs {}", 6.0 * ball);
    }
}
