//! Behaviour of `𝓛_s` at the ends of `(0, 1)`.
//!
//! Splitting the kernel at `|h| = 1` gives
//! `𝓛_s u(g) = u(g) σ_Q/(2s) + O(1)` as `s → 0⁺` for bounded integrable
//! `u`, so `(2s/σ_Q) 𝓛_s u → +u`. As `s → 1⁻` only the second-order Taylor
//! term survives and `(1 − s) 𝓛_s u` becomes a fixed multiple of
//! `−Σ X_i² u`.

use serde::Serialize;

use super::{apply_ls, sub_laplacian};
use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{GroupPoint, GroupSpec};
use crate::measure::sigma_q;
use crate::quadrature::Estimate;

#[derive(Clone, Debug, Serialize)]
pub struct SmallSLimit {
    pub s: f64,
    pub u: Vec<f64>,
    /// `(2s/σ_Q) 𝓛_s u(g)` at each point.
    pub scaled: Vec<Estimate>,
    /// `max |scaled + u| / |u|`: distance to `−u`.
    pub deviation_from_minus_u: f64,
    /// `max |scaled − u| / |u|`: distance to `+u`.
    pub deviation_from_plus_u: f64,
}

/// `(2s/σ_Q) 𝓛_s u` at points where `u ≠ 0`.
pub fn small_s_limit(
    spec: &GroupSpec,
    u: &ScalarField,
    points: &[GroupPoint],
    s: f64,
    quad: &QuadratureConfig,
) -> Result<SmallSLimit> {
    let c = 2.0 * s / sigma_q(spec);
    let mut vals = Vec::with_capacity(points.len());
    let mut scaled = Vec::with_capacity(points.len());
    for g in points {
        let v = u.eval(g);
        if v == 0.0 {
            return Err(Error::InvalidInput(format!("u vanishes at {g}; relative deviation undefined")));
        }
        scaled.push(apply_ls(spec, u, g, s, quad)?.estimate().scale(c));
        vals.push(v);
    }
    let dev = |sign: f64| {
        vals.iter()
            .zip(&scaled)
            .map(|(v, e)| (e.value - sign * v).abs() / v.abs())
            .fold(0.0, f64::max)
    };
    Ok(SmallSLimit {
        s,
        deviation_from_minus_u: dev(-1.0),
        deviation_from_plus_u: dev(1.0),
        u: vals,
        scaled,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NearOneLimit {
    pub s: f64,
    /// `(1 − s) 𝓛_s u(g) / (−Σ X_i² u(g))`.
    pub ratios: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub median: f64,
    pub cv: f64,
}

/// Pointwise ratio of `(1 − s) 𝓛_s u` to `−Σ X_i² u`.
pub fn near_one_limit(
    spec: &GroupSpec,
    u: &ScalarField,
    points: &[GroupPoint],
    s: f64,
    quad: &QuadratureConfig,
) -> Result<NearOneLimit> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two points".into()));
    }
    let mut ratios = Vec::with_capacity(points.len());
    let mut rel_errors = Vec::with_capacity(points.len());
    for g in points {
        let lap = sub_laplacian(spec, u, g)?;
        if lap.value.abs() <= 1e3 * lap.error {
            return Err(Error::InvalidInput(format!("Σ X_i² u ≈ 0 at {g}; ratio undefined")));
        }
        let l = apply_ls(spec, u, g, s, quad)?;
        let r = (1.0 - s) * l.value / -lap.value;
        ratios.push(r);
        rel_errors.push(l.error_estimate / l.value.abs() + lap.error / lap.value.abs());
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(NearOneLimit { s, cv: var.sqrt() / mean.abs(), ratios, rel_errors, median })
}

/// `n` points inside the bump of radius `r` about `e` where both `u` and
/// `Σ X_i² u` stay well away from zero: `|z| ≤ r/4`, `|σ| ≤ r²/16`.
pub fn bump_interior_points(spec: &GroupSpec, r: f64, n: usize) -> Vec<GroupPoint> {
    (0..n)
        .map(|i| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let a = 2.5 * t;
            let mut z = vec![0.0; spec.m()];
            z[0] = 0.25 * r * a.cos();
            if spec.m() > 1 {
                z[1] = 0.15 * r * a.sin();
            }
            let sigma: Vec<f64> = (0..spec.k()).map(|j| r * r * (0.0625 * (2.0 * t - 1.0)) / (j + 1) as f64).collect();
            GroupPoint::new(&z, &sigma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_s_tends_to_plus_u() {
        let spec = GroupSpec::heisenberg(1);
        let u = ScalarField::bump(&spec, spec.identity(), 2.0);
        let pts = bump_interior_points(&spec, 2.0, 3);
        let lim = small_s_limit(&spec, &u, &pts, 0.005, &QuadratureConfig::default()).unwrap();
        assert!(lim.deviation_from_plus_u < 0.02, "{lim:?}");
        assert!(lim.deviation_from_minus_u > 1.9);
    }

    #[test]
    fn points_stay_inside_the_bump() {
        let spec = GroupSpec::heisenberg(1);
        let u = ScalarField::bump(&spec, spec.identity(), 2.0);
        for g in bump_interior_points(&spec, 2.0, 10) {
            assert!(u.eval(&g) > 0.3);
            assert!(sub_laplacian(&spec, &u, &g).unwrap().value < 0.0);
        }
    }
}
