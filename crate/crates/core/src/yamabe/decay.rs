//! Power-law decay exponents from shell suprema.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{dilate_unchecked, GroupPoint, GroupSpec};
use crate::quadrature::SphereSampler;

#[derive(Clone, Debug)]
pub struct DecayOptions {
    /// Shell radii, increasing.
    pub radii: Vec<f64>,
    /// Samples per gauge sphere.
    pub points_per_shell: usize,
    pub seed: u64,
    /// Center of the shells (the field's center when `None`).
    pub center: Option<GroupPoint>,
}

impl Default for DecayOptions {
    /// Six shells with ratio 2 from `R = 4`: `[4, 128]`, one and a half decades.
    fn default() -> Self {
        DecayOptions {
            radii: (0..6).map(|i| 4.0 * 2f64.powi(i)).collect(),
            points_per_shell: 2048,
            seed: 0x5eed_0002,
            center: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellSup {
    pub radius: f64,
    /// Largest sample.
    pub max: f64,
    /// Gap between the two largest samples, added to `max` as a margin for
    /// the unsampled part of the sphere.
    pub inflation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    /// `β` in `sup_{|g|=R} u ≍ R^{−β}`.
    pub fitted_exponent: f64,
    /// Intercept of `ln sup` against `ln R`.
    pub intercept: f64,
    /// Root-mean-square residual of the fit in `ln sup`.
    pub fit_residual: f64,
    pub shell_range: (f64, f64),
    pub points_per_shell: usize,
    pub shells: Vec<ShellSup>,
}

/// Shell supremum from `n` samples on the gauge sphere of radius `r`.
pub(crate) fn sphere_sup(spec: &GroupSpec, u: &ScalarField, c: &GroupPoint, r: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<ShellSup> {
    let mut top = [f64::NEG_INFINITY; 2];
    for _ in 0..n {
        let w = SphereSampler::direction(spec, rng);
        let v = u.eval(&spec.mul_unchecked(c, &dilate_unchecked(r, &w)));
        if !(v > 0.0) {
            return Err(Error::Refused(format!(
                "field `{}` takes the non-positive value {v} on the shell R = {r}; no log fit",
                u.name()
            )));
        }
        if v > top[0] {
            top = [v, top[0]];
        } else if v > top[1] {
            top[1] = v;
        }
    }
    let inflation = if n > 1 { top[0] - top[1] } else { 0.0 };
    Ok(ShellSup { radius: r, max: top[0], inflation })
}

/// Least squares `y = a + b x`; returns `(a, b, rms residual)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

pub fn decay_fit_with(spec: &GroupSpec, u: &ScalarField, opts: &DecayOptions) -> Result<DecayReport> {
    let r = &opts.radii;
    if r.len() < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 shells, got {}", r.len())));
    }
    if r.windows(2).any(|w| !(w[1] > w[0])) || !(r[0] > 0.0) {
        return Err(Error::InvalidInput("shell radii must be positive and increasing".into()));
    }
    let span = (r[r.len() - 1] / r[0]).log10();
    if span < 1.5 - 1e-12 {
        return Err(Error::InvalidInput(format!("shells must span 1.5 decades, got {span:.3}")));
    }
    if opts.points_per_shell < 2 {
        return Err(Error::InvalidInput("need at least 2 points per shell".into()));
    }
    let c = opts.center.clone().unwrap_or_else(|| u.center.clone());
    spec.check_point(&c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shells: Vec<ShellSup> = r
        .iter()
        .map(|&ri| sphere_sup(spec, u, &c, ri, opts.points_per_shell, &mut rng))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = shells.iter().map(|s| (s.max + s.inflation).ln()).collect();
    let (a, b, rms) = linear_fit(&x, &y);
    Ok(DecayReport {
        fitted_exponent: -b,
        intercept: a,
        fit_residual: rms,
        shell_range: (r[0], r[r.len() - 1]),
        points_per_shell: opts.points_per_shell,
        shells,
    })
}

/// Decay exponent over the given shells with the default sampling.
pub fn decay_fit(spec: &GroupSpec, u: &ScalarField, shells: &[f64], seed: u64) -> Result<DecayReport> {
    let opts = DecayOptions { radii: shells.to_vec(), seed, ..DecayOptions::default() };
    decay_fit_with(spec, u, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_powers_are_recovered() {
        for spec in [GroupSpec::heisenberg(1), GroupSpec::quaternionic(1).unwrap()] {
            let u = ScalarField::gauge_power(&spec, 2.7);
            let r = decay_fit_with(&spec, &u, &DecayOptions::default()).unwrap();
            assert!((r.fitted_exponent - 2.7).abs() < 1e-10, "{r:?}");
            assert!(r.fit_residual < 1e-10);
        }
    }

    #[test]
    fn short_ranges_and_negative_fields_are_rejected() {
        let spec = GroupSpec::heisenberg(1);
        let u = ScalarField::gauge_power(&spec, 1.0);
        assert!(decay_fit(&spec, &u, &[1.0, 2.0, 4.0, 8.0], 1).is_err());
        let neg = u.scaled(-1.0);
        assert!(matches!(decay_fit(&spec, &neg, &[1.0, 4.0, 16.0, 64.0], 1), Err(Error::Refused(_))));
    }
}
