//! Explicit bubble solutions of the fractional Yamabe equation and the
//! checks built on them: the intertwining identity, calibration of the
//! constant relating the hypersingular operator to the conformal one,
//! decay-rate fits, tail decay, Lorentz norms of gauge cut-offs and the
//! local boundedness diagnostic.

mod decay;
mod local;
mod lorentz;

pub use decay::{decay_fit, decay_fit_with, DecayOptions, DecayReport};
pub use local::{local_bound_diagnostic, potential_decay, tail_decay_check, LocalBoundOptions, PremiseFit};
pub use lorentz::{
    distribution_function, lorentz_cutoff_norm, lorentz_distribution_mc, lorentz_norm_quadrature, rearrangement,
    LorentzCutoffSpec, LorentzNorm,
};

use serde::Serialize;

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fraclap::{apply_ls, quadratic_form, whole_space_integral, FormOptions};
use crate::group::{GroupPoint, GroupSpec};
use crate::quadrature::Estimate;
use crate::report::{CheckRecord, CheckSet, Provenance, Status};
use crate::special::intertwining_constant;

/// Parameters of the bubble `u_y`.
#[derive(Clone, Debug)]
pub struct ExplicitSolutionSpec {
    pub spec: GroupSpec,
    pub y: f64,
    pub s: f64,
}

impl ExplicitSolutionSpec {
    pub fn new(spec: &GroupSpec, y: f64, s: f64) -> Result<Self> {
        if spec.k() == 0 {
            return Err(Error::Unsupported("explicit solutions need a group with k ≥ 1".into()));
        }
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidInput(format!("bubble scale must be positive, got {y}")));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidInput(format!("s must lie in (0, 1), got {s}")));
        }
        intertwining_constant(spec.m(), spec.k(), s)?;
        Ok(ExplicitSolutionSpec { spec: spec.clone(), y, s })
    }

    fn q(&self) -> f64 {
        self.spec.qf()
    }

    /// `A^{(Q−2s)/(4s)}`.
    pub fn prefactor(&self) -> f64 {
        let a = intertwining_constant(self.spec.m(), self.spec.k(), self.s).expect("validated in new");
        a.powf((self.q() - 2.0 * self.s) / (4.0 * self.s))
    }

    /// `u_y(e)`.
    pub fn peak(&self) -> f64 {
        self.prefactor() * (4.0 / self.y).powf(0.5 * (self.q() - 2.0 * self.s))
    }

    /// `lim |g|^{Q−2s} u₁(g)` along a ray, which is `A^{(Q−2s)/(4s)} (16y²)^{(Q−2s)/4}`.
    pub fn far_constant(&self) -> f64 {
        self.prefactor() * (16.0 * self.y * self.y).powf(0.25 * (self.q() - 2.0 * self.s))
    }

    /// The field `u_y`, with decay `Q − 2s` attached.
    pub fn field(&self) -> ScalarField {
        let e = 0.25 * (self.q() - 2.0 * self.s);
        let c = self.prefactor();
        let y2 = self.y * self.y;
        let name = format!("u_y(y={},s={})", self.y, self.s);
        ScalarField::new(&self.spec, name, move |g| {
            let a = g.z_norm_sq() + y2;
            c * (16.0 * y2 / (a * a + 16.0 * g.sigma_norm_sq())).powf(e)
        })
        .with_decay(self.q() - 2.0 * self.s)
        .with_scale(self.y)
        .with_bound(self.peak())
        .nonnegative()
    }

    /// `((|z|² + y²)² + 16|σ|²)^{−(Q−2s)/4}`, the left side of the
    /// intertwining identity.
    pub fn profile(&self) -> ScalarField {
        let e = -0.25 * (self.q() - 2.0 * self.s);
        let y2 = self.y * self.y;
        ScalarField::new(&self.spec, format!("profile(y={})", self.y), move |g| {
            let a = g.z_norm_sq() + y2;
            (a * a + 16.0 * g.sigma_norm_sq()).powf(e)
        })
        .with_decay(self.q() - 2.0 * self.s)
        .with_scale(self.y)
        .with_bound(self.y.powf(-(self.q() - 2.0 * self.s)))
        .nonnegative()
    }

    /// `A (4y)^{2s} ((|z|² + y²)² + 16|σ|²)^{−(Q+2s)/4}`.
    pub fn intertwined(&self, g: &GroupPoint) -> f64 {
        let a = intertwining_constant(self.spec.m(), self.spec.k(), self.s).expect("validated in new");
        let t = g.z_norm_sq() + self.y * self.y;
        a * (4.0 * self.y).powf(2.0 * self.s) * (t * t + 16.0 * g.sigma_norm_sq()).powf(-0.25 * (self.q() + 2.0 * self.s))
    }

    /// Critical power `2*(s) − 1 = (Q+2s)/(Q−2s)`.
    pub fn critical_power(&self) -> f64 {
        (self.q() + 2.0 * self.s) / (self.q() - 2.0 * self.s)
    }
}

/// `u_y(g)`.
pub fn explicit_solution(sol: &ExplicitSolutionSpec, g: &GroupPoint) -> Result<f64> {
    sol.spec.check_point(g)?;
    Ok(sol.field().eval(g))
}

/// Pointwise ratios of a numeric operator value to a closed-form right side.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSummary {
    pub ratios: Vec<f64>,
    /// Relative quadrature error of each ratio.
    pub rel_errors: Vec<f64>,
    pub median: f64,
    pub cv: f64,
    /// Uncertainty of the median: largest relative quadrature error plus the
    /// standard error of the spread, times the median.
    pub uncertainty: f64,
    pub failed: Vec<(usize, String)>,
}

fn summarize(ratios: Vec<f64>, rel_errors: Vec<f64>, failed: Vec<(usize, String)>) -> RatioSummary {
    if ratios.is_empty() {
        return RatioSummary { ratios, rel_errors, median: f64::NAN, cv: f64::NAN, uncertainty: f64::NAN, failed };
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let worst = rel_errors.iter().cloned().fold(0.0, f64::max);
    let uncertainty = median.abs() * worst + sd / (n as f64).sqrt();
    RatioSummary { cv: sd / mean.abs(), ratios, rel_errors, median, uncertainty, failed }
}

/// Default evaluation points: gauges spread over more than a decade, in
/// assorted directions.
pub fn default_points(spec: &GroupSpec, n: usize) -> Vec<GroupPoint> {
    let m = spec.m();
    let k = spec.k();
    (0..n)
        .map(|i| {
            let r = 0.3 * 40f64.powf(i as f64 / (n.max(2) - 1) as f64);
            let th = 0.7 + 1.3 * i as f64;
            let mut z = vec![0.0; m];
            let mut sg = vec![0.0; k];
            let c = th.cos();
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = (th + j as f64).sin();
            }
            let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            for zj in z.iter_mut() {
                *zj *= r * c.abs().sqrt() / zn;
            }
            for (a, sa) in sg.iter_mut().enumerate() {
                *sa = (th * (a + 2) as f64).cos();
            }
            let sn = sg.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let zz = r * r * c.abs();
            let rest = (r.powi(4) - zz * zz).max(0.0).sqrt() / 4.0;
            for sa in sg.iter_mut() {
                *sa *= rest / sn;
            }
            GroupPoint::new(&z, &sg)
        })
        .collect()
}

/// Ratios `𝓛_s f / (A (4y)^{2s} F^{−(Q+2s)/4})` at each point.
pub fn intertwining_ratios(sol: &ExplicitSolutionSpec, points: &[GroupPoint], quad: &QuadratureConfig) -> Result<RatioSummary> {
    if points.len() < 5 {
        return Err(Error::InvalidInput(format!("need at least 5 points, got {}", points.len())));
    }
    for (i, p) in points.iter().enumerate() {
        sol.spec.check_point(p)?;
        if points[..i].iter().any(|q| q == p) {
            return Err(Error::InvalidInput(format!("point {i} is repeated")));
        }
    }
    let f = sol.profile();
    let mut ratios = vec![];
    let mut rel = vec![];
    let mut failed = vec![];
    for (i, g) in points.iter().enumerate() {
        match apply_ls(&sol.spec, &f, g, sol.s, quad) {
            Ok(r) => {
                let rhs = sol.intertwined(g);
                ratios.push(r.value / rhs);
                rel.push(r.error_estimate / r.value.abs());
            }
            Err(e) => failed.push((i, e.to_string())),
        }
    }
    Ok(summarize(ratios, rel, failed))
}

/// Ratios `𝓛_s u₁ / u₁^{(Q+2s)/(Q−2s)}` at each point.
pub fn yamabe_ratios(sol: &ExplicitSolutionSpec, points: &[GroupPoint], quad: &QuadratureConfig) -> Result<RatioSummary> {
    let u = sol.field();
    let p = sol.critical_power();
    let mut ratios = vec![];
    let mut rel = vec![];
    let mut failed = vec![];
    for (i, g) in points.iter().enumerate() {
        match apply_ls(&sol.spec, &u, g, sol.s, quad) {
            Ok(r) => {
                ratios.push(r.value / u.eval(g).powf(p));
                rel.push(r.error_estimate / r.value.abs());
            }
            Err(e) => failed.push((i, e.to_string())),
        }
    }
    Ok(summarize(ratios, rel, failed))
}

/// Pointwise intertwining check: per-point positivity and ratios, their
/// median (the estimate of α) and coefficient of variation.
pub fn intertwining_check(
    spec: &GroupSpec,
    s: f64,
    y: f64,
    points: &[GroupPoint],
    cv_tol: f64,
    quad: &QuadratureConfig,
) -> Result<CheckSet> {
    let sol = ExplicitSolutionSpec::new(spec, y, s)?;
    let gauges: Vec<f64> = points.iter().map(|p| spec.gauge_unchecked(p)).collect();
    let lo = gauges.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = gauges.iter().cloned().fold(0.0, f64::max);
    if !(hi >= 10.0 * lo) {
        return Err(Error::InvalidInput(format!(
            "evaluation gauges must span a decade, got [{lo:.3}, {hi:.3}]"
        )));
    }
    let sum = intertwining_ratios(&sol, points, quad)?;
    let anchor = "𝓛_s F^{-(Q-2s)/4} = α A (4y)^{2s} F^{-(Q+2s)/4}";
    let prov = if quad.mode == crate::config::QuadMode::MonteCarlo || !crate::quadrature::SphereRule::has_tensor(spec) {
        Provenance::MonteCarlo
    } else {
        Provenance::Quadrature
    };
    let tag = format!("intertwining.{}.s={s}.y={y}", spec.id());
    let mut set = CheckSet::default();
    for (i, msg) in &sum.failed {
        set.push(CheckRecord::fail(format!("{tag}.point{i:02}"), anchor, prov, msg.clone()));
    }
    let mut j = 0;
    for i in 0..points.len() {
        if sum.failed.iter().any(|(k, _)| *k == i) {
            continue;
        }
        let r = sum.ratios[j];
        set.push(
            CheckRecord::verdict(format!("{tag}.point{i:02}.positive"), anchor, prov, r > 0.0)
                .with_value(r)
                .with_error(sum.rel_errors[j] * r.abs())
                .with_input("gauge", gauges[i])
                .with_detail("ratio of the numeric operator to the closed-form right side"),
        );
        j += 1;
    }
    let noise = (sum.rel_errors.iter().map(|e| e * e).sum::<f64>() / sum.rel_errors.len().max(1) as f64).sqrt();
    set.push(
        CheckRecord::verdict(format!("{tag}.cv"), anchor, prov, sum.failed.is_empty() && sum.cv < cv_tol)
            .with_value(sum.cv)
            .with_tolerance(cv_tol)
            .with_extra("rms_relative_error", noise)
            .with_input("points", points.len())
            .with_extra("alpha_median", sum.median)
            .with_extra("alpha_uncertainty", sum.uncertainty),
    );
    Ok(set)
}

/// Calibrated constant relating the hypersingular operator to the conformal one.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaCalibration {
    pub s: f64,
    pub alpha: f64,
    pub uncertainty: f64,
    pub intertwining: Estimate,
    pub yamabe: Estimate,
    pub intertwining_cv: f64,
    pub yamabe_cv: f64,
    pub agree: bool,
}

/// α from two estimators: the intertwining ratio of the profile `F` and the
/// Yamabe ratio `𝓛_s u₁ / u₁^{2*(s)−1}`.
pub fn calibrate_alpha(spec: &GroupSpec, s: f64, quad: &QuadratureConfig) -> Result<AlphaCalibration> {
    let sol = ExplicitSolutionSpec::new(spec, 1.0, s)?;
    let pts = default_points(spec, 10);
    let a = intertwining_ratios(&sol, &pts, quad)?;
    // A second, disjoint point set for the Yamabe ratio.
    let pts2: Vec<GroupPoint> = default_points(spec, 11).into_iter().skip(1).collect();
    let b = yamabe_ratios(&sol, &pts2, quad)?;
    if !a.failed.is_empty() || !b.failed.is_empty() {
        return Err(Error::Calibration(format!(
            "operator evaluation failed at {} points",
            a.failed.len() + b.failed.len()
        )));
    }
    let ea = Estimate::new(a.median, a.uncertainty);
    let eb = Estimate::new(b.median, b.uncertainty);
    let agree = (ea.value - eb.value).abs() <= 5.0 * (ea.error + eb.error);
    let w_a = 1.0 / ea.error.max(1e-300).powi(2);
    let w_b = 1.0 / eb.error.max(1e-300).powi(2);
    let alpha = (w_a * ea.value + w_b * eb.value) / (w_a + w_b);
    let uncertainty = (ea.error.min(eb.error)).max((ea.value - eb.value).abs());
    if !(alpha > 0.0) {
        return Err(Error::Calibration(format!("non-positive α estimate {alpha}")));
    }
    Ok(AlphaCalibration {
        s,
        alpha,
        uncertainty,
        intertwining: ea,
        yamabe: eb,
        intertwining_cv: a.cv,
        yamabe_cv: b.cv,
        agree,
    })
}

/// Weak-form residual of `𝓛_s u₁ = α u₁^{2*(s)−1}` against a test bump:
/// `𝒬_s(u₁, φ) − 2α ∫ u₁^{2*(s)−1} φ`, with its combined error.
///
/// The factor 2 comes from `𝒬_s(u, φ) = 2 ∫ φ 𝓛_s u` for the double
/// integral over all ordered pairs.
#[derive(Clone, Debug, Serialize)]
pub struct WeakResidual {
    pub form: Estimate,
    pub source: Estimate,
    pub residual: f64,
    pub error: f64,
}

pub fn weak_form_residual(
    sol: &ExplicitSolutionSpec,
    alpha: Estimate,
    phi: &ScalarField,
    opts: &FormOptions,
    quad: &QuadratureConfig,
) -> Result<WeakResidual> {
    let spec = &sol.spec;
    let u = sol.field();
    let form = quadratic_form(spec, &u, phi, sol.s, opts)?;
    let p = sol.critical_power();
    let up = u.powf(p);
    let phi_c = phi.clone();
    let up_c = up.clone();
    let prod = ScalarField::new(spec, "u^p φ", move |g| up_c.eval(g) * phi_c.eval(g))
        .with_center(phi.center.clone())
        .with_scale(phi.scale)
        .with_support(phi.support_radius.unwrap_or(f64::INFINITY))
        .with_bound(up.bound.unwrap_or(f64::INFINITY) * phi.bound.unwrap_or(1.0));
    let integral = whole_space_integral(spec, &prod, quad)?;
    let source = Estimate::new(
        2.0 * alpha.value * integral.value,
        2.0 * (alpha.error * integral.value.abs() + alpha.value * integral.error),
    );
    let residual = form.value - source.value;
    Ok(WeakResidual { form, source, residual, error: form.error + source.error })
}

/// Record helper shared by the suites.
pub(crate) fn diag(id: String, anchor: &str, prov: Provenance, value: f64) -> CheckRecord {
    CheckRecord::new(id, anchor, prov, Status::Diagnostic).with_value(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_closed_forms() {
        let spec = GroupSpec::heisenberg(1);
        let sol = ExplicitSolutionSpec::new(&spec, 2.0, 0.5).unwrap();
        let u = sol.field();
        assert!((u.eval(&spec.identity()) - sol.peak()).abs() < 1e-14 * sol.peak());
        let one = ExplicitSolutionSpec::new(&spec, 1.0, 0.5).unwrap().field();
        let g = GroupPoint::new(&[0.3, 0.8], &[-0.4]);
        let gy = spec.dilate(2.0, &g).unwrap();
        let lhs = u.eval(&gy);
        let rhs = 2f64.powf(-(spec.qf() - 1.0) / 2.0) * one.eval(&g);
        assert!((lhs - rhs).abs() < 1e-14 * rhs);
        assert!(ExplicitSolutionSpec::new(&GroupSpec::euclidean(3), 1.0, 0.5).is_err());
    }

    #[test]
    fn far_limit_is_direction_independent() {
        let spec = GroupSpec::heisenberg(1);
        let sol = ExplicitSolutionSpec::new(&spec, 1.0, 0.3).unwrap();
        let u = sol.field();
        let e = spec.qf() - 0.6;
        let big = 1e5;
        let along_z = GroupPoint::new(&[big, 0.0], &[0.0]);
        let along_s = GroupPoint::new(&[0.0, 0.0], &[big * big / 4.0]);
        let a = big.powf(e) * u.eval(&along_z);
        let b = big.powf(e) * u.eval(&along_s);
        assert!((a / sol.far_constant() - 1.0).abs() < 1e-8);
        assert!((b / sol.far_constant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn default_points_span_a_decade() {
        let spec = GroupSpec::heisenberg(1);
        let p = default_points(&spec, 10);
        let g: Vec<f64> = p.iter().map(|x| spec.gauge_unchecked(x)).collect();
        assert!((g[0] - 0.3).abs() < 1e-12 && (g[9] - 12.0).abs() < 1e-9, "{g:?}");
    }
}
