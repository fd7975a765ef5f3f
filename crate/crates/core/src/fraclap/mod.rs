//! The hypersingular operator
//! `𝓛_s u(g) = ½ ∫ [2u(g) − u(gh) − u(gh⁻¹)] |h|^{−Q−2s} dh`,
//! its tail functional, quadratic form, seminorm and horizontal derivatives.
//!
//! The symmetrized second difference makes the integrand absolutely
//! integrable at `h = e` for C² fields: along `δ_ρ ω` it is `O(ρ²)` while
//! the kernel in polar coordinates is `ρ^{−1−2s} dρ dω`. The integral therefore
//! equals the ε-excised principal value `lim ∫_{|g⁻¹h|>ε} [u(g) − u(h)] K`
//! without taking a limit. Near `h = e` the radial rule carries the weight
//! `ρ^{1−2s}` exactly and integrates `D(ρ)/ρ²`, a smooth function of `ρ`.

mod deriv;
mod engine;
mod forms;
mod limits;

use serde::Serialize;

pub use deriv::{horizontal_derivative, horizontal_derivative_with_step, sub_laplacian, sub_laplacian_with_step};
pub use engine::{ball_integral, kernel_weighted_integral, whole_space_integral};
pub use limits::{bump_interior_points, near_one_limit, small_s_limit, NearOneLimit, SmallSLimit};
pub use forms::{quadratic_form, seminorm, seminorm_p, sobolev_exponent, sobolev_quotient, FormOptions, SeminormResult, ShellContribution, SobolevQuotient};

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{dilate_unchecked, GroupPoint, GroupSpec};
use crate::quadrature::Estimate;
use engine::{eval_outer, plan_outer, refine, Outer, Part};

/// Contributions of the three regions. `value` is `inner + outer + tail`
/// evaluated left to right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Breakdown {
    /// `|h| < δ`, symmetrized.
    pub inner: f64,
    /// `δ < |h| < R`.
    pub outer: f64,
    /// Analytic correction beyond the truncation radius `R`.
    pub tail: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.inner + self.outer + self.tail
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OperatorResult {
    pub value: f64,
    pub error_estimate: f64,
    pub breakdown: Breakdown,
    /// Radius splitting the inner and outer regions.
    pub split_radius: f64,
    pub monte_carlo: bool,
}

impl OperatorResult {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.value, self.error_estimate)
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("s must lie in (0, 1), got {s}")))
    }
}

/// Inner radius: `split_radius · max(1, |g|)`, kept inside the field's
/// variation scale and away from a singular point.
fn split_radius(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, quad: &QuadratureConfig) -> f64 {
    let mut delta = quad.split_radius * spec.gauge_unchecked(g).max(1.0);
    if u.localized {
        delta = delta.min(0.5 * u.scale);
        if u.singular_exponent.is_some() {
            delta = delta.min(0.25 * spec.distance(g, &u.center));
        }
    }
    delta
}

/// `𝓛_s u(g)`.
pub fn apply_ls(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, s: f64, quad: &QuadratureConfig) -> Result<OperatorResult> {
    spec.check_point(g)?;
    check_s(s)?;
    quad.validate()?;
    if u.singular_exponent.is_some() && spec.distance(g, &u.center) == 0.0 {
        return Err(Error::Singular(format!("field `{}` is singular at the evaluation point", u.name())));
    }
    if !u.smooth_near(spec, g) {
        return Err(Error::Precondition(format!(
            "field `{}` is not C² near the evaluation point",
            u.name()
        )));
    }
    let q = spec.qf();
    let gamma = q + 2.0 * s;
    let base = u.eval(g);
    if !base.is_finite() {
        return Err(Error::Precondition(format!("field `{}` is not finite at {g}", u.name())));
    }
    let delta = split_radius(spec, u, g, quad);
    let outer = Outer { u, c: g, r0: delta, gamma, base };
    let plan = plan_outer(spec, &outer, quad)?;

    let r = refine(spec, quad, |polar, lvl| {
        let d = |rho: f64, w: &GroupPoint| -> f64 {
            let p = dilate_unchecked(rho, w);
            let a = u.eval(&spec.mul_unchecked(g, &p));
            let b = u.eval(&spec.mul_unchecked(g, &crate::group::inverse_unchecked(&p)));
            (base - 0.5 * a - 0.5 * b) / (rho * rho)
        };
        let inner = polar.jacobi(delta, lvl.n_jac, 1.0 - 2.0 * s, &d);
        let o = eval_outer(spec, polar, lvl, &outer, &plan);
        let outer_v = o.shells - o.near;

        Ok(Part {
            parts: [inner, outer_v, o.tail],
            model_err: o.tail_err,
            scale: inner.abs() + o.shells.abs() + o.near.abs() + o.tail.abs(),
        })
    })?;
    Ok(OperatorResult {
        value: r.value,
        error_estimate: r.error,
        breakdown: Breakdown { inner: r.parts[0], outer: r.parts[1], tail: r.parts[2] },
        split_radius: delta,
        monte_carlo: r.monte_carlo,
    })
}

/// Tail functional `T(u; g₀, R) = R^{2s} ∫_{|g₀⁻¹h|>R} u(h) |g₀⁻¹h|^{−Q−2s} dh`.
pub fn tail(spec: &GroupSpec, u: &ScalarField, g0: &GroupPoint, r: f64, s: f64, quad: &QuadratureConfig) -> Result<Estimate> {
    check_s(s)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("tail radius must be positive, got {r}")));
    }
    if u.decay_exponent.is_some_and(|b| b <= -2.0 * s) {
        return Err(Error::Refused(format!(
            "field `{}` grows too fast for the tail to converge",
            u.name()
        )));
    }
    let j = kernel_weighted_integral(spec, u, g0, r, spec.qf() + 2.0 * s, quad)?;
    Ok(j.scale(r.powf(2.0 * s)))
}

/// Tails at increasing radii, returned as `∫_{|g₀⁻¹h|>R} u K` (without the
/// `R^{2s}` factor) so that they are monotone for non-negative fields: each
/// value is the previous one minus an annulus integral of a non-negative
/// integrand evaluated with a positive-weight rule.
pub fn tail_profile(
    spec: &GroupSpec,
    u: &ScalarField,
    g0: &GroupPoint,
    radii: &[f64],
    s: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<Estimate>> {
    check_s(s)?;
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::InvalidInput("radii must be positive and strictly increasing".into()));
    }
    let gamma = spec.qf() + 2.0 * s;
    let last = *radii.last().expect("non-empty");
    let far = kernel_weighted_integral(spec, u, g0, last, gamma, quad)?;
    let mut out = vec![far; radii.len()];
    for i in (0..radii.len() - 1).rev() {
        let ann = annulus_integral(spec, u, g0, radii[i], radii[i + 1], gamma, quad)?;
        let prev = out[i + 1];
        out[i] = Estimate::new(prev.value + ann.value, prev.error + ann.error);
    }
    Ok(out)
}

/// `∫_{r<|c⁻¹w|<R} u(w) |c⁻¹w|^{−γ} dw`.
fn annulus_integral(
    spec: &GroupSpec,
    u: &ScalarField,
    c: &GroupPoint,
    r: f64,
    big_r: f64,
    gamma: f64,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    if u.singular_exponent.is_some() && u.localized {
        let d = spec.distance(c, &u.center);
        if d > r && d < big_r {
            return Err(Error::Unsupported("annulus containing the field's singular point".into()));
        }
    }
    let per = quad.shells_per_decade.max(4);
    let mut extra = vec![];
    if u.localized {
        let d = spec.distance(c, &u.center);
        extra.extend([d - u.scale, d, d + u.scale]);
        if let Some(rs) = u.support_radius {
            extra.extend([d - rs, d + rs]);
        }
    }
    let breaks = engine::shell_breaks(r, big_r, per, &extra);
    let q = spec.qf();
    let res = refine(spec, quad, |polar, lvl| {
        let f = |rho: f64, w: &GroupPoint| u.eval(&spec.mul_unchecked(c, &dilate_unchecked(rho, w)));
        let v = polar.shells(&breaks, lvl.n_r, q - 1.0 - gamma, &f);
        Ok(Part { parts: [v], model_err: 0.0, scale: v.abs() })
    })?;
    Ok(Estimate::new(res.value, res.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{omega_q, sigma_q};

    fn h1() -> GroupSpec {
        GroupSpec::heisenberg(1)
    }

    #[test]
    fn constant_field_gives_exact_zero() {
        let spec = h1();
        let u = ScalarField::constant(&spec, 3.5);
        let g = GroupPoint::new(&[0.3, -1.0], &[0.2]);
        let r = apply_ls(&spec, &u, &g, 0.5, &QuadratureConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.breakdown, Breakdown::default());
    }

    #[test]
    fn breakdown_sums_to_value() {
        let spec = h1();
        let u = ScalarField::gaussian(&spec, spec.identity(), 1.0);
        let r = apply_ls(&spec, &u, &spec.identity(), 0.5, &QuadratureConfig::default()).unwrap();
        assert_eq!(r.breakdown.total(), r.value);
        assert!(r.value.is_finite() && r.value > 0.0);
    }

    #[test]
    fn fundamental_profile_is_harmonic_off_the_pole() {
        let spec = h1();
        let s = 0.5;
        let u = ScalarField::fundamental_profile(&spec, s);
        let g = GroupPoint::new(&[2.0, 0.0], &[0.0]);
        let r = apply_ls(&spec, &u, &g, s, &QuadratureConfig::default()).unwrap();
        let scale = r.breakdown.inner.abs() + r.breakdown.outer.abs();
        assert!(r.value.abs() <= 10.0 * r.error_estimate.max(1e-9 * scale), "{r:?}");
    }

    #[test]
    fn tail_of_fundamental_profile() {
        let spec = h1();
        let s = 0.3;
        let u = ScalarField::fundamental_profile(&spec, s);
        let q = spec.qf();
        for r in [1.0, 4.0] {
            let t = tail(&spec, &u, &spec.identity(), r, s, &QuadratureConfig::default()).unwrap();
            let exact = r.powf(2.0 * s) * sigma_q(&spec) * r.powf(-q) / q;
            assert!((t.value / exact - 1.0).abs() < 1e-8, "{t:?} {exact}");
            assert!((exact - omega_q(&spec) * r.powf(2.0 * s - q)).abs() < 1e-14 * exact);
        }
    }

    #[test]
    fn singular_and_rough_fields_are_rejected() {
        let spec = h1();
        let q = QuadratureConfig::default();
        let u = ScalarField::fundamental_profile(&spec, 0.5);
        assert!(matches!(apply_ls(&spec, &u, &spec.identity(), 0.5, &q), Err(Error::Singular(_))));
        let rough = ScalarField::bump(&spec, spec.identity(), 1.0).not_smooth();
        assert!(matches!(apply_ls(&spec, &rough, &spec.identity(), 0.5, &q), Err(Error::Precondition(_))));
        let grows = ScalarField::z_norm_sq(&spec);
        assert!(matches!(apply_ls(&spec, &grows, &spec.identity(), 0.5, &q), Err(Error::Refused(_))));
    }

    #[test]
    fn tail_profile_is_monotone() {
        let spec = h1();
        let u = ScalarField::gaussian(&spec, GroupPoint::new(&[1.0, 0.0], &[0.0]), 1.0);
        let radii = [0.5, 1.0, 2.0, 4.0];
        let p = tail_profile(&spec, &u, &spec.identity(), &radii, 0.5, &QuadratureConfig::default()).unwrap();
        assert!(p.windows(2).all(|w| w[1].value <= w[0].value));
        let direct = tail(&spec, &u, &spec.identity(), 1.0, 0.5, &QuadratureConfig::default()).unwrap();
        assert!((direct.value - p[1].value).abs() < 1e-6 * direct.value);
    }
}
