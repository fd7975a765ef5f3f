//! Left-invariant horizontal derivatives by central differences along the
//! group curves `t ↦ g ∘ (t e_j, 0)`, with one Richardson level.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{GroupPoint, GroupSpec};
use crate::quadrature::Estimate;

fn base_step(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, power: f64) -> f64 {
    f64::EPSILON.powf(power) * spec.gauge_unchecked(g).max(1.0) * u.scale.min(1.0)
}

fn check(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, j: usize, h: f64) -> Result<()> {
    spec.check_point(g)?;
    if j >= spec.m() {
        return Err(Error::InvalidInput(format!("horizontal index {j} out of range 0..{}", spec.m())));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    // Below this the perturbation is lost in the coordinates themselves.
    if h <= 64.0 * f64::EPSILON * spec.gauge_unchecked(g).max(1.0) {
        return Err(Error::Precision(format!("difference step {h:e} underflows at {g}")));
    }
    if !u.smooth_near(spec, g) {
        return Err(Error::Precondition(format!("field `{}` is not smooth near {g}", u.name())));
    }
    Ok(())
}

fn along(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, j: usize, t: f64) -> f64 {
    u.eval(&spec.mul_unchecked(g, &spec.horizontal_unit(j, t)))
}

/// `X_j u(g)` with step `h` and `h/2`, extrapolated.
pub fn horizontal_derivative_with_step(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, j: usize, h: f64) -> Result<Estimate> {
    check(spec, u, g, j, h)?;
    let d = |t: f64| (along(spec, u, g, j, t) - along(spec, u, g, j, -t)) / (2.0 * t);
    let (d1, d2) = (d(h), d(0.5 * h));
    let rich = (4.0 * d2 - d1) / 3.0;
    Ok(Estimate::new(rich, (rich - d2).abs()))
}

/// `X_j u(g)` with the default step `ε^{1/3} · max(1, |g|)` (shrunk for
/// fields varying on scales below 1).
pub fn horizontal_derivative(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, j: usize) -> Result<Estimate> {
    horizontal_derivative_with_step(spec, u, g, j, base_step(spec, u, g, 1.0 / 3.0))
}

/// `Σ_j X_j² u(g)` with step `h` and `h/2`, extrapolated.
pub fn sub_laplacian_with_step(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint, h: f64) -> Result<Estimate> {
    let u0 = u.eval(g);
    let mut val = 0.0;
    let mut err = 0.0;
    for j in 0..spec.m() {
        check(spec, u, g, j, h)?;
        let d = |t: f64| (along(spec, u, g, j, t) - 2.0 * u0 + along(spec, u, g, j, -t)) / (t * t);
        let (d1, d2) = (d(h), d(0.5 * h));
        let rich = (4.0 * d2 - d1) / 3.0;
        val += rich;
        err += (rich - d2).abs();
    }
    Ok(Estimate::new(val, err))
}

/// `Σ_j X_j² u(g)`. The second difference loses `ε/h²` to rounding, so
/// the default step is `ε^{1/6} · max(1, |g|)` rather than `ε^{1/3}`.
pub fn sub_laplacian(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint) -> Result<Estimate> {
    sub_laplacian_with_step(spec, u, g, base_step(spec, u, g, 1.0 / 6.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_fields() {
        for spec in [GroupSpec::heisenberg(1), GroupSpec::quaternionic(1).unwrap(), GroupSpec::euclidean(3)] {
            let g = GroupPoint::new(&vec![0.7; spec.m()], &vec![-0.3; spec.k()]);
            let zz = ScalarField::z_norm_sq(&spec);
            let l = sub_laplacian(&spec, &zz, &g).unwrap();
            assert!((l.value - 2.0 * spec.m() as f64).abs() < 1e-8, "{} {l:?}", spec.id());
            for a in 0..spec.k() {
                let sa = ScalarField::sigma_coord(&spec, a);
                assert!(sub_laplacian(&spec, &sa, &g).unwrap().value.abs() < 1e-8);
            }
            // X_j |z|² = 2 z_j.
            let d = horizontal_derivative(&spec, &zz, &g, 0).unwrap();
            assert!((d.value - 1.4).abs() < 1e-8);
        }
    }

    #[test]
    fn left_invariant_vector_field_on_h1() {
        // Along g∘(t e_j) the vertical coordinate moves by ½⟨J z, t e_j⟩.
        let spec = GroupSpec::heisenberg(1);
        let g = GroupPoint::new(&[0.4, 1.5], &[0.0]);
        let sa = ScalarField::sigma_coord(&spec, 0);
        let d0 = horizontal_derivative(&spec, &sa, &g, 0).unwrap().value;
        let d1 = horizontal_derivative(&spec, &sa, &g, 1).unwrap().value;
        let p = spec.multiply(&g, &spec.horizontal_unit(0, 1.0)).unwrap();
        assert!((d0 - (p.sigma[0] - g.sigma[0])).abs() < 1e-9);
        assert!((d0 - 0.75).abs() < 1e-9 && (d1 + 0.2).abs() < 1e-9, "{d0} {d1}");
    }

    #[test]
    fn gaussian_step_halving() {
        let spec = GroupSpec::heisenberg(1);
        let u = ScalarField::gaussian(&spec, spec.identity(), 1.0);
        let g = GroupPoint::new(&[0.3, -0.2], &[0.1]);
        let h = f64::EPSILON.powf(1.0 / 6.0);
        let a = sub_laplacian_with_step(&spec, &u, &g, h).unwrap().value;
        let b = sub_laplacian_with_step(&spec, &u, &g, 0.5 * h).unwrap().value;
        assert!((a - b).abs() < 1e-6 * a.abs());
    }

    #[test]
    fn tiny_step_is_a_precision_error() {
        let spec = GroupSpec::heisenberg(1);
        let u = ScalarField::z_norm_sq(&spec);
        let r = horizontal_derivative_with_step(&spec, &u, &spec.identity(), 0, 1e-300);
        assert!(matches!(r, Err(Error::Precision(_))));
    }
}
