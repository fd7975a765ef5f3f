//! Intertwined heat kernels and the Riesz-type kernel obtained from the
//! heat semigroup.
//!
//! For `k ≥ 1`,
//!
//! ```text
//! 𝒦_(±s)((z,σ), t) = 2^k (4πt)^{−(m/2+k)} ∫_{ℝ^k} e^{−i⟨σ,λ⟩/t} F_n(|λ|) dλ,
//! F_n(λ) = (λ / sinh λ)^n e^{−(|z|²/4t) λ coth λ},   n = m/2 + 1 ∓ s,
//! ```
//!
//! and `p(h, t)` is the branch `n = m/2`. `F_n` is analytic in the strip
//! `|Im λ| < π`, so the oscillatory factor is tamed by moving the contour to
//! `Im λ = θ`, which trades oscillation for the damping factor `e^{−ωθ}`
//! (`ω = |σ|/t`). The shift `θ` minimizes the modulus of the shifted
//! integrand at `Re λ = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::group::{GroupPoint, GroupSpec};
use crate::quadrature::{integrate, integrate_breaks, Estimate};
use crate::special::{gamma, log_gamma};

/// Selects the exponent `m/2 + 1 ∓ s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `𝒦_(+s)`, exponent `m/2 + 1 − s`.
    Plus,
    /// `𝒦_(−s)`, exponent `m/2 + 1 + s`.
    Minus,
}

#[derive(Clone, Copy, Debug)]
pub struct HeatKernelQuery<'a> {
    pub spec: &'a GroupSpec,
    pub point: &'a GroupPoint,
    pub t: f64,
    pub s: f64,
    pub branch: Branch,
}

impl<'a> HeatKernelQuery<'a> {
    /// The plain heat kernel `p(h, t)` (branch `+`, `s = 1`).
    pub fn heat(spec: &'a GroupSpec, point: &'a GroupPoint, t: f64) -> Self {
        HeatKernelQuery { spec, point, t, s: 1.0, branch: Branch::Plus }
    }

    fn exponent(&self) -> f64 {
        let h = self.spec.m() as f64 / 2.0 + 1.0;
        match self.branch {
            Branch::Plus => h - self.s,
            Branch::Minus => h + self.s,
        }
    }
}

const SEGMENT_CAP: usize = 4000;

/// `ln(λ / sinh λ)` on the closed right half of the strip `|Im λ| < π`,
/// continued from the real axis.
fn ln_ratio(l: Complex64) -> Complex64 {
    if l.norm() < 0.01 {
        let l2 = l * l;
        return l2 * (-1.0 / 6.0 + l2 * (1.0 / 180.0 - l2 / 2835.0));
    }
    if l.re >= 1.0 {
        let e = (-2.0 * l).exp();
        l.ln() - (l + (Complex64::new(1.0, 0.0) - e).ln() - std::f64::consts::LN_2)
    } else {
        l.ln() - l.sinh().ln()
    }
}

/// `λ coth λ`.
fn lcoth(l: Complex64) -> Complex64 {
    if l.norm() < 0.01 {
        let l2 = l * l;
        return 1.0 + l2 * (1.0 / 3.0 + l2 * (-1.0 / 45.0 + l2 * 2.0 / 945.0));
    }
    let e = (-2.0 * l).exp();
    l * (1.0 + e) / (1.0 - e)
}

fn ln_f(n: f64, a: f64, l: Complex64) -> Complex64 {
    n * ln_ratio(l) - a * lcoth(l)
}

fn ln_f_real(n: f64, a: f64, x: f64) -> f64 {
    ln_f(n, a, Complex64::new(x, 0.0)).re
}

/// Golden-section minimization of a convex function on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let (xm, fm) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if f(lo) < fm {
        lo
    } else if f(hi) < fm {
        hi
    } else {
        xm
    }
}

const THETA_MAX: f64 = PI - 0.02;

/// Log-modulus of the shifted integrand at `Re λ = 0`, including `e^{−ωθ}`.
fn shift_objective(n: f64, a: f64, omega: f64, th: f64) -> f64 {
    if th < 1e-8 {
        return 0.0;
    }
    -omega * th + n * (th / th.sin()).ln() - a * th / th.tan()
}

/// Length after which `(2x)^p e^{−c x}` has dropped below `e^{−40}`.
fn decay_cutoff(p: f64, c: f64) -> f64 {
    let mut x = 40.0 / c;
    for _ in 0..50 {
        x = (40.0 + p * (1.0 + 2.0 * x).ln()) / c;
    }
    x.max(1.0)
}

fn phase_breaks(x_end: f64, omega: f64) -> Vec<f64> {
    let pieces = ((omega * x_end / (2.0 * PI)).ceil() as usize).clamp(1, SEGMENT_CAP / 4);
    (0..=pieces).map(|i| x_end * i as f64 / pieces as f64).collect()
}

/// `∫_{ℝ^k} e^{−i⟨σ,λ⟩/t} F_n(|λ|) dλ` for `k ∈ {1, 3}`, with `a = |z|²/4t`
/// and `ω = |σ|/t`.
pub(crate) fn lambda_integral(k: usize, n: f64, a: f64, omega: f64, rel_tol: f64) -> Result<Estimate> {
    if k != 1 && k != 3 {
        return Err(Error::Unsupported(format!(
            "heat kernel for vertical dimension k = {k} (only k ∈ {{0, 1, 3}} ship)"
        )));
    }
    let extra = if k == 3 { 2.0 } else { 0.0 };
    let x_end = decay_cutoff(n + extra, n + a);
    let th = if omega * x_end < 1.0 {
        0.0
    } else {
        golden_min(|t| shift_objective(n, a, omega, t), 0.0, THETA_MAX, 80)
    };
    let abs_floor = 1e-300;
    if th < 1e-3 {
        // Real axis; oscillation is mild.
        let l0 = ln_f_real(n, a, 0.0);
        let breaks = phase_breaks(x_end, omega);
        let r = if k == 1 {
            integrate_breaks(
                &mut |x: f64| 2.0 * (omega * x).cos() * (ln_f_real(n, a, x) - l0).exp(),
                &breaks,
                abs_floor,
                rel_tol,
                SEGMENT_CAP,
            )
        } else {
            integrate_breaks(
                &mut |x: f64| {
                    let wx = omega * x;
                    let sinc = if wx.abs() < 1e-4 { 1.0 - wx * wx / 6.0 } else { wx.sin() / wx };
                    4.0 * PI * x * x * sinc * (ln_f_real(n, a, x) - l0).exp()
                },
                &breaks,
                abs_floor,
                rel_tol,
                SEGMENT_CAP,
            )
        };
        let scale = l0.exp();
        let tail = tail_bound(k, n, a, x_end, l0);
        return Ok(Estimate::new(r.value * scale, (r.error + tail) * scale));
    }
    let i = Complex64::new(0.0, 1.0);
    let l_ref = shift_objective(n, a, omega, th);
    let breaks = phase_breaks(x_end, omega);
    let r = integrate_breaks(
        &mut |x: f64| {
            let l = Complex64::new(x, th);
            // e^{−ωθ} is carried inside so the reference scale is the true modulus.
            let mut v = (ln_f(n, a, l) + i * omega * x - omega * th - l_ref).exp();
            if k == 3 {
                v *= l;
            }
            v
        },
        &breaks,
        abs_floor,
        rel_tol,
        SEGMENT_CAP,
    );
    let scale = l_ref.exp();
    let tail = tail_bound(k, n, a, x_end, l_ref);
    if k == 1 {
        Ok(Estimate::new(2.0 * r.value.re * scale, 2.0 * (r.error + tail) * scale))
    } else {
        let c = 4.0 * PI / omega;
        Ok(Estimate::new(c * r.value.im * scale, c * (r.error + tail) * scale))
    }
}

/// Bound on the discarded `x > x_end` piece, relative to `e^{l_ref}`.
fn tail_bound(k: usize, n: f64, a: f64, x_end: f64, l_ref: f64) -> f64 {
    let p = if k == 3 { n + 2.0 } else { n };
    let c = n + a;
    ((2.0 * x_end).powf(p) * (-c * x_end).exp() / c * 4.0 * PI * (-l_ref).exp().min(1e300)).min(1e300)
}

/// `𝒦_(±s)` (or `p` when `s = 1`, branch `+`). The Euclidean path is the
/// Gaussian `(4πt)^{−n/2} e^{−|x|²/4t}`.
pub fn heat_kernel(q: &HeatKernelQuery<'_>, quad: &QuadratureConfig) -> Result<Estimate> {
    let spec = q.spec;
    spec.check_point(q.point)?;
    if !(q.t > 0.0) || !q.t.is_finite() {
        return Err(Error::InvalidInput(format!("heat kernel time must be positive, got {}", q.t)));
    }
    if !(q.s > 0.0 && q.s <= 1.0) {
        return Err(Error::InvalidInput(format!("s must lie in (0, 1], got {}", q.s)));
    }
    let (m, k) = (spec.m() as f64, spec.k());
    let z2 = q.point.z_norm_sq();
    if k == 0 {
        return Ok(Estimate::exact((4.0 * PI * q.t).powf(-m / 2.0) * (-z2 / (4.0 * q.t)).exp()));
    }
    let a = z2 / (4.0 * q.t);
    let omega = q.point.sigma_norm_sq().sqrt() / q.t;
    let inner = lambda_integral(k, q.exponent(), a, omega, quad.rel_tol.min(1e-9))?;
    let pre = 2f64.powi(k as i32) * (4.0 * PI * q.t).powf(-(m / 2.0 + k as f64));
    Ok(inner.scale(pre))
}

/// `1/‖h‖_(s)^{Q+2s}` with both evaluation routes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RieszKernel {
    pub value: f64,
    pub error: f64,
    /// Nested `(t, λ)` quadrature.
    pub nested: Estimate,
    /// Single λ-integral after integrating `t` analytically; needs `z ≠ 0`
    /// when `k ≥ 1`, and is the closed form when `k = 0`.
    pub reduced: Option<Estimate>,
}

impl RieszKernel {
    /// Relative gap between the two routes, when both exist.
    pub fn route_gap(&self) -> Option<f64> {
        self.reduced.map(|r| ((r.value - self.nested.value) / r.value).abs())
    }
}

/// Effective exponent `E` with `p(h, t) ≈ e^{−E/t}` as `t → 0`:
/// `max_θ [ |σ| θ + (|z|²/4) θ cot θ ]`.
fn small_time_exponent(spec: &GroupSpec, h: &GroupPoint) -> f64 {
    let z2 = h.z_norm_sq();
    if spec.k() == 0 {
        return z2 / 4.0;
    }
    let sig = h.sigma_norm_sq().sqrt();
    let f = |th: f64| {
        let c = if th < 1e-8 { 1.0 } else { th / th.tan() };
        -(sig * th + 0.25 * z2 * c)
    };
    let th = golden_min(f, 0.0, PI - 1e-9, 120);
    -f(th)
}

/// `(2s/Γ(1−s)) ∫_0^∞ t^{−1−s} p(h, t) dt`.
pub fn riesz_norm_kernel(spec: &GroupSpec, h: &GroupPoint, s: f64, quad: &QuadratureConfig) -> Result<RieszKernel> {
    spec.check_point(h)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidInput(format!("s must lie in (0, 1), got {s}")));
    }
    if h.is_identity() {
        return Err(Error::Singular("the Riesz kernel is singular at the identity".into()));
    }
    if spec.k() != 0 && spec.k() != 1 && spec.k() != 3 {
        return Err(Error::Unsupported(format!("Riesz kernel for k = {}", spec.k())));
    }
    let c_s = 2.0 * s / gamma(1.0 - s)?;
    let nested = riesz_nested(spec, h, s, quad)?.scale(c_s);
    let reduced = riesz_reduced(spec, h, s, quad)?.map(|e| e.scale(c_s));
    let best = reduced.unwrap_or(nested);
    Ok(RieszKernel { value: best.value, error: best.error, nested, reduced })
}

fn riesz_nested(spec: &GroupSpec, h: &GroupPoint, s: f64, quad: &QuadratureConfig) -> Result<Estimate> {
    let q = spec.qf();
    let e = small_time_exponent(spec, h).max(1e-300);
    let decay = s + q / 2.0;
    let u_lo = (e / 120.0).ln();
    let u_hi = e.ln() + 40.0 / decay;
    let inner_tol = (quad.rel_tol * 1e-3).clamp(1e-12, 1e-9);
    let mut failure = None;
    let mut eval = |u: f64| -> f64 {
        let t = u.exp();
        match heat_kernel(
            &HeatKernelQuery::heat(spec, h, t),
            &QuadratureConfig { rel_tol: inner_tol, ..quad.clone() },
        ) {
            Ok(p) => (-s * u).exp() * p.value,
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        }
    };
    let outer_tol = quad.rel_tol.clamp(1e-11, 1e-8);
    let r = integrate(&mut eval, u_lo, u_hi, 0.0, outer_tol, 200);
    if let Some(err) = failure {
        return Err(err);
    }
    // Beyond t_hi the kernel behaves like p(h, t_hi)(t_hi/t)^{Q/2}.
    let t_hi = u_hi.exp();
    let p_hi = heat_kernel(&HeatKernelQuery::heat(spec, h, t_hi), quad)?.value;
    let tail = p_hi * t_hi.powf(-s) / decay;
    // Inner quadrature errors accumulate relative to the integrand.
    let err = r.error + inner_tol * r.abs_value + tail.abs() * 1e-2;
    Ok(Estimate::new(r.value + tail, err))
}

fn riesz_reduced(spec: &GroupSpec, h: &GroupPoint, s: f64, quad: &QuadratureConfig) -> Result<Option<Estimate>> {
    let (m, k) = (spec.m() as f64, spec.k());
    let q = spec.qf();
    let nu = s + q / 2.0;
    let z2 = h.z_norm_sq();
    if k == 0 {
        // ∫ t^{−1−s} (4πt)^{−n/2} e^{−|x|²/4t} dt = (4π)^{−n/2} Γ(ν) (|x|²/4)^{−ν}.
        let v = (-(q / 2.0) * (4.0 * PI).ln() + log_gamma(nu)? - nu * (z2 / 4.0).ln()).exp();
        return Ok(Some(Estimate::new(v, 4.0 * f64::EPSILON * v)));
    }
    if z2 == 0.0 {
        return Ok(None);
    }
    let sig = h.sigma_norm_sq().sqrt();
    let half_m = m / 2.0;
    let lam_end = decay_cutoff(half_m + if k == 3 { 2.0 } else { 0.0 }, half_m);
    let f = |l: f64| -> f64 {
        let fl = (half_m * ln_f_real(1.0, 0.0, l)).exp();
        let a = 0.25 * z2 * lcoth(Complex64::new(l, 0.0)).re;
        if k == 1 {
            2.0 * fl * Complex64::new(a, sig * l).powf(-nu).re
        } else {
            let b = sig * l;
            let ang = if b < 1e-8 * a {
                4.0 * PI * a.powf(-nu)
            } else {
                4.0 * PI * Complex64::new(a, b).powf(1.0 - nu).im / (b * (1.0 - nu))
            };
            l * l * fl * ang
        }
    };
    let r = integrate(f, 0.0, lam_end, 0.0, quad.rel_tol.clamp(1e-13, 1e-10), 400);
    let pre = 2f64.powi(k as i32) * (4.0 * PI).powf(-q / 2.0) * gamma(nu)?;
    let a0 = 0.25 * z2;
    let tail = 4.0 * PI * (2.0 * lam_end).powf(half_m + 2.0) * (-half_m * lam_end).exp() * a0.powf(-nu) / half_m;
    Ok(Some(Estimate::new(r.value * pre, (r.error + tail) * pre)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::dilate_unchecked;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn h1(x: f64, y: f64, s: f64) -> GroupPoint {
        GroupPoint::new(&[x, y], &[s])
    }

    #[test]
    fn series_branches_are_continuous() {
        for &th in &[0.0, 0.5, 2.0, 3.0] {
            for &x in &[0.00999, 0.01001, 0.999, 1.001] {
                let l = Complex64::new(x, th * 0.001);
                let d = (ln_ratio(l) - (l.ln() - l.sinh().ln())).norm();
                assert!(d < 1e-12, "x={x} θ={th}: {d}");
                let d = (lcoth(l) - l * l.cosh() / l.sinh()).norm();
                assert!(d < 1e-12);
            }
        }
        let l = Complex64::new(1.5, 2.9);
        assert!((ln_ratio(l) - (l.ln() - l.sinh().ln())).norm() < 1e-13);
    }

    #[test]
    fn origin_matches_one_dimensional_oracle() {
        let spec = GroupSpec::heisenberg(1);
        let e = spec.identity();
        for (branch, n) in [(Branch::Plus, 1.5), (Branch::Minus, 2.5)] {
            let t = 0.7;
            let qq = HeatKernelQuery { spec: &spec, point: &e, t, s: 0.5, branch };
            let v = heat_kernel(&qq, &q()).unwrap();
            let oracle = integrate(
                |l: f64| if l == 0.0 { 1.0 } else { (l / l.sinh()).powf(n) },
                0.0,
                60.0,
                0.0,
                1e-14,
                200,
            )
            .value;
            let expect = 2.0 * (4.0 * PI * t).powf(-2.0) * 2.0 * oracle;
            assert!((v.value / expect - 1.0).abs() < 1e-10, "{} vs {expect}", v.value);
        }
    }

    #[test]
    fn contour_shift_matches_real_axis() {
        // Moderate ω is computable both ways.
        for &(a, w) in &[(0.3, 2.0), (0.0, 3.0), (1.5, 5.0)] {
            let shifted = lambda_integral(1, 1.0, a, w, 1e-12).unwrap();
            let direct = integrate(
                |x: f64| 2.0 * (w * x).cos() * ln_f_real(1.0, a, x).exp(),
                0.0,
                80.0,
                0.0,
                1e-14,
                2000,
            )
            .value;
            assert!((shifted.value - direct).abs() < 1e-11, "a={a} ω={w}: {} vs {direct}", shifted.value);
        }
    }

    #[test]
    fn k3_reduction_matches_real_axis() {
        for &(a, w) in &[(0.2, 1.7), (0.0, 4.0)] {
            let shifted = lambda_integral(3, 2.0, a, w, 1e-12).unwrap();
            let direct = integrate(
                |x: f64| {
                    let f = ln_f_real(2.0, a, x).exp();
                    if x == 0.0 {
                        0.0
                    } else {
                        4.0 * PI * x * (w * x).sin() / w * f
                    }
                },
                0.0,
                80.0,
                0.0,
                1e-14,
                2000,
            )
            .value;
            assert!((shifted.value - direct).abs() < 1e-10 * direct.abs().max(1e-3), "{} vs {direct}", shifted.value);
        }
    }

    #[test]
    fn parabolic_scaling() {
        let spec = GroupSpec::heisenberg(1);
        let g = h1(0.4, -0.3, 0.8);
        let t = 0.5;
        let base = heat_kernel(&HeatKernelQuery::heat(&spec, &g, t), &q()).unwrap();
        for &lam in &[0.5, 3.0] {
            let gl = dilate_unchecked(lam, &g);
            let v = heat_kernel(&HeatKernelQuery::heat(&spec, &gl, lam * lam * t), &q()).unwrap();
            assert!((v.value * lam.powi(4) / base.value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unsupported_vertical_dimension() {
        let j1 = vec![0.0, 1.0, -1.0, 0.0];
        let spec = GroupSpec::custom_unchecked(2, vec![j1.clone(), j1]);
        let g = GroupPoint::new(&[0.1, 0.2], &[0.3, 0.1]);
        assert!(matches!(
            heat_kernel(&HeatKernelQuery::heat(&spec, &g, 1.0), &q()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn euclidean_gaussian_exact() {
        let spec = GroupSpec::euclidean(3);
        let g = GroupPoint::new(&[1.0, 0.5, -0.25], &[]);
        let v = heat_kernel(&HeatKernelQuery::heat(&spec, &g, 0.3), &q()).unwrap();
        let e = (4.0 * PI * 0.3f64).powf(-1.5) * (-1.3125f64 / 1.2).exp();
        assert_eq!(v.value, e);
    }

    #[test]
    fn h1_kernel_is_positive_with_tight_error() {
        let spec = GroupSpec::heisenberg(1);
        let g = h1(0.3, 0.2, 0.4);
        let v = heat_kernel(&HeatKernelQuery::heat(&spec, &g, 1.0), &q()).unwrap();
        assert!(v.value > 0.0 && v.error < 1e-10 * v.value);
    }

    #[test]
    fn riesz_euclidean_closed_form() {
        for n in 1..=3 {
            let spec = GroupSpec::euclidean(n);
            let x: Vec<f64> = (0..n).map(|i| 0.4 + 0.3 * i as f64).collect();
            let g = GroupPoint::new(&x, &[]);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for &s in &[0.25, 0.5, 0.75] {
                let k = riesz_norm_kernel(&spec, &g, s, &q()).unwrap();
                let exact = crate::special::euclidean_riesz_constant(n, s).unwrap() * r.powf(-(n as f64 + 2.0 * s));
                assert!((k.nested.value / exact - 1.0).abs() < 1e-8, "n={n} s={s}: {} vs {exact}", k.nested.value);
            }
        }
    }

    #[test]
    fn riesz_routes_agree_on_h1() {
        let spec = GroupSpec::heisenberg(1);
        for g in [h1(1.0, 0.0, 0.0), h1(0.6, -0.2, 0.3), h1(0.1, 0.1, 0.5)] {
            let k = riesz_norm_kernel(&spec, &g, 0.5, &q()).unwrap();
            let gap = k.route_gap().unwrap();
            let red = k.reduced.unwrap();
            let tol = 1e-8f64.max(5.0 * red.error.hypot(k.nested.error) / red.value);
            assert!(gap < tol, "{g}: gap {gap} tol {tol}");
        }
    }

    #[test]
    fn riesz_identity_is_singular() {
        let spec = GroupSpec::heisenberg(1);
        assert!(matches!(
            riesz_norm_kernel(&spec, &spec.identity(), 0.5, &q()),
            Err(Error::Singular(_))
        ));
    }
}
