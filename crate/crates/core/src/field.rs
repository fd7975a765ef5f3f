//! Scalar fields on the group with the metadata the integrators rely on.

use std::fmt;
use std::sync::Arc;

use crate::group::{dilate_unchecked, inverse_unchecked, GroupPoint, GroupSpec};
use crate::quadrature::SphereSampler;
use crate::report::{CheckRecord, CheckSet, Provenance};

pub type FieldFn = Arc<dyn Fn(&GroupPoint) -> f64 + Send + Sync>;

/// A deterministic real-valued function on the group.
///
/// * `decay_exponent = β` asserts `|u(g)| ≤ C |g|^{−β}` for large `|g|`.
/// * `support_radius = R` asserts `u = 0` outside the gauge ball `B(center, R)`.
/// * `singular_exponent = a` means `u(g) = |center⁻¹g|^{−a} · (smooth)` near
///   `center`, where the field is not evaluated.
/// * `scale` is the length on which the field varies near `center`.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    eval: FieldFn,
    pub decay_exponent: Option<f64>,
    pub support_radius: Option<f64>,
    pub smooth: bool,
    pub center: GroupPoint,
    pub scale: f64,
    pub singular_exponent: Option<f64>,
    pub bound: Option<f64>,
    pub nonnegative: bool,
    /// `false` for fields such as constants that have no preferred location.
    pub localized: bool,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("decay_exponent", &self.decay_exponent)
            .field("support_radius", &self.support_radius)
            .field("smooth", &self.smooth)
            .field("center", &self.center)
            .field("scale", &self.scale)
            .field("singular_exponent", &self.singular_exponent)
            .field("bound", &self.bound)
            .finish()
    }
}

impl ScalarField {
    /// A field with no metadata; callers add what they can assert.
    pub fn new(spec: &GroupSpec, name: impl Into<String>, f: impl Fn(&GroupPoint) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            name: name.into(),
            eval: Arc::new(f),
            decay_exponent: None,
            support_radius: None,
            smooth: true,
            center: spec.identity(),
            scale: 1.0,
            singular_exponent: None,
            bound: None,
            nonnegative: false,
            localized: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, g: &GroupPoint) -> f64 {
        (self.eval)(g)
    }

    pub fn with_decay(mut self, beta: f64) -> Self {
        self.decay_exponent = Some(beta);
        self
    }

    pub fn with_support(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn with_bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn with_center(mut self, c: GroupPoint) -> Self {
        self.center = c;
        self
    }

    pub fn with_scale(mut self, l: f64) -> Self {
        self.scale = l;
        self
    }

    pub fn with_singularity(mut self, a: f64) -> Self {
        self.singular_exponent = Some(a);
        self
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonnegative = true;
        self
    }

    pub fn not_smooth(mut self) -> Self {
        self.smooth = false;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Whether the field may be treated as C² in a neighbourhood of `g`.
    pub fn smooth_near(&self, spec: &GroupSpec, g: &GroupPoint) -> bool {
        self.smooth && (self.singular_exponent.is_none() || spec.distance(&self.center, g) > 0.0)
    }

    // ---- catalog -------------------------------------------------------

    pub fn constant(spec: &GroupSpec, c: f64) -> Self {
        let mut f = ScalarField::new(spec, format!("constant({c})"), move |_| c)
            .with_bound(c.abs())
            .with_decay(0.0);
        f.nonnegative = c >= 0.0;
        f.localized = false;
        f
    }

    pub fn zero(spec: &GroupSpec) -> Self {
        let mut f = ScalarField::new(spec, "zero", |_| 0.0).with_bound(0.0).with_support(0.0);
        f.nonnegative = true;
        f.localized = false;
        f
    }

    /// C⁴ bump `(1 − |z|²/R² − 16|σ|²/R⁴)₊^5` around `center`, supported in
    /// the gauge ball of radius `R` (since `(|z|²/R²)² ≤ |z|²/R²` there).
    pub fn bump(spec: &GroupSpec, center: GroupPoint, radius: f64) -> Self {
        let (r2, r4) = (radius * radius, radius.powi(4));
        let sp = spec.clone();
        let c_inv = inverse_unchecked(&center);
        ScalarField::new(spec, format!("bump(R={radius})"), move |g| {
            let w = sp.mul_unchecked(&c_inv, g);
            let q = 1.0 - w.z_norm_sq() / r2 - 16.0 * w.sigma_norm_sq() / r4;
            if q > 0.0 {
                q.powi(5)
            } else {
                0.0
            }
        })
        .with_center(center)
        .with_support(radius)
        .with_scale(radius)
        .with_bound(1.0)
        .nonnegative()
    }

    /// Wide plateau: equal to 1 on `B(center, inner)` and supported in
    /// `B(center, outer)`, with a C⁴ radial profile in the gauge in between.
    pub fn plateau(spec: &GroupSpec, center: GroupPoint, inner: f64, outer: f64) -> Self {
        assert!(outer > inner && inner > 0.0);
        let sp = spec.clone();
        let c_inv = inverse_unchecked(&center);
        ScalarField::new(spec, format!("plateau({inner},{outer})"), move |g| {
            let r = sp.gauge_unchecked(&sp.mul_unchecked(&c_inv, g));
            if r <= inner {
                1.0
            } else if r >= outer {
                0.0
            } else {
                // Quintic-like C⁴ ramp in t ∈ (0, 1), expressed through r⁴ to stay smooth at the gauge.
                let t = (r.powi(4) - inner.powi(4)) / (outer.powi(4) - inner.powi(4));
                smoothstep5(1.0 - t)
            }
        })
        .with_center(center)
        .with_support(outer)
        .with_scale(outer - inner)
        .with_bound(1.0)
        .nonnegative()
    }

    /// `exp(−(|z|² + |σ|²)/L²)` around `center`.
    pub fn gaussian(spec: &GroupSpec, center: GroupPoint, l: f64) -> Self {
        let sp = spec.clone();
        let c_inv = inverse_unchecked(&center);
        let l2 = l * l;
        ScalarField::new(spec, format!("gaussian(L={l})"), move |g| {
            let w = sp.mul_unchecked(&c_inv, g);
            (-(w.z_norm_sq() + w.sigma_norm_sq()) / l2).exp()
        })
        .with_center(center)
        .with_scale(l)
        .with_bound(1.0)
        .with_decay(40.0)
        .nonnegative()
    }

    /// `|z|²` (unbounded; no decay).
    pub fn z_norm_sq(spec: &GroupSpec) -> Self {
        ScalarField::new(spec, "|z|^2", |g| g.z_norm_sq()).nonnegative()
    }

    /// The vertical coordinate `σ_a`.
    pub fn sigma_coord(spec: &GroupSpec, a: usize) -> Self {
        assert!(a < spec.k());
        ScalarField::new(spec, format!("sigma_{a}"), move |g| g.sigma[a])
    }

    /// `|center⁻¹ g|^{−β}`, singular at `center`.
    pub fn gauge_power(spec: &GroupSpec, beta: f64) -> Self {
        let sp = spec.clone();
        ScalarField::new(spec, format!("|g|^-{beta}"), move |g| sp.gauge_unchecked(g).powf(-beta))
            .with_decay(beta)
            .with_singularity(beta)
            .nonnegative()
    }

    /// The fundamental-solution profile `|g|^{−(Q−2s)}`.
    pub fn fundamental_profile(spec: &GroupSpec, s: f64) -> Self {
        let a = spec.qf() - 2.0 * s;
        Self::gauge_power(spec, a).renamed(format!("fundamental(s={s})"))
    }

    // ---- transforms ----------------------------------------------------

    /// `u_λ(g) = λ^w u(δ_λ g)`.
    pub fn dilated(&self, lambda: f64, weight_exp: f64) -> Self {
        assert!(lambda > 0.0);
        let inner = self.eval.clone();
        let c = lambda.powf(weight_exp);
        let mut out = self.clone();
        out.eval = Arc::new(move |g| c * inner(&dilate_unchecked(lambda, g)));
        out.name = format!("{}∘δ_{lambda}", self.name);
        out.center = dilate_unchecked(1.0 / lambda, &self.center);
        out.scale = self.scale / lambda;
        out.support_radius = self.support_radius.map(|r| r / lambda);
        out.bound = self.bound.map(|b| b * c.abs());
        out
    }

    /// `v(g) = u(g₀ ∘ g)`.
    pub fn left_translated(&self, spec: &GroupSpec, g0: &GroupPoint) -> Self {
        let inner = self.eval.clone();
        let sp = spec.clone();
        let g0c = g0.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |g| inner(&sp.mul_unchecked(&g0c, g)));
        out.name = format!("{}∘L", self.name);
        out.center = spec.mul_unchecked(&inverse_unchecked(g0), &self.center);
        out
    }

    /// `|u|^e` (for `e > 0`).
    pub fn powf(&self, e: f64) -> Self {
        assert!(e > 0.0);
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |g| inner(g).abs().powf(e));
        out.name = format!("|{}|^{e}", self.name);
        out.decay_exponent = self.decay_exponent.map(|b| b * e);
        out.singular_exponent = self.singular_exponent.map(|a| a * e);
        out.bound = self.bound.map(|b| b.powf(e));
        out.nonnegative = true;
        out
    }

    /// `c · u`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |g| c * inner(g));
        out.name = format!("{c}·{}", self.name);
        out.bound = self.bound.map(|b| b * c.abs());
        out.nonnegative = self.nonnegative && c >= 0.0;
        out
    }

    /// `u(g) · |g|^{−β}`; only meaningful when the field is centered at `e`.
    pub fn times_gauge_power(&self, spec: &GroupSpec, beta: f64) -> Self {
        let inner = self.eval.clone();
        let sp = spec.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |g| inner(g) * sp.gauge_unchecked(g).powf(-beta));
        out.name = format!("{}·|g|^-{beta}", self.name);
        out.decay_exponent = self.decay_exponent.map(|b| b + beta);
        out.singular_exponent = Some(self.singular_exponent.unwrap_or(0.0) + beta);
        out.bound = None;
        out
    }
}

fn smoothstep5(t: f64) -> f64 {
    // C⁴ at both ends: 126t⁵ − 420t⁶ + 540t⁷ − 315t⁸ + 70t⁹.
    let t = t.clamp(0.0, 1.0);
    let t5 = t.powi(5);
    t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))
}

/// Spot checks of the declared metadata on 10 sample points each.
pub fn validate_metadata(spec: &GroupSpec, u: &ScalarField, seed: u64) -> CheckSet {
    let mut set = CheckSet::default();
    let mut rng = SphereSampler::rng(seed);
    let anchor = "field metadata is honored";
    let id = |k: &str| format!("field.{}.{k}", u.name());
    let point_at = |rng: &mut rand_chacha::ChaCha8Rng, r: f64| {
        let w = SphereSampler::direction(spec, rng);
        spec.mul_unchecked(&u.center, &dilate_unchecked(r, &w))
    };
    // Determinism and finiteness away from the singular center.
    let mut ok = true;
    for i in 0..10 {
        let g = point_at(&mut rng, u.scale * (0.2 + 0.4 * i as f64));
        let (a, b) = (u.eval(&g), u.eval(&g));
        ok &= a.to_bits() == b.to_bits() && a.is_finite();
    }
    set.push(CheckRecord::verdict(id("deterministic"), anchor, Provenance::Algebraic, ok));
    if let Some(r) = u.support_radius {
        let mut worst = 0.0f64;
        for i in 0..10 {
            let g = point_at(&mut rng, r * (1.05 + 0.3 * i as f64) + 1e-9);
            worst = worst.max(u.eval(&g).abs());
        }
        set.push(
            CheckRecord::verdict(id("support"), anchor, Provenance::Algebraic, worst == 0.0)
                .with_value(worst)
                .with_detail("max |u| outside the declared support"),
        );
    }
    if let Some(b) = u.bound {
        let mut worst = 0.0f64;
        for i in 0..10 {
            let g = point_at(&mut rng, u.scale * (0.05 + 0.5 * i as f64));
            worst = worst.max(u.eval(&g).abs());
        }
        set.push(
            CheckRecord::verdict(id("bound"), anchor, Provenance::Algebraic, worst <= b * (1.0 + 1e-12))
                .with_value(worst)
                .with_tolerance(b),
        );
    }
    if let Some(beta) = u.decay_exponent {
        if u.support_radius.is_none() {
            // |u| ρ^β on far spheres must not grow between ρ and 4ρ.
            let base = 16.0 * u.scale + spec.gauge_unchecked(&u.center);
            let mut ratios = Vec::new();
            for i in 0..10 {
                let rho = base * 2f64.powi(i % 5);
                let g1 = point_at(&mut rng, rho);
                let g2 = point_at(&mut rng, 4.0 * rho);
                let a1 = u.eval(&g1).abs() * rho.powf(beta);
                let a2 = u.eval(&g2).abs() * (4.0 * rho).powf(beta);
                if a1 > 0.0 {
                    ratios.push(a2 / a1);
                }
            }
            let worst = ratios.iter().copied().fold(0.0, f64::max);
            set.push(
                CheckRecord::verdict(id("decay"), anchor, Provenance::Algebraic, worst <= 4.0)
                    .with_value(worst)
                    .with_tolerance(4.0)
                    .with_detail("max of |u|ρ^β at 4ρ over |u|ρ^β at ρ"),
            );
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support_and_value() {
        let spec = GroupSpec::heisenberg(1);
        let b = ScalarField::bump(&spec, spec.identity(), 2.0);
        assert_eq!(b.eval(&spec.identity()), 1.0);
        assert_eq!(b.eval(&GroupPoint::new(&[2.0, 0.0], &[0.0])), 0.0);
        assert!(validate_metadata(&spec, &b, 1).all_pass());
    }

    #[test]
    fn dilation_and_translation_transform_metadata() {
        let spec = GroupSpec::heisenberg(1);
        let c = GroupPoint::new(&[1.0, 0.5], &[0.2]);
        let b = ScalarField::bump(&spec, c.clone(), 1.0);
        let d = b.dilated(2.0, 1.5);
        assert_eq!(d.support_radius, Some(0.5));
        assert!((d.eval(&d.center) - 2f64.powf(1.5)).abs() < 1e-12);
        let g0 = GroupPoint::new(&[-0.3, 0.7], &[1.1]);
        let t = b.left_translated(&spec, &g0);
        assert!((t.eval(&t.center) - 1.0).abs() < 1e-12);
        assert!(validate_metadata(&spec, &t, 2).all_pass());
        assert!(validate_metadata(&spec, &d, 3).all_pass());
    }

    #[test]
    fn metadata_violations_are_caught() {
        let spec = GroupSpec::heisenberg(1);
        let lying = ScalarField::new(&spec, "liar", |g| 1.0 + g.z_norm_sq()).with_support(1.0).with_bound(1.0);
        let rep = validate_metadata(&spec, &lying, 4);
        assert!(rep.get("field.liar.support").unwrap().status.is_fail());
        let grows = ScalarField::new(&spec, "grows", |g| g.z_norm_sq() + 1.0).with_decay(1.0);
        assert!(validate_metadata(&spec, &grows, 5).get("field.grows.decay").unwrap().status.is_fail());
    }

    #[test]
    fn smoothstep_is_monotone() {
        let v: Vec<f64> = (0..=100).map(|i| smoothstep5(i as f64 / 100.0)).collect();
        assert_eq!(v[0], 0.0);
        assert!((v[100] - 1.0).abs() < 1e-14);
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }
}
