//! Polar-coordinate integration engine shared by the operator, the tail and
//! the ball/kernel integrals.
//!
//! Radial integrals run over geometric shells in the gauge (Gauss–Legendre
//! in `ln ρ`) or, next to a point singularity, a Gauss–Jacobi rule carrying
//! the singular power. Angular integrals use a [`SphereRule`]: a product
//! rule when one exists for the group, random antithetic batches otherwise.
//! Deterministic rules are refined level by level and the difference of the
//! last two levels is the error estimate; random rules report the standard
//! error over batches.

use rayon::prelude::*;

use crate::config::{QuadMode, QuadratureConfig};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{dilate_unchecked, inverse_unchecked, GroupPoint, GroupSpec};
use crate::measure::sigma_q;
use crate::quadrature::{gauss_jacobi01, gauss_legendre, mean_and_se, neumaier_sum, SphereRule, SphereSampler};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Level {
    pub n_r: usize,
    pub n_jac: usize,
    pub n_beta: usize,
    pub n_phi: usize,
}

pub(crate) const LEVELS: [Level; 5] = [
    Level { n_r: 6, n_jac: 8, n_beta: 12, n_phi: 16 },
    Level { n_r: 8, n_jac: 12, n_beta: 18, n_phi: 24 },
    Level { n_r: 12, n_jac: 16, n_beta: 26, n_phi: 36 },
    Level { n_r: 16, n_jac: 24, n_beta: 38, n_phi: 52 },
    Level { n_r: 24, n_jac: 32, n_beta: 56, n_phi: 76 },
];

const MC_LEVEL: usize = 2;
const MC_BATCHES: usize = 8;

/// One evaluation of a functional under a fixed rule: its components, a
/// modelled error that does not shrink with refinement (tails), and the sum
/// of magnitudes of the pieces for the rounding floor.
pub(crate) struct Part<const N: usize> {
    pub parts: [f64; N],
    pub model_err: f64,
    pub scale: f64,
}

impl<const N: usize> Part<N> {
    pub fn total(&self) -> f64 {
        sum_parts(&self.parts)
    }
}

pub(crate) fn sum_parts(p: &[f64]) -> f64 {
    p.iter().fold(0.0, |a, b| a + b)
}

/// Result of a refined evaluation. `value` is the left-to-right sum of
/// `parts`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Refined<const N: usize> {
    pub parts: [f64; N],
    pub value: f64,
    pub error: f64,
    pub monte_carlo: bool,
}

pub(crate) fn use_tensor(spec: &GroupSpec, quad: &QuadratureConfig) -> Result<bool> {
    match quad.mode {
        QuadMode::Tensor => {
            if SphereRule::has_tensor(spec) {
                Ok(true)
            } else {
                Err(Error::Unsupported(format!(
                    "no product sphere rule for {}; use monte_carlo or auto",
                    spec.id()
                )))
            }
        }
        QuadMode::MonteCarlo => Ok(false),
        QuadMode::Auto => Ok(SphereRule::has_tensor(spec)),
    }
}

pub(crate) fn mc_rules(spec: &GroupSpec, quad: &QuadratureConfig, salt: u64) -> Vec<SphereRule> {
    let per_batch = (quad.mc_samples / (2 * MC_BATCHES)).clamp(64, 1 << 16);
    let mut rng = SphereSampler::rng(quad.seed ^ salt);
    (0..MC_BATCHES).map(|_| SphereRule::monte_carlo(spec, per_batch, &mut rng)).collect()
}

/// Evaluate `f(rule, level)` with refinement (product rules) or batch
/// statistics (random rules).
pub(crate) fn refine<const N: usize>(
    spec: &GroupSpec,
    quad: &QuadratureConfig,
    f: impl Fn(&Polar<'_>, &Level) -> Result<Part<N>> + Sync,
) -> Result<Refined<N>> {
    if use_tensor(spec, quad)? {
        let at = |l: &Level| -> Result<Part<N>> {
            let rule = SphereRule::tensor(spec, l.n_beta, l.n_phi).expect("tensor rule exists");
            let fine = SphereRule::tensor(spec, 2 * l.n_beta, 2 * l.n_phi).expect("tensor rule exists");
            f(&Polar { rule: &rule, fine: &fine }, l)
        };
        let mut prev = at(&LEVELS[0])?;
        for (i, lvl) in LEVELS.iter().enumerate().skip(1) {
            let cur = at(lvl)?;
            let v = cur.total();
            let diff = (v - prev.total()).abs();
            let done = diff <= quad.abs_tol.max(quad.rel_tol * v.abs()) || i + 1 == LEVELS.len();
            if done {
                return Ok(Refined {
                    parts: cur.parts,
                    value: v,
                    error: diff + cur.model_err + 1e-13 * cur.scale,
                    monte_carlo: false,
                });
            }
            prev = cur;
        }
        unreachable!("the last level always returns")
    } else {
        let rules = mc_rules(spec, quad, 0x9e37_79b9_7f4a_7c15);
        let lvl = &LEVELS[MC_LEVEL];
        let outs: Vec<Part<N>> = rules.iter().map(|r| f(&Polar { rule: r, fine: r }, lvl)).collect::<Result<_>>()?;
        let totals: Vec<f64> = outs.iter().map(Part::total).collect();
        let (_, se) = mean_and_se(&totals);
        let nb = outs.len() as f64;
        let mut parts = [0.0; N];
        for (i, p) in parts.iter_mut().enumerate() {
            *p = neumaier_sum(outs.iter().map(|o| o.parts[i])) / nb;
        }
        let model = outs.iter().map(|o| o.model_err).sum::<f64>() / nb;
        let scale = outs.iter().map(|o| o.scale).sum::<f64>() / nb;
        Ok(Refined {
            parts,
            value: sum_parts(&parts),
            error: se + model + 1e-13 * scale,
            monte_carlo: true,
        })
    }
}

/// Geometric breakpoints from `lo` to `hi` with `per_decade` shells per
/// decade, merged with extra breakpoints inside `(lo, hi)`.
pub(crate) fn shell_breaks(lo: f64, hi: f64, per_decade: usize, extra: &[f64]) -> Vec<f64> {
    assert!(hi > lo && lo > 0.0);
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut b = vec![lo];
    let mut r = lo * ratio;
    while r < hi / ratio.sqrt() {
        b.push(r);
        r *= ratio;
    }
    b.push(hi);
    for &e in extra {
        if e > lo * (1.0 + 1e-9) && e < hi * (1.0 - 1e-9) {
            b.push(e);
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-9 * c.abs());
    b
}

/// Polar integration with a fixed angular rule, plus a finer one for the
/// shells that cut through a localized feature.
pub(crate) struct Polar<'a> {
    pub rule: &'a SphereRule,
    pub fine: &'a SphereRule,
}

fn sphere_sum(rule: &SphereRule, rho: f64, f: &(dyn Fn(f64, &GroupPoint) -> f64 + Sync)) -> f64 {
    neumaier_sum(rule.points.iter().zip(&rule.weights).map(|(w, wt)| wt * f(rho, w)))
}

impl Polar<'_> {
    fn sphere(&self, rho: f64, f: &(dyn Fn(f64, &GroupPoint) -> f64 + Sync)) -> f64 {
        sphere_sum(self.rule, rho, f)
    }

    /// `∫_{breaks} ρ^e ∫_S f(ρ, ω) dω dρ` with Gauss–Legendre in `ln ρ`.
    pub fn shells(&self, breaks: &[f64], n: usize, e: f64, f: &(dyn Fn(f64, &GroupPoint) -> f64 + Sync)) -> f64 {
        self.shells_band(breaks, n, e, f, None)
    }

    /// As [`Polar::shells`], with the fine rule on segments meeting `band`.
    pub fn shells_band(
        &self,
        breaks: &[f64],
        n: usize,
        e: f64,
        f: &(dyn Fn(f64, &GroupPoint) -> f64 + Sync),
        band: Option<(f64, f64)>,
    ) -> f64 {
        let gl = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n * breaks.len());
        for w in breaks.windows(2) {
            let fine = band.is_some_and(|(lo, hi)| w[1] > lo && w[0] < hi);
            let (a, b) = (w[0].ln(), w[1].ln());
            let h = 0.5 * (b - a);
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let v = a + h * (x + 1.0);
                let rho = v.exp();
                nodes.push((rho, h * wt * rho.powf(e + 1.0), fine));
            }
        }
        let vals: Vec<f64> = nodes
            .par_iter()
            .map(|&(rho, w, fine)| w * sphere_sum(if fine { self.fine } else { self.rule }, rho, f))
            .collect();
        neumaier_sum(vals)
    }

    /// `∫_0^{r1} ρ^e ∫_S f(ρ, ω) dω dρ` with the Jacobi weight `ρ^e`.
    pub fn jacobi(&self, r1: f64, n: usize, e: f64, f: &(dyn Fn(f64, &GroupPoint) -> f64 + Sync)) -> f64 {
        let gj = gauss_jacobi01(n, e);
        let c = r1.powf(e + 1.0);
        let vals: Vec<f64> = gj
            .nodes
            .par_iter()
            .zip(gj.weights.par_iter())
            .map(|(x, w)| c * w * self.sphere(r1 * x, f))
            .collect();
        neumaier_sum(vals)
    }

    /// `∫_S f(ρ, ω) dω` at one radius.
    pub fn sphere_at(&self, rho: f64, f: &(dyn Fn(f64, &GroupPoint) -> f64 + Sync)) -> f64 {
        self.sphere(rho, f)
    }
}

/// C^∞ cut-off equal to 1 on `[0, η/2]` and 0 on `[η, ∞)`.
pub(crate) fn cutoff(r: f64, eta: f64) -> f64 {
    let t = (eta - r) / (0.5 * eta);
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// `∫_{|h|>r₀} [base − u(c h)] |h|^{−γ} dh`.
pub(crate) struct Outer<'a> {
    pub u: &'a ScalarField,
    pub c: &'a GroupPoint,
    pub r0: f64,
    pub gamma: f64,
    pub base: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct OuterParts {
    pub shells: f64,
    pub near: f64,
    pub tail: f64,
    pub tail_err: f64,
}


/// Geometry decisions that do not depend on the refinement level.
pub(crate) struct OuterPlan {
    breaks: Vec<f64>,
    top: f64,
    compact: bool,
    pou: Option<Pou>,
}

struct Pou {
    p: GroupPoint,
    eta: f64,
    d: f64,
    /// Singular exponent at `p` (0 for smooth fields).
    a: f64,
}

pub(crate) fn plan_outer(spec: &GroupSpec, o: &Outer<'_>, quad: &QuadratureConfig) -> Result<OuterPlan> {
    let q = spec.qf();
    let u = o.u;
    if o.base != 0.0 && o.gamma <= q {
        return Err(Error::Divergence(format!(
            "∫|h|^-γ over |h| > r₀ diverges for γ = {} ≤ Q = {q}",
            o.gamma
        )));
    }
    let d = if u.localized { spec.distance(o.c, &u.center) } else { 0.0 };
    let singular_inside = u.singular_exponent.is_some() && d > o.r0;
    if u.singular_exponent.is_some() && d == o.r0 {
        return Err(Error::Singular("the field's singular point lies on the integration boundary".into()));
    }
    let pou = if u.localized && (singular_inside || (u.singular_exponent.is_none() && d - o.r0 > 2.0 * u.scale)) {
        Some(Pou {
            p: u.center.clone(),
            eta: 0.5 * (d - o.r0),
            d,
            a: if singular_inside { u.singular_exponent.unwrap_or(0.0) } else { 0.0 },
        })
    } else {
        None
    };
    let (top, compact) = match u.support_radius {
        Some(rs) if u.localized => ((d + rs).max(o.r0 * 1.5), true),
        _ => {
            if u.decay_exponent.is_none() && u.bound.is_none() {
                return Err(Error::Refused(format!(
                    "field `{}` has neither decay, support nor bound metadata",
                    u.name()
                )));
            }
            if let Some(beta) = u.decay_exponent {
                if beta + o.gamma - q <= 0.0 {
                    return Err(Error::Refused(format!(
                        "decay exponent {beta} too small for kernel exponent {} (need β > Q − γ)",
                        o.gamma
                    )));
                }
            } else if o.gamma <= q {
                return Err(Error::Refused("bounded field without decay needs γ > Q".into()));
            }
            (quad.r_max.max(8.0 * (d + u.scale)).max(4.0 * o.r0), false)
        }
    };
    let mut extra = Vec::new();
    if let Some(p) = &pou {
        extra.extend([p.d - p.eta, p.d - 0.5 * p.eta, p.d + 0.5 * p.eta, p.d + p.eta]);
    } else if u.localized {
        extra.extend([d - u.scale, d, d + u.scale]);
    }
    if let (Some(rs), true) = (u.support_radius, u.localized) {
        extra.extend([d - rs, d + rs]);
    }
    let breaks = shell_breaks(o.r0, top, quad.shells_per_decade, &extra);
    Ok(OuterPlan { breaks, top, compact, pou })
}

pub(crate) fn eval_outer(
    spec: &GroupSpec,
    polar: &Polar<'_>,
    lvl: &Level,
    o: &Outer<'_>,
    plan: &OuterPlan,
) -> OuterParts {
    let q = spec.qf();
    let gamma = o.gamma;
    let u = o.u;
    let base = o.base;
    let p_inv = plan.pou.as_ref().map(|p| (inverse_unchecked(&p.p), p.eta));
    let far = |rho: f64, w: &GroupPoint| -> f64 {
        let x = spec.mul_unchecked(o.c, &dilate_unchecked(rho, w));
        let keep = match &p_inv {
            Some((pi, eta)) => 1.0 - cutoff(spec.gauge_unchecked(&spec.mul_unchecked(pi, &x)), *eta),
            None => 1.0,
        };
        let uv = if keep == 0.0 { 0.0 } else { keep * u.eval(&x) };
        base - uv
    };
    let band = plan.pou.as_ref().map(|p| (p.d - p.eta, p.d + p.eta));
    let shells = polar.shells_band(&plan.breaks, lvl.n_r, q - 1.0 - gamma, &far, band);

    let near = match &plan.pou {
        None => 0.0,
        Some(p) => {
            let c_inv = inverse_unchecked(o.c);
            let eta = p.eta;
            let kern = |x: &GroupPoint| spec.gauge_unchecked(&spec.mul_unchecked(&c_inv, x)).powf(-gamma);
            let r1 = eta.min(u.scale);
            let a = p.a;
            let inner = |r: f64, w: &GroupPoint| -> f64 {
                let x = spec.mul_unchecked(&p.p, &dilate_unchecked(r, w));
                let cut = cutoff(r, eta);
                if cut == 0.0 {
                    return 0.0;
                }
                let ra = if a > 0.0 { r.powf(a) } else { 1.0 };
                ra * cut * u.eval(&x) * kern(&x)
            };
            let mut v = polar.jacobi(r1, lvl.n_jac, q - 1.0 - a, &inner);
            if r1 < eta {
                let shell = |r: f64, w: &GroupPoint| -> f64 {
                    let x = spec.mul_unchecked(&p.p, &dilate_unchecked(r, w));
                    cutoff(r, eta) * u.eval(&x) * kern(&x)
                };
                let br = shell_breaks(r1, eta, 4, &[0.5 * eta]);
                v += polar.shells(&br, lvl.n_r, q - 1.0, &shell);
            }
            v
        }
    };

    // Beyond the last shell.
    let top = plan.top;
    let wsum = neumaier_sum(polar.rule.weights.iter().map(|w| w * base));
    let base_tail = if base != 0.0 { wsum * top.powf(q - gamma) / (gamma - q) } else { 0.0 };
    let (j_tail, j_err) = if plan.compact {
        (0.0, 0.0)
    } else {
        let at = |rho: f64| polar.sphere_at(rho, &|r, w| u.eval(&spec.mul_unchecked(o.c, &dilate_unchecked(r, w))));
        match u.decay_exponent {
            Some(beta) => {
                let denom = gamma + beta - q;
                let m_top = at(top);
                let m_half = at(0.5 * top);
                let pred = m_half * 2f64.powf(-beta);
                let f = top.powf(q - gamma) / denom;
                (m_top * f, (m_top - pred).abs() * f)
            }
            None => {
                let b = u.bound.unwrap_or(0.0);
                (0.0, b * sigma_q(spec) * top.powf(q - gamma) / (gamma - q))
            }
        }
    };
    OuterParts { shells, near, tail: base_tail - j_tail, tail_err: j_err }
}

/// `∫_{|c⁻¹w|>r₀} u(w) |c⁻¹w|^{−γ} dw` with error estimate.
pub fn kernel_weighted_integral(
    spec: &GroupSpec,
    u: &ScalarField,
    c: &GroupPoint,
    r0: f64,
    gamma: f64,
    quad: &QuadratureConfig,
) -> Result<crate::quadrature::Estimate> {
    spec.check_point(c)?;
    if !(r0 > 0.0) {
        return Err(Error::InvalidInput(format!("inner radius must be positive, got {r0}")));
    }
    let o = Outer { u, c, r0, gamma, base: 0.0 };
    let plan = plan_outer(spec, &o, quad)?;
    let r = refine(spec, quad, |polar, lvl| {
        let o = eval_outer(spec, polar, lvl, &o, &plan);
        Ok(Part {
            parts: [-o.shells, o.near, -o.tail],
            model_err: o.tail_err,
            scale: o.shells.abs() + o.near.abs() + o.tail.abs(),
        })
    })?;
    Ok(crate::quadrature::Estimate::new(r.value, r.error))
}

/// `∫_{|c⁻¹w|<R} u(w) dw`.
pub fn ball_integral(
    spec: &GroupSpec,
    u: &ScalarField,
    c: &GroupPoint,
    radius: f64,
    quad: &QuadratureConfig,
) -> Result<crate::quadrature::Estimate> {
    spec.check_point(c)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let q = spec.qf();
    let d = if u.localized { spec.distance(c, &u.center) } else { 0.0 };
    let a = match u.singular_exponent {
        Some(a) if d == 0.0 => {
            if a >= q {
                return Err(Error::Divergence(format!("|g|^-{a} is not integrable at the center")));
            }
            a
        }
        Some(_) if d < radius => {
            return Err(Error::Unsupported("ball integral with an off-center singularity inside the ball".into()))
        }
        _ => 0.0,
    };
    let r1 = radius.min(u.scale.max(1e-3 * radius));
    let mut extra = vec![];
    if u.localized && d > 0.0 {
        extra.extend([d - u.scale, d, d + u.scale]);
    }
    if let (Some(rs), true) = (u.support_radius, u.localized) {
        extra.extend([d - rs, d + rs]);
    }
    let r = refine(spec, quad, |polar, lvl| {
        let f = |rho: f64, w: &GroupPoint| {
            let ra = if a > 0.0 { rho.powf(a) } else { 1.0 };
            ra * u.eval(&spec.mul_unchecked(c, &dilate_unchecked(rho, w)))
        };
        let mut v = polar.jacobi(r1, lvl.n_jac, q - 1.0 - a, &f);
        if r1 < radius {
            let g = |rho: f64, w: &GroupPoint| u.eval(&spec.mul_unchecked(c, &dilate_unchecked(rho, w)));
            let br = shell_breaks(r1, radius, 8, &extra);
            v += polar.shells(&br, lvl.n_r, q - 1.0, &g);
        }
        Ok(Part { parts: [v], model_err: 0.0, scale: v.abs() })
    })?;
    Ok(crate::quadrature::Estimate::new(r.value, r.error))
}

/// `∫_G u(w) dw`, split at the field's scale around its center.
pub fn whole_space_integral(spec: &GroupSpec, u: &ScalarField, quad: &QuadratureConfig) -> Result<crate::quadrature::Estimate> {
    let c = u.center.clone();
    let r = match u.support_radius {
        Some(rs) => return ball_integral(spec, u, &c, rs, quad),
        None => 4.0 * u.scale,
    };
    let inner = ball_integral(spec, u, &c, r, quad)?;
    let outer = kernel_weighted_integral(spec, u, &c, r, 0.0, quad)?;
    Ok(inner + outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::omega_q;

    #[test]
    fn breaks_are_sorted_and_cover() {
        let b = shell_breaks(0.1, 1000.0, 4, &[5.0, 0.05, 2000.0]);
        assert_eq!(b[0], 0.1);
        assert_eq!(*b.last().unwrap(), 1000.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(b.contains(&5.0));
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.1, 1.0), 1.0);
        assert_eq!(cutoff(1.2, 1.0), 0.0);
        let v = cutoff(0.75, 1.0);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ball_of_constant_is_volume() {
        let spec = GroupSpec::heisenberg(1);
        let one = ScalarField::constant(&spec, 1.0);
        let q = QuadratureConfig::default();
        let v = ball_integral(&spec, &one, &spec.identity(), 2.0, &q).unwrap();
        assert!((v.value - omega_q(&spec) * 16.0).abs() < 1e-9, "{:?}", v);
    }

    #[test]
    fn kernel_integral_of_power_matches_polar_formula() {
        let spec = GroupSpec::heisenberg(1);
        let s = 0.4;
        let u = ScalarField::fundamental_profile(&spec, s);
        let q = QuadratureConfig::default();
        // u = |g|^{-(Q-2s)}, c = e: ∫_{|g|>R} |g|^{-(2Q)} = σ_Q R^{-Q}/Q.
        let r = 2.0;
        let v = kernel_weighted_integral(&spec, &u, &spec.identity(), r, spec.qf() + 2.0 * s, &q).unwrap();
        let exact = sigma_q(&spec) * r.powf(-spec.qf()) / spec.qf();
        assert!((v.value / exact - 1.0).abs() < 1e-8, "{} vs {exact}", v.value);
    }

    #[test]
    fn fields_without_metadata_are_refused() {
        let spec = GroupSpec::heisenberg(1);
        let u = ScalarField::z_norm_sq(&spec);
        let q = QuadratureConfig::default();
        assert!(matches!(
            kernel_weighted_integral(&spec, &u, &spec.identity(), 1.0, 6.0, &q),
            Err(Error::Refused(_))
        ));
    }
}
