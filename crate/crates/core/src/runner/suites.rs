//! The check batteries behind each suite.
//!
//! A suite expands into named checks; every check is a closure over the
//! run context returning a set of records. Checks that depend on `s` are
//! instantiated once per configured value.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::Suite;
use crate::config::{QuadMode, QuadratureConfig};
use crate::error::{Error, Result};
use crate::field::{validate_metadata, ScalarField};
use crate::fraclap::{
    apply_ls, bump_interior_points, near_one_limit, quadratic_form, seminorm, small_s_limit, sobolev_quotient,
    sub_laplacian, sub_laplacian_with_step, FormOptions,
};
use crate::group::{algebra_checks, dilate_unchecked, validate_htype, GroupPoint, GroupSpec};
use crate::heat::{heat_kernel, riesz_norm_kernel, HeatKernelQuery};
use crate::measure::{ball_volume_mc, ball_volume_shellwise, box_integral_mc, gauge_annulus_integral, omega_q, sigma_q, unit_ball_volume};
use crate::quadrature::{Estimate, SphereRule};
use crate::report::{CheckRecord, CheckSet, Provenance};
use crate::special::{fundamental_constant, gamma, intertwining_constant, log_gamma};
use crate::yamabe::{
    calibrate_alpha, decay_fit_with, default_points, intertwining_check, local_bound_diagnostic, lorentz_cutoff_norm,
    lorentz_distribution_mc, lorentz_norm_quadrature, rearrangement, tail_decay_check, weak_form_residual,
    DecayOptions, ExplicitSolutionSpec, LocalBoundOptions, LorentzCutoffSpec,
};

/// What a check sees: the group, the quadrature settings with the check's
/// own seed, and that seed.
pub(crate) struct Ctx {
    pub spec: GroupSpec,
    pub quad: QuadratureConfig,
    pub seed: u64,
}

pub(crate) type CheckFn = Box<dyn Fn(&Ctx) -> Result<CheckSet> + Send + Sync>;

pub(crate) struct Check {
    pub name: String,
    pub anchor: &'static str,
    pub run: CheckFn,
}

fn check(name: String, anchor: &'static str, run: impl Fn(&Ctx) -> Result<CheckSet> + Send + Sync + 'static) -> Check {
    Check { name, anchor, run: Box::new(run) }
}

const GROUP_ANCHOR: &str = "group law, dilations and the Korányi gauge";
const POLAR_ANCHOR: &str = "∫_{r<|g|<R} f(|g|) dg = σ_Q ∫_r^R f(ρ) ρ^{Q-1} dρ";
const HAAR_ANCHOR: &str = "Lebesgue measure in exponential coordinates is bi-invariant";
const GAMMA_ANCHOR: &str = "Γ function identities";
const HEAT_ANCHOR: &str = "heat kernel of the sub-Laplacian";
const RIESZ_ANCHOR: &str = "1/‖h‖_(s)^{Q+2s} = (2s/Γ(1-s)) ∫_0^∞ t^{-1-s} p(h,t) dt";
const EUCLID_ANCHOR: &str = "s 2^{2s+1} Γ((n+2s)/2) / (π^{n/2} Γ(1-s)) |x|^{-(n+2s)}";
const WITNESS_ANCHOR: &str = "‖·‖_(s) is not a function of the gauge";
const OP_ANCHOR: &str = "𝓛_s u(g) = ½ ∫ [2u(g) - u(gh) - u(gh⁻¹)] |h|^{-Q-2s} dh";
const HARMONIC_ANCHOR: &str = "𝓛_s |g|^{-(Q-2s)} = 0 away from the pole";
const LIMIT_ANCHOR: &str = "limits of 𝓛_s as s → 0⁺ and s → 1⁻";
const DERIV_ANCHOR: &str = "X_j u(g) = d/dt u(g ∘ (t e_j, 0)) at t = 0";
const FORM_ANCHOR: &str = "𝒬_s(u, φ) = ∬ (u(g)-u(h))(φ(g)-φ(h)) |h⁻¹g|^{-Q-2s} dg dh";
const SCALE_ANCHOR: &str = "u_λ = λ^{(Q-2s)/2} u∘δ_λ leaves [u]_{s,2} and the Sobolev quotient unchanged";
const BUBBLE_ANCHOR: &str = "u_y = A^{(Q-2s)/(4s)} (16y² / ((|z|²+y²)² + 16|σ|²))^{(Q-2s)/4}";
const ALPHA_ANCHOR: &str = "𝓛_s = α 𝒧_s with α = α(m, k, s)";
const LORENTZ_ANCHOR: &str = "‖ρ_{α,R}‖_{L^{p,σ}} = C_{Q,σ} R^{-(α-Q/p)}";
const DECAY_ANCHOR: &str = "|g|^{Q-2s} u ∈ L^∞ for subsolutions of the fractional Yamabe equation";
const TAIL_ANCHOR: &str = "T(u; g0, R) ≤ C R^{-(Q-2s)}";
const LOCAL_ANCHOR: &str = "sup_{B(g0,R/2)} u ≤ C avg_{B(g0,R)} u + C T(u; g0, R/2)";

/// All checks of `suite` for the configured `s` values.
pub(crate) fn checks(suite: Suite, spec: &GroupSpec, s_values: &[f64]) -> Vec<Check> {
    let id = spec.id().to_string();
    let mut out = vec![];
    match suite {
        Suite::Group => {
            out.push(check(format!("group.htype.{id}"), GROUP_ANCHOR, |c| {
                let set = validate_htype(&c.spec);
                Ok(if set.is_empty() { unsupported(format!("group.htype.{}", c.spec.id()), GROUP_ANCHOR, &c.spec) } else { set })
            }));
            out.push(check(format!("group.algebra.{id}"), GROUP_ANCHOR, algebra));
            out.push(check(format!("group.ball_volume.{id}"), POLAR_ANCHOR, ball_volume));
            out.push(check(format!("group.polar.{id}"), POLAR_ANCHOR, polar_law));
            out.push(check(format!("group.haar.{id}"), HAAR_ANCHOR, haar));
        }
        Suite::Kernels => {
            out.push(check("kernels.gamma".into(), GAMMA_ANCHOR, |_| gamma_identities()));
            out.push(check("kernels.constants".into(), BUBBLE_ANCHOR, |_| constants()));
            out.push(check(format!("kernels.heat.{id}"), HEAT_ANCHOR, heat));
            out.push(check("kernels.euclidean_riesz".into(), EUCLID_ANCHOR, euclidean_riesz));
            for &s in s_values {
                out.push(check(format!("kernels.riesz.{id}.s={s}"), RIESZ_ANCHOR, move |c| riesz(c, s)));
                out.push(check(format!("kernels.witness.s={s}"), WITNESS_ANCHOR, move |c| witness(c, s)));
            }
        }
        Suite::Operator => {
            out.push(check(format!("operator.limits.{id}"), LIMIT_ANCHOR, limits));
            out.push(check(format!("operator.derivatives.{id}"), DERIV_ANCHOR, derivatives));
            out.push(check(format!("operator.metadata.{id}"), OP_ANCHOR, metadata));
            for &s in s_values {
                out.push(check(format!("operator.pointwise.{id}.s={s}"), OP_ANCHOR, move |c| pointwise(c, s)));
                out.push(check(format!("operator.harmonic.{id}.s={s}"), HARMONIC_ANCHOR, move |c| harmonic(c, s)));
                out.push(check(format!("operator.forms.{id}.s={s}"), FORM_ANCHOR, move |c| forms(c, s)));
                out.push(check(format!("operator.scale.{id}.s={s}"), SCALE_ANCHOR, move |c| scale_invariance(c, s)));
            }
        }
        Suite::Yamabe => {
            out.push(check(format!("yamabe.bubble.{id}"), BUBBLE_ANCHOR, bubble_closed_forms));
            for &s in s_values {
                out.push(check(format!("yamabe.intertwining.{id}.s={s}"), ALPHA_ANCHOR, move |c| intertwining(c, s)));
                out.push(check(format!("yamabe.alpha.{id}.s={s}"), ALPHA_ANCHOR, move |c| alpha(c, s)));
            }
        }
        Suite::Lorentz => out.push(check(format!("lorentz.{id}"), LORENTZ_ANCHOR, lorentz)),
        Suite::Decay => {
            out.push(check(format!("decay.powers.{id}"), DECAY_ANCHOR, decay_powers));
            for &s in s_values {
                out.push(check(format!("decay.{id}.s={s}"), DECAY_ANCHOR, move |c| decay(c, s)));
            }
        }
        Suite::Tail => {
            for &s in s_values {
                out.push(check(format!("tail.{id}.s={s}"), TAIL_ANCHOR, move |c| tail(c, s)));
            }
        }
        Suite::Localbound => {
            for &s in s_values {
                out.push(check(format!("localbound.{id}.s={s}"), LOCAL_ANCHOR, move |c| localbound(c, s)));
            }
        }
    }
    out
}

// ---- helpers ---------------------------------------------------------

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn prov(c: &Ctx) -> Provenance {
    if c.quad.mode == QuadMode::MonteCarlo || !SphereRule::has_tensor(&c.spec) {
        Provenance::MonteCarlo
    } else {
        Provenance::Quadrature
    }
}

/// `|a − b| ≤ k (err_a + err_b) + floor · |b|`.
fn close(a: Estimate, b: Estimate, k: f64, floor: f64) -> bool {
    (a.value - b.value).abs() <= k * (a.error + b.error) + floor * b.value.abs()
}

/// Record for a group without step-2 structure where the check needs it.
fn unsupported(id: String, anchor: &str, spec: &GroupSpec) -> CheckSet {
    let mut set = CheckSet::default();
    set.push(
        CheckRecord::diagnostic(id, anchor, Provenance::Algebraic)
            .with_detail(format!("not applicable to `{}`: needs a vertical layer (k ≥ 1)", spec.id())),
    );
    set
}

/// Points with the given gauges in assorted directions.
fn points_on_gauges(spec: &GroupSpec, gauges: &[f64]) -> Vec<GroupPoint> {
    let (m, k) = (spec.m(), spec.k());
    gauges
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let th = 0.4 + 1.1 * i as f64;
            // Share of the gauge carried by |z|⁴.
            let c = if k == 0 { 1.0 } else { 0.2 + 0.6 * (0.5 + 0.5 * (2.0 * th).sin()) };
            let mut z: Vec<f64> = (0..m).map(|j| (th + 0.9 * j as f64).cos()).collect();
            let zn = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            let zr = r * c.powf(0.25);
            z.iter_mut().for_each(|x| *x *= zr / zn);
            let mut sg: Vec<f64> = (0..k).map(|a| (th * (a + 2) as f64).sin() + 0.3).collect();
            let sn = sg.iter().map(|x| x * x).sum::<f64>().sqrt();
            let sr = r * r * (1.0 - c).max(0.0).sqrt() / 4.0;
            sg.iter_mut().for_each(|x| *x *= sr / sn);
            GroupPoint::new(&z, &sg)
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(spec: &GroupSpec, rng: &mut ChaCha8Rng, r: f64) -> GroupPoint {
    let z: Vec<f64> = (0..spec.m()).map(|_| rng.gen_range(-r..r)).collect();
    let sg: Vec<f64> = (0..spec.k()).map(|_| rng.gen_range(-0.25 * r * r..0.25 * r * r)).collect();
    GroupPoint::new(&z, &sg)
}

// ---- group -----------------------------------------------------------

fn algebra(c: &Ctx) -> Result<CheckSet> {
    let mut ids = vec![c.spec.id().to_string()];
    for g in ["heisenberg:1", "quaternionic:1", "euclidean:3"] {
        if !ids.iter().any(|x| x == g) {
            ids.push(g.to_string());
        }
    }
    let mut set = CheckSet::default();
    for (i, g) in ids.iter().enumerate() {
        set.extend(algebra_checks(&GroupSpec::parse(g)?, 1000, c.seed.wrapping_add(i as u64), 1e-12));
    }
    Ok(set)
}

fn ball_volume(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let id = spec.id();
    let mut set = CheckSet::default();
    let shell = ball_volume_shellwise(spec);
    let mc = ball_volume_mc(spec, c.quad.mc_samples.max(1 << 16), c.seed);
    set.push(
        CheckRecord::verdict(format!("group.ball_volume.{id}.estimators"), POLAR_ANCHOR, Provenance::MonteCarlo, close(mc, shell, 3.0, 0.0))
            .with_value(mc.value)
            .with_error(mc.error)
            .with_extra("shellwise", shell.value)
            .with_extra("shellwise_error", shell.error)
            .with_detail("Monte Carlo and shellwise quadrature volumes of the unit gauge ball"),
    );
    let cached = unit_ball_volume(spec, &c.quad)?;
    set.push(
        CheckRecord::verdict(
            format!("group.ball_volume.{id}.omega_q"),
            POLAR_ANCHOR,
            if cached.error > 1e-10 * cached.value { Provenance::MonteCarlo } else { Provenance::Quadrature },
            (cached.value - omega_q(spec)).abs() <= (3.0 * cached.error).max(1e-12 * omega_q(spec)),
        )
            .with_value(cached.value)
            .with_error(cached.error)
            .with_extra("omega_q", omega_q(spec)),
    );
    for (n, exact) in [(2usize, PI), (3, 4.0 * PI / 3.0)] {
        let v = unit_ball_volume(&GroupSpec::euclidean(n), &c.quad)?;
        set.push(
            CheckRecord::verdict(
                format!("group.ball_volume.euclidean:{n}"),
                POLAR_ANCHOR,
                Provenance::Quadrature,
                (v.value - exact).abs() <= v.error.max(1e-14 * exact),
            )
            .with_value(v.value)
            .with_error(v.error)
            .with_extra("exact", exact),
        );
    }
    Ok(set)
}

fn polar_law(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let q = spec.qf();
    let mut set = CheckSet::default();
    for (name, gamma_exp) in [("0", 0.0), ("Q/2", q / 2.0), ("Q", q), ("Q+1", q + 1.0)] {
        let a = gauge_annulus_integral(spec, gamma_exp, 0.5, 2.0, &c.quad)?;
        let tol = (1e-6 * a.closed_form.abs()).max(3.0 * a.numeric.error);
        set.push(
            CheckRecord::verdict(format!("group.polar.{}.gamma={name}", spec.id()), POLAR_ANCHOR, Provenance::MonteCarlo, a.agrees(1e-6, 3.0))
                .with_value(a.numeric.value)
                .with_error(a.numeric.error)
                .with_tolerance(tol)
                .with_extra("closed_form", a.closed_form)
                .with_input("r", 0.5)
                .with_input("R", 2.0)
                .with_input("gamma", gamma_exp),
        );
    }
    Ok(set)
}

fn haar(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let f = ScalarField::gaussian(spec, spec.identity(), 1.0);
    let mut g0 = spec.identity();
    g0.z.iter_mut().enumerate().for_each(|(i, x)| *x = 0.5 - 0.3 * i as f64);
    g0.sigma.iter_mut().enumerate().for_each(|(a, x)| *x = 0.2 + 0.1 * a as f64);
    let (a, b) = (6.0, 9.0);
    let n = c.quad.mc_samples.max(1 << 16);
    let base = box_integral_mc(spec, |g| f.eval(g), a, b, n, c.seed);
    let left = box_integral_mc(spec, |g| f.eval(&spec.mul_unchecked(&g0, g)), a, b, n, c.seed);
    let right = box_integral_mc(spec, |g| f.eval(&spec.mul_unchecked(g, &g0)), a, b, n, c.seed);
    let mut set = CheckSet::default();
    for (side, e) in [("left", left), ("right", right)] {
        let se = (e.error.powi(2) + base.error.powi(2)).sqrt();
        set.push(
            CheckRecord::verdict(format!("group.haar.{}.{side}", spec.id()), HAAR_ANCHOR, Provenance::MonteCarlo, (e.value - base.value).abs() <= 3.0 * se)
                .with_value(e.value)
                .with_error(e.error)
                .with_tolerance(3.0 * se)
                .with_extra("untranslated", base.value),
        );
    }
    Ok(set)
}

// ---- kernels ---------------------------------------------------------

fn gamma_identities() -> Result<CheckSet> {
    let mut set = CheckSet::default();
    let half = PI.sqrt();
    let recursion = 4.5 * 3.5 * 2.5 * 1.5 * 0.5 * half;
    let cases = [("gamma(1)", gamma(1.0)?, 1.0, 1e-14), ("gamma(1/2)", gamma(0.5)?, half, 1e-14), ("gamma(5.5)", gamma(5.5)?, recursion, 1e-13)];
    for (name, got, want, tol) in cases {
        set.push(
            CheckRecord::verdict(format!("kernels.{name}"), GAMMA_ANCHOR, Provenance::ClosedForm, rel(got, want) <= tol)
                .with_value(got)
                .with_tolerance(tol)
                .with_extra("expected", want),
        );
    }
    // Stirling with four correction terms at x = 50.
    let x: f64 = 50.0;
    let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
        - 1.0 / (1680.0 * x.powi(7));
    let lg = log_gamma(x)?;
    set.push(
        CheckRecord::verdict("kernels.log_gamma(50)", GAMMA_ANCHOR, Provenance::ClosedForm, rel(lg, stirling) <= 1e-14)
            .with_value(lg)
            .with_extra("stirling", stirling),
    );
    Ok(set)
}

fn constants() -> Result<CheckSet> {
    let mut set = CheckSet::default();
    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let mut min_c = f64::INFINITY;
    for (m, k) in [(2, 1), (4, 3)] {
        for &s in &grid {
            min_c = min_c.min(fundamental_constant(m, k, s)?);
        }
    }
    set.push(
        CheckRecord::verdict("kernels.fundamental_constant.positive", BUBBLE_ANCHOR, Provenance::ClosedForm, min_c > 0.0)
            .with_value(min_c)
            .with_detail("minimum over (m,k) ∈ {(2,1),(4,3)} and s ∈ {0.1,…,0.9}"),
    );
    let near_one = fundamental_constant(2, 1, 0.999)?;
    set.push(
        CheckRecord::verdict("kernels.fundamental_constant.near_one", BUBBLE_ANCHOR, Provenance::ClosedForm, near_one.is_finite() && near_one > 0.0)
            .with_value(near_one),
    );
    // First-order law at s = 1e-8: (A − 1)/s → ψ((m+2)/4) + ψ((m+2k)/4),
    // which is −2γ for (2, 1). A itself is 1 − 1.15e-8 there, not 1 ± 1e-10.
    let s0 = 1e-8;
    let a0 = intertwining_constant(2, 1, s0)?;
    let slope = (a0 - 1.0) / s0;
    let euler = 0.577_215_664_901_532_9;
    set.push(
        CheckRecord::verdict("kernels.intertwining_constant.small_s", BUBBLE_ANCHOR, Provenance::ClosedForm, (slope + 2.0 * euler).abs() < 1e-5 && intertwining_constant(2, 1, 0.0)? == 1.0)
            .with_value(slope)
            .with_tolerance(1e-5)
            .with_extra("expected", -2.0 * euler)
            .with_extra("deviation_from_one", a0 - 1.0)
            .with_detail("(A(2,1,s) − 1)/s at s = 1e-8 against −2γ"),
    );
    // (2, 1): A = [Γ(1+s/2)/Γ(1−s/2)]² decreases; (4, 3) increases.
    for ((m, k), up) in [((2, 1), false), ((4, 3), true)] {
        let vals: Vec<f64> = grid.iter().map(|&s| intertwining_constant(m, k, s)).collect::<Result<_>>()?;
        let ok = vals.windows(2).all(|w| if up { w[1] > w[0] } else { w[1] < w[0] });
        let name = if up { "increasing" } else { "decreasing" };
        set.push(
            CheckRecord::verdict(format!("kernels.intertwining_constant.m={m}.k={k}.{name}"), BUBBLE_ANCHOR, Provenance::ClosedForm, ok)
                .with_value(vals[vals.len() - 1] / vals[0])
                .with_detail("A(s = 0.9)/A(s = 0.1) over the grid {0.1,…,0.9}"),
        );
    }
    Ok(set)
}

fn heat(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let id = spec.id();
    let mut set = CheckSet::default();
    if !matches!(spec.k(), 0 | 1 | 3) {
        return Ok(unsupported(format!("kernels.heat.{id}"), HEAT_ANCHOR, spec));
    }
    let g = points_on_gauges(spec, &[0.9])[0].clone();
    let (t, lam) = (0.7, 1.7);
    let p = heat_kernel(&HeatKernelQuery::heat(spec, &g, t), &c.quad)?;
    let gl = dilate_unchecked(lam, &g);
    let pl = heat_kernel(&HeatKernelQuery::heat(spec, &gl, lam * lam * t), &c.quad)?;
    let want = p.scale(lam.powf(-spec.qf()));
    set.push(
        CheckRecord::verdict(format!("kernels.heat.{id}.parabolic_scaling"), HEAT_ANCHOR, Provenance::Quadrature, close(pl, want, 5.0, 1e-10))
            .with_value(pl.value)
            .with_error(pl.error)
            .with_extra("expected", want.value),
    );
    if spec.k() == 0 {
        let n = spec.m() as f64;
        let exact = (4.0 * PI * t).powf(-n / 2.0) * (-g.z_norm_sq() / (4.0 * t)).exp();
        set.push(
            CheckRecord::verdict(format!("kernels.heat.{id}.gaussian"), HEAT_ANCHOR, Provenance::ClosedForm, rel(p.value, exact) < 1e-12)
                .with_value(p.value)
                .with_extra("exact", exact),
        );
    } else {
        let mut flip = g.clone();
        flip.sigma.iter_mut().for_each(|x| *x = -*x);
        let pf = heat_kernel(&HeatKernelQuery::heat(spec, &flip, t), &c.quad)?;
        set.push(
            CheckRecord::verdict(format!("kernels.heat.{id}.even_in_sigma"), HEAT_ANCHOR, Provenance::Quadrature, close(pf, p, 5.0, 1e-12))
                .with_value(pf.value)
                .with_error(pf.error)
                .with_extra("unflipped", p.value),
        );
    }
    Ok(set)
}

fn euclidean_riesz(c: &Ctx) -> Result<CheckSet> {
    let mut set = CheckSet::default();
    for n in 1..=3usize {
        let spec = GroupSpec::euclidean(n);
        let mut x = spec.identity();
        x.z.iter_mut().enumerate().for_each(|(i, v)| *v = 0.7 - 0.25 * i as f64);
        let r = x.z_norm_sq().sqrt();
        for s in [0.25, 0.5, 0.75] {
            let nf = n as f64;
            let formula = s * 2f64.powf(2.0 * s + 1.0) * gamma((nf + 2.0 * s) / 2.0)? / (PI.powf(nf / 2.0) * gamma(1.0 - s)?) * r.powf(-(nf + 2.0 * s));
            let k = riesz_norm_kernel(&spec, &x, s, &c.quad)?;
            let gap = rel(k.nested.value, formula);
            set.push(
                CheckRecord::verdict(format!("kernels.euclidean_riesz.n={n}.s={s}"), EUCLID_ANCHOR, Provenance::Quadrature, gap < 1e-6)
                    .with_value(k.nested.value)
                    .with_error(k.nested.error)
                    .with_tolerance(1e-6)
                    .with_extra("formula", formula)
                    .with_extra("rel_gap", gap)
                    .with_input("|x|", r),
            );
        }
    }
    Ok(set)
}

fn riesz(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("kernels.riesz.{}.s={s}", spec.id());
    if spec.k() == 0 {
        return Ok(unsupported(tag, RIESZ_ANCHOR, spec));
    }
    let mut set = CheckSet::default();
    let h = points_on_gauges(spec, &[0.8])[0].clone();
    let k = riesz_norm_kernel(spec, &h, s, &c.quad)?;
    if let (Some(gap), Some(red)) = (k.route_gap(), k.reduced) {
        let tol = 1e-8f64.max(5.0 * (k.nested.error + red.error) / red.value.abs());
        set.push(
            CheckRecord::verdict(format!("{tag}.routes"), RIESZ_ANCHOR, Provenance::Quadrature, gap <= tol)
                .with_value(gap)
                .with_tolerance(tol)
                .with_extra("nested", k.nested.value)
                .with_extra("reduced", red.value),
        );
    }
    let lam = 2.0;
    let kl = riesz_norm_kernel(spec, &dilate_unchecked(lam, &h), s, &c.quad)?;
    let want = Estimate::new(k.value, k.error).scale(lam.powf(-(spec.qf() + 2.0 * s)));
    let got = Estimate::new(kl.value, kl.error);
    set.push(
        CheckRecord::verdict(format!("{tag}.homogeneity"), RIESZ_ANCHOR, Provenance::Quadrature, close(got, want, 5.0, 1e-8))
            .with_value(got.value)
            .with_error(got.error)
            .with_extra("expected", want.value),
    );
    let ki = riesz_norm_kernel(spec, &spec.inverse(&h)?, s, &c.quad)?;
    let inv = Estimate::new(ki.value, ki.error);
    set.push(
        CheckRecord::verdict(format!("{tag}.inverse_symmetry"), RIESZ_ANCHOR, Provenance::Quadrature, close(inv, Estimate::new(k.value, k.error), 5.0, 1e-8))
            .with_value(inv.value)
            .with_error(inv.error)
            .with_extra("at_h", k.value),
    );
    Ok(set)
}

/// Two gauge-equal points `((c,0),0)` and `((0,0),c²/4)`.
fn witness(c: &Ctx, s: f64) -> Result<CheckSet> {
    let mut groups = vec![GroupSpec::heisenberg(1)];
    if c.spec.k() > 0 && c.spec.id() != "heisenberg:1" {
        groups.push(c.spec.clone());
    }
    let mut set = CheckSet::default();
    for spec in groups {
        let mut a = spec.identity();
        a.z[0] = 1.0;
        let mut b = spec.identity();
        b.sigma[0] = 0.25;
        let ka = riesz_norm_kernel(&spec, &a, s, &c.quad)?;
        let kb = riesz_norm_kernel(&spec, &b, s, &c.quad)?;
        let gap = (ka.value - kb.value).abs() / ka.value.max(kb.value);
        let resolved = (ka.value - kb.value).abs() > 3.0 * (ka.error + kb.error);
        set.push(
            CheckRecord::verdict(format!("kernels.witness.{}.s={s}", spec.id()), WITNESS_ANCHOR, Provenance::Quadrature, gap > 0.01 && resolved)
                .with_value(gap)
                .with_tolerance(0.01)
                .with_extra("at_z_axis", ka.value)
                .with_extra("at_sigma_axis", kb.value)
                .with_extra("gauge_a", spec.gauge(&a)?.value())
                .with_extra("gauge_b", spec.gauge(&b)?.value())
                .with_detail("relative gap between two points of gauge 1"),
        );
    }
    Ok(set)
}

// ---- operator --------------------------------------------------------

fn pointwise(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("operator.{}.s={s}", spec.id());
    let p = prov(c);
    let mut set = CheckSet::default();
    let g = points_on_gauges(spec, &[0.7])[0].clone();

    let one = ScalarField::constant(spec, 1.0);
    let r = apply_ls(spec, &one, &g, s, &c.quad)?;
    set.push(
        CheckRecord::verdict(format!("{tag}.constant"), OP_ANCHOR, Provenance::Algebraic, r.value == 0.0)
            .with_value(r.value)
            .with_detail("the symmetrized integrand vanishes identically"),
    );

    let mut center = spec.identity();
    center.z[0] = 0.3;
    let u = ScalarField::gaussian(spec, center, 1.0);
    let base = apply_ls(spec, &u, &g, s, &c.quad)?;
    set.push(
        CheckRecord::verdict(
            format!("{tag}.breakdown"),
            OP_ANCHOR,
            p,
            base.breakdown.total() == base.value && base.error_estimate >= 0.0,
        )
        .with_value(base.value)
        .with_error(base.error_estimate)
        .with_extra("inner", base.breakdown.inner)
        .with_extra("outer", base.breakdown.outer)
        .with_extra("tail", base.breakdown.tail),
    );

    let g0 = points_on_gauges(spec, &[1.3, 0.0])[0].clone();
    let translated = apply_ls(spec, &u.left_translated(spec, &g0), &g, s, &c.quad)?.estimate();
    let direct = apply_ls(spec, &u, &spec.multiply(&g0, &g)?, s, &c.quad)?.estimate();
    set.push(
        CheckRecord::verdict(format!("{tag}.left_invariance"), OP_ANCHOR, p, close(translated, direct, 5.0, 1e-9))
            .with_value(translated.value)
            .with_error(translated.error)
            .with_extra("expected", direct.value)
            .with_extra("expected_error", direct.error),
    );

    let lam = 2.0;
    let dil = apply_ls(spec, &u.dilated(lam, 0.0), &g, s, &c.quad)?.estimate();
    let want = apply_ls(spec, &u, &dilate_unchecked(lam, &g), s, &c.quad)?.estimate().scale(lam.powf(2.0 * s));
    set.push(
        CheckRecord::verdict(format!("{tag}.dilation"), OP_ANCHOR, p, close(dil, want, 5.0, 1e-9))
            .with_value(dil.value)
            .with_error(dil.error)
            .with_extra("expected", want.value)
            .with_extra("expected_error", want.error)
            .with_input("lambda", lam),
    );
    Ok(set)
}

fn harmonic(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let u = ScalarField::fundamental_profile(spec, s);
    let mut set = CheckSet::default();
    for (i, g) in points_on_gauges(spec, &[1.0, 1.7, 2.8, 4.7, 8.0]).iter().enumerate() {
        let r = apply_ls(spec, &u, g, s, &c.quad)?;
        let scale = u.eval(g);
        set.push(
            CheckRecord::verdict(
                format!("operator.harmonic.{}.s={s}.point{i}", spec.id()),
                HARMONIC_ANCHOR,
                prov(c),
                r.value.abs() <= 10.0 * r.error_estimate,
            )
            .with_value(r.value)
            .with_error(r.error_estimate)
            .with_tolerance(10.0 * r.error_estimate)
            .with_input("gauge", spec.gauge(g)?.value())
            .with_extra("u", scale),
        );
    }
    Ok(set)
}

fn limits(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let id = spec.id();
    let p = prov(c);
    let u = ScalarField::bump(spec, spec.identity(), 2.0);
    let pts = bump_interior_points(spec, 2.0, 10);
    let mut set = CheckSet::default();

    let small = small_s_limit(spec, &u, &pts[..5], 0.005, &c.quad)?;
    let tag = format!("operator.limit.{id}.s=0.005");
    set.push(
        CheckRecord::verdict(format!("{tag}.minus_u"), LIMIT_ANCHOR, p, small.deviation_from_minus_u < 0.05)
            .with_value(small.deviation_from_minus_u)
            .with_tolerance(0.05)
            .with_detail("max relative deviation of (2s/σ_Q) 𝓛_s u from −u over 5 interior points of the bump"),
    );
    set.push(
        CheckRecord::verdict(format!("{tag}.plus_u"), LIMIT_ANCHOR, p, small.deviation_from_plus_u < 0.05)
            .with_value(small.deviation_from_plus_u)
            .with_tolerance(0.05)
            .with_detail("max relative deviation of (2s/σ_Q) 𝓛_s u from +u; splitting the kernel at |h| = 1 gives u σ_Q/(2s) + O(1)"),
    );
    // Outside the support only −∫u(gh)|h|^{-Q-2s} remains, and the scaled
    // value is O(s).
    let mut out = spec.identity();
    out.z[0] = 3.0;
    let r = apply_ls(spec, &u, &out, 0.005, &c.quad)?;
    let scaled = 2.0 * 0.005 / sigma_q(spec) * r.value;
    set.push(
        CheckRecord::verdict(format!("{tag}.outside_support"), LIMIT_ANCHOR, p, scaled.abs() < 0.05)
            .with_value(scaled)
            .with_tolerance(0.05)
            .with_input("gauge", 3.0),
    );

    let near = near_one_limit(spec, &u, &pts, 0.995, &c.quad)?;
    let tag = format!("operator.limit.{id}.s=0.995");
    set.push(
        CheckRecord::verdict(format!("{tag}.cv"), LIMIT_ANCHOR, p, near.cv < 0.03)
            .with_value(near.cv)
            .with_tolerance(0.03)
            .with_input("points", pts.len())
            .with_extra("ratio_median", near.median),
    );
    set.push(
        CheckRecord::diagnostic(format!("{tag}.ratio"), LIMIT_ANCHOR, p)
            .with_value(near.median)
            .with_detail("(1 − s) 𝓛_s u / (−Σ X_i² u); the constant itself is not asserted"),
    );
    Ok(set)
}

fn derivatives(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let id = spec.id();
    let mut set = CheckSet::default();
    let pts = points_on_gauges(spec, &[0.4, 1.1, 2.5]);
    let m = spec.m() as f64;
    let z2 = ScalarField::z_norm_sq(spec);
    let worst = pts
        .iter()
        .map(|g| sub_laplacian(spec, &z2, g).map(|v| rel(v.value, 2.0 * m)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    set.push(
        CheckRecord::verdict(format!("operator.derivatives.{id}.z_norm_sq"), DERIV_ANCHOR, Provenance::Quadrature, worst < 1e-8)
            .with_value(worst)
            .with_tolerance(1e-8)
            .with_extra("expected", 2.0 * m),
    );
    if spec.k() > 0 {
        let sig = ScalarField::sigma_coord(spec, 0);
        let worst = pts
            .iter()
            .map(|g| sub_laplacian(spec, &sig, g).map(|v| v.value.abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        set.push(
            CheckRecord::verdict(format!("operator.derivatives.{id}.sigma"), DERIV_ANCHOR, Provenance::Quadrature, worst < 1e-8)
                .with_value(worst)
                .with_tolerance(1e-8),
        );
    }
    let gauss = ScalarField::gaussian(spec, spec.identity(), 1.0);
    let g = &pts[1];
    let h = 1e-2;
    let a = sub_laplacian_with_step(spec, &gauss, g, h)?;
    let b = sub_laplacian_with_step(spec, &gauss, g, h / 2.0)?;
    let d = rel(a.value, b.value);
    set.push(
        CheckRecord::verdict(format!("operator.derivatives.{id}.step_halving"), DERIV_ANCHOR, Provenance::Quadrature, d < 1e-6)
            .with_value(d)
            .with_tolerance(1e-6)
            .with_input("h", h),
    );
    Ok(set)
}

fn metadata(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let mut set = CheckSet::default();
    let mut fields = vec![
        ScalarField::bump(spec, spec.identity(), 2.0),
        ScalarField::gaussian(spec, spec.identity(), 1.0),
        ScalarField::fundamental_profile(spec, 0.5),
    ];
    if spec.k() > 0 {
        fields.push(ExplicitSolutionSpec::new(spec, 1.0, 0.5)?.field());
    }
    for (i, f) in fields.iter().enumerate() {
        for mut r in validate_metadata(spec, f, c.seed.wrapping_add(i as u64)).records {
            r.id = format!("operator.metadata.{}.{}", spec.id(), r.id);
            set.push(r);
        }
    }
    Ok(set)
}

fn form_opts(c: &Ctx, factor: usize) -> FormOptions {
    let base = FormOptions::from_quad(&c.quad);
    FormOptions { outer: base.outer * factor, seed: c.seed, ..base }
}

fn forms(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("operator.forms.{}.s={s}", spec.id());
    let opts = form_opts(c, 1);
    let mut set = CheckSet::default();

    let u = ScalarField::bump(spec, spec.identity(), 2.0);
    let mut pc = spec.identity();
    pc.z[0] = 0.8;
    let phi = ScalarField::bump(spec, pc, 1.5);
    let a = quadratic_form(spec, &u, &phi, s, &opts)?;
    let b = quadratic_form(spec, &phi, &u, s, &opts)?;
    set.push(
        CheckRecord::verdict(format!("{tag}.symmetry"), FORM_ANCHOR, Provenance::MonteCarlo, close(a, b, 3.0, 0.0))
            .with_value(a.value)
            .with_error(a.error)
            .with_extra("swapped", b.value)
            .with_extra("swapped_error", b.error),
    );

    let uu = quadratic_form(spec, &u, &u, s, &opts)?;
    let semi = seminorm(spec, &u, s, &opts)?;
    set.push(
        CheckRecord::verdict(format!("{tag}.diagonal"), FORM_ANCHOR, Provenance::MonteCarlo, close(uu, semi.power, 3.0, 0.0))
            .with_value(uu.value)
            .with_error(uu.error)
            .with_extra("seminorm_squared", semi.power.value)
            .with_extra("seminorm_squared_error", semi.power.error),
    );

    let zero = seminorm(spec, &ScalarField::zero(spec), s, &opts)?;
    set.push(CheckRecord::verdict(format!("{tag}.zero"), FORM_ANCHOR, Provenance::Algebraic, zero.value == 0.0).with_value(zero.value));

    // A plateau equal to 1 on the support of φ: the form decays as the
    // plateau widens.
    let small = ScalarField::bump(spec, spec.identity(), 1.0);
    let mut vals = vec![];
    for a in [2.0, 4.0, 8.0] {
        let pl = ScalarField::plateau(spec, spec.identity(), a, 2.0 * a);
        vals.push(quadratic_form(spec, &pl, &small, s, &opts)?);
    }
    let decreasing = vals.windows(2).all(|w| w[1].value.abs() < w[0].value.abs());
    set.push(
        CheckRecord::verdict(format!("{tag}.plateau"), FORM_ANCHOR, Provenance::MonteCarlo, decreasing)
            .with_value(vals[2].value)
            .with_error(vals[2].error)
            .with_extra("inner=2", vals[0].value)
            .with_extra("inner=4", vals[1].value)
            .with_extra("inner=8", vals[2].value)
            .with_detail("𝒬_s(plateau, φ) for plateaus equal to 1 on the support of φ"),
    );
    Ok(set)
}

fn scale_invariance(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("operator.scale.{}.s={s}", spec.id());
    let opts = form_opts(c, 1);
    let u = if spec.k() > 0 {
        ExplicitSolutionSpec::new(spec, 1.0, s)?.field()
    } else {
        ScalarField::gaussian(spec, spec.identity(), 1.0)
    };
    let w = (spec.qf() - 2.0 * s) / 2.0;
    let mut set = CheckSet::default();
    let base = seminorm(spec, &u, s, &opts)?;
    let bq = sobolev_quotient(spec, &u, s, &opts)?;
    let be = Estimate::new(base.value, base.error);
    let bqe = Estimate::new(bq.value, bq.error);
    for lam in [0.5, 2.0] {
        let ul = u.dilated(lam, w);
        let a = seminorm(spec, &ul, s, &opts)?;
        let ae = Estimate::new(a.value, a.error);
        set.push(
            CheckRecord::verdict(format!("{tag}.seminorm.lambda={lam}"), SCALE_ANCHOR, Provenance::MonteCarlo, close(ae, be, 3.0, 0.0))
                .with_value(a.value)
                .with_error(a.error)
                .with_extra("unscaled", base.value),
        );
        let q = sobolev_quotient(spec, &ul, s, &opts)?;
        let qe = Estimate::new(q.value, q.error);
        set.push(
            CheckRecord::verdict(format!("{tag}.quotient.lambda={lam}"), SCALE_ANCHOR, Provenance::MonteCarlo, close(qe, bqe, 3.0, 0.0))
                .with_value(q.value)
                .with_error(q.error)
                .with_extra("unscaled", bq.value),
        );
    }
    let g0 = points_on_gauges(spec, &[2.2])[0].clone();
    let t = sobolev_quotient(spec, &u.left_translated(spec, &g0), s, &opts)?;
    set.push(
        CheckRecord::verdict(format!("{tag}.quotient.translated"), SCALE_ANCHOR, Provenance::MonteCarlo, close(Estimate::new(t.value, t.error), bqe, 3.0, 0.0))
            .with_value(t.value)
            .with_error(t.error)
            .with_extra("untranslated", bq.value),
    );
    let other = seminorm(spec, &u, s, &FormOptions { seed: c.seed ^ 0x9e37_79b9_7f4a_7c15, ..opts })?;
    set.push(
        CheckRecord::verdict(
            format!("{tag}.seminorm.reseeded"),
            SCALE_ANCHOR,
            Provenance::MonteCarlo,
            close(Estimate::new(other.value, other.error), be, 3.0, 0.0),
        )
        .with_value(other.value)
        .with_error(other.error)
        .with_extra("first_seed", base.value)
        .with_detail("independent sample streams"),
    );
    if spec.k() > 0 {
        // A generic bump has a smaller Sobolev quotient than the bubble.
        let big = form_opts(c, 4);
        let qb = sobolev_quotient(spec, &u, s, &big)?;
        let bump = ScalarField::bump(spec, spec.identity(), 1.0);
        let qc = sobolev_quotient(spec, &bump, s, &big)?;
        set.push(
            CheckRecord::verdict(format!("{tag}.quotient.bubble_beats_bump"), SCALE_ANCHOR, Provenance::MonteCarlo, qb.value - qc.value > qb.error + qc.error)
                .with_value(qb.value)
                .with_error(qb.error)
                .with_extra("bump", qc.value)
                .with_extra("bump_error", qc.error),
        );
    }
    Ok(set)
}

// ---- yamabe ----------------------------------------------------------

fn bubble_closed_forms(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("yamabe.bubble.{}", spec.id());
    if spec.k() == 0 {
        return Ok(unsupported(tag, BUBBLE_ANCHOR, spec));
    }
    let mut set = CheckSet::default();
    let (q, m, k) = (spec.qf(), spec.m(), spec.k());
    for s in [0.3, 0.5, 0.7] {
        let e = q - 2.0 * s;
        let y = 1.7;
        let a = intertwining_constant(m, k, s)?;
        let sol = ExplicitSolutionSpec::new(spec, y, s)?;
        let peak = sol.field().eval(&spec.identity());
        let want = a.powf(e / (4.0 * s)) * (4.0 / y).powf(e / 2.0);
        set.push(
            CheckRecord::verdict(format!("{tag}.s={s}.peak"), BUBBLE_ANCHOR, Provenance::ClosedForm, rel(peak, want) < 1e-13)
                .with_value(peak)
                .with_extra("expected", want),
        );
        let one = ExplicitSolutionSpec::new(spec, 1.0, s)?.field();
        let g = points_on_gauges(spec, &[0.9])[0].clone();
        let lhs = sol.field().eval(&dilate_unchecked(y, &g));
        let rhs = y.powf(-e / 2.0) * one.eval(&g);
        set.push(
            CheckRecord::verdict(format!("{tag}.s={s}.dilation"), BUBBLE_ANCHOR, Provenance::ClosedForm, rel(lhs, rhs) < 1e-13)
                .with_value(lhs)
                .with_extra("expected", rhs),
        );
        let big = 1e4;
        let mut gz = spec.identity();
        gz.z[0] = big;
        let mut gs = spec.identity();
        gs.sigma[0] = big * big / 4.0;
        let lz = big.powf(e) * one.eval(&gz);
        let ls = big.powf(e) * one.eval(&gs);
        set.push(
            CheckRecord::verdict(format!("{tag}.s={s}.far_limit"), BUBBLE_ANCHOR, Provenance::ClosedForm, rel(lz, ls) < 1e-6)
                .with_value(lz)
                .with_extra("sigma_axis", ls)
                .with_detail("|g|^{Q-2s} u₁(g) at gauge 1e4 along the z- and σ-axes"),
        );
    }
    Ok(set)
}

fn intertwining(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("yamabe.intertwining.{}.s={s}", spec.id());
    if spec.k() == 0 {
        return Ok(unsupported(tag, ALPHA_ANCHOR, spec));
    }
    let cv_tol = if prov(c) == Provenance::MonteCarlo { 0.05 } else { 0.02 };
    let pts = default_points(spec, 10);
    let mut set = CheckSet::default();
    let mut medians = vec![];
    for y in [0.5, 1.0, 2.0] {
        let part = intertwining_check(spec, s, y, &pts, cv_tol, &c.quad)?;
        let cv = part
            .records
            .iter()
            .find(|r| r.id.ends_with(".cv"))
            .ok_or_else(|| Error::Calibration("intertwining check produced no summary".into()))?;
        medians.push((y, Estimate::new(cv.extra["alpha_median"], cv.extra["alpha_uncertainty"])));
        set.extend(part);
    }
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..medians.len() {
        for j in i + 1..medians.len() {
            let (a, b) = (medians[i].1, medians[j].1);
            ok &= close(a, b, 3.0, 0.0);
            worst = worst.max((a.value - b.value).abs() / (a.error + b.error));
        }
    }
    let mut rec = CheckRecord::verdict(format!("{tag}.y_independence"), ALPHA_ANCHOR, prov(c), ok)
        .with_value(worst)
        .with_tolerance(3.0)
        .with_detail("largest pairwise gap between α medians in units of combined uncertainty");
    for (y, e) in &medians {
        rec = rec.with_extra(&format!("alpha(y={y})"), e.value);
    }
    set.push(rec);
    Ok(set)
}

fn alpha(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("yamabe.alpha.{}.s={s}", spec.id());
    if spec.k() == 0 {
        return Ok(unsupported(tag, ALPHA_ANCHOR, spec));
    }
    let p = prov(c);
    let mut set = CheckSet::default();
    let cal = calibrate_alpha(spec, s, &c.quad)?;
    let gap = (cal.intertwining.value - cal.yamabe.value).abs() / (cal.intertwining.error + cal.yamabe.error);
    set.push(
        CheckRecord::verdict(format!("{tag}.estimators"), ALPHA_ANCHOR, p, cal.agree)
            .with_value(cal.alpha)
            .with_error(cal.uncertainty)
            .with_tolerance(5.0)
            .with_extra("intertwining", cal.intertwining.value)
            .with_extra("intertwining_error", cal.intertwining.error)
            .with_extra("yamabe", cal.yamabe.value)
            .with_extra("yamabe_error", cal.yamabe.error)
            .with_extra("gap_in_combined_errors", gap),
    );
    set.push(CheckRecord::verdict(format!("{tag}.positive"), ALPHA_ANCHOR, p, cal.alpha > 0.0).with_value(cal.alpha));

    // Weak form of 𝓛_s v = α v^{2*(s)−1} for v = α^{(Q−2s)/(4s)} u₁, which is
    // the weak form for u₁ itself after dividing by the constant.
    let sol = ExplicitSolutionSpec::new(spec, 1.0, s)?;
    let opts = form_opts(c, 1);
    let mut r = rng(c.seed);
    for i in 0..5 {
        let center = random_point(spec, &mut r, 1.5);
        let radius = r.gen_range(0.6..1.6);
        let phi = ScalarField::bump(spec, center, radius);
        let w = weak_form_residual(&sol, Estimate::new(cal.alpha, cal.uncertainty), &phi, &FormOptions { seed: opts.seed.wrapping_add(i), ..opts }, &c.quad)?;
        set.push(
            CheckRecord::verdict(format!("{tag}.weak_residual.phi{i}"), ALPHA_ANCHOR, Provenance::Mixed, w.residual.abs() <= 5.0 * w.error)
                .with_value(w.residual)
                .with_error(w.error)
                .with_tolerance(5.0 * w.error)
                .with_extra("form", w.form.value)
                .with_extra("source", w.source.value)
                .with_extra("rescale", cal.alpha.powf((spec.qf() - 2.0 * s) / (4.0 * s)))
                .with_input("phi_radius", radius),
        );
    }
    Ok(set)
}

// ---- lorentz ---------------------------------------------------------

fn lorentz(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let q = spec.qf();
    let tag = format!("lorentz.{}", spec.id());
    let a = q + 1.0;
    let mut set = CheckSet::default();
    for (p, sg) in [(2.0, 1.0), (2.0, 2.0), (1.5, 3.0), (4.0, 1.0)] {
        let cut = LorentzCutoffSpec::new(spec, a, 2.0, p, sg)?;
        let n = lorentz_norm_quadrature(&cut)?;
        let gap = rel(n.quadrature.value, n.closed_form);
        set.push(
            CheckRecord::verdict(format!("{tag}.closed_form.p={p}.sigma={sg}"), LORENTZ_ANCHOR, Provenance::Quadrature, gap < 1e-8)
                .with_value(n.quadrature.value)
                .with_error(n.quadrature.error)
                .with_tolerance(1e-8)
                .with_extra("closed_form", n.closed_form)
                .with_extra("C_Q_sigma", n.constant),
        );
    }
    let (p, sg) = (2.0, 2.0);
    let radii = [1.0, 2.0, 4.0, 8.0];
    let logs: Vec<f64> = radii
        .iter()
        .map(|&r| lorentz_norm_quadrature(&LorentzCutoffSpec::new(spec, a, r, p, sg)?).map(|n| n.quadrature.value.ln()))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = radii.iter().map(|r: &f64| r.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / 4.0, logs.iter().sum::<f64>() / 4.0);
    let slope = x.iter().zip(&logs).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
    let want = -(a - q / p);
    set.push(
        CheckRecord::verdict(format!("{tag}.r_slope"), LORENTZ_ANCHOR, Provenance::Quadrature, rel(slope, want) < 0.01)
            .with_value(slope)
            .with_tolerance(0.01)
            .with_extra("expected", want)
            .with_input("radii", radii.to_vec()),
    );

    let cut = LorentzCutoffSpec::new(spec, a, 1.0, 2.0, 1.0)?;
    let levels = [0.8, 0.5, 0.3, 0.15, 0.08];
    let mc = lorentz_distribution_mc(spec, &cut, &levels, c.quad.mc_samples.max(1 << 16), c.seed)?;
    for (l, e) in levels.iter().zip(&mc) {
        let exact = crate::yamabe::distribution_function(&cut, *l);
        set.push(
            CheckRecord::verdict(format!("{tag}.distribution.lambda={l}"), LORENTZ_ANCHOR, Provenance::MonteCarlo, (e.value - exact).abs() <= 3.0 * e.error)
                .with_value(e.value)
                .with_error(e.error)
                .with_tolerance(3.0 * e.error)
                .with_extra("closed_form", exact),
        );
    }
    let r0 = rearrangement(&cut, 0.0)?;
    set.push(
        CheckRecord::verdict(format!("{tag}.rearrangement_at_zero"), LORENTZ_ANCHOR, Provenance::ClosedForm, rel(r0, cut.r.powf(-a)) < 1e-15)
            .with_value(r0)
            .with_extra("expected", cut.r.powf(-a)),
    );
    let bad = LorentzCutoffSpec::new(spec, q / 2.0 - 0.1, 1.0, 2.0, 1.0).and_then(|c| lorentz_cutoff_norm(&c));
    set.push(
        CheckRecord::verdict(format!("{tag}.divergent_index"), LORENTZ_ANCHOR, Provenance::ClosedForm, matches!(bad, Err(Error::Domain { .. })))
            .with_input("alpha", q / 2.0 - 0.1)
            .with_input("p", 2.0)
            .with_detail("α ≤ Q/p must be a domain error"),
    );
    Ok(set)
}

// ---- decay, tail, local boundedness ----------------------------------

fn decay_record(id: String, spec: &GroupSpec, u: &ScalarField, want: f64, tol: f64, relative: bool, seed: u64) -> Result<CheckRecord> {
    let opts = DecayOptions { seed, ..DecayOptions::default() };
    let d = decay_fit_with(spec, u, &opts)?;
    let dev = if relative { rel(d.fitted_exponent, want) } else { (d.fitted_exponent - want).abs() };
    Ok(CheckRecord::verdict(id, DECAY_ANCHOR, Provenance::MonteCarlo, dev <= tol)
        .with_value(d.fitted_exponent)
        .with_tolerance(tol)
        .with_extra("expected", want)
        .with_extra("fit_residual", d.fit_residual)
        .with_extra("intercept", d.intercept)
        .with_input("shells", opts.radii)
        .with_input("points_per_shell", d.points_per_shell))
}

fn decay_powers(c: &Ctx) -> Result<CheckSet> {
    let spec = &c.spec;
    let mut set = CheckSet::default();
    for b in [1.0, 2.5, 7.0] {
        let u = ScalarField::gauge_power(spec, b);
        set.push(decay_record(format!("decay.powers.{}.beta={b}", spec.id()), spec, &u, b, 1e-10, false, c.seed)?);
    }
    Ok(set)
}

fn decay(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    let tag = format!("decay.{}.s={s}", spec.id());
    let e = spec.qf() - 2.0 * s;
    let mut set = CheckSet::default();
    set.push(decay_record(format!("{tag}.fundamental"), spec, &ScalarField::fundamental_profile(spec, s), e, 1e-10, false, c.seed)?);
    set.push(decay_record(format!("{tag}.slow_power"), spec, &ScalarField::gauge_power(spec, e / 2.0), e / 2.0, 1e-10, false, c.seed)?);
    if spec.k() == 0 {
        set.extend(unsupported(format!("{tag}.bubble"), DECAY_ANCHOR, spec));
        return Ok(set);
    }
    let u = ExplicitSolutionSpec::new(spec, 1.0, s)?.field();
    set.push(decay_record(format!("{tag}.bubble"), spec, &u, e, 0.02, true, c.seed)?);
    set.push(decay_record(format!("{tag}.bubble_sqrt"), spec, &u.powf(0.5), e / 2.0, 0.02, true, c.seed)?);
    Ok(set)
}

fn tail(c: &Ctx, s: f64) -> Result<CheckSet> {
    if c.spec.k() == 0 {
        return Ok(unsupported(format!("tail.{}.s={s}", c.spec.id()), TAIL_ANCHOR, &c.spec));
    }
    tail_decay_check(&c.spec, s, &c.quad)
}

fn localbound(c: &Ctx, s: f64) -> Result<CheckSet> {
    let spec = &c.spec;
    if spec.k() == 0 {
        return Ok(unsupported(format!("localbound.{}.s={s}", spec.id()), LOCAL_ANCHOR, spec));
    }
    // The all-pairs spread bound is an expectation established on H¹ only.
    let spread_tol = (spec.m() == 2 && spec.k() == 1).then_some(3.0);
    let opts = LocalBoundOptions { seed: c.seed, spread_tol, ..LocalBoundOptions::default() };
    let centers = points_on_gauges(spec, &[8.0, 16.0, 32.0]);
    let pairs: Vec<(GroupPoint, f64)> = centers
        .iter()
        .flat_map(|g| {
            let r = spec.gauge_unchecked(g);
            [(g.clone(), r / 4.0), (g.clone(), r / 2.0)]
        })
        .collect();
    let u = ExplicitSolutionSpec::new(spec, 1.0, s)?.field();
    let mut set = local_bound_diagnostic(spec, &u, s, &pairs, &opts, &c.quad)?;
    set.extend(local_bound_diagnostic(spec, &u.powf(0.5), s, &pairs[..2], &opts, &c.quad)?);
    set.extend(local_bound_diagnostic(spec, &ScalarField::zero(spec), s, &pairs[..1], &opts, &c.quad)?);
    Ok(set)
}
