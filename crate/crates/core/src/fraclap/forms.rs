//! Double integrals: the quadratic form `𝒬_s(u, φ)`, the seminorm
//! `[u]_{s,p}` and the fractional Sobolev quotient.
//!
//! Both variables are sampled. The outer point `g` is uniform on the
//! support ball of the compactly supported argument, or drawn from a
//! ball-plus-Pareto law around the field's center. The increment `h` is
//! drawn in polar form with a radial density matching the kernel: `ρ^{a−1}`
//! below a local length `ℓ(g)` and `ρ^{−1−b}` above it, so the
//! importance weight is bounded at both ends. Each `h` is used with its
//! inverse. All samplers are expressed through the fields' center and
//! scale, so fixing the seed gives common random numbers for translated or
//! dilated copies of a field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::QuadratureConfig;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{dilate_unchecked, inverse_unchecked, GroupPoint, GroupSpec};
use crate::measure::{omega_q, sigma_q};
use crate::quadrature::{Estimate, NeumaierSum, SphereSampler};

const CHUNK: usize = 256;
const BINS: usize = 6;

/// Sampling effort for the double integrals.
#[derive(Clone, Copy, Debug)]
pub struct FormOptions {
    /// Number of outer points `g`.
    pub outer: usize,
    /// Antithetic increment pairs per outer point.
    pub inner: usize,
    pub seed: u64,
}

impl FormOptions {
    pub fn from_quad(quad: &QuadratureConfig) -> Self {
        FormOptions { outer: (quad.mc_samples / 4).max(CHUNK), inner: 4, seed: quad.seed }
    }
}

/// Outer-point law.
#[derive(Clone, Debug)]
enum Outer {
    /// Uniform on `B(center, radius)`.
    Ball { center: GroupPoint, radius: f64 },
    /// Half the mass uniform on `B(center, l)`, half Pareto `r^{−1−κ}` beyond.
    Pareto { center: GroupPoint, l: f64, kappa: f64 },
}

impl Outer {
    /// Sample `g` and return it with `1/pdf(g)` and its radius bin.
    fn sample(&self, spec: &GroupSpec, rng: &mut ChaCha8Rng) -> (GroupPoint, f64, usize) {
        let q = spec.qf();
        match self {
            Outer::Ball { center, radius } => {
                let b = SphereSampler::ball_point(spec, rng);
                let g = spec.mul_unchecked(center, &dilate_unchecked(*radius, &b));
                (g, omega_q(spec) * radius.powf(q), 0)
            }
            Outer::Pareto { center, l, kappa } => {
                let w = SphereSampler::direction(spec, rng);
                let (r, pdf) = if rng.gen::<bool>() {
                    let r = l * rng.gen::<f64>().powf(1.0 / q);
                    (r, 0.5 / (omega_q(spec) * l.powf(q)))
                } else {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let r = l * u.powf(-1.0 / kappa);
                    (r, 0.5 * kappa * l.powf(*kappa) * r.powf(-kappa - q) / sigma_q(spec))
                };
                let bin = if r < *l { 0 } else { (1 + (r / l).log10().floor() as usize).min(BINS - 1) };
                (spec.mul_unchecked(center, &dilate_unchecked(r, &w)), 1.0 / pdf, bin)
            }
        }
    }

    fn contains(&self, spec: &GroupSpec, x: &GroupPoint) -> bool {
        match self {
            Outer::Ball { center, radius } => spec.distance(center, x) < *radius,
            Outer::Pareto { .. } => true,
        }
    }
}

/// Radial law for the increment: `ρ^{a−1}` on `[0, ℓ]`, `ρ^{−1−b}` beyond,
/// half the mass each. Returns `ρ` and `σ_Q ρ^{−1−b}/p(ρ)`, the weight of
/// `∫ A(h) |h|^{−Q−b} dh` in polar form.
fn sample_rho(rng: &mut ChaCha8Rng, ell: f64, a: f64, b: f64, sig: f64) -> (f64, f64) {
    let u: f64 = 1.0 - rng.gen::<f64>();
    if rng.gen::<bool>() {
        let rho = ell * u.powf(1.0 / a);
        // ρ^{-1-b} / (½ a ρ^{a-1} ℓ^{-a})
        (rho, sig * 2.0 * ell.powf(a) * rho.powf(-a - b) / a)
    } else {
        let rho = ell * u.powf(-1.0 / b);
        (rho, sig * 2.0 / (b * ell.powf(b)))
    }
}

fn local_scale(spec: &GroupSpec, u: &ScalarField, g: &GroupPoint) -> f64 {
    if u.localized {
        u.scale.max(0.5 * spec.distance(g, &u.center))
    } else {
        f64::INFINITY
    }
}

struct Sums {
    total: NeumaierSum,
    sq: NeumaierSum,
    aux: NeumaierSum,
    aux_sq: NeumaierSum,
    cross: NeumaierSum,
    bins: [f64; BINS],
}

/// Shared Monte Carlo driver. `pair(g, h)` is the symmetrized integrand
/// (without kernel); `aux(g)` is an optional single integral sampled with
/// the same outer points.
#[allow(clippy::too_many_arguments)]
fn drive(
    spec: &GroupSpec,
    outer: &Outer,
    opts: &FormOptions,
    ell: &(dyn Fn(&GroupPoint) -> f64 + Sync),
    a: f64,
    b: f64,
    pair: &(dyn Fn(&GroupPoint, &GroupPoint, bool) -> f64 + Sync),
    aux: &(dyn Fn(&GroupPoint) -> f64 + Sync),
) -> Sums {
    let sig = sigma_q(spec);
    let n_chunks = opts.outer.div_ceil(CHUNK);
    let per_chunk: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(c as u64 + 1);
            let mut s = Sums {
                total: NeumaierSum::new(),
                sq: NeumaierSum::new(),
                aux: NeumaierSum::new(),
                aux_sq: NeumaierSum::new(),
                cross: NeumaierSum::new(),
                bins: [0.0; BINS],
            };
            let count = CHUNK.min(opts.outer - c * CHUNK);
            for _ in 0..count {
                let (g, inv_pdf, bin) = outer.sample(spec, &mut rng);
                let l = ell(&g);
                let mut acc = 0.0;
                for _ in 0..opts.inner {
                    let (rho, w) = sample_rho(&mut rng, l, a, b, sig);
                    let om = SphereSampler::direction(spec, &mut rng);
                    let h = dilate_unchecked(rho, &om);
                    let hi = inverse_unchecked(&h);
                    let gh = spec.mul_unchecked(&g, &h);
                    let ghi = spec.mul_unchecked(&g, &hi);
                    let out1 = !outer.contains(spec, &gh);
                    let out2 = !outer.contains(spec, &ghi);
                    acc += 0.5 * w * (pair(&g, &gh, out1) + pair(&g, &ghi, out2));
                }
                let x = inv_pdf * acc / opts.inner as f64;
                let y = inv_pdf * aux(&g);
                s.total.add(x);
                s.sq.add(x * x);
                s.aux.add(y);
                s.aux_sq.add(y * y);
                s.cross.add(x * y);
                s.bins[bin] += x;
            }
            s
        })
        .collect();
    let mut out = Sums {
        total: NeumaierSum::new(),
        sq: NeumaierSum::new(),
        aux: NeumaierSum::new(),
        aux_sq: NeumaierSum::new(),
        cross: NeumaierSum::new(),
        bins: [0.0; BINS],
    };
    for s in per_chunk {
        out.total.add(s.total.total());
        out.sq.add(s.sq.total());
        out.aux.add(s.aux.total());
        out.aux_sq.add(s.aux_sq.total());
        out.cross.add(s.cross.total());
        for (o, v) in out.bins.iter_mut().zip(s.bins) {
            *o += v;
        }
    }
    out
}

fn mean_se(sum: f64, sq: f64, n: usize) -> Estimate {
    let n = n as f64;
    let mean = sum / n;
    let var = ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Estimate::new(mean, (var / n).sqrt())
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("s must lie in (0, 1), got {s}")))
    }
}

fn check_opts(opts: &FormOptions) -> Result<()> {
    if opts.outer < 2 || opts.inner == 0 {
        return Err(Error::InvalidInput("double integrals need at least 2 outer and 1 inner sample".into()));
    }
    Ok(())
}

fn support_ball(u: &ScalarField) -> Option<Outer> {
    match u.support_radius {
        Some(r) if u.localized && r > 0.0 => Some(Outer::Ball { center: u.center.clone(), radius: r }),
        _ => None,
    }
}

/// `𝒬_s(u, φ) = ∫∫ (u(g) − u(h))(φ(g) − φ(h)) |g⁻¹h|^{−Q−2s} dg dh`.
///
/// With this normalization `𝒬_s(u, φ) = 2 ∫ φ 𝓛_s u`.
pub fn quadratic_form(
    spec: &GroupSpec,
    u: &ScalarField,
    phi: &ScalarField,
    s: f64,
    opts: &FormOptions,
) -> Result<Estimate> {
    check_s(s)?;
    check_opts(opts)?;
    let outer = support_ball(phi).ok_or_else(|| {
        Error::Refused(format!("test function `{}` has no support radius", phi.name()))
    })?;
    if !u.localized && u.bound.is_none() && u.decay_exponent.is_none() {
        return Err(Error::Refused(format!("field `{}` has no growth control", u.name())));
    }
    let ell = |g: &GroupPoint| 0.5 * local_scale(spec, u, g).min(phi.scale);
    let pair = |g: &GroupPoint, x: &GroupPoint, outside: bool| {
        let f = (u.eval(g) - u.eval(x)) * (phi.eval(g) - phi.eval(x));
        if outside {
            2.0 * f
        } else {
            f
        }
    };
    let sums = drive(spec, &outer, opts, &ell, 2.0 - 2.0 * s, 2.0 * s, &pair, &|_| 0.0);
    Ok(mean_se(sums.total.total(), sums.sq.total(), opts.outer))
}

/// Per-decade contribution of outer points at gauge distance
/// `[lo, hi)` from the field's center.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShellContribution {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormResult {
    /// `[u]_{s,p}`.
    pub value: f64,
    pub error: f64,
    /// `[u]_{s,p}^p`.
    pub power: Estimate,
    pub shells: Vec<ShellContribution>,
}

struct Setup {
    outer: Outer,
    pareto: bool,
}

fn seminorm_setup(u: &ScalarField, s: f64, p: f64) -> Result<Setup> {
    if let Some(o) = support_ball(u) {
        return Ok(Setup { outer: o, pareto: false });
    }
    if !u.localized && u.support_radius == Some(0.0) {
        // The zero field.
        return Ok(Setup { outer: Outer::Ball { center: u.center.clone(), radius: 1.0 }, pareto: false });
    }
    let Some(_) = u.decay_exponent else {
        return Err(Error::Refused(format!(
            "field `{}` has neither support nor decay metadata",
            u.name()
        )));
    };
    if !u.localized {
        return Err(Error::Divergence(format!("field `{}` is not localized", u.name())));
    }
    Ok(Setup {
        outer: Outer::Pareto { center: u.center.clone(), l: 2.0 * u.scale, kappa: p * s },
        pareto: true,
    })
}

fn shells_of(sums: &Sums, n: usize, outer: &Outer) -> Vec<ShellContribution> {
    match outer {
        Outer::Ball { radius, .. } => vec![ShellContribution { lo: 0.0, hi: *radius, value: sums.total.total() / n as f64 }],
        Outer::Pareto { l, .. } => (0..BINS)
            .map(|i| {
                let (lo, hi) = if i == 0 { (0.0, *l) } else { (l * 10f64.powi(i as i32 - 1), l * 10f64.powi(i as i32)) };
                let hi = if i == BINS - 1 { f64::INFINITY } else { hi };
                ShellContribution { lo, hi, value: sums.bins[i] / n as f64 }
            })
            .collect(),
    }
}

/// The shell sequence must decay: the contribution from the decade
/// `[10³ℓ, 10⁴ℓ)` and beyond must be small next to the decade `[10ℓ, 10²ℓ)`.
fn check_shells(shells: &[ShellContribution], total: f64) -> Result<()> {
    let early = shells[2].value.abs();
    let late: f64 = shells[4..].iter().map(|c| c.value.abs()).sum();
    if late > 0.5 * early.max(1e-3 * total.abs()) {
        return Err(Error::Divergence(format!(
            "seminorm shell contributions do not decay (decade 2: {early:.3e}, decades ≥ 4: {late:.3e})"
        )));
    }
    Ok(())
}

/// `[u]_{s,p} = (∫∫ |u(g) − u(h)|^p |g⁻¹h|^{−Q−ps})^{1/p}`.
pub fn seminorm_p(spec: &GroupSpec, u: &ScalarField, s: f64, p: f64, opts: &FormOptions) -> Result<SeminormResult> {
    check_s(s)?;
    check_opts(opts)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("p must be at least 1, got {p}")));
    }
    let setup = seminorm_setup(u, s, p)?;
    let ell = |g: &GroupPoint| 0.5 * local_scale(spec, u, g).min(if u.localized { f64::INFINITY } else { 1.0 });
    let pair = |g: &GroupPoint, x: &GroupPoint, outside: bool| {
        let f = (u.eval(g) - u.eval(x)).abs().powf(p);
        if outside {
            2.0 * f
        } else {
            f
        }
    };
    let sums = drive(spec, &setup.outer, opts, &ell, p * (1.0 - s), p * s, &pair, &|_| 0.0);
    let power = mean_se(sums.total.total(), sums.sq.total(), opts.outer);
    let shells = shells_of(&sums, opts.outer, &setup.outer);
    if setup.pareto {
        check_shells(&shells, power.value)?;
    }
    let value = power.value.max(0.0).powf(1.0 / p);
    let error = if value > 0.0 { power.error * value / (p * power.value) } else { power.error.powf(1.0 / p) };
    Ok(SeminormResult { value, error, power, shells })
}

/// `[u]_{s,2}`.
pub fn seminorm(spec: &GroupSpec, u: &ScalarField, s: f64, opts: &FormOptions) -> Result<SeminormResult> {
    seminorm_p(spec, u, s, 2.0, opts)
}

/// `2*(s) = 2Q/(Q − 2s)`.
pub fn sobolev_exponent(spec: &GroupSpec, s: f64) -> f64 {
    let q = spec.qf();
    2.0 * q / (q - 2.0 * s)
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolevQuotient {
    /// `‖u‖_{2*(s)} / [u]_{s,2}`.
    pub value: f64,
    pub error: f64,
    pub norm: Estimate,
    pub seminorm: Estimate,
}

/// `‖u‖_{2*(s)} / [u]_{s,2}`, both factors sampled at the same outer points.
pub fn sobolev_quotient(spec: &GroupSpec, u: &ScalarField, s: f64, opts: &FormOptions) -> Result<SobolevQuotient> {
    check_s(s)?;
    check_opts(opts)?;
    let setup = seminorm_setup(u, s, 2.0)?;
    let e = sobolev_exponent(spec, s);
    let ell = |g: &GroupPoint| 0.5 * local_scale(spec, u, g).min(if u.localized { f64::INFINITY } else { 1.0 });
    let pair = |g: &GroupPoint, x: &GroupPoint, outside: bool| {
        let d = u.eval(g) - u.eval(x);
        if outside {
            2.0 * d * d
        } else {
            d * d
        }
    };
    let aux = |g: &GroupPoint| u.eval(g).abs().powf(e);
    let sums = drive(spec, &setup.outer, opts, &ell, 2.0 - 2.0 * s, 2.0 * s, &pair, &aux);
    let n = opts.outer;
    let semi2 = mean_se(sums.total.total(), sums.sq.total(), n);
    let norm_e = mean_se(sums.aux.total(), sums.aux_sq.total(), n);
    if setup.pareto {
        check_shells(&shells_of(&sums, n, &setup.outer), semi2.value)?;
    }
    if !(semi2.value > 0.0 && norm_e.value > 0.0) {
        return Err(Error::Precondition(format!("field `{}` has zero seminorm or norm", u.name())));
    }
    let norm = Estimate::new(norm_e.value.powf(1.0 / e), norm_e.value.powf(1.0 / e) * norm_e.rel_error() / e);
    let semi = Estimate::new(semi2.value.sqrt(), 0.5 * semi2.value.sqrt() * semi2.rel_error());
    let value = norm.value / semi.value;
    // Delta method with the sample covariance of the two sampled integrals.
    let nf = n as f64;
    let cov = (sums.cross.total() / nf - semi2.value * norm_e.value) / (nf - 1.0);
    let (a, b) = (1.0 / (e * norm_e.value), -0.5 / semi2.value);
    let var = a * a * norm_e.error.powi(2) + b * b * semi2.error.powi(2) + 2.0 * a * b * cov;
    Ok(SobolevQuotient { value, error: value * var.max(0.0).sqrt(), norm, seminorm: semi })
}
