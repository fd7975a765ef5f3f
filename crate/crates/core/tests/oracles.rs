//! Frozen reference values. Numbers marked "30-digit" were computed once in
//! arbitrary precision and pasted here; the rest are closed forms evaluated
//! inline with nothing from the crate but the inputs.

// Frozen digits happen to include 1/π and 2/π; keep them literal.
#![allow(clippy::approx_constant, clippy::excessive_precision)]

use std::f64::consts::PI;

use subfrac::heat::riesz_norm_kernel;
use subfrac::measure::{annulus_closed_form, gauge_annulus_integral, omega_q, sigma_q};
use subfrac::special::{euclidean_riesz_constant, gamma, intertwining_constant, log_gamma};
use subfrac::yamabe::{distribution_function, lorentz_cutoff_norm, lorentz_norm_quadrature, rearrangement, ExplicitSolutionSpec, LorentzCutoffSpec};
use subfrac::{GroupPoint, GroupSpec, QuadratureConfig};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn quat() -> GroupSpec {
    GroupSpec::quaternionic(1).unwrap()
}

#[test]
fn gamma_frozen() {
    // 30-digit
    assert!(rel(gamma(5.5).unwrap(), 52.342777784553520181) < 1e-14);
    assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
    // ln Γ(100) = ln 99!
    let ln99: f64 = (1..100).map(|i| (i as f64).ln()).sum();
    assert!(rel(log_gamma(100.0).unwrap(), ln99) < 1e-13);
}

#[test]
fn intertwining_constant_frozen() {
    // 30-digit
    assert!(rel(intertwining_constant(2, 1, 0.5).unwrap(), 0.54710990380661915971) < 1e-13);
    assert!(rel(intertwining_constant(4, 3, 0.5).unwrap(), 1.4393817302900604199) < 1e-13);
    assert_eq!(intertwining_constant(2, 1, 0.0).unwrap(), 1.0);
}

#[test]
fn gauge_sphere_measures() {
    let h = GroupSpec::heisenberg(1);
    assert!(rel(omega_q(&h), PI * PI / 8.0) < 1e-12);
    assert!(rel(sigma_q(&h), PI * PI / 2.0) < 1e-12);
    assert!(rel(omega_q(&quat()), PI.powi(3) / 240.0) < 1e-12);
    assert!(rel(sigma_q(&quat()), PI.powi(3) / 24.0) < 1e-12);
    assert!(rel(omega_q(&GroupSpec::euclidean(3)), 4.0 * PI / 3.0) < 1e-14);
}

#[test]
fn euclidean_riesz_constant_frozen() {
    // 30-digit, rows n = 1, 2, 3 and columns s = 1/4, 1/2, 3/4.
    let want = [
        [0.398942280401432677940, 0.636619772367581343076, 0.598413420602149016910],
        [0.166483967750850130978, 0.318309886183790671538, 0.342334259381104685850],
        [0.095240453901361454679, 0.202642367284675542888, 0.238101134753403636697],
    ];
    for (i, n) in [1usize, 2, 3].into_iter().enumerate() {
        for (j, s) in [0.25, 0.5, 0.75].into_iter().enumerate() {
            assert!(rel(euclidean_riesz_constant(n, s).unwrap(), want[i][j]) < 1e-13, "n={n} s={s}");
        }
    }
}

#[test]
fn euclidean_riesz_kernel_matches_classical_form() {
    let quad = QuadratureConfig::default();
    for n in 1..=3 {
        let spec = GroupSpec::euclidean(n);
        let x: Vec<f64> = (0..n).map(|i| 0.7 - 0.4 * i as f64).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for s in [0.25, 0.5, 0.75] {
            let c = s * 2f64.powf(2.0 * s + 1.0) * gamma((n as f64 + 2.0 * s) / 2.0).unwrap()
                / (PI.powf(n as f64 / 2.0) * gamma(1.0 - s).unwrap());
            let k = riesz_norm_kernel(&spec, &GroupPoint::new(&x, &[]), s, &quad).unwrap();
            assert!(rel(k.nested.value, c * r.powf(-(n as f64 + 2.0 * s))) < 1e-6, "n={n} s={s}");
        }
    }
}

#[test]
fn riesz_kernel_on_h1_is_not_a_gauge_function() {
    let spec = GroupSpec::heisenberg(1);
    let quad = QuadratureConfig::default();
    let a = riesz_norm_kernel(&spec, &GroupPoint::new(&[1.0, 0.0], &[0.0]), 0.5, &quad).unwrap();
    let b = riesz_norm_kernel(&spec, &GroupPoint::new(&[0.0, 0.0], &[0.25]), 0.5, &quad).unwrap();
    assert!(rel(a.value, b.value) > 0.01);
}

#[test]
fn polar_formula_closed_forms() {
    // 30-digit: γ = Q + 1 on H¹ and γ = Q on the quaternionic group, r = 1/2, R = 2.
    let h = GroupSpec::heisenberg(1);
    assert!(rel(annulus_closed_form(&h, 5.0, 0.5, 2.0), 7.40220330081701896413) < 1e-12);
    assert!(rel(annulus_closed_form(&quat(), 10.0, 0.5, 2.0), 1.79099277171761675823) < 1e-12);
    // Direct form σ_Q (R^{Q−γ} − r^{Q−γ}) / (Q − γ).
    let sq = PI * PI / 2.0;
    assert!(rel(annulus_closed_form(&h, 2.0, 0.5, 2.0), sq / 2.0 * (4.0 - 0.25)) < 1e-12);
}

#[test]
fn polar_formula_numeric() {
    let quad = QuadratureConfig::default();
    for spec in [GroupSpec::heisenberg(1), quat()] {
        let q = spec.qf();
        for g in [0.0, q / 2.0, q, q + 1.0] {
            let a = gauge_annulus_integral(&spec, g, 0.5, 2.0, &quad).unwrap();
            assert!(a.agrees(1e-6, 3.0), "{} γ={g}: {a:?}", spec.id());
        }
    }
}

#[test]
fn lorentz_frozen() {
    // 30-digit: (σ_Q/Q)^{1/p} R^{Q/p−α} B(σ/p, σ(α/Q−1/p))^{1/σ}.
    let h = GroupSpec::heisenberg(1);
    let cut = LorentzCutoffSpec::new(&h, 5.0, 2.0, 2.0, 1.0).unwrap();
    assert!(rel(lorentz_cutoff_norm(&cut).unwrap(), 0.332699800401738908258) < 1e-12);
    let cut = LorentzCutoffSpec::new(&quat(), 12.0, 1.5, 1.0, 2.0).unwrap();
    assert!(rel(lorentz_cutoff_norm(&cut).unwrap(), 0.0767294075246034547552) < 1e-12);
    let q = lorentz_norm_quadrature(&cut).unwrap();
    assert!(rel(q.quadrature.value, q.closed_form) < 1e-8);
}

#[test]
fn lorentz_distribution_and_rearrangement() {
    // μ(λ) = (σ_Q/Q)(λ^{−Q/α} − R^Q) below the peak; ρ*(t) = (Qt/σ_Q + R^Q)^{−α/Q}.
    let h = GroupSpec::heisenberg(1);
    let (alpha, r) = (6.0, 1.5);
    let cut = LorentzCutoffSpec::new(&h, alpha, r, 1.0, 1.0).unwrap();
    let sq = PI * PI / 2.0;
    let lam = 0.5 * r.powf(-alpha);
    assert!(rel(distribution_function(&cut, lam), sq / 4.0 * (lam.powf(-4.0 / alpha) - r.powi(4))) < 1e-12);
    assert_eq!(distribution_function(&cut, 2.0 * r.powf(-alpha)), 0.0);
    let t = 3.7;
    assert!(rel(rearrangement(&cut, t).unwrap(), (4.0 * t / sq + r.powi(4)).powf(-alpha / 4.0)) < 1e-12);
}

#[test]
fn bubble_closed_form() {
    // u_y(e) = A^{(Q−2s)/(4s)} (4/y)^{(Q−2s)/2} with F(e) = y².
    let h = GroupSpec::heisenberg(1);
    let s = 0.5;
    let sol = ExplicitSolutionSpec::new(&h, 2.0, s).unwrap();
    let a: f64 = 0.54710990380661915971;
    let want = a.powf(3.0 / 2.0) * 2f64.powf(1.5);
    assert!(rel(sol.field().eval(&h.identity()), want) < 1e-13);
}
