use proptest::prelude::*;

use subfrac::measure::annulus_closed_form;
use subfrac::report::{emit, CheckRecord, Format, Provenance, VerificationReport};
use subfrac::runner::{parse_config_with_env, sub_seed};
use subfrac::special::{beta, gamma, intertwining_constant};
use subfrac::yamabe::{decay_fit, distribution_function, lorentz_cutoff_norm, rearrangement, ExplicitSolutionSpec, LorentzCutoffSpec};
use subfrac::{GroupPoint, GroupSpec, ScalarField};

fn groups() -> Vec<GroupSpec> {
    vec![GroupSpec::heisenberg(1), GroupSpec::heisenberg(2), GroupSpec::quaternionic(1).unwrap(), GroupSpec::euclidean(3)]
}

fn point(spec: &GroupSpec, c: &[f64]) -> GroupPoint {
    let m = spec.m();
    GroupPoint::new(&c[..m], &c[m..m + spec.k()])
}

fn close(a: &GroupPoint, b: &GroupPoint, tol: f64) -> bool {
    let scale = 1.0 + a.coords().iter().fold(0.0f64, |x, v| x.max(v.abs()));
    a.coord_distance(b) <= tol * scale
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_law_axioms(gi in 0usize..4, a in coords(), b in coords(), c in coords()) {
        let spec = &groups()[gi];
        let (p, q, r) = (point(spec, &a), point(spec, &b), point(spec, &c));
        let lhs = spec.multiply(&spec.multiply(&p, &q).unwrap(), &r).unwrap();
        let rhs = spec.multiply(&p, &spec.multiply(&q, &r).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
        let e = spec.multiply(&p, &spec.inverse(&p).unwrap()).unwrap();
        prop_assert!(close(&e, &spec.identity(), 1e-12));
        prop_assert!(close(&spec.multiply(&spec.identity(), &p).unwrap(), &p, 0.0));
    }

    #[test]
    fn dilations_are_automorphisms(gi in 0usize..4, a in coords(), b in coords(), lam in 0.05f64..20.0) {
        let spec = &groups()[gi];
        let (p, q) = (point(spec, &a), point(spec, &b));
        let lhs = spec.dilate(lam, &spec.multiply(&p, &q).unwrap()).unwrap();
        let rhs = spec.multiply(&spec.dilate(lam, &p).unwrap(), &spec.dilate(lam, &q).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn gauge_homogeneous_symmetric_subadditive(gi in 0usize..4, a in coords(), b in coords(), lam in 0.05f64..20.0) {
        let spec = &groups()[gi];
        let (p, q) = (point(spec, &a), point(spec, &b));
        let g = spec.gauge(&p).unwrap().value();
        let gd = spec.gauge(&spec.dilate(lam, &p).unwrap()).unwrap().value();
        prop_assert!((gd - lam * g).abs() <= 1e-12 * lam * g.max(1e-300));
        let gi_ = spec.gauge(&spec.inverse(&p).unwrap()).unwrap().value();
        prop_assert!((gi_ - g).abs() <= 1e-13 * g.max(1.0));
        let gpq = spec.gauge(&spec.multiply(&p, &q).unwrap()).unwrap().value();
        let gq = spec.gauge(&q).unwrap().value();
        prop_assert!(gpq <= (g + gq) * (1.0 + 1e-12));
    }

    #[test]
    fn gamma_recursion(x in 0.05f64..30.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn beta_symmetric_and_gamma_ratio(a in 0.1f64..8.0, b in 0.1f64..8.0) {
        let ab = beta(a, b).unwrap();
        prop_assert!(((ab - beta(b, a).unwrap()) / ab).abs() < 1e-13);
        let g = gamma(a).unwrap() * gamma(b).unwrap() / gamma(a + b).unwrap();
        prop_assert!(((ab - g) / g).abs() < 1e-11);
    }

    #[test]
    fn intertwining_constant_positive(s in 0.01f64..0.99) {
        for (m, k) in [(2, 1), (4, 1), (4, 3)] {
            prop_assert!(intertwining_constant(m, k, s).unwrap() > 0.0);
        }
    }

    #[test]
    fn annulus_additive(gi in 0usize..3, gamma_exp in 0.0f64..12.0, r in 0.1f64..1.0, f1 in 1.1f64..3.0, f2 in 1.1f64..3.0) {
        let spec = &groups()[gi];
        let (m, big) = (r * f1, r * f1 * f2);
        let whole = annulus_closed_form(spec, gamma_exp, r, big);
        let parts = annulus_closed_form(spec, gamma_exp, r, m) + annulus_closed_form(spec, gamma_exp, m, big);
        prop_assert!(((whole - parts) / whole).abs() < 1e-9);
    }

    #[test]
    fn rearrangement_inverts_distribution(alpha_over_q in 1.05f64..3.0, r in 0.2f64..4.0, t in 1e-3f64..1e3) {
        let spec = GroupSpec::heisenberg(1);
        let cut = LorentzCutoffSpec::new(&spec, 4.0 * alpha_over_q, r, 1.0, 1.0).unwrap();
        let lam = rearrangement(&cut, t).unwrap();
        prop_assert!(((distribution_function(&cut, lam) - t) / t).abs() < 1e-9);
    }

    #[test]
    fn lorentz_norm_scales_in_r(p in 1.0f64..4.0, sig in 1.0f64..4.0, r in 0.3f64..5.0, lam in 0.2f64..5.0) {
        let spec = GroupSpec::heisenberg(1);
        let alpha = 4.0 / p + 1.3;
        let a = lorentz_cutoff_norm(&LorentzCutoffSpec::new(&spec, alpha, r, p, sig).unwrap()).unwrap();
        let b = lorentz_cutoff_norm(&LorentzCutoffSpec::new(&spec, alpha, lam * r, p, sig).unwrap()).unwrap();
        let want = lam.powf(4.0 / p - alpha);
        prop_assert!((b / a / want - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bubble_dilation_law(s in 0.1f64..0.9, y in 0.2f64..5.0, c in coords()) {
        let spec = GroupSpec::heisenberg(1);
        let g = point(&spec, &c);
        let e = spec.qf() - 2.0 * s;
        let uy = ExplicitSolutionSpec::new(&spec, y, s).unwrap().field();
        let u1 = ExplicitSolutionSpec::new(&spec, 1.0, s).unwrap().field();
        let lhs = uy.eval(&spec.dilate(y, &g).unwrap());
        let rhs = y.powf(-e / 2.0) * u1.eval(&g);
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn sub_seeds_are_pure(seed in any::<u64>(), name in "[a-z.=0-9:]{1,24}") {
        prop_assert_eq!(sub_seed(seed, &name), sub_seed(seed, &name));
        prop_assert_ne!(sub_seed(seed, &name), sub_seed(seed, &format!("{name}x")));
    }

    #[test]
    fn config_s_lists_round_trip(vals in prop::collection::vec(0.01f64..0.99, 1..5)) {
        let text = format!("s = {}", vals.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "));
        let cfg = parse_config_with_env(&text, std::iter::empty()).unwrap();
        prop_assert_eq!(cfg.s, vals);
    }

    #[test]
    fn report_order_ignores_input_order(ids in prop::collection::btree_set("[a-z]{1,6}", 1..12), rot in 0usize..12) {
        let mut recs: Vec<CheckRecord> = ids.iter().map(|i| CheckRecord::pass(i.clone(), "a", Provenance::Algebraic)).collect();
        let a = emit(&VerificationReport::new(serde_json::json!({}), recs.clone()), Format::Json);
        let n = recs.len();
        recs.rotate_left(rot % n);
        let b = emit(&VerificationReport::new(serde_json::json!({}), recs), Format::Json);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decay_fit_exact_on_powers(gi in 0usize..3, beta_exp in 0.5f64..9.0, seed in any::<u64>()) {
        let spec = &groups()[gi];
        let u = ScalarField::gauge_power(spec, beta_exp);
        let d = decay_fit(spec, &u, &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0], seed).unwrap();
        prop_assert!((d.fitted_exponent - beta_exp).abs() < 1e-10 * beta_exp);
    }
}
