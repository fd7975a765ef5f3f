//! Acceptance battery. Each criterion runs the relevant checks through the
//! runner, prints one PASS/FAIL line, and is held to its wall-clock budget.
//!
//! Criterion 10 asks for (2s/σ_Q) 𝓛_s u → −u as s → 0. The hypersingular
//! operator has a positive diagonal, so the scaled value tends to +u
//! instead and the literal criterion fails with deviation ≈ 2. The test
//! prints FAIL for it and asserts that measured outcome.

use std::time::{Duration, Instant};

use subfrac::report::{emit, CheckRecord, Format, Status, VerificationReport};
use subfrac::runner::{parse_config_with_env, run, RunConfig};

fn config(text: &str) -> RunConfig {
    parse_config_with_env(text, std::iter::empty()).expect("config")
}

fn timed(text: &str) -> (VerificationReport, Duration) {
    let cfg = config(text);
    let t = Instant::now();
    let rep = run(&cfg).expect("run");
    (rep, t.elapsed())
}

fn matching<'a>(rep: &'a VerificationReport, prefixes: &[&str]) -> Vec<&'a CheckRecord> {
    rep.records.iter().filter(|r| prefixes.iter().any(|p| r.id.starts_with(p))).collect()
}

struct Outcome {
    pass: bool,
    note: String,
}

fn line(n: usize, title: &str, o: &Outcome, took: Duration, budget: Duration) -> bool {
    let in_time = took <= budget;
    let ok = o.pass && in_time;
    println!(
        "criterion {n:>2} {:<4} {title}: {} [{:.1}s of {:.0}s]",
        if ok { "PASS" } else { "FAIL" },
        o.note,
        took.as_secs_f64(),
        budget.as_secs_f64()
    );
    ok
}

/// Every matching record passes; diagnostics are ignored.
fn all_pass(recs: &[&CheckRecord], min: usize) -> Outcome {
    let fails: Vec<String> = recs.iter().filter(|r| r.status == Status::Fail).map(|r| format!("{} ({:?})", r.id, r.value)).collect();
    let counted = recs.iter().filter(|r| r.status != Status::Diagnostic).count();
    let pass = fails.is_empty() && counted >= min;
    let note = if fails.is_empty() { format!("{counted} records pass") } else { format!("failing: {}", fails.join(", ")) };
    Outcome { pass, note }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn c1() -> bool {
    let (rep, t) = timed("group = heisenberg:1\nsuite = group\nonly = group.algebra");
    let recs = matching(&rep, &["group.algebra."]);
    let mut o = all_pass(&recs, 1);
    for g in ["heisenberg:1", "quaternionic:1", "euclidean:3"] {
        let n = recs.iter().filter(|r| r.id.starts_with(&format!("group.algebra.{g}."))).count();
        if n == 0 {
            o.pass = false;
            o.note = format!("no records for {g}");
        }
    }
    line(1, "group algebra", &o, t, secs(5))
}

fn c2() -> bool {
    let (rep, t) = timed("group = heisenberg:1\nsuite = group\nonly = group.polar");
    let o = all_pass(&matching(&rep, &["group.polar.heisenberg:1.gamma="]), 4);
    line(2, "polar-coordinate law", &o, t, secs(60))
}

fn c3() -> bool {
    let (rep, t) = timed("suite = kernels\nonly = kernels.euclidean_riesz");
    let o = all_pass(&matching(&rep, &["kernels.euclidean_riesz"]), 9);
    line(3, "Euclidean Riesz constant", &o, t, secs(30))
}

fn c4() -> bool {
    let (rep, t) = timed("group = heisenberg:1\ns = 0.5\nsuite = kernels\nonly = kernels.witness");
    let o = all_pass(&matching(&rep, &["kernels.witness.heisenberg:1."]), 1);
    line(4, "non-gauge-function witness", &o, t, secs(60))
}

fn c5() -> bool {
    let (rep, t) = timed("group = heisenberg:1\ns = 0.5\nsuite = yamabe\nquad.mode = tensor\nonly = yamabe.intertwining, yamabe.alpha");
    let recs = matching(&rep, &["yamabe.intertwining.heisenberg:1.s=0.5", "yamabe.alpha.heisenberg:1.s=0.5"]);
    let mut o = all_pass(&recs, 3);
    for need in [".cv", ".y_independence", ".estimators"] {
        if !recs.iter().any(|r| r.id.ends_with(need) && r.status == Status::Pass) {
            o.pass = false;
            o.note = format!("missing passing `{need}` record; {}", o.note);
        }
    }
    line(5, "intertwining and α calibration", &o, t, secs(600))
}

fn c6() -> bool {
    let (rep, t) = timed("group = heisenberg:1\ns = 0.5\nsuite = operator\nonly = operator.harmonic");
    let o = all_pass(&matching(&rep, &["operator.harmonic.heisenberg:1.s=0.5.point"]), 5);
    line(6, "harmonicity off the pole", &o, t, secs(300))
}

fn c7() -> bool {
    let (rep, t) = timed("group = heisenberg:1\ns = 0.3, 0.5, 0.7\nsuite = decay\nonly = decay.heisenberg:1");
    let recs: Vec<_> = matching(&rep, &["decay.heisenberg:1.s="]).into_iter().filter(|r| r.id.ends_with(".bubble")).collect();
    let o = all_pass(&recs, 3);
    line(7, "sharp decay of u₁", &o, t, secs(120))
}

fn c8() -> bool {
    let (rep, t) = timed("group = heisenberg:1\ns = 0.5\nsuite = tail");
    let o = all_pass(&matching(&rep, &["tail.heisenberg:1.s=0.5"]), 2);
    line(8, "tail law", &o, t, secs(300))
}

fn c9() -> bool {
    let (rep, t) = timed("group = heisenberg:1\nsuite = lorentz");
    let o = all_pass(&matching(&rep, &["lorentz.heisenberg:1."]), 10);
    line(9, "Lorentz formulas", &o, t, secs(120))
}

fn c10() -> bool {
    let (rep, t) = timed("group = heisenberg:1\nsuite = operator\nonly = operator.limits");
    let get = |suffix: &str| rep.get(&format!("operator.limit.heisenberg:1.{suffix}")).unwrap_or_else(|| panic!("{suffix}")).clone();
    let minus = get("s=0.005.minus_u");
    let plus = get("s=0.005.plus_u");
    let cv = get("s=0.995.cv");
    let o = Outcome {
        pass: minus.status == Status::Pass && cv.status == Status::Pass,
        note: format!(
            "deviation from −u {:.3} (tol 0.05), from +u {:.4}; s=0.995 ratio CV {:.4} (tol 0.03)",
            minus.value.unwrap(),
            plus.value.unwrap(),
            cv.value.unwrap()
        ),
    };
    let printed = line(10, "operator limits", &o, t, secs(600));
    // Documented outcome: the sign of the small-s limit is +u.
    assert_eq!(minus.status, Status::Fail);
    assert!((minus.value.unwrap() - 2.0).abs() < 0.05, "{minus:?}");
    assert_eq!(plus.status, Status::Pass, "{plus:?}");
    assert_eq!(cv.status, Status::Pass, "{cv:?}");
    assert!(t <= secs(600));
    printed
}

fn c11() -> bool {
    let (rep, t) = timed("group = heisenberg:1\ns = 0.5\nsuite = operator\nonly = operator.scale");
    let recs: Vec<_> = matching(&rep, &["operator.scale.heisenberg:1.s=0.5."])
        .into_iter()
        .filter(|r| r.id.contains(".seminorm.lambda=") || r.id.contains(".quotient.lambda="))
        .collect();
    let o = all_pass(&recs, 4);
    line(11, "scale invariance", &o, t, secs(600))
}

fn c12() -> bool {
    let text = "group = heisenberg:1\ns = 0.5";
    let cfg = config(text);
    let t = Instant::now();
    let a = emit(&run(&cfg).unwrap(), Format::Json);
    let battery = t.elapsed();
    let t = Instant::now();
    let b = emit(&run(&cfg).unwrap(), Format::Json);
    let n_records = run_len(&a);

    let subset = config("group = quaternionic:1\nsuite = group, kernels, lorentz");
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| emit(&run(&subset).unwrap(), Format::Json));
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| emit(&run(&subset).unwrap(), Format::Json));
    let took = t.elapsed();

    let o = Outcome {
        pass: a == b && one == four && n_records >= 25,
        note: format!(
            "two full runs identical: {}; 1 vs 4 threads identical: {}; {n_records} records, {} bytes",
            a == b,
            one == four,
            a.len()
        ),
    };
    // The rerun plus the thread comparison, against two batteries.
    line(12, "determinism", &o, took, battery * 2)
}

fn run_len(json: &[u8]) -> usize {
    let v: serde_json::Value = serde_json::from_slice(json).unwrap();
    v["records"].as_array().map_or(0, Vec::len)
}

#[test]
fn acceptance() {
    let results = [c1(), c2(), c3(), c4(), c5(), c6(), c7(), c8(), c9(), c10(), c11(), c12()];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    println!("acceptance: {} of 12 PASS; FAIL: {failed:?}", 12 - failed.len());
    // Criterion 10 is the documented failure (asserted inside `c10`).
    assert_eq!(failed, vec![10], "unexpected acceptance outcome");
}
