//! Batch execution of the verification suites.
//!
//! Checks run concurrently. Each owns a sub-seed derived from the run seed
//! and its name, so results do not depend on scheduling, and the report is
//! assembled in check-id order.

mod config;
mod suites;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

pub use config::{load_config, parse_config, parse_config_with_env, RunConfig, Suite, ENV_PREFIX};

use crate::error::Result;
use crate::report::{CheckRecord, Provenance, VerificationReport};
use suites::{checks, Check, Ctx};

/// FNV-1a of `name` folded into `seed` with a splitmix64 finalizer.
pub fn sub_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut x = seed ^ h;
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Names of the checks `cfg` would run, in execution order.
pub fn plan(cfg: &RunConfig) -> Result<Vec<String>> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    Ok(selected(cfg, &spec).into_iter().map(|c| c.name).collect())
}

fn selected(cfg: &RunConfig, spec: &crate::group::GroupSpec) -> Vec<Check> {
    cfg.suites.iter().flat_map(|&s| checks(s, spec, &cfg.s)).filter(|c| cfg.keeps(&c.name)).collect()
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic without message".into())
}

fn execute(c: &Check, cfg: &RunConfig, spec: &crate::group::GroupSpec) -> Vec<CheckRecord> {
    let seed = sub_seed(cfg.seed, &c.name);
    let ctx = Ctx { spec: spec.clone(), quad: cfg.quad.with_seed(sub_seed(cfg.quad.seed, &c.name)), seed };
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(|| (c.run)(&ctx)));
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let mut records = match out {
        Ok(Ok(set)) if !set.is_empty() => set.records,
        Ok(Ok(_)) => vec![CheckRecord::fail(format!("{}.error", c.name), c.anchor, Provenance::Mixed, "check produced no records")],
        Ok(Err(e)) => vec![CheckRecord::fail(format!("{}.error", c.name), c.anchor, Provenance::Mixed, e.to_string())],
        Err(p) => vec![CheckRecord::fail(
            format!("{}.error", c.name),
            c.anchor,
            Provenance::Mixed,
            format!("panic: {}", panic_message(p.as_ref())),
        )],
    };
    // Keep every id under its suite's namespace.
    let suite = c.name.split('.').next().unwrap_or_default();
    for r in &mut records {
        r.wall_ms = ms;
        if !r.id.starts_with(suite) || r.id.as_bytes().get(suite.len()) != Some(&b'.') {
            r.id = format!("{suite}.{}", r.id);
        }
    }
    records
}

/// Run every selected suite. Failures inside a check become failing
/// records; the batch always completes.
pub fn run(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let all = selected(cfg, &spec);
    if all.is_empty() {
        return Err(crate::error::Error::Config("only: no check matches".into()));
    }
    let records: Vec<CheckRecord> = all.par_iter().flat_map_iter(|c| execute(c, cfg, &spec)).collect();
    let report = VerificationReport::new(cfg.echo(), records);
    Ok(if cfg.timings { report.with_timings() } else { report })
}

/// 0 iff no record failed.
pub fn exit_code(report: &VerificationReport) -> i32 {
    if report.all_pass() {
        0
    } else {
        1
    }
}
