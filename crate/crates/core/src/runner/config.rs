//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment. Commas also separate entries
//! so a whole config fits on one line; a comma-separated piece without `=`
//! continues the list value of the entry before it:
//!
//! ```text
//! group = heisenberg:1, s = 0.3, 0.5, suite = yamabe, tail
//! quad.mc_samples = 65536
//! ```
//!
//! Every key may be overridden from the environment as
//! `SUBFRAC_<KEY>` with dots written as underscores, e.g.
//! `SUBFRAC_QUAD_MC_SAMPLES=4096`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{QuadMode, QuadratureConfig};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::report::Format;

pub const ENV_PREFIX: &str = "SUBFRAC_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Group,
    Kernels,
    Operator,
    Yamabe,
    Lorentz,
    Decay,
    Tail,
    Localbound,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Group,
        Suite::Kernels,
        Suite::Operator,
        Suite::Yamabe,
        Suite::Lorentz,
        Suite::Decay,
        Suite::Tail,
        Suite::Localbound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Group => "group",
            Suite::Kernels => "kernels",
            Suite::Operator => "operator",
            Suite::Yamabe => "yamabe",
            Suite::Lorentz => "lorentz",
            Suite::Decay => "decay",
            Suite::Tail => "tail",
            Suite::Localbound => "localbound",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown suite `{}`", s.trim())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub group: String,
    pub s: Vec<f64>,
    /// Sorted, without duplicates, never empty.
    pub suites: Vec<Suite>,
    pub quad: QuadratureConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Attach per-check wall-clock times to the report.
    pub timings: bool,
    /// Check-name prefixes to keep; empty keeps every check.
    pub only: Vec<String>,
}

impl Default for RunConfig {
    /// The full battery on `heisenberg:1` at `s = 0.5`.
    fn default() -> Self {
        RunConfig {
            group: "heisenberg:1".into(),
            s: vec![0.5],
            suites: Suite::ALL.to_vec(),
            quad: QuadratureConfig::default(),
            seed: 0x5eed,
            out: None,
            format: Format::Json,
            timings: false,
            only: vec![],
        }
    }
}

const KEYS: [&str; 16] = [
    "group",
    "only",
    "s",
    "suite",
    "seed",
    "out",
    "format",
    "timings",
    "quad.split_radius",
    "quad.r_max",
    "quad.mc_samples",
    "quad.seed",
    "quad.rel_tol",
    "quad.abs_tol",
    "quad.mode",
    "quad.shells_per_decade",
];

impl RunConfig {
    pub fn spec(&self) -> Result<GroupSpec> {
        GroupSpec::parse(&self.group)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.suites.is_empty() {
            return Err(Error::Config("suite: no suite selected".into()));
        }
        if self.s.is_empty() {
            return Err(Error::Config("s: at least one value is required".into()));
        }
        for &s in &self.s {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Config(format!("s: value {s} outside (0, 1)")));
            }
        }
        self.quad.validate()
    }

    /// The configuration as echoed into the report. Output paths are left
    /// out so that reports written to different files stay identical.
    pub fn echo(&self) -> Value {
        json!({
            "group": self.group,
            "s": self.s,
            "suites": self.suites,
            "only": self.only,
            "seed": self.seed,
            "quad": self.quad,
        })
    }

    pub fn keeps(&self, check: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|p| check.starts_with(p.as_str()))
    }

    /// Restrict to one suite.
    pub fn with_suite(&self, suite: Suite) -> RunConfig {
        RunConfig { suites: vec![suite], ..self.clone() }
    }
}

/// `key = value` entries in order of appearance.
fn entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for piece in line.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            match piece.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    if k.is_empty() {
                        return Err(Error::Config(format!("line {}: missing key before `=`", n + 1)));
                    }
                    out.push((k.to_string(), v.trim().to_string()));
                }
                None => match out.last_mut() {
                    Some((_, v)) => {
                        v.push(',');
                        v.push_str(piece);
                    }
                    None => return Err(Error::Config(format!("line {}: expected `key = value`, got `{piece}`", n + 1))),
                },
            }
        }
    }
    Ok(out)
}

/// Map `SUBFRAC_QUAD_MC_SAMPLES` to `quad.mc_samples`.
fn env_key(var: &str) -> Option<String> {
    let rest = var.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
    Some(match rest.strip_prefix("quad_") {
        Some(q) => format!("quad.{q}"),
        None => rest,
    })
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

fn parse_seed(key: &str, v: &str) -> Result<u64> {
    let v = v.trim();
    let parsed = match v.strip_prefix("0x") {
        Some(h) => u64::from_str_radix(&h.replace('_', ""), 16).ok(),
        None => v.replace('_', "").parse().ok(),
    };
    parsed.ok_or_else(|| Error::Config(format!("{key}: cannot parse seed `{v}`")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty())
}

/// Parse config text with environment overrides taken from `env`.
pub fn parse_config_with_env<I>(text: &str, env: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut dups = vec![];
    for (k, v) in entries(text)? {
        if map.insert(k.clone(), v).is_some() {
            dups.push(k);
        }
    }
    if !dups.is_empty() {
        return Err(Error::Config(format!("duplicate keys: {}", dups.join(", "))));
    }
    for (var, v) in env {
        if let Some(k) = env_key(&var) {
            map.insert(k, v);
        }
    }
    let unknown: Vec<&str> = map.keys().map(String::as_str).filter(|k| !KEYS.contains(k)).collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }

    let mut cfg = RunConfig::default();
    for (k, v) in &map {
        let key = k.as_str();
        match key {
            "group" => cfg.group = v.trim().to_string(),
            "s" => cfg.s = list(v).map(|x| parse_num::<f64>(key, x)).collect::<Result<_>>()?,
            "suite" => {
                let mut suites = vec![];
                for name in list(v) {
                    if name == "all" {
                        suites.extend(Suite::ALL);
                    } else {
                        suites.push(name.parse()?);
                    }
                }
                suites.sort();
                suites.dedup();
                cfg.suites = suites;
            }
            "only" => cfg.only = list(v).map(String::from).collect(),
            "seed" => cfg.seed = parse_seed(key, v)?,
            "out" => cfg.out = Some(PathBuf::from(v.trim())),
            "format" => cfg.format = v.parse()?,
            "timings" => cfg.timings = parse_num::<bool>(key, v)?,
            "quad.split_radius" => cfg.quad.split_radius = parse_num(key, v)?,
            "quad.r_max" => cfg.quad.r_max = parse_num(key, v)?,
            "quad.mc_samples" => cfg.quad.mc_samples = parse_num(key, v)?,
            "quad.seed" => cfg.quad.seed = parse_seed(key, v)?,
            "quad.rel_tol" => cfg.quad.rel_tol = parse_num(key, v)?,
            "quad.abs_tol" => cfg.quad.abs_tol = parse_num(key, v)?,
            "quad.mode" => cfg.quad.mode = v.parse::<QuadMode>()?,
            "quad.shells_per_decade" => cfg.quad.shells_per_decade = parse_num(key, v)?,
            _ => unreachable!("keys were validated"),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse config text, applying `SUBFRAC_*` variables from the process
/// environment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_env(text, std::env::vars())
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(Error::Config(format!("{}: empty config", path.display())));
    }
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_with_env(text, std::iter::empty())
    }

    #[test]
    fn minimal_inline_config() {
        let c = parse("group=heisenberg:1, s=0.5, suite=yamabe").unwrap();
        assert_eq!(c.group, "heisenberg:1");
        assert_eq!(c.s, vec![0.5]);
        assert_eq!(c.suites, vec![Suite::Yamabe]);
        assert_eq!(c.quad, QuadratureConfig::default());
    }

    #[test]
    fn lists_continue_across_commas() {
        let c = parse("s = 0.3, 0.5, 0.7\nsuite = tail, decay # two\nquad.mode = tensor").unwrap();
        assert_eq!(c.s, vec![0.3, 0.5, 0.7]);
        assert_eq!(c.suites, vec![Suite::Decay, Suite::Tail]);
        assert_eq!(c.quad.mode, QuadMode::Tensor);
        let c = parse("only = operator.harmonic, group.polar").unwrap();
        assert!(c.keeps("group.polar.heisenberg:1") && !c.keeps("group.haar.heisenberg:1"));
    }

    #[test]
    fn rejections() {
        let e = parse("s=1.5").unwrap_err().to_string();
        assert!(e.contains("s:"), "{e}");
        assert!(parse("s=0.5\ns=0.3").unwrap_err().to_string().contains("duplicate keys: s"));
        let e = parse("colour=red, quad.nope=1").unwrap_err().to_string();
        assert!(e.contains("colour") && e.contains("quad.nope"), "{e}");
        assert!(parse("suite=").unwrap_err().to_string().contains("no suite"));
        assert!(parse("group=lie:2").is_err());
        assert!(parse("0.5").is_err());
    }

    #[test]
    fn environment_overrides() {
        let env = vec![("SUBFRAC_QUAD_MC_SAMPLES".to_string(), "4096".to_string()), ("PATH".into(), "/bin".into())];
        let c = parse_config_with_env("quad.mc_samples = 10", env).unwrap();
        assert_eq!(c.quad.mc_samples, 4096);
        let env = vec![("SUBFRAC_BOGUS".to_string(), "1".to_string())];
        assert!(parse_config_with_env("", env).unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn seeds_accept_hex() {
        assert_eq!(parse("seed = 0x5eed_0001").unwrap().seed, 0x5eed_0001);
    }
}
