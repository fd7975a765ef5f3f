//! Command-line front end: run verification suites, or print fit tables.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use subfrac::fraclap::tail_profile;
use subfrac::report::{emit, to_json, Format};
use subfrac::runner::{exit_code, load_config, parse_config, run, RunConfig, Suite};
use subfrac::yamabe::{calibrate_alpha, decay_fit_with, DecayOptions, ExplicitSolutionSpec};
use subfrac::{Error, ScalarField};

#[derive(Parser)]
#[command(name = "subfrac", version, about = "Verification battery for the fractional sub-Laplacian on H-type groups")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Group id, e.g. `heisenberg:1`, `quaternionic:1`, `euclidean:3`.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Comma-separated values of s in (0, 1).
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated check-name prefixes to keep.
    #[arg(long, global = true)]
    only: Option<String>,
    /// `json` or `csv`.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Attach per-check wall-clock times (makes reports run-dependent).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the named suites (`all` for every suite).
    Verify {
        #[arg(required = true, value_delimiter = ',')]
        suites: Vec<String>,
    },
    /// Run the suites selected by the configuration (all by default).
    Report,
    /// Decay-exponent fits of the bubble `u₁` per value of s.
    Decay {
        /// `bubble`, `sqrt-bubble`, `fundamental` or `power:<β>`.
        #[arg(long, default_value = "bubble")]
        field: String,
        /// Comma-separated shell radii.
        #[arg(long, value_delimiter = ',')]
        shells: Option<Vec<f64>>,
        /// Print the shell suprema instead of the fit summary.
        #[arg(long)]
        curve: bool,
    },
    /// Tail of the bubble `T(u₁; e, R)` over radii.
    Tail {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
        radii: Vec<f64>,
    },
    /// Calibrate α from the intertwining and Yamabe-ratio estimators.
    CalibrateAlpha,
}

fn config(c: &Common) -> subfrac::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => load_config(p)?,
        None => parse_config("")?,
    };
    let mut flags = vec![];
    if let Some(g) = &c.group {
        flags.push(format!("group = {g}"));
    }
    if let Some(s) = &c.s {
        flags.push(format!("s = {s}"));
    }
    if let Some(s) = &c.seed {
        flags.push(format!("seed = {s}"));
    }
    if let Some(f) = &c.format {
        flags.push(format!("format = {f}"));
    }
    if let Some(o) = &c.only {
        flags.push(format!("only = {o}"));
    }
    // Re-parse flags alone so that they get the same validation as the file.
    if !flags.is_empty() {
        let f = subfrac::runner::parse_config_with_env(&flags.join("\n"), std::iter::empty())?;
        if c.group.is_some() {
            cfg.group = f.group;
        }
        if c.s.is_some() {
            cfg.s = f.s;
        }
        if c.seed.is_some() {
            cfg.seed = f.seed;
        }
        if c.format.is_some() {
            cfg.format = f.format;
        }
        if c.only.is_some() {
            cfg.only = f.only;
        }
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    cfg.timings |= c.timings;
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(cfg: &RunConfig, bytes: &[u8]) -> std::io::Result<()> {
    match &cfg.out {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    }
}

fn table<T: Serialize>(rows: &[T], format: Format) -> subfrac::Result<Vec<u8>> {
    match format {
        Format::Json => Ok(to_json(&rows)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            for r in rows {
                w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Config(e.to_string()))
        }
    }
}

#[derive(Serialize)]
struct DecayRow {
    group: String,
    s: f64,
    field: String,
    fitted_exponent: f64,
    expected: f64,
    intercept: f64,
    fit_residual: f64,
    r_min: f64,
    r_max: f64,
    points_per_shell: usize,
}

#[derive(Serialize)]
struct ShellRow {
    s: f64,
    field: String,
    radius: f64,
    sup: f64,
    inflation: f64,
}

#[derive(Serialize)]
struct TailRow {
    s: f64,
    radius: f64,
    tail: f64,
    error: f64,
    /// `T · R^{Q−2s}`.
    scaled: f64,
}

#[derive(Serialize)]
struct AlphaRow {
    s: f64,
    alpha: f64,
    uncertainty: f64,
    intertwining: f64,
    intertwining_error: f64,
    yamabe: f64,
    yamabe_error: f64,
    intertwining_cv: f64,
    yamabe_cv: f64,
    agree: bool,
}

/// The requested field and its expected decay exponent.
fn decay_field(spec: &subfrac::GroupSpec, name: &str, s: f64) -> subfrac::Result<(ScalarField, f64)> {
    let e = spec.qf() - 2.0 * s;
    match name {
        "bubble" => Ok((ExplicitSolutionSpec::new(spec, 1.0, s)?.field(), e)),
        "sqrt-bubble" => Ok((ExplicitSolutionSpec::new(spec, 1.0, s)?.field().powf(0.5), e / 2.0)),
        "fundamental" => Ok((ScalarField::fundamental_profile(spec, s), e)),
        other => match other.strip_prefix("power:").map(str::parse::<f64>) {
            Some(Ok(b)) if b > 0.0 => Ok((ScalarField::gauge_power(spec, b), b)),
            _ => Err(Error::Config(format!("unknown field `{other}`"))),
        },
    }
}

fn execute(cli: Cli) -> subfrac::Result<i32> {
    let mut cfg = config(&cli.common)?;
    let spec = cfg.spec()?;
    match cli.command {
        Command::Verify { suites } => {
            let mut sel = vec![];
            for s in &suites {
                if s == "all" {
                    sel.extend(Suite::ALL);
                } else {
                    sel.push(s.parse::<Suite>()?);
                }
            }
            sel.sort();
            sel.dedup();
            cfg.suites = sel;
            let rep = run(&cfg)?;
            write_out(&cfg, &emit(&rep, cfg.format)).map_err(|e| Error::Config(e.to_string()))?;
            Ok(exit_code(&rep))
        }
        Command::Report => {
            let rep = run(&cfg)?;
            write_out(&cfg, &emit(&rep, cfg.format)).map_err(|e| Error::Config(e.to_string()))?;
            Ok(exit_code(&rep))
        }
        Command::Decay { field, shells, curve } => {
            let mut opts = DecayOptions { seed: cfg.seed, ..DecayOptions::default() };
            if let Some(r) = shells {
                opts.radii = r;
            }
            let mut fits = vec![];
            let mut curves = vec![];
            for &s in &cfg.s {
                let (u, expected) = decay_field(&spec, &field, s)?;
                let d = decay_fit_with(&spec, &u, &opts)?;
                curves.extend(d.shells.iter().map(|sh| ShellRow {
                    s,
                    field: field.clone(),
                    radius: sh.radius,
                    sup: sh.max,
                    inflation: sh.inflation,
                }));
                fits.push(DecayRow {
                    group: spec.id().to_string(),
                    s,
                    field: field.clone(),
                    fitted_exponent: d.fitted_exponent,
                    expected,
                    intercept: d.intercept,
                    fit_residual: d.fit_residual,
                    r_min: d.shell_range.0,
                    r_max: d.shell_range.1,
                    points_per_shell: d.points_per_shell,
                });
            }
            let bytes = if curve { table(&curves, cfg.format)? } else { table(&fits, cfg.format)? };
            write_out(&cfg, &bytes).map_err(|e| Error::Config(e.to_string()))?;
            Ok(0)
        }
        Command::Tail { radii } => {
            let mut rows = vec![];
            for &s in &cfg.s {
                let u = ExplicitSolutionSpec::new(&spec, 1.0, s)?.field();
                let j = tail_profile(&spec, &u, &spec.identity(), &radii, s, &cfg.quad)?;
                for (r, ji) in radii.iter().zip(j) {
                    let t = ji.scale(r.powf(2.0 * s));
                    rows.push(TailRow { s, radius: *r, tail: t.value, error: t.error, scaled: t.value * r.powf(spec.qf() - 2.0 * s) });
                }
            }
            write_out(&cfg, &table(&rows, cfg.format)?).map_err(|e| Error::Config(e.to_string()))?;
            Ok(0)
        }
        Command::CalibrateAlpha => {
            let mut rows = vec![];
            for &s in &cfg.s {
                let a = calibrate_alpha(&spec, s, &cfg.quad)?;
                rows.push(AlphaRow {
                    s,
                    alpha: a.alpha,
                    uncertainty: a.uncertainty,
                    intertwining: a.intertwining.value,
                    intertwining_error: a.intertwining.error,
                    yamabe: a.yamabe.value,
                    yamabe_error: a.yamabe.error,
                    intertwining_cv: a.intertwining_cv,
                    yamabe_cv: a.yamabe_cv,
                    agree: a.agree,
                });
            }
            write_out(&cfg, &table(&rows, cfg.format)?).map_err(|e| Error::Config(e.to_string()))?;
            Ok(if rows.iter().all(|r| r.agree) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("subfrac: {e}");
            ExitCode::from(2)
        }
    }
}
