//! Check records, report assembly and JSON/CSV emission.

use std::collections::BTreeMap;
use std::io;

use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// Bumped on any breaking change to the serialized record layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, DeriveSerialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Diagnostic,
}

impl Status {
    pub fn is_fail(self) -> bool {
        self == Status::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Diagnostic => "diagnostic",
        }
    }
}

/// Where a number came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, DeriveSerialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Algebraic,
    ClosedForm,
    Quadrature,
    MonteCarlo,
    Mixed,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Algebraic => "algebraic",
            Provenance::ClosedForm => "closed-form",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Mixed => "mixed",
        }
    }
}

/// One named check.
#[derive(Clone, Debug, DeriveSerialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub provenance: Provenance,
    pub inputs: BTreeMap<String, Value>,
    pub value: Option<f64>,
    pub error_estimate: Option<f64>,
    pub tolerance: Option<f64>,
    pub extra: BTreeMap<String, f64>,
    pub status: Status,
    pub detail: String,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl CheckRecord {
    pub fn new(
        id: impl Into<String>,
        anchor: impl Into<String>,
        provenance: Provenance,
        status: Status,
    ) -> Self {
        CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            provenance,
            inputs: BTreeMap::new(),
            value: None,
            error_estimate: None,
            tolerance: None,
            extra: BTreeMap::new(),
            status,
            detail: String::new(),
            wall_ms: 0.0,
        }
    }

    pub fn pass(id: impl Into<String>, anchor: impl Into<String>, prov: Provenance) -> Self {
        Self::new(id, anchor, prov, Status::Pass)
    }

    pub fn fail(
        id: impl Into<String>,
        anchor: impl Into<String>,
        prov: Provenance,
        detail: impl Into<String>,
    ) -> Self {
        Self::new(id, anchor, prov, Status::Fail).with_detail(detail)
    }

    pub fn diagnostic(id: impl Into<String>, anchor: impl Into<String>, prov: Provenance) -> Self {
        Self::new(id, anchor, prov, Status::Diagnostic)
    }

    /// Pass iff `ok`.
    pub fn verdict(
        id: impl Into<String>,
        anchor: impl Into<String>,
        prov: Provenance,
        ok: bool,
    ) -> Self {
        Self::new(id, anchor, prov, if ok { Status::Pass } else { Status::Fail })
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn with_error(mut self, e: f64) -> Self {
        self.error_estimate = Some(e);
        self
    }

    pub fn with_tolerance(mut self, t: f64) -> Self {
        self.tolerance = Some(t);
        self
    }

    pub fn with_input(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.inputs.insert(key.to_string(), v.into());
        self
    }

    pub fn with_extra(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.to_string(), v);
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn with_status(mut self, s: Status) -> Self {
        self.status = s;
        self
    }
}

/// An ordered bag of check records.
#[derive(Clone, Debug, Default, DeriveSerialize)]
pub struct CheckSet {
    pub records: Vec<CheckRecord>,
}

impl CheckSet {
    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: CheckSet) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        !self.records.iter().any(|r| r.status.is_fail())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status.is_fail())
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Clone, Debug, Default, DeriveSerialize, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub diagnostic: usize,
}

/// The full machine-readable result of a run.
#[derive(Clone, Debug, DeriveSerialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub artifact_version: String,
    pub config: Value,
    pub summary: Summary,
    pub records: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<BTreeMap<String, f64>>,
}

impl VerificationReport {
    /// Sorts records by id so output never depends on scheduling.
    pub fn new(config: Value, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut summary = Summary::default();
        for r in &records {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Diagnostic => summary.diagnostic += 1,
            }
        }
        VerificationReport {
            schema: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            summary,
            records,
            wall_ms: None,
        }
    }

    /// Attach per-check wall-clock times. These make the output
    /// run-dependent, so they are opt-in.
    pub fn with_timings(mut self) -> Self {
        self.wall_ms = Some(self.records.iter().map(|r| (r.id.clone(), r.wall_ms)).collect());
        self
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(crate::error::Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// Pretty JSON with every float written with 17 significant digits.
struct Float17<'a>(PrettyFormatter<'a>);

impl Formatter for Float17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Float17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types always serialize");
    out.push(b'\n');
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

pub fn to_csv(report: &VerificationReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "status",
        "provenance",
        "value",
        "error_estimate",
        "tolerance",
        "anchor",
        "detail",
    ])
    .expect("in-memory csv write");
    for r in &report.records {
        w.write_record([
            r.id.as_str(),
            r.status.as_str(),
            r.provenance.as_str(),
            &fmt_opt(r.value),
            &fmt_opt(r.error_estimate),
            &fmt_opt(r.tolerance),
            r.anchor.as_str(),
            r.detail.as_str(),
        ])
        .expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn emit(report: &VerificationReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let recs = vec![
            CheckRecord::pass("b.second", "x", Provenance::Quadrature).with_value(0.1),
            CheckRecord::fail("a.first", "y", Provenance::MonteCarlo, "bad, really")
                .with_value(f64::NAN)
                .with_tolerance(1e-3),
        ];
        VerificationReport::new(serde_json::json!({"group": "heisenberg:1"}), recs)
    }

    #[test]
    fn records_are_sorted_and_counted() {
        let r = sample();
        assert_eq!(r.records[0].id, "a.first");
        assert_eq!(r.summary, Summary { pass: 1, fail: 1, diagnostic: 0 });
        assert!(!r.all_pass());
    }

    #[test]
    fn json_uses_seventeen_digits() {
        let text = String::from_utf8(to_json(&sample())).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"value\": null"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["records"][1]["value"].as_f64().unwrap(), 0.1);
        assert!(back.get("wall_ms").is_none());
    }

    #[test]
    fn csv_quotes_commas() {
        let text = String::from_utf8(to_csv(&sample())).unwrap();
        assert!(text.starts_with("id,status"));
        assert!(text.contains("\"bad, really\""));
    }
}
