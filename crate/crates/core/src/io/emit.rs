use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{DisparityError, Result};
use crate::index::IndexValue;
use crate::inference::IndexEstimate;

use super::format::format_float;

/// Stamp written into every result row.
pub const VERSION: &str = concat!("rank-disparity ", env!("CARGO_PKG_VERSION"));

pub const CSV_COLUMNS: [&str; 12] = [
    "dataset", "kind", "alpha", "nu", "reference", "value", "se", "ci_lo", "ci_hi", "method",
    "p_value", "version",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    /// One JSON object per line.
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = DisparityError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" | "jsonl" => Ok(OutputFormat::Json),
            _ => Err(DisparityError::InvalidInput(format!("unknown output format '{s}'"))),
        }
    }
}

/// One output record. Optional fields are blank in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub kind: String,
    pub alpha: f64,
    pub nu: f64,
    pub reference: String,
    pub value: f64,
    pub se: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub method: String,
    pub p_value: Option<f64>,
}

impl ResultRow {
    pub fn point(dataset: impl Into<String>, v: &IndexValue) -> Self {
        Self {
            dataset: dataset.into(),
            kind: v.kind.name().to_string(),
            alpha: v.params.alpha,
            nu: v.params.nu,
            reference: v.params.reference.to_string(),
            value: v.value,
            se: None,
            ci_lo: None,
            ci_hi: None,
            method: "point".into(),
            p_value: None,
        }
    }

    pub fn estimate(dataset: impl Into<String>, e: &IndexEstimate) -> Self {
        Self {
            se: Some(e.std_error),
            ci_lo: Some(e.interval.lo),
            ci_hi: Some(e.interval.hi),
            method: e.method.name().to_string(),
            ..Self::point(dataset, &e.value)
        }
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn json_num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format_float(v),
        _ => "null".into(),
    }
}

/// Parameters may sit at their infinite limits; JSON has no infinity, so
/// those are written as the string `"inf"`.
fn json_param(x: f64) -> String {
    if x.is_infinite() {
        "\"inf\"".into()
    } else {
        format_float(x)
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn json_line(r: &ResultRow) -> String {
    let fields = [
        ("kind", json_str(&r.kind)),
        ("alpha", json_param(r.alpha)),
        ("nu", json_param(r.nu)),
        ("reference", json_str(&r.reference)),
        ("value", json_num(Some(r.value))),
        ("se", json_num(r.se)),
        ("ci_lo", json_num(r.ci_lo)),
        ("ci_hi", json_num(r.ci_hi)),
        ("method", json_str(&r.method)),
        ("infinite", r.value.is_infinite().to_string()),
        ("dataset", json_str(&r.dataset)),
        ("p_value", json_num(r.p_value)),
        ("version", json_str(VERSION)),
    ];
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("\"{k}\":{v}")).collect();
    format!("{{{}}}", body.join(","))
}

/// Writes rows with a fixed field order and 10 significant digits.
pub fn emit_results<W: Write>(rows: &[ResultRow], format: OutputFormat, writer: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
            let io = |e: csv::Error| DisparityError::Io(e.to_string());
            w.write_record(CSV_COLUMNS).map_err(io)?;
            for r in rows {
                w.write_record([
                    r.dataset.clone(),
                    r.kind.clone(),
                    format_float(r.alpha),
                    format_float(r.nu),
                    r.reference.clone(),
                    format_float(r.value),
                    opt(r.se),
                    opt(r.ci_lo),
                    opt(r.ci_hi),
                    r.method.clone(),
                    opt(r.p_value),
                    VERSION.to_string(),
                ])
                .map_err(io)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut w = writer;
            for r in rows {
                writeln!(w, "{}", json_line(r))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
