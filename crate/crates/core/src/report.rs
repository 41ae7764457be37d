//! CSV and JSON emission of check reports. Both formats share one column
//! schema and print every float with 17 significant digits.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::model::BoundaryRates;
use crate::verify::{fmt_f64, CheckReport};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

pub const COLUMNS: [&str; 13] = [
    "check_name",
    "n",
    "mode",
    "variant",
    "direction",
    "rates",
    "rates_b",
    "rates_c",
    "residual",
    "tolerance",
    "passed",
    "details",
    "error",
];

/// `α,β,γ,δ` at full precision.
pub fn fmt_rates(r: &BoundaryRates) -> String {
    r.as_array().iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

fn fmt_details(r: &CheckReport) -> String {
    r.details.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// One CSV row, column for column with [`COLUMNS`].
pub fn csv_row(r: &CheckReport) -> Vec<String> {
    let opt = |s: Option<&str>| s.unwrap_or("").to_string();
    vec![
        r.check_name.clone(),
        r.n.to_string(),
        r.mode.name().to_string(),
        opt(r.variant.as_ref().map(|v| v.name())),
        opt(r.direction.as_ref().map(|d| d.name())),
        fmt_rates(&r.rates),
        r.rates_b.as_ref().map(fmt_rates).unwrap_or_default(),
        r.rates_c.as_ref().map(fmt_rates).unwrap_or_default(),
        fmt_f64(r.residual),
        fmt_f64(r.tolerance),
        r.passed.to_string(),
        fmt_details(r),
        r.error.clone().unwrap_or_default(),
    ]
}

/// JSON number carrying exactly the 17-digit text; non-finite values become `null`.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_f64(x)).expect("formatted float parses"))
    } else {
        Value::Null
    }
}

fn json_rates(r: &BoundaryRates) -> Value {
    Value::Array(r.as_array().iter().map(|x| json_f64(*x)).collect())
}

pub fn json_record(r: &CheckReport) -> Value {
    let opt_str = |s: Option<&str>| s.map(|s| Value::String(s.into())).unwrap_or(Value::Null);
    let values = [
        Value::String(r.check_name.clone()),
        Value::from(r.n),
        Value::String(r.mode.name().into()),
        opt_str(r.variant.as_ref().map(|v| v.name())),
        opt_str(r.direction.as_ref().map(|d| d.name())),
        json_rates(&r.rates),
        r.rates_b.as_ref().map(json_rates).unwrap_or(Value::Null),
        r.rates_c.as_ref().map(json_rates).unwrap_or(Value::Null),
        json_f64(r.residual),
        json_f64(r.tolerance),
        Value::Bool(r.passed),
        Value::Object(r.details.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
        opt_str(r.error.as_deref()),
    ];
    Value::Object(COLUMNS.iter().map(|c| c.to_string()).zip(values).collect::<Map<_, _>>())
}

pub fn write_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS).map_err(io_err)?;
    for r in reports {
        w.write_record(csv_row(r)).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn write_json<W: Write>(reports: &[CheckReport], mut out: W) -> Result<()> {
    let value = Value::Array(reports.iter().map(json_record).collect());
    serde_json::to_writer_pretty(&mut out, &value).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(out).map_err(|e| Error::Config(e.to_string()))
}

pub fn write_reports<W: Write>(reports: &[CheckReport], format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(reports, out),
        ReportFormat::Json => write_json(reports, out),
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Config(e.to_string())
}
