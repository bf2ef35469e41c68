//! Reading and writing run traces, reports, series, fitted specs and
//! gnuplot data.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::optimizer::{OptimizerConfig, RunSummary, TracePoint};
use crate::smoothing::{ForecastPoint, GridFit, Metric, SmoothingKind, SmoothingSpec};
use crate::stats::AggregateReport;

/// Serde adapter writing non-finite floats as the strings `inf`, `-inf` and
/// `nan`, since JSON has no representation for them.
pub mod lenient_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => s
                .parse::<f64>()
                .map_err(|_| de::Error::custom(format!("not a number: {s}"))),
        }
    }
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::File::create(path).map_err(io_err(path))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    create(path)?
        .write_all(contents.as_bytes())
        .map_err(io_err(path))
}

fn read_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(io_err(path))?;
    Ok(s)
}

/// Everything recorded about one benchmark run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm_id: String,
    pub function_id: String,
    pub run_index: usize,
    pub seed: u64,
    pub config: OptimizerConfig,
    pub summary: RunSummary,
}

pub fn write_trace_json(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut json = serde_json::to_string_pretty(trace)?;
    json.push('\n');
    write_string(path, &json)
}

pub fn read_trace_json(path: &Path) -> Result<RunTrace> {
    Ok(serde_json::from_str(&read_string(path)?)?)
}

pub fn write_trace_csv(path: &Path, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for p in trace {
        w.serialize(p)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TracePoint>> {
    let mut r = csv::Reader::from_reader(fs::File::open(path).map_err(io_err(path))?);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_report_csv(path: &Path, reports: &[AggregateReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_report_csv(path: &Path) -> Result<Vec<AggregateReport>> {
    let mut r = csv::Reader::from_reader(fs::File::open(path).map_err(io_err(path))?);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn sci(v: f64) -> String {
    if v.is_infinite() {
        "Inf".into()
    } else {
        format!("{v:.2E}")
    }
}

type Cell = dyn Fn(&AggregateReport) -> String;

/// Markdown table with FV, SP, SR and Rank rows per function and one column
/// per algorithm. Functions and algorithms appear in first-seen order.
pub fn markdown_report(reports: &[AggregateReport]) -> String {
    let mut algorithms: Vec<&str> = Vec::new();
    let mut functions: Vec<&str> = Vec::new();
    for r in reports {
        if !algorithms.contains(&r.algorithm_id.as_str()) {
            algorithms.push(&r.algorithm_id);
        }
        if !functions.contains(&r.function_id.as_str()) {
            functions.push(&r.function_id);
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "| Function | Statistic | {} |", algorithms.join(" | "));
    let _ = writeln!(out, "|---|---|{}", "---|".repeat(algorithms.len()));
    for f in &functions {
        let cell = |a: &str, show: &Cell| {
            reports
                .iter()
                .find(|r| r.function_id == *f && r.algorithm_id == a)
                .map_or_else(|| "-".to_string(), show)
        };
        let rows: [(&str, &Cell); 4] = [
            ("FV", &|r| sci(r.fv)),
            ("SP", &|r| sci(r.sp)),
            ("SR", &|r| format!("{:.0}%", r.sr * 100.0)),
            ("Rank", &|r| {
                r.rank.map_or_else(|| "-".into(), |k| k.to_string())
            }),
        ];
        for (label, show) in rows {
            let cells: Vec<String> = algorithms.iter().map(|a| cell(a, show)).collect();
            let _ = writeln!(
                out,
                "| {} | {label} | {} |",
                f.to_uppercase(),
                cells.join(" | ")
            );
        }
    }
    out
}

pub fn write_markdown_report(path: &Path, reports: &[AggregateReport]) -> Result<()> {
    write_string(path, &markdown_report(reports))
}

/// Parses a single-column series. A first line that is not a number is
/// taken as a header; any later non-numeric line is an error.
pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 1 {
            return Err(Error::Malformed(format!(
                "line {}: expected one column, found {}",
                i + 1,
                record.len()
            )));
        }
        match record[0].parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Err(_) if i == 0 => continue,
            _ => {
                return Err(Error::Malformed(format!(
                    "line {}: `{}` is not a finite number",
                    i + 1,
                    &record[0]
                )))
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Malformed("series contains no values".into()));
    }
    Ok(values)
}

pub fn read_series_csv(path: &Path) -> Result<Vec<f64>> {
    parse_series(&read_string(path)?)
}

/// Writes a single-column series, with a header line when `header` is given.
pub fn write_series_csv(path: &Path, series: &[f64], header: Option<&str>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    if let Some(h) = header {
        w.write_record([h])?;
    }
    for v in series {
        w.write_record([v.to_string()])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_forecast_csv(path: &Path, points: &[ForecastPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_forecast_csv(path: &Path) -> Result<Vec<ForecastPoint>> {
    let mut r = csv::Reader::from_reader(fs::File::open(path).map_err(io_err(path))?);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Flat JSON form of a fitted smoothing model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSpec {
    pub kind: String,
    pub params: Vec<f64>,
    pub season_length: Option<usize>,
    #[serde(with = "lenient_f64")]
    pub loss: f64,
    pub metric: Metric,
}

impl FittedSpec {
    pub fn new(spec: &SmoothingSpec, loss: f64, metric: Metric) -> Self {
        Self {
            kind: spec.kind.name().to_string(),
            params: spec.params.clone(),
            season_length: spec.kind.season_length(),
            loss,
            metric,
        }
    }

    pub fn spec(&self) -> Result<SmoothingSpec> {
        let kind = match (self.kind.as_str(), self.season_length) {
            ("ses", None) => SmoothingKind::Single,
            ("holt", None) => SmoothingKind::Double,
            ("holt-winters", Some(m)) => SmoothingKind::Triple { season_length: m },
            (k, m) => {
                return Err(Error::Malformed(format!(
                    "unknown model `{k}` with season length {m:?}"
                )))
            }
        };
        SmoothingSpec::new(kind, self.params.clone())
    }
}

pub fn write_fitted_spec_json(path: &Path, fitted: &FittedSpec) -> Result<()> {
    let mut json = serde_json::to_string_pretty(fitted)?;
    json.push('\n');
    write_string(path, &json)
}

pub fn read_fitted_spec_json(path: &Path) -> Result<FittedSpec> {
    Ok(serde_json::from_str(&read_string(path)?)?)
}

/// Gnuplot data for a grid surface: `a loss` lines for one parameter, or
/// `a b loss` lines in blocks separated by blank lines for two (`splot`).
/// Returns `None` for three or more parameters.
pub fn gnuplot_surface(grid: &GridFit) -> Option<String> {
    let d = grid.spec.params.len();
    if d > 2 {
        return None;
    }
    let mut out = String::new();
    let mut previous: Option<f64> = None;
    for (params, loss) in &grid.surface {
        if d == 2 && previous.is_some_and(|p| p != params[0]) {
            out.push('\n');
        }
        previous = Some(params[0]);
        let coords: Vec<String> = params.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "{} {loss}", coords.join(" "));
    }
    Some(out)
}

pub fn write_gnuplot_surface(path: &Path, grid: &GridFit) -> Result<bool> {
    match gnuplot_surface(grid) {
        Some(data) => write_string(path, &data).map(|_| true),
        None => Ok(false),
    }
}
