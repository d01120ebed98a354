//! CSV, JSON and Markdown writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::Format;
use crate::CliError;

/// Column contract of `run`: a1,a2,T,t,value,error_estimate,method,runtime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub a1: f64,
    pub a2: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t: f64,
    pub value: f64,
    /// Empty when error estimates are switched off.
    pub error_estimate: Option<f64>,
    pub method: String,
    pub runtime: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub nu: f64,
    pub method: String,
    pub ne: f64,
    pub ne_whf: f64,
    pub dh: Option<f64>,
    pub points: usize,
    pub min_error: f64,
    pub max_error: f64,
    pub max_error_estimate: f64,
    pub total_s: f64,
    pub per_point_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub a1: f64,
    pub a2: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub exact: Option<f64>,
    pub sampler: String,
    pub runtime: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WhfRow {
    pub q_re: f64,
    pub q_im: f64,
    pub xi: f64,
    pub phi_plus_re: f64,
    pub phi_plus_im: f64,
    pub phi_minus_re: f64,
    pub phi_minus_im: f64,
    pub identity_residual: f64,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_csv<T: Serialize>(rows: &[T], w: impl Write) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(io)?;
    }
    wr.flush().map_err(io)
}

pub fn write_table<T: Serialize>(rows: &[T], format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let mut w = sink(path)?;
    match format {
        Format::Csv => write_csv(rows, w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows).map_err(io)?;
            writeln!(w).map_err(io)
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(io)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

pub fn bench_markdown(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "| nu | method | Ne | Ne_whf | dh | points | min error | max error | max estimate | total s | s/point |\n\
         |---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        s += &format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.2} | {:.3} |\n",
            r.nu,
            r.method,
            r.ne,
            r.ne_whf,
            r.dh.map(sci).unwrap_or_else(|| "-".into()),
            r.points,
            sci(r.min_error),
            sci(r.max_error),
            sci(r.max_error_estimate),
            r.total_s,
            r.per_point_s
        );
    }
    s
}
