//! Trace files: one row per integration step, SI units, plus `theta_deg`.
//!
//! Numbers use Rust's shortest round-trip formatting, so re-reading a trace
//! reproduces every sample bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use cartpole_core::metrics::{Sample, TimeSeries};

use crate::config::Format;
use crate::error::CliError;

pub const COLUMNS: [&str; 11] = [
    "t",
    "x",
    "v",
    "theta",
    "omega",
    "theta_sp",
    "force",
    "disturbance",
    "measured_x",
    "measured_theta",
    "theta_deg",
];

/// Columns needed to rebuild a [`TimeSeries`]; `theta_deg` is derived.
const REQUIRED: usize = 10;

pub fn write_trace<W: Write>(series: &TimeSeries, out: W, format: Format) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for s in series.samples() {
        let row = [
            s.t,
            s.x,
            s.v,
            s.theta,
            s.omega,
            s.theta_sp,
            s.force,
            s.disturbance,
            s.measured_x,
            s.measured_theta,
            s.theta.to_degrees(),
        ];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(series: &TimeSeries, path: &Path, format: Format) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace(series, std::io::BufWriter::new(file), format)
        .map_err(|e| CliError::io(path, e.into()))
}

/// Reads a comma- or tab-separated trace. Columns may come in any order;
/// extra columns are ignored.
pub fn read_trace<R: Read>(mut input: R) -> Result<TimeSeries, CliError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| CliError::Config(format!("cannot read trace: {e}")))?;
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = if header_line.contains('\t') {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| CliError::Config(format!("trace header: {e}")))?
        .clone();
    let mut index = [0usize; REQUIRED];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Config(format!("trace is missing column '{name}'")))?;
    }

    let mut series = TimeSeries::default();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| CliError::Config(format!("trace line {line}: {e}")))?;
        let mut v = [0.0; REQUIRED];
        for (value, (&col, name)) in v.iter_mut().zip(index.iter().zip(COLUMNS)) {
            let field = record.get(col).unwrap_or("");
            *value = field.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "trace line {line}, column '{name}': bad number '{field}'"
                ))
            })?;
        }
        series.push(Sample {
            t: v[0],
            x: v[1],
            v: v[2],
            theta: v[3],
            omega: v[4],
            theta_sp: v[5],
            force: v[6],
            disturbance: v[7],
            measured_x: v[8],
            measured_theta: v[9],
        });
    }
    if series.is_empty() {
        return Err(CliError::Config("trace has no samples".into()));
    }
    Ok(series)
}

pub fn load_trace(path: &Path) -> Result<TimeSeries, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(file)
}
