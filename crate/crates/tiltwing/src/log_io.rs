//! Run-log CSV files: `#` header lines with scenario, mode and fault, then
//! one row per dynamics tick.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use tiltwing_core::sim::{ControlMode, LogRow, RunLog, SimFault};

/// A run log as read back from disk; the fault is kept as text.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLog {
    pub scenario: String,
    pub mode: String,
    pub fault: Option<String>,
    pub rows: Vec<LogRow>,
}

pub fn describe_fault(f: &SimFault) -> String {
    match f {
        SimFault::Integration { time, error } => format!("integration fault at t = {time} s: {error}"),
        SimFault::Lookup { time, error } => format!("trim lookup failed at t = {time} s: {error}"),
    }
}

pub fn write_log<W: Write>(log: &RunLog, mut out: W) -> Result<()> {
    writeln!(out, "# scenario: {}", log.scenario)?;
    writeln!(out, "# mode: {}", log.mode.name())?;
    if let Some(f) = &log.fault {
        writeln!(out, "# fault: {}", describe_fault(f))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LogRow::columns())?;
    for r in &log.rows {
        w.write_record(r.values().iter().map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(input: R) -> Result<LoadedLog> {
    let mut reader = std::io::BufReader::new(input);
    let mut scenario = String::new();
    let mut mode = String::new();
    let mut fault = None;
    let mut body = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("scenario:") {
                scenario = v.trim().to_string();
            } else if let Some(v) = rest.strip_prefix("mode:") {
                mode = v.trim().to_string();
            } else if let Some(v) = rest.strip_prefix("fault:") {
                fault = Some(v.trim().to_string());
            }
        } else {
            body.push_str(&line);
        }
        line.clear();
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != LogRow::columns() {
        bail!("log columns do not match this version of the simulator");
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("log row {}", k + 1))?;
        rows.push(LogRow::from_values(&v).context("log row width")?);
    }
    Ok(LoadedLog {
        scenario,
        mode,
        fault,
        rows,
    })
}

pub fn save_log(log: &RunLog, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_log(log, std::io::BufWriter::new(f))
}

pub fn load_log(path: &Path) -> Result<LoadedLog> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_log(f).with_context(|| format!("in {}", path.display()))
}

pub fn mode_name(m: ControlMode) -> &'static str {
    m.name()
}
