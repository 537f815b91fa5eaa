//! Trace export.
//!
//! `trace.csv` columns, one row per output sample:
//! `t, k, v_1..v_n`, then per follower `i`: `eta{i}_1..eta{i}_n`,
//! `eta_err{i}`, `eta_bar{i}`, `x{i}_1..`, `e{i}_1..`.
//! `observer_events.csv`: `follower, l, t_l, s_l` (`s_l` empty for the
//! last event). `controller_events.csv`: `follower, m, t_m`.
//! `trace.json` holds the whole [`Trace`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::engine::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("csv: {other:?}")),
    }
}

pub fn trace_header(trace: &Trace) -> Vec<String> {
    let n = trace.leader_dim;
    let (x_dims, e_dims) = (&trace.state_dims, &trace.output_dims);
    let mut cols = vec!["t".to_string(), "k".to_string()];
    cols.extend((1..=n).map(|j| format!("v_{j}")));
    for i in 1..=trace.followers {
        cols.extend((1..=n).map(|j| format!("eta{i}_{j}")));
        cols.push(format!("eta_err{i}"));
        cols.push(format!("eta_bar{i}"));
        if let Some(&nx) = x_dims.get(i - 1) {
            cols.extend((1..=nx).map(|j| format!("x{i}_{j}")));
        }
        if let Some(&ne) = e_dims.get(i - 1) {
            cols.extend((1..=ne).map(|j| format!("e{i}_{j}")));
        }
    }
    cols
}

pub fn write_trace_csv(trace: &Trace, w: impl std::io::Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(trace_header(trace)).map_err(csv_err)?;
    for s in &trace.samples {
        let mut row = vec![s.t.to_string(), s.k.to_string()];
        row.extend(s.v.iter().map(f64::to_string));
        for i in 0..trace.followers {
            row.extend(s.eta[i].iter().map(f64::to_string));
            row.push(s.eta_error[i].to_string());
            row.push(s.eta_bar[i].to_string());
            if let Some(x) = s.x.get(i) {
                row.extend(x.iter().map(f64::to_string));
            }
            if let Some(e) = s.e.get(i) {
                row.extend(e.iter().map(f64::to_string));
            }
        }
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_observer_events_csv(trace: &Trace, w: impl std::io::Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["follower", "l", "t_l", "s_l"]).map_err(csv_err)?;
    for e in &trace.observer_events {
        wr.write_record([
            e.follower.to_string(),
            e.l.to_string(),
            e.t.to_string(),
            e.steps.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_controller_events_csv(trace: &Trace, w: impl std::io::Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["follower", "m", "t_m"]).map_err(csv_err)?;
    for e in &trace.controller_events {
        wr.write_record([e.follower.to_string(), e.m.to_string(), e.t.to_string()])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes the trace into `dir` and returns the created files.
pub fn export(trace: &Trace, dir: impl AsRef<Path>, format: Format) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match format {
        Format::Json => {
            let path = dir.join("trace.json");
            fs::write(&path, trace.to_json()?)?;
            files.push(path);
        }
        Format::Csv => {
            let path = dir.join("trace.csv");
            write_trace_csv(trace, fs::File::create(&path)?)?;
            files.push(path);
        }
    }
    let path = dir.join("observer_events.csv");
    write_observer_events_csv(trace, fs::File::create(&path)?)?;
    files.push(path);
    let path = dir.join("controller_events.csv");
    write_controller_events_csv(trace, fs::File::create(&path)?)?;
    files.push(path);
    Ok(files)
}
