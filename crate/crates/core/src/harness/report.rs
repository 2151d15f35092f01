use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::checks::{CorrectionReport, FirstOrderReport, KConvergenceReport};
use super::ladder::{LadderReport, Metadata};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Usage(format!(
                "unknown format '{s}', expected csv or json"
            ))),
        }
    }
}

/// A report with a flat CSV form. Provenance goes in leading `#` lines;
/// floats use the shortest representation that parses back exactly.
pub trait Report: Serialize {
    fn metadata(&self) -> &Metadata;
    fn header(&self) -> Vec<&'static str>;
    fn records(&self) -> Vec<Vec<String>>;
}

fn f(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

impl Report for LadderReport {
    fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    fn header(&self) -> Vec<&'static str> {
        vec![
            "seed",
            "t",
            "x",
            "eps",
            "u_wick",
            "u_strat",
            "gap",
            "scaled_gap",
            "correction_ref",
            "noise_floor",
        ]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.seed.to_string(),
                    f(r.t),
                    f(r.x),
                    f(r.eps),
                    f(r.u_wick),
                    f(r.u_strat),
                    f(r.gap),
                    f(r.scaled_gap),
                    f(r.correction_ref),
                    f(r.noise_floor),
                ]
            })
            .collect()
    }
}

impl Report for FirstOrderReport {
    fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    fn header(&self) -> Vec<&'static str> {
        vec![
            "seed",
            "t",
            "wick_vs_strat",
            "wick_vs_direct",
            "strat_vs_direct",
        ]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.seed.to_string(),
                    f(r.t),
                    f(r.wick_vs_strat),
                    f(r.wick_vs_direct),
                    f(r.strat_vs_direct),
                ]
            })
            .collect()
    }
}

impl Report for KConvergenceReport {
    fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    fn header(&self) -> Vec<&'static str> {
        vec!["seed", "t", "eps", "k1", "k2", "k3", "diff_12", "diff_23"]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.seed.to_string(),
                    f(r.t),
                    f(r.eps),
                    r.modes[0].to_string(),
                    r.modes[1].to_string(),
                    r.modes[2].to_string(),
                    f(r.diffs[0]),
                    f(r.diffs[1]),
                ]
            })
            .collect()
    }
}

impl Report for CorrectionReport {
    fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    fn header(&self) -> Vec<&'static str> {
        vec!["x", "value"]
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.x
            .iter()
            .zip(&self.value)
            .map(|(&x, &v)| vec![f(x), f(v)])
            .collect()
    }
}

/// Serialize `report` in `format` to `out`.
pub fn write_report<R: Report, W: Write>(report: &R, format: Format, mut out: W) -> Result<()> {
    let ser = |e: &dyn std::fmt::Display| Error::Serde(e.to_string());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(|e| ser(&e))?;
            writeln!(out).map_err(|e| ser(&e))?;
        }
        Format::Csv => {
            let meta = report.metadata();
            let seeds: Vec<String> = meta.seeds.iter().map(u64::to_string).collect();
            writeln!(out, "# config_hash={}", meta.config_hash).map_err(|e| ser(&e))?;
            writeln!(out, "# seeds={}", seeds.join(" ")).map_err(|e| ser(&e))?;
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(report.header()).map_err(|e| ser(&e))?;
            for r in report.records() {
                w.write_record(&r).map_err(|e| ser(&e))?;
            }
            w.flush().map_err(|e| ser(&e))?;
        }
    }
    out.flush().map_err(|e| ser(&e))
}

/// Write to `path`, or stdout when `path` is `None`.
pub fn emit<R: Report>(report: &R, format: Format, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let io_err = |source: io::Error| Error::Io {
                path: p.to_path_buf(),
                source,
            };
            let file = File::create(p).map_err(io_err)?;
            let mut w = BufWriter::new(file);
            write_report(report, format, &mut w)?;
            w.flush().map_err(io_err)
        }
        None => write_report(report, format, io::stdout().lock()),
    }
}
