//! Rate-distortion CSV/JSON and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::harness::{AnalyticPoint, ExperimentOutput, RdPoint, RootPoint};
use crate::spec::ExperimentSpec;
use crate::trace_io::write_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One row of the rate-distortion CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdRow {
    pub rho: Option<f64>,
    pub rate: f64,
    pub distortion: f64,
    pub stderr_rate: f64,
    pub stderr_distortion: f64,
    pub sampler: String,
    pub recon: String,
    pub seeds: usize,
}

impl From<&RdPoint> for RdRow {
    fn from(p: &RdPoint) -> Self {
        Self {
            rho: p.rho,
            rate: p.rate,
            distortion: p.distortion,
            stderr_rate: p.stderr_rate,
            stderr_distortion: p.stderr_distortion,
            sampler: p.sampler.clone(),
            recon: p.recon.clone(),
            seeds: p.seeds,
        }
    }
}

impl From<&AnalyticPoint> for RdRow {
    fn from(p: &AnalyticPoint) -> Self {
        Self {
            rho: Some(p.rho),
            rate: p.rate,
            distortion: p.distortion,
            stderr_rate: 0.0,
            stderr_distortion: 0.0,
            sampler: format!("analytic(pe={})", p.pe),
            recon: "-".into(),
            seeds: 0,
        }
    }
}

/// Simulated points followed by analytic curve points.
pub fn rd_rows(out: &ExperimentOutput) -> Vec<RdRow> {
    out.points
        .iter()
        .map(RdRow::from)
        .chain(out.analytic.iter().map(RdRow::from))
        .collect()
}

pub fn write_output<W: Write>(mut w: W, out: &ExperimentOutput, format: Format) -> Result<()> {
    match format {
        Format::Csv if !out.roots.is_empty() => write_csv(w, &out.roots),
        Format::Csv => write_csv(w, &rd_rows(out)),
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, out)?;
            writeln!(w)?;
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub args: &'a [String],
    pub spec: &'a ExperimentSpec,
    pub points: &'a [RdPoint],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    pub analytic: &'a [AnalyticPoint],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    pub roots: &'a [RootPoint],
}

impl<'a> Manifest<'a> {
    pub fn new(args: &'a [String], spec: &'a ExperimentSpec, out: &'a ExperimentOutput) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            rng: tans_core::rng::RNG_ALGORITHM,
            args,
            spec,
            points: &out.points,
            analytic: &out.analytic,
            roots: &out.roots,
        }
    }
}

/// `<out>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_manifest(path: &Path, manifest: &Manifest<'_>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("out/fig6.csv")),
            PathBuf::from("out/fig6.csv.manifest.json")
        );
    }

    #[test]
    fn csv_header_and_blank_rho() {
        let out = ExperimentOutput {
            points: vec![RdPoint {
                rho: None,
                rate: 0.5,
                distortion: 0.25,
                stderr_rate: 0.0,
                stderr_distortion: 0.01,
                cost: None,
                stderr_cost: None,
                sampler: "uniform(R=0.5)".into(),
                recon: "clc".into(),
                seeds: 2,
                per_seed: vec![],
            }],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_output(&mut buf, &out, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "rho,rate,distortion,stderr_rate,stderr_distortion,sampler,recon,seeds\n,0.5,0.25,0.0,0.01,uniform(R=0.5),clc,2\n"
        );
    }
}
