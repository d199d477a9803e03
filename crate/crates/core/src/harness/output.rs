//! CSV and JSON artifacts of a campaign.
//!
//! Everything except `provenance.json` is a pure function of the
//! configuration, so reruns with the same master seed are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::campaign::CampaignResult;
use super::config::{CampaignConfig, Estimator};
use crate::error::Result;
use crate::metrics::MeanSd;
use crate::pom::{Pom, PomExport};
use crate::states::EnsembleSpec;

pub const POINTS_FILE: &str = "fig1_points.csv";
pub const FITS_FILE: &str = "fig1_fits.csv";
pub const ETA_FILE: &str = "eta.csv";
pub const SUMMARY_FILE: &str = "table_summary.json";
pub const RAW_FILE: &str = "raw_runs.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_points(result: &CampaignResult, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["state_label", "pom", "estimator", "N", "D_avg", "D_sd", "runs"])?;
    for s in &result.states {
        for c in &s.cells {
            for p in &c.points {
                w.write_record([
                    s.label.clone(),
                    c.pom.to_string(),
                    c.estimator.to_string(),
                    p.n.to_string(),
                    p.d_avg.to_string(),
                    p.d_sd.to_string(),
                    p.runs.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_fits(result: &CampaignResult, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["state_label", "pom", "estimator", "a", "c", "residual_rms"])?;
    for s in &result.states {
        for c in &s.cells {
            w.write_record([
                s.label.clone(),
                c.pom.to_string(),
                c.estimator.to_string(),
                c.fit.a.to_string(),
                c.fit.c.to_string(),
                c.fit.residual_rms.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_eta(result: &CampaignResult, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["state_label", "estimator", "eta", "n_prod_thr", "n_sic_thr", "d_thr"])?;
    for s in &result.states {
        for (estimator, e) in &s.eta {
            w.write_record([
                s.label.clone(),
                estimator.to_string(),
                e.eta.to_string(),
                e.n_prod_thr.to_string(),
                e.n_sic_thr.to_string(),
                e.d_thr.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Distances of every included run; the `run` column counts included runs.
pub fn write_raw(result: &CampaignResult, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["state_label", "pom", "estimator", "N", "run", "distance"])?;
    for s in &result.states {
        for c in &s.cells {
            for p in &c.points {
                for (run, d) in p.distances.iter().enumerate() {
                    w.write_record([
                        s.label.clone(),
                        c.pom.to_string(),
                        c.estimator.to_string(),
                        p.n.to_string(),
                        run.to_string(),
                        d.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Table layout: one row per measurement plus an `eta` row, one column per
/// estimator.
#[derive(Debug, Serialize)]
pub struct TableSummary<'a> {
    pub campaign: String,
    pub ensemble: &'a str,
    pub n_states: usize,
    pub d_thr: f64,
    pub table: BTreeMap<String, BTreeMap<Estimator, MeanSd>>,
    pub ml_runs: usize,
    pub ml_excluded: usize,
    pub ml_iterations_mean: f64,
    pub rd_unphysical_fraction_n1000: f64,
}

pub fn table_summary(result: &CampaignResult) -> TableSummary<'_> {
    let s = &result.summary;
    let mut table: BTreeMap<String, BTreeMap<Estimator, MeanSd>> =
        s.n_thr.iter().map(|(pom, cells)| (pom.to_string(), cells.clone())).collect();
    if !s.eta.is_empty() {
        table.insert("eta".into(), s.eta.clone());
    }
    TableSummary {
        campaign: s.campaign.to_string(),
        ensemble: &s.ensemble,
        n_states: s.n_states,
        d_thr: s.d_thr,
        table,
        ml_runs: s.ml_runs,
        ml_excluded: s.ml_excluded,
        ml_iterations_mean: s.ml_iterations_mean,
        rd_unphysical_fraction_n1000: s.rd_unphysical_fraction_n1000,
    }
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    package: &'static str,
    version: &'static str,
    started_unix: u64,
    finished_unix: u64,
    config: &'a CampaignConfig,
    ensemble: Option<&'a EnsembleSpec>,
    warnings: &'a [String],
    poms: Vec<PomExport>,
}

/// Seconds since the Unix epoch, for [`write_outputs`].
pub fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Paths of the files written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputFiles {
    pub points: PathBuf,
    pub fits: PathBuf,
    pub eta: PathBuf,
    pub summary: PathBuf,
    pub raw: Option<PathBuf>,
    pub provenance: PathBuf,
}

/// Writes every artifact into `dir`, creating it if needed. `started_unix`
/// is the campaign start time recorded in the provenance file.
pub fn write_outputs(result: &CampaignResult, dir: &Path, started_unix: Option<u64>) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let files = OutputFiles {
        points: dir.join(POINTS_FILE),
        fits: dir.join(FITS_FILE),
        eta: dir.join(ETA_FILE),
        summary: dir.join(SUMMARY_FILE),
        raw: result.config.raw_runs.then(|| dir.join(RAW_FILE)),
        provenance: dir.join(PROVENANCE_FILE),
    };
    write_points(result, &files.points)?;
    write_fits(result, &files.fits)?;
    write_eta(result, &files.eta)?;
    write_json(&table_summary(result), &files.summary)?;
    if let Some(raw) = &files.raw {
        write_raw(result, raw)?;
    }
    let finished = timestamp();
    let provenance = Provenance {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        started_unix: started_unix.unwrap_or(finished),
        finished_unix: finished,
        config: &result.config,
        ensemble: result.ensemble.as_ref(),
        warnings: &result.warnings,
        poms: result.config.poms.iter().map(|&k| Pom::build(k).export()).collect(),
    };
    write_json(&provenance, &files.provenance)?;
    Ok(files)
}
