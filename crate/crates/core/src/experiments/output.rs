//! CSV tables and the JSON run manifest.
//!
//! Tables contain no timings so that reruns with the same seed are
//! byte-identical; wall-clock figures go to the manifest only.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::metrics::{HISTOGRAM_BINS, HISTOGRAM_HALF_WIDTH, SNR_CAP_DB};
use super::runner::{ExperimentSpec, SweepResult, TrialStatus, TvResult};
use crate::error::Result;
use crate::rng::RNG_ALGORITHM;

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn snr(v: f64) -> String {
    num(v.min(SNR_CAP_DB))
}

fn status(s: TrialStatus) -> &'static str {
    match s {
        TrialStatus::Ok => "ok",
        TrialStatus::NotConverged => "not-converged",
        TrialStatus::Failed => "failed",
    }
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Per-cell aggregates of the 1-D sweep (`snr_std_db` uses the `n - 1`
/// denominator).
pub fn sweep_summary_csv(res: &SweepResult, path: &Path) -> Result<()> {
    let header = [
        "m_over_K",
        "m",
        "p",
        "trials",
        "failed",
        "not_converged",
        "snr_mean_db",
        "snr_std_unbiased_db",
        "qc_mean",
        "inside_half_fraction",
        "mean_outer_iterations",
        "mean_inner_iterations",
    ];
    let rows = res
        .cells
        .iter()
        .map(|c| {
            vec![
                num(c.m_over_k),
                c.m.to_string(),
                num(c.p),
                c.trials.to_string(),
                c.failed.to_string(),
                c.not_converged.to_string(),
                snr(c.snr_mean_db),
                num(c.snr_std_db),
                num(c.qc_mean),
                num(c.inside_half_fraction),
                num(c.mean_outer_iterations),
                num(c.mean_inner_iterations),
            ]
        })
        .collect();
    write_table(path, &header, rows)
}

/// Pooled histograms of `α^{-1}(Φx̂ - y_q)`, one row per bin.
pub fn sweep_histogram_csv(res: &SweepResult, path: &Path) -> Result<()> {
    let width = 2.0 * HISTOGRAM_HALF_WIDTH / HISTOGRAM_BINS as f64;
    let mut rows = Vec::new();
    for c in &res.cells {
        for (b, count) in c.histogram.iter().enumerate() {
            let lo = -HISTOGRAM_HALF_WIDTH + b as f64 * width;
            rows.push(vec![
                num(c.m_over_k),
                num(c.p),
                b.to_string(),
                num(lo),
                num(lo + width),
                count.to_string(),
            ]);
        }
    }
    write_table(path, &["m_over_K", "p", "bin", "lo", "hi", "count"], rows)
}

pub fn sweep_trials_csv(res: &SweepResult, path: &Path) -> Result<()> {
    let header = [
        "m_over_K",
        "m",
        "p",
        "trial",
        "seed",
        "alpha",
        "epsilon",
        "status",
        "snr_db",
        "qc_fraction",
        "inside_half",
        "outer_iterations",
        "inner_iterations",
        "error",
    ];
    let rows = res
        .trials
        .iter()
        .map(|t| {
            let r = t.report.as_ref();
            vec![
                num(t.m_over_k),
                t.m.to_string(),
                num(t.p),
                t.trial.to_string(),
                t.seed.to_string(),
                num(t.alpha),
                num(t.epsilon),
                status(t.status).into(),
                r.map_or(String::new(), |r| snr(r.snr_db)),
                r.map_or(String::new(), |r| num(r.qc_fraction)),
                r.map_or(String::new(), |r| r.inside_half.to_string()),
                r.map_or(String::new(), |r| r.outer_iterations.to_string()),
                r.map_or(String::new(), |r| r.inner_iterations.to_string()),
                t.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(path, &header, rows)
}

pub fn tv_summary_csv(res: &TvResult, path: &Path) -> Result<()> {
    let header = [
        "p",
        "trials",
        "failed",
        "snr_mean_db",
        "snr_std_unbiased_db",
        "improvement_mean_db",
        "improvement_std_unbiased_db",
    ];
    let rows = res
        .summary
        .iter()
        .map(|s| {
            vec![
                num(s.p),
                s.trials.to_string(),
                s.failed.to_string(),
                snr(s.snr_mean_db),
                num(s.snr_std_db),
                num(s.improvement_mean_db),
                num(s.improvement_std_db),
            ]
        })
        .collect();
    write_table(path, &header, rows)
}

pub fn tv_trials_csv(res: &TvResult, path: &Path) -> Result<()> {
    let header = [
        "p",
        "trial",
        "seed",
        "intensity",
        "alpha",
        "epsilon",
        "status",
        "snr_db",
        "improvement_db",
        "outer_iterations",
        "error",
    ];
    let rows = res
        .trials
        .iter()
        .map(|t| {
            vec![
                num(t.p),
                t.trial.to_string(),
                t.seed.to_string(),
                num(t.intensity),
                num(t.alpha),
                num(t.epsilon),
                status(t.status).into(),
                snr(t.snr_db),
                num(t.improvement_db),
                t.outer_iterations.to_string(),
                t.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(path, &header, rows)
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'a str,
    pub rng: &'static str,
    pub master_seed: u64,
    /// How instances are drawn across trials.
    pub randomness: &'static str,
    pub config: &'a ExperimentSpec,
    pub trial_seeds: Vec<u64>,
    pub failures: usize,
    pub failure_budget: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

fn write_manifest(dir: &Path, manifest: &Manifest<'_>) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(path)
}

fn names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect()
}

/// Writes `summary.csv`, `histograms.csv`, optionally `trials.csv`, and
/// `manifest.json` into `dir`; returns the paths written.
pub fn write_sweep(res: &SweepResult, dir: &Path, raw: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = vec![dir.join("summary.csv"), dir.join("histograms.csv")];
    sweep_summary_csv(res, &written[0])?;
    sweep_histogram_csv(res, &written[1])?;
    if raw {
        let p = dir.join("trials.csv");
        sweep_trials_csv(res, &p)?;
        written.push(p);
    }
    let mut seeds: Vec<u64> = res.trials.iter().map(|t| t.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: "exp1d",
        rng: RNG_ALGORITHM,
        master_seed: res.spec.seed,
        randomness: "signal and Gaussian matrix redrawn per trial; all moments decode the same instance",
        config: &res.spec,
        trial_seeds: seeds,
        failures: res.failures,
        failure_budget: res.failure_budget,
        wall_time_s: res.wall_time_s,
        outputs: names(&written),
    };
    written.push(write_manifest(dir, &manifest)?);
    Ok(written)
}

/// Writes `tv_summary.csv`, optionally `tv_trials.csv`, and `manifest.json`.
pub fn write_tv(res: &TvResult, dir: &Path, raw: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = vec![dir.join("tv_summary.csv")];
    tv_summary_csv(res, &written[0])?;
    if raw {
        let p = dir.join("tv_trials.csv");
        tv_trials_csv(res, &p)?;
        written.push(p);
    }
    let mut seeds: Vec<u64> = res.trials.iter().map(|t| t.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: "exptv",
        rng: RNG_ALGORITHM,
        master_seed: res.spec.seed,
        randomness: "angiogram and Fourier sampling set redrawn per trial; all moments decode the same instance",
        config: &res.spec,
        trial_seeds: seeds,
        failures: res.failures,
        failure_budget: res.failure_budget,
        wall_time_s: res.wall_time_s,
        outputs: names(&written),
    };
    written.push(write_manifest(dir, &manifest)?);
    Ok(written)
}
