//! Reproduction harness: synthetic data, metrics and the two sweeps.

mod metrics;
pub mod output;
mod runner;
mod signals;
pub mod stats;

pub use metrics::{
    metrics, residual_histogram, snr_db, TrialReport, HISTOGRAM_BINS, HISTOGRAM_HALF_WIDTH, SNR_CAP_DB,
};
pub use runner::{
    run_experiment_1d, run_experiment_tv, trial_seed, AlphaRule, CellSummary, ExperimentSpec, SweepResult,
    TrialRecord, TrialStatus, TvResult, TvSummary, TvTrialRecord,
};
pub use signals::{gen_angiogram, gen_sparse_signal};
