//! Random-restart experiment harness: heavy-tailed initialization, seeded
//! deterministic runs, classification, persistence and plateau reporting.

mod classify;
mod figures;
mod report;
mod sample;
mod sweep;

pub use classify::{classify, Classification};
pub use figures::{
    emit_figure_csv, emit_figure_svg, emit_sorted_values_csv, emit_sorted_values_svg, ConfigFigure,
};
pub use report::{format_report, format_table};
pub use sample::{heavy_tail_sample, random_init, run_seed};
pub use sweep::{detect_plateaus, run_single, run_sweep, Plateau, SweepResult};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bfgs::{OptimizerOptions, Termination};
use crate::error::{CrouzeixError, Result};
use crate::point::FieldMode;
use crate::ratio::RatioOptions;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub n: usize,
    pub m: usize,
    pub field_mode: FieldMode,
    /// Heavy-tail exponent in x exp(alpha x^2).
    pub alpha: f64,
    pub run_count: usize,
    pub base_seed: u64,
    /// Z_eps threshold for the per-run stationarity report.
    pub epsilon: f64,
    pub plateau_tol: f64,
    /// Worker threads; 0 picks the runtime default.
    pub workers: usize,
    pub optimizer: OptimizerOptions,
    /// Ratio options inside the optimization loop (no interpolant fit).
    pub oracle: RatioOptions,
    /// Ratio options for the final per-run evaluation and verification.
    pub report: RatioOptions,
    pub renormalize_poly: bool,
    pub outdir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 2,
            m: 3,
            field_mode: FieldMode::Real,
            alpha: 2.0,
            run_count: 200,
            base_seed: 1,
            epsilon: 1e-4,
            plateau_tol: 1e-4,
            workers: 0,
            optimizer: OptimizerOptions::default(),
            oracle: RatioOptions::fast(),
            report: RatioOptions::default(),
            renormalize_poly: false,
            outdir: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CrouzeixError::DimensionMismatch("n must be at least 2".into()));
        }
        if self.m < 1 {
            return Err(CrouzeixError::DimensionMismatch("m must be at least 1".into()));
        }
        if self.run_count < 1 {
            return Err(CrouzeixError::DimensionMismatch("run_count must be at least 1".into()));
        }
        if self.alpha < 0.0 {
            return Err(CrouzeixError::DimensionMismatch("alpha must be nonnegative".into()));
        }
        self.optimizer.validate()?;
        Ok(())
    }
}

/// Persistent record of one optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub run_index: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub field_mode: FieldMode,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    pub f: Option<f64>,
    pub termination: Option<Termination>,
    pub iterations: usize,
    pub z_count: Option<usize>,
    pub d_norm: Option<f64>,
    pub forgo: bool,
    pub classification: Option<Classification>,
    pub final_params: Vec<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(
        cfg: &SweepConfig,
        run_index: usize,
        seed: u64,
        params: Vec<f64>,
        iterations: usize,
        termination: Option<Termination>,
        error: String,
    ) -> Self {
        RunRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            run_index,
            seed,
            n: cfg.n,
            m: cfg.m,
            field_mode: cfg.field_mode,
            numerator: None,
            denominator: None,
            f: None,
            termination,
            iterations,
            z_count: None,
            d_norm: None,
            forgo: false,
            classification: None,
            final_params: params,
            error: Some(error),
        }
    }
}
