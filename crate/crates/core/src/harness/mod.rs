//! Experiment orchestration: splits, cross-validated search, the two
//! evaluation protocols, and report files.

mod bundle;
mod config;
mod folds;
mod grid;
mod hygiene;
mod pipeline;
mod protocol;
mod report;

pub use bundle::ModelBundle;
pub use config::{
    AugmentConfig, ClassifyConfig, Config, HarnessConfig, SimulatorConfig, TargetsConfig,
};
pub use folds::kfold_split;
pub use grid::{grid_search, CvRow, Family, Frozen, GridSpec, HyperParams, NetParams, SvcParams};
pub use hygiene::{load_sealed, SealedHoldout};
pub use pipeline::{
    featurize_trials, fit, fit_chemvise_heads, Context, Fitted, Head, HeadKind, Sample,
};
pub use protocol::{
    build_target_space, build_world, linspace, run_representation_protocol, run_window_sweep,
    World,
};
pub use report::{
    emit_report, read_report_csv, read_summary_csv, summarize, ExperimentReport, Provenance,
    ReportRow, SummaryRow,
};

use crate::{Error, Result};

/// Number of distinct exposures over `n` analytes at `k` magnitudes when every
/// non-empty analyte subset is tried at every magnitude combination:
/// `sum_{p=1}^{n} C(n, p) * k^p`.
pub fn count_experiments(n: u64, k: u64) -> Result<u128> {
    if n == 0 || k == 0 {
        return Err(Error::Config(format!(
            "analyte and concentration counts must be positive, got n = {n}, k = {k}"
        )));
    }
    let overflow = || Error::Overflow(format!("experiment count for n = {n}, k = {k}"));
    let (n, k) = (n as u128, k as u128);
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut power: u128 = 1;
    for p in 1..=n {
        binom = binom
            .checked_mul(n - p + 1)
            .map(|b| b / p)
            .ok_or_else(overflow)?;
        power = power.checked_mul(k).ok_or_else(overflow)?;
        let term = binom.checked_mul(power).ok_or_else(overflow)?;
        total = total.checked_add(term).ok_or_else(overflow)?;
    }
    Ok(total)
}
