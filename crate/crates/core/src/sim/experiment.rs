use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::sim::config::SimConfig;
use crate::sim::trial::{run_trials, TrialOutcome};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Error rates over a set of trials. Event rates count trials in which the
/// event hit at least one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub trials: usize,
    pub step1_miss: f64,
    pub step1_false: f64,
    pub step2_atypical: f64,
    pub step2_confusion: f64,
    /// Fraction of trials in which some user decoded wrongly.
    pub overall: f64,
    /// 95% normal-approximation half-width of `overall`.
    pub half_width: f64,
    /// Error rate of each user.
    pub per_user: Vec<f64>,
}

pub fn summarize(outcomes: &[TrialOutcome]) -> ErrorSummary {
    let t = outcomes.len().max(1) as f64;
    let rate =
        |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / t;
    let overall = rate(&|o| o.error());
    let users = outcomes.first().map_or(0, |o| o.users.len());
    ErrorSummary {
        trials: outcomes.len(),
        step1_miss: rate(&|o| o.users.iter().any(|u| u.step1_miss)),
        step1_false: rate(&|o| o.users.iter().any(|u| u.step1_false)),
        step2_atypical: rate(&|o| o.users.iter().any(|u| u.step2_atypical)),
        step2_confusion: rate(&|o| o.users.iter().any(|u| u.step2_confusion)),
        overall,
        half_width: Z95 * (overall * (1.0 - overall) / t).sqrt(),
        per_user: (0..users).map(|i| rate(&|o| o.users[i].error())).collect(),
    }
}

/// One block length of an error-rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub block_length: usize,
    pub rates: Vec<f64>,
    pub realized_rates: Vec<f64>,
    pub message_counts: Vec<usize>,
    /// `(B - 1) / B`, the rate factor of the block-Markov scheme.
    pub rate_factor: f64,
    pub seed: u64,
    pub summary: ErrorSummary,
}

/// Runs `base` at every block length in `block_lengths`.
pub fn run_experiment(base: &SimConfig, block_lengths: &[usize]) -> Result<Vec<ExperimentRow>> {
    if block_lengths.is_empty() {
        return usage("no block lengths given");
    }
    block_lengths
        .iter()
        .map(|&n| {
            let config = SimConfig {
                block_length: n,
                ..base.clone()
            };
            let outcomes = run_trials(&config)?;
            Ok(ExperimentRow {
                block_length: n,
                rates: config.rates.clone(),
                realized_rates: config.realized_rates()?,
                message_counts: config.message_counts()?,
                rate_factor: config.rate_factor(),
                seed: config.seed,
                summary: summarize(&outcomes),
            })
        })
        .collect()
}

/// Whether the overall error rate falls strictly from each row to the next.
pub fn strictly_decreasing(rows: &[ExperimentRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].summary.overall < w[0].summary.overall)
}
