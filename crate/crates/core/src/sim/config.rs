use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{usage, Error, Result};
use crate::region::{check_rates, InputDistribution};

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x4d57_5243_2014;
/// Default typicality parameter of both decoding steps.
pub const DEFAULT_EPSILON: f64 = 0.2;
/// Default number of Monte Carlo trials.
pub const DEFAULT_TRIALS: usize = 1000;
/// Largest number of message tuples a single decoder may search.
pub const CANDIDATE_CAP: f64 = 4_294_967_296.0;

/// Which joint-typicality test the decoders apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypicalityKind {
    /// `|-(1/n) log2 p(s^n) - H(S)| < epsilon` for every subset of variables.
    #[default]
    Weak,
    /// `|pi(a) - p(a)| <= epsilon p(a)` for every joint symbol `a`.
    Robust,
}

/// Everything needed to reproduce a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: ChannelSpec,
    pub dist: InputDistribution,
    pub rates: Vec<f64>,
    pub block_length: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Number of blocks `B`; `B - 1` messages per user are carried, so the
    /// effective rate is `(B - 1) / B` of the nominal one.
    pub blocks: usize,
    pub typicality: TypicalityKind,
    /// Redraw duplicate codewords within each codebook.
    pub distinct_codewords: bool,
    /// Simulate every one of the `B - 1` block pairs instead of one.
    pub chain_blocks: bool,
    /// Draw one codebook for the whole run instead of one per trial.
    pub share_codebook: bool,
}

impl SimConfig {
    /// Defaults: weak typicality with `epsilon = 0.2`, 1000 trials, two
    /// blocks, fresh codebooks every trial.
    pub fn new(
        spec: ChannelSpec,
        dist: InputDistribution,
        rates: Vec<f64>,
        block_length: usize,
    ) -> Self {
        Self {
            spec,
            dist,
            rates,
            block_length,
            epsilon: DEFAULT_EPSILON,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            blocks: 2,
            typicality: TypicalityKind::Weak,
            distinct_codewords: false,
            chain_blocks: false,
            share_codebook: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate().into_result()?;
        check_rates(&self.spec, &self.rates)?;
        self.dist.check(&self.spec)?;
        if self.block_length == 0 {
            return usage("block length must be positive");
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return usage(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.trials == 0 {
            return usage("at least one trial is needed");
        }
        if self.blocks < 2 {
            return usage("at least two blocks are needed (one uplink, one downlink)");
        }
        self.message_counts()?;
        Ok(())
    }

    /// `M_i = round(2^{n R_i})`, at least 1.
    pub fn message_counts(&self) -> Result<Vec<usize>> {
        self.rates
            .iter()
            .map(|r| {
                let bits = r * self.block_length as f64;
                if bits > 48.0 {
                    return Err(Error::Capacity {
                        what: format!("codebook of rate {r} at n = {}", self.block_length),
                        needed: bits.exp2(),
                        cap: 2f64.powi(48),
                    });
                }
                Ok((bits.exp2().round() as usize).max(1))
            })
            .collect()
    }

    /// `log2(M_i) / n`, the rate the integer codebooks actually carry.
    pub fn realized_rates(&self) -> Result<Vec<f64>> {
        Ok(self
            .message_counts()?
            .into_iter()
            .map(|m| (m as f64).log2() / self.block_length as f64)
            .collect())
    }

    /// `(B - 1) / B`.
    pub fn rate_factor(&self) -> f64 {
        (self.blocks - 1) as f64 / self.blocks as f64
    }

    /// Block pairs simulated per trial.
    pub(crate) fn block_pairs(&self) -> usize {
        if self.chain_blocks {
            self.blocks - 1
        } else {
            1
        }
    }
}
