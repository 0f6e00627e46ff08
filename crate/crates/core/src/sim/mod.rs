//! Monte Carlo simulation of the relaying scheme: random codebooks, the
//! relay's index map, two-step typicality decoding and error-rate curves.

mod code;
mod config;
mod decode;
mod experiment;
mod trial;

pub use code::{candidate_indices, generate_codebooks, Codebook, RelayMap};
pub use config::{
    SimConfig, TypicalityKind, CANDIDATE_CAP, DEFAULT_EPSILON, DEFAULT_SEED, DEFAULT_TRIALS,
};
pub use decode::{
    decode_step1, decode_step2, step1_reference, step2_reference, DecodeFailure, TypicalityTest,
};
pub use experiment::{run_experiment, strictly_decreasing, summarize, ErrorSummary, ExperimentRow};
pub use trial::{run_trial, run_trials, TrialOutcome, UserEvents};
