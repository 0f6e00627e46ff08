//! Capacity regions of restricted, separated multi-way relay channels (MWRCs)
//! whose uplink is a deterministic function of the users' symbols.
//!
//! The crate is organised bottom-up:
//!
//! * [`info`] holds exact entropy / mutual-information primitives and the
//!   typicality tests used by the decoders.
//! * [`channel`] describes a channel: alphabets, the uplink table `f*` and the
//!   downlink law `p*(y_1..y_L | x_0)`.
//! * [`region`] evaluates the cut constraints, optimizes the relay input,
//!   builds the time-shared uplink entropy hull and answers membership queries.
//! * [`sim`] runs the block-Markov relaying scheme end to end with random
//!   codebooks and two-step typicality decoding.
//! * [`document`] reads and writes channel files, result documents and CSV.
//!
//! ```
//! use mwrc::channel::ChannelSpec;
//! use mwrc::region::{Region, RegionConfig, Status};
//!
//! let spec = ChannelSpec::xor_noiseless();
//! let region = Region::new(&spec, RegionConfig::default()).unwrap();
//! let verdict = region.membership(&[0.9, 0.9]).unwrap();
//! assert_eq!(verdict.status, Status::In);
//! ```

// Negated comparisons such as `!(p >= 0.0)` are how the validators reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod document;
mod error;
pub mod info;
pub mod region;
pub mod sim;

pub use error::{Error, Result};

/// Largest table or enumeration (in cells) the toolkit materializes.
pub const ENUMERATION_CAP: f64 = 1e7;

/// Iterates over the non-empty strict subsets of `[1:L]` as bitmasks
/// (bit `j-1` set when user `j` is in the subset), in increasing order.
pub fn strict_subsets(num_users: usize) -> impl Iterator<Item = usize> {
    let full = (1usize << num_users) - 1;
    1..full
}

/// Formats a user subset bitmask as `{1,3}` (1-based).
pub fn subset_label(mask: usize) -> String {
    let members: Vec<String> = (0..usize::BITS as usize)
        .filter(|j| mask >> j & 1 == 1)
        .map(|j| (j + 1).to_string())
        .collect();
    format!("{{{}}}", members.join(","))
}
