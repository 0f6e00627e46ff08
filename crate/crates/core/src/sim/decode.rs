//! The two decoding steps run by every user.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{usage, Result};
use crate::info::{JointTable, WeakTypicality};
use crate::region::InputDistribution;
use crate::sim::code::{
    candidate_indices, for_each_message_tuple, uplink_sequence, Codebook, RelayMap,
};
use crate::sim::config::TypicalityKind;

/// A joint-typicality test against a fixed reference law, applied to
/// sequences given as flat joint-cell indices.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    kind: TypicalityKind,
    weak: WeakTypicality,
    mass: Vec<f64>,
    epsilon: f64,
}

impl TypicalityTest {
    pub fn new(reference: &JointTable, kind: TypicalityKind, epsilon: f64) -> Result<Self> {
        Ok(Self {
            kind,
            weak: WeakTypicality::new(reference, epsilon)?,
            mass: reference.mass().to_vec(),
            epsilon,
        })
    }

    pub fn kind(&self) -> TypicalityKind {
        self.kind
    }

    pub fn accepts_cells(&self, cells: &[usize]) -> bool {
        match self.kind {
            TypicalityKind::Weak => self.weak.accepts_cells(cells.iter().copied()),
            TypicalityKind::Robust => {
                let mut counts = vec![0usize; self.mass.len()];
                for &c in cells {
                    counts[c] += 1;
                }
                let n = cells.len() as f64;
                !cells.is_empty()
                    && counts
                        .iter()
                        .zip(&self.mass)
                        .all(|(&c, &p)| (c as f64 / n - p).abs() <= self.epsilon * p)
            }
        }
    }
}

/// `p(x_0) p(y_i | x_0)` on axes `(X_0, Y_i)`, `user` 0-based.
pub fn step1_reference(
    spec: &ChannelSpec,
    dist: &InputDistribution,
    user: usize,
) -> Result<JointTable> {
    let rows = spec.downlink_marginal(user)?;
    let width = spec.user_output_sizes[user];
    JointTable::from_fn(vec![spec.relay_input_size, width], |c| {
        dist.relay_input[c[0]] * rows[c[0]][c[1]]
    })
}

/// `p(q) prod_i p(x_i | q) 1{y_0 = f*(x)}` on axes `(Q, X_1, .., X_L, Y_0)`.
pub fn step2_reference(spec: &ChannelSpec, dist: &InputDistribution) -> Result<JointTable> {
    let l = spec.num_users();
    let mut axes = vec![dist.num_states()];
    axes.extend(&spec.user_alphabets);
    axes.push(spec.relay_output_size);
    JointTable::from_fn(axes, |c| {
        let x = &c[1..=l];
        if spec.uplink[spec.tuple_index(x)] != c[l + 1] {
            return 0.0;
        }
        let laws = &dist.user_conditionals[c[0]];
        dist.q_weights[c[0]] * x.iter().zip(laws).map(|(&s, p)| p[s]).product::<f64>()
    })
}

pub(crate) fn step1_cells(x0: &[usize], y: &[usize], width: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend(x0.iter().zip(y).map(|(a, b)| a * width + b));
}

pub(crate) fn step2_cells<C: AsRef<[usize]>>(
    spec: &ChannelSpec,
    q: &[usize],
    codewords: &[C],
    y0: &[usize],
    out: &mut Vec<usize>,
) {
    out.clear();
    out.extend((0..q.len()).map(|t| {
        let mut idx = q[t];
        for (cw, &size) in codewords.iter().zip(&spec.user_alphabets) {
            idx = idx * size + cw.as_ref()[t];
        }
        idx * spec.relay_output_size + y0[t]
    }));
}

/// Why a decoding step produced no estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "lowercase")]
pub enum DecodeFailure {
    /// No candidate passed the typicality test.
    Miss,
    /// Several candidates passed.
    Ambiguous { candidates: usize },
}

fn unique(passing: Vec<usize>) -> std::result::Result<usize, DecodeFailure> {
    match passing.len() {
        0 => Err(DecodeFailure::Miss),
        1 => Ok(passing[0]),
        k => Err(DecodeFailure::Ambiguous { candidates: k }),
    }
}

/// Step 1: the unique index in `D_i(a_i)` whose relay codeword is jointly
/// typical with the received `y_i`. A single candidate is returned untested.
#[allow(clippy::too_many_arguments)]
pub fn decode_step1(
    spec: &ChannelSpec,
    test: &TypicalityTest,
    user: usize,
    received: &[usize],
    own: usize,
    codebook: &Codebook,
    map: &RelayMap,
) -> Result<std::result::Result<usize, DecodeFailure>> {
    if received.len() != codebook.block_length() {
        return usage("received sequence length differs from the block length");
    }
    if own >= codebook.user_codewords[user].len() {
        return usage(format!(
            "message {own} outside user {}'s codebook",
            user + 1
        ));
    }
    let candidates = candidate_indices(spec, codebook, map, user, own);
    if candidates.len() == 1 {
        return Ok(Ok(candidates[0]));
    }
    let width = spec.user_output_sizes[user];
    let mut cells = Vec::new();
    let passing = candidates
        .into_iter()
        .filter(|&v| {
            step1_cells(&codebook.relay_codewords[v], received, width, &mut cells);
            test.accepts_cells(&cells)
        })
        .collect();
    Ok(unique(passing))
}

/// Step 2: the unique message tuple with `w_i = a_i` whose codewords map to
/// `y0` through the uplink and are jointly typical with `q` and `y0`.
/// Returns the full tuple, own message included. A search space with a single
/// tuple is returned untested.
pub fn decode_step2(
    spec: &ChannelSpec,
    test: &TypicalityTest,
    user: usize,
    y0: &[usize],
    own: usize,
    codebook: &Codebook,
) -> Result<std::result::Result<Vec<usize>, DecodeFailure>> {
    if y0.len() != codebook.block_length() {
        return usage("relay sequence length differs from the block length");
    }
    let counts = codebook.message_counts();
    if own >= counts[user] {
        return usage(format!(
            "message {own} outside user {}'s codebook",
            user + 1
        ));
    }
    let mut tuples = Vec::new();
    for_each_message_tuple(&counts, Some((user, own)), |w| tuples.push(w.to_vec()));
    if tuples.len() == 1 {
        return Ok(Ok(tuples.pop().expect("one tuple")));
    }
    let mut image = vec![0; y0.len()];
    let mut cells = Vec::new();
    let passing: Vec<usize> = (0..tuples.len())
        .filter(|&k| {
            let cws: Vec<&[usize]> = tuples[k]
                .iter()
                .enumerate()
                .map(|(i, &w)| codebook.user_codewords[i][w].as_slice())
                .collect();
            uplink_sequence(spec, &cws, &mut image);
            if image != y0 {
                return false;
            }
            step2_cells(spec, &codebook.q_sequence, &cws, y0, &mut cells);
            test.accepts_cells(&cells)
        })
        .collect();
    Ok(unique(passing).map(|k| tuples[k].clone()))
}
