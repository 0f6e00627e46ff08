//! Random codebooks and the relay's sequence-to-index map.
//!
//! Every codeword is drawn from its own generator, seeded from a per-trial
//! codebook key and the codeword's label. A codeword can then be produced on
//! demand without storing the codebook, which keeps large message sets
//! tractable while leaving the random-coding law unchanged.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::sim::config::{SimConfig, CANDIDATE_CAP};
use crate::ENUMERATION_CAP;

const TAG_Q: u64 = 0x51;
const TAG_USER: u64 = 0x55 << 8;
const TAG_RELAY_INDEX: u64 = 0x52;
const TAG_RELAY_SEQUENCE: u64 = 0x59;
const MAX_REDRAWS: u64 = 10_000;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the generator of one labelled codeword.
fn label_seed(key: u64, tag: u64, label: u128, attempt: u64) -> u64 {
    let mut h = splitmix(key ^ splitmix(tag));
    h = splitmix(h ^ label as u64);
    h = splitmix(h ^ (label >> 64) as u64);
    splitmix(h ^ attempt)
}

/// Inverse-CDF sampler over a small alphabet, on 64-bit integer thresholds.
#[derive(Debug, Clone)]
pub(crate) struct Sampler {
    /// `thresholds[k]` is the CDF through symbol `k` scaled to `2^64`; the
    /// last used symbol saturates so that rounding never leaves a gap.
    thresholds: Vec<u64>,
    last: usize,
}

impl Sampler {
    pub fn new(mass: &[f64]) -> Self {
        const SCALE: f64 = 18_446_744_073_709_551_616.0;
        let mut acc = 0.0;
        let mut thresholds: Vec<u64> = mass
            .iter()
            .map(|p| {
                acc += p;
                (acc * SCALE).min(u64::MAX as f64) as u64
            })
            .collect();
        let last = mass.iter().rposition(|p| *p > 0.0).unwrap_or(0);
        thresholds[last..].iter_mut().for_each(|c| *c = u64::MAX);
        Self { thresholds, last }
    }

    #[inline]
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.next_u64();
        self.thresholds
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.last)
    }
}

/// Codeword generators for one codebook key.
#[derive(Debug, Clone)]
pub(crate) struct Generators {
    pub key: u64,
    pub q: Vec<usize>,
    /// `users[i][q]` samples `p(x_i | q)`.
    users: Vec<Vec<Sampler>>,
    relay: Sampler,
}

impl Generators {
    pub fn new(config: &SimConfig, key: u64) -> Self {
        let n = config.block_length;
        let dist = &config.dist;
        let q_sampler = Sampler::new(&dist.q_weights);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(label_seed(key, TAG_Q, 0, 0));
        let q = (0..n).map(|_| q_sampler.draw(&mut rng)).collect();
        let users = (0..config.spec.num_users())
            .map(|i| {
                dist.user_conditionals
                    .iter()
                    .map(|laws| Sampler::new(&laws[i]))
                    .collect()
            })
            .collect();
        Self {
            key,
            q,
            users,
            relay: Sampler::new(&dist.relay_input),
        }
    }

    pub fn user_codeword(&self, user: usize, w: usize, attempt: u64, out: &mut [usize]) {
        let seed = label_seed(self.key, TAG_USER | user as u64, w as u128, attempt);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        for (x, &q) in out.iter_mut().zip(&self.q) {
            *x = self.users[user][q].draw(&mut rng);
        }
    }

    pub fn relay_codeword_by_index(&self, v: usize, attempt: u64, out: &mut [usize]) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(label_seed(
            self.key,
            TAG_RELAY_INDEX,
            v as u128,
            attempt,
        ));
        out.iter_mut().for_each(|x| *x = self.relay.draw(&mut rng));
    }

    /// The relay codeword attached to a received sequence, labelled by the
    /// sequence's mixed-radix rank.
    pub fn relay_codeword_by_sequence(&self, rank: u128, out: &mut [usize]) {
        let mut rng =
            Xoshiro256PlusPlus::seed_from_u64(label_seed(self.key, TAG_RELAY_SEQUENCE, rank, 0));
        out.iter_mut().for_each(|x| *x = self.relay.draw(&mut rng));
    }
}

/// Codewords of every user plus the relay, and the shared `q` sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub q_sequence: Vec<usize>,
    /// `user_codewords[i][w]`.
    pub user_codewords: Vec<Vec<Vec<usize>>>,
    /// `relay_codewords[v]`, one per distinct received sequence.
    pub relay_codewords: Vec<Vec<usize>>,
}

impl Codebook {
    pub fn block_length(&self) -> usize {
        self.q_sequence.len()
    }

    pub fn message_counts(&self) -> Vec<usize> {
        self.user_codewords.iter().map(Vec::len).collect()
    }
}

/// The bijection between the received sequences the codebooks can induce at
/// the relay and relay indices `0..V`, numbered in order of first appearance
/// while enumerating message tuples.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelayMap {
    forward: BTreeMap<Vec<usize>, usize>,
    inverse: Vec<Vec<usize>>,
}

impl RelayMap {
    pub fn len(&self) -> usize {
        self.inverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverse.is_empty()
    }

    pub fn index_of(&self, y0: &[usize]) -> Option<usize> {
        self.forward.get(y0).copied()
    }

    pub fn sequence(&self, v: usize) -> Option<&[usize]> {
        self.inverse.get(v).map(Vec::as_slice)
    }

    fn insert(&mut self, y0: &[usize]) -> usize {
        if let Some(&v) = self.forward.get(y0) {
            return v;
        }
        let v = self.inverse.len();
        self.forward.insert(y0.to_vec(), v);
        self.inverse.push(y0.to_vec());
        v
    }
}

/// Calls `f` with every message tuple having `fixed = Some((i, a))` pinned,
/// in mixed-radix order with user 1 slowest.
pub(crate) fn for_each_message_tuple(
    counts: &[usize],
    fixed: Option<(usize, usize)>,
    mut f: impl FnMut(&[usize]),
) {
    let mut w = vec![0; counts.len()];
    if let Some((i, a)) = fixed {
        w[i] = a;
    }
    loop {
        f(&w);
        let mut k = counts.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if fixed.is_some_and(|(i, _)| i == k) {
                continue;
            }
            w[k] += 1;
            if w[k] < counts[k] {
                break;
            }
            w[k] = 0;
        }
    }
}

/// `y_{0,t} = f*(x_{1,t}, .., x_{L,t})` for every position.
pub(crate) fn uplink_sequence<C: AsRef<[usize]>>(
    spec: &ChannelSpec,
    codewords: &[C],
    out: &mut [usize],
) {
    for (t, y) in out.iter_mut().enumerate() {
        let mut idx = 0;
        for (cw, &size) in codewords.iter().zip(&spec.user_alphabets) {
            idx = idx * size + cw.as_ref()[t];
        }
        *y = spec.uplink[idx];
    }
}

fn capacity(what: String, needed: f64, cap: f64) -> Error {
    Error::Capacity { what, needed, cap }
}

/// Checks that every decoder's search space is within [`CANDIDATE_CAP`].
pub(crate) fn check_search_spaces(counts: &[usize]) -> Result<()> {
    for i in 0..counts.len() {
        let others: f64 = counts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &m)| m as f64)
            .product();
        if others > CANDIDATE_CAP {
            return Err(capacity(
                format!(
                    "decoder of user {} (product of the other message counts)",
                    i + 1
                ),
                others,
                CANDIDATE_CAP,
            ));
        }
    }
    Ok(())
}

/// Draws user codebooks, redrawing duplicates when asked to.
pub(crate) fn draw_user_codebooks(
    config: &SimConfig,
    gens: &Generators,
    counts: &[usize],
) -> Result<Vec<Vec<Vec<usize>>>> {
    let n = config.block_length;
    counts
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let mut seen = HashSet::new();
            (0..m)
                .map(|w| {
                    let mut cw = vec![0; n];
                    for attempt in 0..MAX_REDRAWS {
                        gens.user_codeword(i, w, attempt, &mut cw);
                        if !config.distinct_codewords || seen.insert(cw.clone()) {
                            return Ok(cw);
                        }
                    }
                    Err(capacity(
                        format!(
                            "distinct codewords for user {} ({m} messages of length {n})",
                            i + 1
                        ),
                        m as f64,
                        seen.len() as f64,
                    ))
                })
                .collect()
        })
        .collect()
}

/// Generates the full codebook and relay map by enumerating every message
/// tuple. Fails with a capacity error when `prod_i M_i * n` exceeds the
/// enumeration cap.
pub fn generate_codebooks<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<(Codebook, RelayMap)> {
    config.validate()?;
    let gens = Generators::new(config, rng.random());
    build_explicit(config, &gens)
}

pub(crate) fn explicit_cells(config: &SimConfig, counts: &[usize]) -> f64 {
    counts.iter().map(|&m| m as f64).product::<f64>() * config.block_length as f64
}

pub(crate) fn build_explicit(
    config: &SimConfig,
    gens: &Generators,
) -> Result<(Codebook, RelayMap)> {
    let counts = config.message_counts()?;
    let cells = explicit_cells(config, &counts);
    if cells > ENUMERATION_CAP {
        return Err(capacity(
            "message tuples times block length".into(),
            cells,
            ENUMERATION_CAP,
        ));
    }
    let n = config.block_length;
    let users = draw_user_codebooks(config, gens, &counts)?;
    let mut map = RelayMap::default();
    let mut y0 = vec![0; n];
    let mut cws: Vec<&[usize]> = Vec::with_capacity(counts.len());
    for_each_message_tuple(&counts, None, |w| {
        cws.clear();
        cws.extend(w.iter().enumerate().map(|(i, &wi)| users[i][wi].as_slice()));
        uplink_sequence(&config.spec, &cws, &mut y0);
        map.insert(&y0);
    });
    let mut seen = HashSet::new();
    let mut relay = Vec::with_capacity(map.len());
    for v in 0..map.len() {
        let mut cw = vec![0; n];
        let mut ok = false;
        for attempt in 0..MAX_REDRAWS {
            gens.relay_codeword_by_index(v, attempt, &mut cw);
            if !config.distinct_codewords || seen.insert(cw.clone()) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(capacity(
                format!("distinct relay codewords of length {n}"),
                map.len() as f64,
                seen.len() as f64,
            ));
        }
        relay.push(cw);
    }
    let codebook = Codebook {
        q_sequence: gens.q.clone(),
        user_codewords: users,
        relay_codewords: relay,
    };
    Ok((codebook, map))
}

/// `D_i(a_i)`: relay indices reachable when user `user` (0-based) sends
/// `own`, sorted.
pub fn candidate_indices(
    spec: &ChannelSpec,
    codebook: &Codebook,
    map: &RelayMap,
    user: usize,
    own: usize,
) -> Vec<usize> {
    let counts = codebook.message_counts();
    let mut y0 = vec![0; codebook.block_length()];
    let mut out = Vec::new();
    let mut cws: Vec<&[usize]> = Vec::with_capacity(counts.len());
    for_each_message_tuple(&counts, Some((user, own)), |w| {
        cws.clear();
        cws.extend(
            w.iter()
                .enumerate()
                .map(|(i, &wi)| codebook.user_codewords[i][wi].as_slice()),
        );
        uplink_sequence(spec, &cws, &mut y0);
        out.push(map.index_of(&y0).expect("every induced sequence is mapped"));
    });
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::noiseless_marginals;
    use crate::region::InputDistribution;
    use rand_chacha::ChaCha8Rng;

    fn config(spec: ChannelSpec, rates: Vec<f64>, n: usize) -> SimConfig {
        let dist = InputDistribution::uniform(&spec);
        SimConfig::new(spec, dist, rates, n)
    }

    #[test]
    fn single_message_tuple() {
        let cfg = config(ChannelSpec::xor_noiseless(), vec![0.0, 0.0], 5);
        let (cb, map) = generate_codebooks(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(cb.relay_codewords.len(), 1);
        assert_eq!(candidate_indices(&cfg.spec, &cb, &map, 0, 0), vec![0]);
    }

    #[test]
    fn xor_with_distinct_binary_words() {
        // n = 1, two messages each: the codewords must be 0 and 1.
        let mut cfg = config(ChannelSpec::xor_noiseless(), vec![1.0, 1.0], 1);
        cfg.distinct_codewords = true;
        let (cb, map) = generate_codebooks(&cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(map.len(), 2);
        let mut induced: Vec<Vec<usize>> =
            (0..2).map(|v| map.sequence(v).unwrap().to_vec()).collect();
        induced.sort();
        assert_eq!(induced, vec![vec![0], vec![1]]);
        for a in 0..2 {
            assert_eq!(candidate_indices(&cfg.spec, &cb, &map, 0, a).len(), 2);
        }
    }

    #[test]
    fn pair_copy_with_distinct_words() {
        let spec = ChannelSpec::pair_copy(2, vec![2, 2], noiseless_marginals(2, 2)).unwrap();
        let mut cfg = config(spec, vec![0.5, 0.5], 2);
        cfg.distinct_codewords = true;
        let (cb, map) = generate_codebooks(&cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(map.len(), 4);
        for user in 0..2 {
            for a in 0..2 {
                assert_eq!(candidate_indices(&cfg.spec, &cb, &map, user, a).len(), 2);
            }
        }
    }

    #[test]
    fn relay_map_is_a_bijection() {
        let cfg = config(ChannelSpec::xor_noiseless(), vec![0.5, 0.5], 6);
        let (_, map) = generate_codebooks(&cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        for v in 0..map.len() {
            assert_eq!(map.index_of(map.sequence(v).unwrap()), Some(v));
        }
    }

    #[test]
    fn enumeration_cap() {
        let cfg = config(ChannelSpec::xor_noiseless(), vec![0.5, 0.5], 40);
        let err = generate_codebooks(&cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn tuple_enumeration_order() {
        let mut seen = Vec::new();
        for_each_message_tuple(&[2, 3], None, |w| seen.push(w.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 1]);
        seen.clear();
        for_each_message_tuple(&[2, 3, 2], Some((1, 2)), |w| seen.push(w.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 2, 0], vec![0, 2, 1], vec![1, 2, 0], vec![1, 2, 1]]
        );
    }

    #[test]
    fn sampler_follows_law() {
        let s = Sampler::new(&[0.2, 0.0, 0.8]);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(9);
        let mut counts = [0usize; 3];
        for _ in 0..100_000 {
            counts[s.draw(&mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 1e5 - 0.2).abs() < 0.005);
    }
}
