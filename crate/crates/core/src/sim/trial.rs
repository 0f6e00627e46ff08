//! End-to-end trials: messages, uplink, relay mapping, downlink noise and
//! both decoding steps for every user.
//!
//! The decoders are evaluated event by event: the transmitted candidate is
//! tested first, then the others are scanned until one passes. This yields
//! exactly the error events of the full decoders while stopping early.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::code::{
    build_explicit, check_search_spaces, draw_user_codebooks, explicit_cells,
    for_each_message_tuple, uplink_sequence, Codebook, Generators, RelayMap,
};
use crate::sim::config::SimConfig;
use crate::sim::decode::{
    step1_cells, step1_reference, step2_cells, step2_reference, TypicalityTest,
};
use crate::ENUMERATION_CAP;

/// Error events seen by one user in one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserEvents {
    /// The transmitted relay index fails the step-1 test.
    pub step1_miss: bool,
    /// Another index in the candidate set passes the step-1 test.
    pub step1_false: bool,
    /// The transmitted message tuple fails the step-2 test.
    pub step2_atypical: bool,
    /// Another consistent message tuple passes the step-2 test.
    pub step2_confusion: bool,
}

impl UserEvents {
    /// Whether the user's estimates are wrong or missing.
    pub fn error(&self) -> bool {
        self.step1_miss || self.step1_false || self.step2_atypical || self.step2_confusion
    }

    fn merge(&mut self, other: UserEvents) {
        self.step1_miss |= other.step1_miss;
        self.step1_false |= other.step1_false;
        self.step2_atypical |= other.step2_atypical;
        self.step2_confusion |= other.step2_confusion;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub users: Vec<UserEvents>,
    /// Candidates examined by all decoders, a measure of work.
    pub candidates_scanned: u64,
}

impl TrialOutcome {
    /// Whether any user decoded wrongly.
    pub fn error(&self) -> bool {
        self.users.iter().any(UserEvents::error)
    }
}

enum Relay {
    Explicit {
        codebook: Codebook,
        map: RelayMap,
    },
    /// Codewords keyed by the rank of the received sequence.
    Keyed,
}

/// One realization of the codebooks plus the decoders' typicality tests.
pub(crate) struct Engine<'a> {
    config: &'a SimConfig,
    counts: Vec<usize>,
    gens: Generators,
    users: Option<Vec<Vec<Vec<usize>>>>,
    relay: Relay,
    step1: Vec<TypicalityTest>,
    step2: TypicalityTest,
}

/// What happened in one uplink/downlink block pair.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct BlockRecord {
    pub messages: Vec<usize>,
    pub y0: Vec<usize>,
    pub received: Vec<Vec<usize>>,
    pub events: Vec<UserEvents>,
    pub scanned: u64,
}

impl<'a> Engine<'a> {
    pub fn new(config: &'a SimConfig, key: u64) -> Result<Self> {
        let counts = config.message_counts()?;
        let gens = Generators::new(config, key);
        let spec = &config.spec;
        let step1 = (0..spec.num_users())
            .map(|i| {
                TypicalityTest::new(
                    &step1_reference(spec, &config.dist, i)?,
                    config.typicality,
                    config.epsilon,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let step2 = TypicalityTest::new(
            &step2_reference(spec, &config.dist)?,
            config.typicality,
            config.epsilon,
        )?;
        let n = config.block_length as f64;
        let (users, relay) = if explicit_cells(config, &counts) <= ENUMERATION_CAP {
            let (codebook, map) = build_explicit(config, &gens)?;
            (
                Some(codebook.user_codewords.clone()),
                Relay::Explicit { codebook, map },
            )
        } else {
            check_search_spaces(&counts)?;
            let bits = n * (spec.relay_output_size as f64).log2();
            if bits > 128.0 {
                return Err(Error::Capacity {
                    what: "relay sequence label (n log2 |Y_0| bits)".into(),
                    needed: bits,
                    cap: 128.0,
                });
            }
            let stored = counts.iter().map(|&m| m as f64).sum::<f64>() * n;
            let users = if stored <= ENUMERATION_CAP {
                Some(draw_user_codebooks(config, &gens, &counts)?)
            } else if config.distinct_codewords {
                return Err(Error::Capacity {
                    what: "stored user codebooks (needed for distinct codewords)".into(),
                    needed: stored,
                    cap: ENUMERATION_CAP,
                });
            } else {
                None
            };
            (users, Relay::Keyed)
        };
        Ok(Self {
            config,
            counts,
            gens,
            users,
            relay,
            step1,
            step2,
        })
    }

    #[cfg(test)]
    pub fn explicit(&self) -> Option<(&Codebook, &RelayMap)> {
        match &self.relay {
            Relay::Explicit { codebook, map } => Some((codebook, map)),
            Relay::Keyed => None,
        }
    }

    fn user_codeword(&self, user: usize, w: usize, buf: &mut [usize]) {
        match &self.users {
            Some(books) => buf.copy_from_slice(&books[user][w]),
            None => self.gens.user_codeword(user, w, 0, buf),
        }
    }

    fn relay_codeword(&self, y0: &[usize], buf: &mut [usize]) {
        match &self.relay {
            Relay::Explicit { codebook, map } => {
                let v = map.index_of(y0).expect("induced sequence");
                buf.copy_from_slice(&codebook.relay_codewords[v]);
            }
            Relay::Keyed => {
                let size = self.config.spec.relay_output_size as u128;
                let rank = y0
                    .iter()
                    .rev()
                    .fold(0u128, |acc, &y| acc * size + y as u128);
                self.gens.relay_codeword_by_sequence(rank, buf);
            }
        }
    }

    /// Fills `bufs[j]` with user `j`'s codeword for tuple `w`, regenerating
    /// only the entries that changed since `last`.
    fn load_tuple(&self, w: &[usize], last: &mut [usize], bufs: &mut [Vec<usize>]) {
        for (j, (&wj, lj)) in w.iter().zip(last.iter_mut()).enumerate() {
            if *lj != wj {
                self.user_codeword(j, wj, &mut bufs[j]);
                *lj = wj;
            }
        }
    }

    pub fn run_block<R: Rng>(&self, rng: &mut R) -> BlockRecord {
        let spec = &self.config.spec;
        let n = self.config.block_length;
        let l = spec.num_users();
        let messages: Vec<usize> = self
            .counts
            .iter()
            .map(|&m| rng.random_range(0..m))
            .collect();
        let mut truth = vec![vec![0; n]; l];
        for (j, &w) in messages.iter().enumerate() {
            self.user_codeword(j, w, &mut truth[j]);
        }
        let mut y0 = vec![0; n];
        uplink_sequence(spec, &truth, &mut y0);
        let mut x0 = vec![0; n];
        self.relay_codeword(&y0, &mut x0);
        let mut received = vec![vec![0; n]; l];
        let mut symbol = vec![0; l];
        for t in 0..n {
            spec.sample_downlink_into(x0[t], rng, &mut symbol);
            for (r, &y) in received.iter_mut().zip(&symbol) {
                r[t] = y;
            }
        }
        let mut scanned = 0;
        let events = (0..l)
            .map(|i| self.decode_user(i, &messages, &truth, &y0, &x0, &received[i], &mut scanned))
            .collect();
        BlockRecord {
            messages,
            y0,
            received,
            events,
            scanned,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn decode_user(
        &self,
        i: usize,
        messages: &[usize],
        truth: &[Vec<usize>],
        y0: &[usize],
        x0: &[usize],
        received: &[usize],
        scanned: &mut u64,
    ) -> UserEvents {
        let spec = &self.config.spec;
        let n = self.config.block_length;
        let width = spec.user_output_sizes[i];
        let mut events = UserEvents::default();
        let mut cells = Vec::with_capacity(n);

        // Step 1.
        step1_cells(x0, received, width, &mut cells);
        let truth_typical = self.step1[i].accepts_cells(&cells);
        let mut bufs = truth.to_vec();
        let mut last = messages.to_vec();
        let mut image = vec![0; n];
        let mut relay_cw = vec![0; n];
        let mut has_other = false;
        let mut wrong_typical = false;
        let own = Some((i, messages[i]));
        let mut stop = false;
        for_each_message_tuple(&self.counts, own, |w| {
            if stop {
                return;
            }
            self.load_tuple(w, &mut last, &mut bufs);
            uplink_sequence(spec, &bufs, &mut image);
            if image == y0 {
                return;
            }
            *scanned += 1;
            has_other = true;
            self.relay_codeword(&image, &mut relay_cw);
            step1_cells(&relay_cw, received, width, &mut cells);
            if self.step1[i].accepts_cells(&cells) {
                wrong_typical = true;
                stop = true;
            }
        });
        if has_other {
            events.step1_miss = !truth_typical;
            events.step1_false = wrong_typical;
        }
        if events.error() {
            return events;
        }

        // Step 2.
        let search: f64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &m)| m as f64)
            .product();
        if search <= 1.0 {
            return events;
        }
        let q = &self.gens.q;
        step2_cells(spec, q, truth, y0, &mut cells);
        events.step2_atypical = !self.step2.accepts_cells(&cells);
        let mut stop = false;
        for_each_message_tuple(&self.counts, own, |w| {
            if stop || w == messages {
                return;
            }
            *scanned += 1;
            self.load_tuple(w, &mut last, &mut bufs);
            let consistent = (0..n).all(|t| {
                let idx = spec
                    .user_alphabets
                    .iter()
                    .zip(&bufs)
                    .fold(0, |idx, (&size, cw)| idx * size + cw[t]);
                spec.uplink[idx] == y0[t]
            });
            if !consistent {
                return;
            }
            step2_cells(spec, q, &bufs, y0, &mut cells);
            if self.step2.accepts_cells(&cells) {
                events.step2_confusion = true;
                stop = true;
            }
        });
        events
    }
}

const SHARED_KEY_SALT: u64 = 0x636f_6465_626f_6f6b;

fn trial_rng(config: &SimConfig, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_with<R: Rng>(
    config: &SimConfig,
    engine: &Engine<'_>,
    trial: usize,
    rng: &mut R,
) -> TrialOutcome {
    let mut users = vec![UserEvents::default(); config.spec.num_users()];
    let mut scanned = 0;
    for _ in 0..config.block_pairs() {
        let record = engine.run_block(rng);
        for (acc, e) in users.iter_mut().zip(record.events) {
            acc.merge(e);
        }
        scanned += record.scanned;
    }
    TrialOutcome {
        trial,
        users,
        candidates_scanned: scanned,
    }
}

/// Runs trial number `trial`; the outcome depends only on the configuration
/// and the trial index.
pub fn run_trial(config: &SimConfig, trial: usize) -> Result<TrialOutcome> {
    config.validate()?;
    let mut rng = trial_rng(config, trial);
    if config.share_codebook {
        let engine = Engine::new(config, config.seed ^ SHARED_KEY_SALT)?;
        return Ok(run_with(config, &engine, trial, &mut rng));
    }
    let key = rng.random();
    let engine = Engine::new(config, key)?;
    Ok(run_with(config, &engine, trial, &mut rng))
}

/// Runs every trial of `config` in order.
pub fn run_trials(config: &SimConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    if config.share_codebook {
        let engine = Engine::new(config, config.seed ^ SHARED_KEY_SALT)?;
        return Ok((0..config.trials)
            .map(|t| run_with(config, &engine, t, &mut trial_rng(config, t)))
            .collect());
    }
    (0..config.trials).map(|t| run_trial(config, t)).collect()
}
