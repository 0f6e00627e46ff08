use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{for_each_tuple, ChannelSpec};
use crate::error::{invalid, usage, Result};
use crate::info::{channel_mutual_information, entropy_of_mass, MASS_TOLERANCE};
use crate::{strict_subsets, subset_label};

/// A cut of the capacity region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "side", rename_all = "lowercase")]
pub enum Cut {
    /// `sum_{j != user} R_j <= I(X_0; Y_user)` (0-based user).
    Downlink { user: usize },
    /// `sum_{j in U} R_j <= H(Y_0 | X_{U^c}, Q)`, `U` as a bitmask.
    Uplink { mask: usize },
}

impl Cut {
    /// Ordering key used to pick one cut among equally binding ones: the user
    /// a cut is named after (receiving user, or lowest member of `U`), with
    /// downlink cuts first on ties.
    pub(crate) fn tie_key(&self) -> (usize, u8) {
        match *self {
            Cut::Downlink { user } => (user, 0),
            Cut::Uplink { mask } => (mask.trailing_zeros() as usize, 1),
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cut::Downlink { user } => write!(f, "downlink i={}", user + 1),
            Cut::Uplink { mask } => write!(f, "uplink U={}", subset_label(*mask)),
        }
    }
}

/// Rate sums `sum_{j in U} R_j` for every non-empty strict subset, in mask order.
pub fn rate_sums(rates: &[f64]) -> Vec<f64> {
    strict_subsets(rates.len())
        .map(|mask| {
            rates
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, r)| r)
                .sum()
        })
        .collect()
}

pub(crate) fn check_rates(spec: &ChannelSpec, rates: &[f64]) -> Result<()> {
    if rates.len() != spec.num_users() {
        return usage(format!(
            "{} rates given for {} users",
            rates.len(),
            spec.num_users()
        ));
    }
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return usage(format!("rate {r} is not a non-negative number"));
    }
    Ok(())
}

pub(crate) fn check_pmf(what: &str, p: &[f64], size: usize) -> Result<()> {
    if p.len() != size {
        return usage(format!("{what} has {} entries, expected {size}", p.len()));
    }
    if p.iter().any(|x| !(*x >= 0.0)) {
        return invalid(format!("{what} has a negative entry"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return invalid(format!("{what} sums to {total}"));
    }
    Ok(())
}

/// Precomputed grouping of input tuples for every strict subset `U`, so that
/// `H(Y_0 | X_{U^c})` can be evaluated repeatedly for product input laws.
#[derive(Debug, Clone)]
pub(crate) struct UplinkEvaluator {
    alphabets: Vec<usize>,
    outputs: Vec<usize>,
    relay_output_size: usize,
    /// Per subset: number of `x_{U^c}` groups and each tuple's group.
    groups: Vec<(usize, Vec<u32>)>,
}

impl UplinkEvaluator {
    pub fn new(spec: &ChannelSpec) -> Self {
        let l = spec.num_users();
        let mut tuples = Vec::with_capacity(spec.input_tuples());
        for_each_tuple(&spec.user_alphabets, |x| tuples.push(x.to_vec()));
        let groups = strict_subsets(l)
            .map(|mask| {
                let complement: Vec<usize> = (0..l).filter(|j| mask >> j & 1 == 0).collect();
                let count: usize = complement.iter().map(|&j| spec.user_alphabets[j]).product();
                let keys = tuples
                    .iter()
                    .map(|x| {
                        complement
                            .iter()
                            .fold(0usize, |acc, &j| acc * spec.user_alphabets[j] + x[j])
                            as u32
                    })
                    .collect();
                (count, keys)
            })
            .collect();
        Self {
            alphabets: spec.user_alphabets.clone(),
            outputs: spec.uplink.clone(),
            relay_output_size: spec.relay_output_size,
            groups,
        }
    }

    pub fn dimension(&self) -> usize {
        self.groups.len()
    }

    /// `H(Y_0 | X_{U^c})` for every strict subset, users independent with the
    /// given marginals. Inputs are assumed valid.
    pub fn evaluate(&self, product: &[Vec<f64>]) -> Vec<f64> {
        let mut probs = Vec::with_capacity(self.outputs.len());
        for_each_tuple(&self.alphabets, |x| {
            probs.push(x.iter().zip(product).map(|(&s, p)| p[s]).product::<f64>());
        });
        let mut buf = Vec::new();
        let mut group_mass = Vec::new();
        self.groups
            .iter()
            .map(|(count, keys)| {
                buf.clear();
                buf.resize(count * self.relay_output_size, 0.0);
                group_mass.clear();
                group_mass.resize(*count, 0.0);
                for ((&key, &y), &p) in keys.iter().zip(&self.outputs).zip(&probs) {
                    buf[key as usize * self.relay_output_size + y] += p;
                    group_mass[key as usize] += p;
                }
                (entropy_of_mass(&buf) - entropy_of_mass(&group_mass)).max(0.0)
            })
            .collect()
    }
}

/// `H(Y_0 | X_{U^c})` for every non-empty strict subset `U` (mask order) when
/// the users are independent with marginals `product`.
pub fn uplink_entropy_vector(spec: &ChannelSpec, product: &[Vec<f64>]) -> Result<Vec<f64>> {
    if product.len() != spec.num_users() {
        return usage(format!(
            "{} input laws for {} users",
            product.len(),
            spec.num_users()
        ));
    }
    for (i, (p, &size)) in product.iter().zip(&spec.user_alphabets).enumerate() {
        check_pmf(&format!("p(x_{})", i + 1), p, size)?;
    }
    Ok(UplinkEvaluator::new(spec).evaluate(product))
}

/// `I(X_0; Y_i)` for every user under relay input law `relay_input`.
pub fn downlink_mi_vector(spec: &ChannelSpec, relay_input: &[f64]) -> Result<Vec<f64>> {
    check_pmf("p(x_0)", relay_input, spec.relay_input_size)?;
    (0..spec.num_users())
        .map(|i| {
            Ok(channel_mutual_information(
                relay_input,
                &spec.downlink_marginal(i)?,
            ))
        })
        .collect()
}

/// A full input law `p(q) prod_i p(x_i|q) p(x_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    /// `p(q)`.
    pub q_weights: Vec<f64>,
    /// `user_conditionals[q][i]` is `p(x_i | q)`.
    pub user_conditionals: Vec<Vec<Vec<f64>>>,
    /// `p(x_0)`.
    pub relay_input: Vec<f64>,
}

impl InputDistribution {
    /// Single time-sharing state, every variable uniform.
    pub fn uniform(spec: &ChannelSpec) -> Self {
        Self {
            q_weights: vec![1.0],
            user_conditionals: vec![spec
                .user_alphabets
                .iter()
                .map(|&s| vec![1.0 / s as f64; s])
                .collect()],
            relay_input: vec![1.0 / spec.relay_input_size as f64; spec.relay_input_size],
        }
    }

    pub fn num_states(&self) -> usize {
        self.q_weights.len()
    }

    pub fn check(&self, spec: &ChannelSpec) -> Result<()> {
        let l = spec.num_users();
        if self.q_weights.is_empty() || self.q_weights.len() > l + 1 {
            return invalid(format!(
                "|Q| = {} outside 1..={}",
                self.q_weights.len(),
                l + 1
            ));
        }
        check_pmf("p(q)", &self.q_weights, self.q_weights.len())?;
        if self.user_conditionals.len() != self.q_weights.len() {
            return usage("one set of user conditionals is needed per time-sharing state");
        }
        for (q, laws) in self.user_conditionals.iter().enumerate() {
            if laws.len() != l {
                return usage(format!(
                    "state {q} has {} user laws for {l} users",
                    laws.len()
                ));
            }
            for (i, (p, &size)) in laws.iter().zip(&spec.user_alphabets).enumerate() {
                check_pmf(&format!("p(x_{}|q={q})", i + 1), p, size)?;
            }
        }
        check_pmf("p(x_0)", &self.relay_input, spec.relay_input_size)
    }
}

/// Slack of every cut for a rate tuple under a fixed input law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSlack {
    /// `I(X_0;Y_i) - sum_{j != i} R_j` per user.
    pub downlink: Vec<f64>,
    /// `(mask, H(Y_0|X_{U^c},Q) - sum_{j in U} R_j)` per strict subset.
    pub uplink: Vec<(usize, f64)>,
}

impl ConstraintSlack {
    pub fn cuts(&self) -> impl Iterator<Item = (Cut, f64)> + '_ {
        self.downlink
            .iter()
            .enumerate()
            .map(|(user, &s)| (Cut::Downlink { user }, s))
            .chain(
                self.uplink
                    .iter()
                    .map(|&(mask, s)| (Cut::Uplink { mask }, s)),
            )
    }

    /// Smallest slack and the cut attaining it.
    pub fn min(&self) -> (Cut, f64) {
        pick_binding(self.cuts(), 0.0).expect("at least one cut")
    }

    pub fn feasible(&self, tolerance: f64) -> bool {
        self.cuts().all(|(_, s)| s >= -tolerance)
    }
}

/// Among `cuts`, those within `tie` of the smallest slack; returns the one
/// with the smallest tie key.
pub(crate) fn pick_binding(cuts: impl Iterator<Item = (Cut, f64)>, tie: f64) -> Option<(Cut, f64)> {
    let all: Vec<(Cut, f64)> = cuts.collect();
    let lowest = all.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    all.into_iter()
        .filter(|c| c.1 <= lowest + tie)
        .min_by_key(|c| c.0.tie_key())
}

/// Evaluates every cut of the region for `rates` under `dist`.
pub fn constraint_slacks(
    spec: &ChannelSpec,
    rates: &[f64],
    dist: &InputDistribution,
) -> Result<ConstraintSlack> {
    check_rates(spec, rates)?;
    dist.check(spec)?;
    let total: f64 = rates.iter().sum();
    let downlink = downlink_mi_vector(spec, &dist.relay_input)?
        .into_iter()
        .zip(rates)
        .map(|(mi, r)| mi - (total - r))
        .collect();
    let evaluator = UplinkEvaluator::new(spec);
    let mut averaged = vec![0.0; evaluator.dimension()];
    for (w, laws) in dist.q_weights.iter().zip(&dist.user_conditionals) {
        for (acc, h) in averaged.iter_mut().zip(evaluator.evaluate(laws)) {
            *acc += w * h;
        }
    }
    let uplink = strict_subsets(spec.num_users())
        .zip(averaged.into_iter().zip(rate_sums(rates)))
        .map(|(mask, (h, s))| (mask, h - s))
        .collect();
    Ok(ConstraintSlack { downlink, uplink })
}
