//! The time-shared uplink region as a convex hull of entropy vectors.
//!
//! `H(Y_0 | X_{U^c})` is not concave over product input laws, so the hull is
//! built from samples: every deterministic corner, the uniform law, random
//! Dirichlet draws, and points refined by coordinate ascent on a weighted sum
//! of entropies. Mixing sampled points realizes the time-sharing variable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{for_each_tuple, ChannelSpec};
use crate::error::{usage, Result};
use crate::region::lp::dominated_by_mixture;
use crate::region::slack::UplinkEvaluator;

/// Sampling and refinement settings for [`UplinkHull::build`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullConfig {
    /// Number of sampled product laws, corners and uniform included.
    pub budget: usize,
    /// Number of scalarization directions refined by coordinate ascent.
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for HullConfig {
    fn default() -> Self {
        Self {
            budget: 2000,
            refine_steps: 48,
            seed: 0x5eed,
        }
    }
}

/// An entropy vector with the product law that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPoint {
    /// `H(Y_0 | X_{U^c})` per strict subset, in mask order.
    pub entropies: Vec<f64>,
    /// `p(x_i)` per user.
    pub inputs: Vec<Vec<f64>>,
}

/// Extreme points of the sampled uplink entropy region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UplinkHull {
    pub points: Vec<HullPoint>,
    /// Product laws evaluated before pruning.
    pub evaluated: usize,
}

const PRUNE_TOLERANCE: f64 = 1e-12;

impl UplinkHull {
    pub fn build(spec: &ChannelSpec, config: HullConfig) -> Result<Self> {
        let corners = spec.input_tuples();
        if config.budget < corners + 1 {
            return usage(format!(
                "sampling budget {} is below the {} corner points plus the uniform law",
                config.budget, corners
            ));
        }
        let eval = UplinkEvaluator::new(spec);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut laws: Vec<Vec<Vec<f64>>> = Vec::with_capacity(config.budget);
        for_each_tuple(&spec.user_alphabets, |x| {
            laws.push(
                x.iter()
                    .zip(&spec.user_alphabets)
                    .map(|(&s, &size)| (0..size).map(|k| if k == s { 1.0 } else { 0.0 }).collect())
                    .collect(),
            );
        });
        laws.push(
            spec.user_alphabets
                .iter()
                .map(|&s| vec![1.0 / s as f64; s])
                .collect(),
        );
        while laws.len() < config.budget {
            laws.push(
                spec.user_alphabets
                    .iter()
                    .map(|&s| dirichlet(&mut rng, s))
                    .collect(),
            );
        }
        let mut points: Vec<HullPoint> = laws
            .into_iter()
            .map(|inputs| HullPoint {
                entropies: eval.evaluate(&inputs),
                inputs,
            })
            .collect();

        let dim = eval.dimension();
        for step in 0..config.refine_steps {
            let weights = direction(step, dim, &mut rng);
            let score = |h: &[f64]| h.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
            let start = points
                .iter()
                .max_by(|a, b| score(&a.entropies).total_cmp(&score(&b.entropies)))
                .expect("budget is positive")
                .inputs
                .clone();
            let refined = coordinate_ascent(&eval, start, &weights);
            points.push(HullPoint {
                entropies: eval.evaluate(&refined),
                inputs: refined,
            });
        }
        let evaluated = points.len();
        Ok(Self {
            points: prune(points),
            evaluated,
        })
    }

    pub fn entropy_vectors(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.entropies.clone()).collect()
    }
}

/// Dirichlet(1, .., 1) as normalized unit exponentials.
fn dirichlet<R: Rng>(rng: &mut R, size: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..size).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Unit vectors first, then all-ones, then random positive weights.
fn direction<R: Rng>(step: usize, dim: usize, rng: &mut R) -> Vec<f64> {
    if step < dim {
        (0..dim)
            .map(|u| if u == step { 1.0 } else { 0.0 })
            .collect()
    } else if step == dim {
        vec![1.0; dim]
    } else {
        dirichlet(rng, dim)
    }
}

/// Maximizes `weights . h(p)` by moving mass between pairs of symbols of one
/// user at a time, with a golden-section line search per pair.
fn coordinate_ascent(
    eval: &UplinkEvaluator,
    mut laws: Vec<Vec<f64>>,
    weights: &[f64],
) -> Vec<Vec<f64>> {
    let score = |laws: &[Vec<f64>]| -> f64 {
        eval.evaluate(laws)
            .iter()
            .zip(weights)
            .map(|(a, b)| a * b)
            .sum()
    };
    let mut best = score(&laws);
    for _sweep in 0..8 {
        let before = best;
        for i in 0..laws.len() {
            let size = laws[i].len();
            for a in 0..size {
                for b in a + 1..size {
                    let pair = laws[i][a] + laws[i][b];
                    if pair <= 0.0 {
                        continue;
                    }
                    let at = |s: f64, laws: &mut Vec<Vec<f64>>| {
                        laws[i][a] = s * pair;
                        laws[i][b] = (1.0 - s) * pair;
                        score(laws)
                    };
                    let original = laws[i][a] / pair;
                    let (s, value) = golden_section(|s| at(s, &mut laws), original);
                    if value > best {
                        best = value;
                        at(s, &mut laws);
                    } else {
                        at(original, &mut laws);
                    }
                }
            }
        }
        if best - before < 1e-12 {
            break;
        }
    }
    laws
}

/// Maximizes `f` on `[0, 1]`, also trying the endpoints and `current`.
fn golden_section(mut f: impl FnMut(f64) -> f64, current: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = f(x1);
        }
    }
    [
        (x1, f1),
        (x2, f2),
        (0.0, f(0.0)),
        (1.0, f(1.0)),
        (current, f(current)),
    ]
    .into_iter()
    .max_by(|a, b| a.1.total_cmp(&b.1))
    .expect("non-empty")
}

/// Drops points dominated by another point, then points dominated by a
/// mixture of the rest. Survivors are sorted so the result does not depend on
/// sampling order.
fn prune(mut points: Vec<HullPoint>) -> Vec<HullPoint> {
    points.sort_by(|a, b| {
        let sa: f64 = a.entropies.iter().sum();
        let sb: f64 = b.entropies.iter().sum();
        sb.total_cmp(&sa)
            .then_with(|| cmp_vec(&a.entropies, &b.entropies))
    });
    let mut kept: Vec<HullPoint> = Vec::new();
    for p in points {
        let dominated = kept.iter().any(|k| {
            k.entropies
                .iter()
                .zip(&p.entropies)
                .all(|(a, b)| *a >= b - PRUNE_TOLERANCE)
        });
        if !dominated {
            kept.push(p);
        }
    }
    let mut k = 0;
    while k < kept.len() && kept.len() > 1 {
        let others: Vec<&Vec<f64>> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, p)| &p.entropies)
            .collect();
        if dominated_by_mixture(&others, &kept[k].entropies, PRUNE_TOLERANCE) {
            kept.remove(k);
        } else {
            k += 1;
        }
    }
    kept.sort_by(|a, b| cmp_vec(&a.entropies, &b.entropies));
    kept
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
