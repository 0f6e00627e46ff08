//! Relay input optimization.
//!
//! The downlink cuts only involve `p(x_0)`, and the objective
//! `min_i [I(X_0;Y_i) - sum_{j != i} R_j]` is concave on the simplex. It is
//! maximized by entropic mirror ascent on a soft-min smoothing whose
//! temperature is lowered in stages; the Frank-Wolfe gap of the smoothed
//! objective is the stopping test, and the smoothing error is at most
//! `ln(L) / beta`.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{usage, Result};
use crate::info::channel_mutual_information;
use crate::region::slack::check_rates;

/// Default stopping tolerance of the relay-input optimizer.
pub const DOWNLINK_TOLERANCE: f64 = 1e-6;
/// Default iteration budget of the relay-input optimizer.
pub const DOWNLINK_BUDGET: usize = 10_000;

const TEMPERATURES: [f64; 8] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownlinkOptimum {
    pub relay_input: Vec<f64>,
    /// `min_i` of the per-user slacks at `relay_input`.
    pub min_slack: f64,
    /// `I(X_0;Y_i) - sum_{j != i} R_j` at `relay_input`.
    pub slacks: Vec<f64>,
    pub iterations: usize,
    /// False when the budget ran out before the gap fell below tolerance.
    pub converged: bool,
}

/// Maximizes `min_i [I(p; W_i) - offsets[i]]` over input laws `p`.
pub(crate) fn maximize_min_mi(
    channels: &[Vec<Vec<f64>>],
    offsets: &[f64],
    tolerance: f64,
    budget: usize,
) -> DownlinkOptimum {
    let m = channels[0].len();
    let objective = |p: &[f64]| -> Vec<f64> {
        channels
            .iter()
            .zip(offsets)
            .map(|(w, o)| channel_mutual_information(p, w) - o)
            .collect()
    };
    let mut p = vec![1.0 / m as f64; m];
    let mut best_p = p.clone();
    let mut best_vals = objective(&p);
    let mut best = best_vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut iterations = 0;
    let mut converged = m == 1;
    if m == 1 {
        return finish(best_p, best_vals, 0, true);
    }

    let single = channels.len() == 1;
    let temperatures: &[f64] = if single { &[1.0] } else { &TEMPERATURES };
    let mut grads = vec![vec![0.0; m]; channels.len()];
    let mut g = vec![0.0; m];
    let mut candidate = vec![0.0; m];
    for (stage, &beta) in temperatures.iter().enumerate() {
        let last = stage + 1 == temperatures.len();
        let stage_tol = if last { tolerance } else { tolerance * 10.0 };
        let mut eta = 1.0;
        let mut smooth = smoothed(&objective(&p), beta, single);
        converged = false;
        while iterations < budget {
            iterations += 1;
            let vals = objective(&p);
            let weights = softmin_weights(&vals, beta, single);
            for (grad, w) in grads.iter_mut().zip(channels) {
                mi_gradient(&p, w, grad);
            }
            g.iter_mut().for_each(|x| *x = 0.0);
            for (grad, &pi) in grads.iter().zip(&weights) {
                for (gx, dx) in g.iter_mut().zip(grad) {
                    *gx += pi * dx;
                }
            }
            let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
            if gmax - mean <= stage_tol {
                converged = true;
                break;
            }
            // Backtracking mirror step.
            let mut accepted = false;
            while eta > 1e-15 {
                let mut z = 0.0;
                for ((c, &px), &gx) in candidate.iter_mut().zip(&p).zip(&g) {
                    *c = px * (eta * (gx - gmax)).exp();
                    z += *c;
                }
                candidate.iter_mut().for_each(|c| *c /= z);
                let value = smoothed(&objective(&candidate), beta, single);
                if value > smooth {
                    smooth = value;
                    p.copy_from_slice(&candidate);
                    accepted = true;
                    eta *= 2.0;
                    break;
                }
                eta *= 0.5;
            }
            let vals = objective(&p);
            let current = vals.iter().copied().fold(f64::INFINITY, f64::min);
            if current > best {
                best = current;
                best_vals = vals;
                best_p.copy_from_slice(&p);
            }
            if !accepted {
                // No ascent direction at machine precision.
                converged = true;
                break;
            }
        }
        if iterations >= budget {
            break;
        }
    }
    finish(best_p, best_vals, iterations, converged)
}

fn finish(
    relay_input: Vec<f64>,
    slacks: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> DownlinkOptimum {
    let min_slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    DownlinkOptimum {
        relay_input,
        min_slack,
        slacks,
        iterations,
        converged,
    }
}

fn smoothed(vals: &[f64], beta: f64, single: bool) -> f64 {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if single {
        return lo;
    }
    let s: f64 = vals.iter().map(|v| (-beta * (v - lo)).exp()).sum();
    lo - s.ln() / beta
}

fn softmin_weights(vals: &[f64], beta: f64, single: bool) -> Vec<f64> {
    if single {
        return vec![1.0];
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = vals.iter().map(|v| (-beta * (v - lo)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// `dI/dp(x) = D(W(.|x) || q) - log2(e)`; the constant is dropped since the
/// mirror step is invariant to it.
fn mi_gradient(p: &[f64], rows: &[Vec<f64>], out: &mut [f64]) {
    let width = rows[0].len();
    let mut q = vec![0.0; width];
    for (px, row) in p.iter().zip(rows) {
        for (qy, w) in q.iter_mut().zip(row) {
            *qy += px * w;
        }
    }
    for (gx, row) in out.iter_mut().zip(rows) {
        *gx = row
            .iter()
            .zip(&q)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, qy)| w * (w / qy.max(1e-300)).log2())
            .sum();
    }
}

/// Maximizes the minimum downlink slack `I(X_0;Y_i) - sum_{j != i} R_j` over
/// relay input laws.
pub fn optimize_downlink(
    spec: &ChannelSpec,
    rates: &[f64],
    tolerance: f64,
    budget: usize,
) -> Result<DownlinkOptimum> {
    check_rates(spec, rates)?;
    if !(tolerance > 0.0) {
        return usage("tolerance must be positive");
    }
    let channels = (0..spec.num_users())
        .map(|i| spec.downlink_marginal(i))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = rates.iter().sum();
    let offsets: Vec<f64> = rates.iter().map(|r| total - r).collect();
    Ok(maximize_min_mi(&channels, &offsets, tolerance, budget))
}

/// `max_{p(x_0)} I(X_0; Y_user)`.
pub fn downlink_capacity(spec: &ChannelSpec, user: usize) -> Result<f64> {
    let rows = spec.downlink_marginal(user)?;
    Ok(maximize_min_mi(&[rows], &[0.0], DOWNLINK_TOLERANCE * 1e-3, DOWNLINK_BUDGET).min_slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bsc_marginals, Downlink};
    use crate::info::h2;

    /// Simplex grid oracle for |X_0| <= 3.
    fn grid_oracle(channels: &[Vec<Vec<f64>>], offsets: &[f64], k: usize) -> f64 {
        let m = channels[0].len();
        let eval = |p: &[f64]| {
            channels
                .iter()
                .zip(offsets)
                .map(|(w, o)| channel_mutual_information(p, w) - o)
                .fold(f64::INFINITY, f64::min)
        };
        let mut best = f64::NEG_INFINITY;
        match m {
            1 => best = eval(&[1.0]),
            2 => {
                for a in 0..=k {
                    let x = a as f64 / k as f64;
                    best = best.max(eval(&[x, 1.0 - x]));
                }
            }
            3 => {
                for a in 0..=k {
                    for b in 0..=k - a {
                        let (x, y) = (a as f64 / k as f64, b as f64 / k as f64);
                        best = best.max(eval(&[x, y, (1.0 - x - y).max(0.0)]));
                    }
                }
            }
            _ => unreachable!(),
        }
        best
    }

    #[test]
    fn noiseless_binary() {
        let spec = ChannelSpec::xor_noiseless();
        let opt = optimize_downlink(&spec, &[0.5, 0.5], 1e-6, 10_000).unwrap();
        assert!((opt.min_slack - 0.5).abs() < 1e-9);
        assert!((opt.relay_input[0] - 0.5).abs() < 1e-6);
        assert!(opt.converged);
        let rows = spec.downlink_marginal(0).unwrap();
        let grid = grid_oracle(&[rows.clone(), rows], &[0.5, 0.5], 10_000);
        assert!(opt.min_slack >= grid - 1e-9);
    }

    #[test]
    fn constant_output_downlink() {
        let dead = Downlink::Marginals(vec![vec![vec![1.0, 0.0], vec![1.0, 0.0]]; 2]);
        let spec = ChannelSpec::xor(dead).unwrap();
        let opt = optimize_downlink(&spec, &[0.3, 0.2], 1e-6, 10_000).unwrap();
        assert!((opt.min_slack + 0.3).abs() < 1e-9);
    }

    #[test]
    fn one_useless_receiver() {
        let spec = ChannelSpec::xor(bsc_marginals(&[0.0, 0.5])).unwrap();
        let opt = optimize_downlink(&spec, &[0.3, 0.3], 1e-6, 10_000).unwrap();
        assert!((opt.min_slack + 0.3).abs() < 1e-9);
        assert!(opt.slacks[1] < opt.slacks[0]);
    }

    #[test]
    fn bsc_capacity() {
        let spec = ChannelSpec::xor_bsc(0.05).unwrap();
        let c = downlink_capacity(&spec, 0).unwrap();
        assert!((c - (1.0 - h2(0.05))).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_channels_match_grid() {
        // Z-channel to user 1, ternary-output erasure-like channel to user 2.
        let z = vec![vec![1.0, 0.0], vec![0.4, 0.6]];
        let e = vec![vec![0.7, 0.3, 0.0], vec![0.0, 0.2, 0.8]];
        for rates in [[0.1, 0.2], [0.3, 0.05], [0.25, 0.25]] {
            let offsets = [rates[1], rates[0]];
            let opt = maximize_min_mi(&[z.clone(), e.clone()], &offsets, 1e-6, 10_000);
            let grid = grid_oracle(&[z.clone(), e.clone()], &offsets, 10_000);
            assert!(opt.min_slack >= grid - 1e-6, "{} vs {grid}", opt.min_slack);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = ChannelSpec::xor_noiseless();
        assert!(optimize_downlink(&spec, &[0.5], 1e-6, 10).is_err());
        assert!(optimize_downlink(&spec, &[-0.5, 0.1], 1e-6, 10).is_err());
    }
}
