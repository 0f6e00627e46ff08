//! Independent reference computations shared by the integration tests.
//!
//! Everything here is written from the definitions with plain loops and
//! shares no code with the library beyond the channel tables themselves.

#![allow(dead_code)]

use mwrc::channel::{ChannelSpec, Downlink};
use rand::Rng;

pub fn log2(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_2
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * log2(p) - (1.0 - p) * log2(1.0 - p)
    }
}

/// `I(X;Y)` for input law `p` and channel rows `w[x][y]`, summed directly.
pub fn mutual_information(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let mut total = 0.0;
    for y in 0..ny {
        let q: f64 = p.iter().zip(w).map(|(px, row)| px * row[y]).sum();
        for (px, row) in p.iter().zip(w) {
            let joint = px * row[y];
            if joint > 0.0 {
                total += joint * log2(row[y] / q);
            }
        }
    }
    total
}

/// `p(y_i | x_0)` read off a two-user downlink.
pub fn marginal_rows(spec: &ChannelSpec, user: usize) -> Vec<Vec<f64>> {
    match &spec.downlink {
        Downlink::Marginals(m) => m[user].clone(),
        Downlink::Joint(rows) => {
            let sizes = &spec.user_output_sizes;
            rows.iter()
                .map(|row| {
                    let mut out = vec![0.0; sizes[user]];
                    for (cell, &p) in row.iter().enumerate() {
                        let mut rest = cell;
                        let mut coords = vec![0; sizes.len()];
                        for k in (0..sizes.len()).rev() {
                            coords[k] = rest % sizes[k];
                            rest /= sizes[k];
                        }
                        out[coords[user]] += p;
                    }
                    out
                })
                .collect()
        }
    }
}

/// `(H(Y_0|X_2), H(Y_0|X_1))` for two independent users with laws `p1`, `p2`,
/// i.e. the entropies bounding `R_1` and `R_2`.
pub fn two_user_entropies(spec: &ChannelSpec, p1: &[f64], p2: &[f64]) -> [f64; 2] {
    let (a, b) = (p1.len(), p2.len());
    let ny = spec.relay_output_size;
    let f = |x1: usize, x2: usize| spec.uplink[x1 * b + x2];
    let mut h_given_x2 = 0.0;
    for x2 in 0..b {
        let mut dist = vec![0.0; ny];
        for x1 in 0..a {
            dist[f(x1, x2)] += p1[x1];
        }
        h_given_x2 += p2[x2]
            * dist
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| -p * log2(*p))
                .sum::<f64>();
    }
    let mut h_given_x1 = 0.0;
    for x1 in 0..a {
        let mut dist = vec![0.0; ny];
        for x2 in 0..b {
            dist[f(x1, x2)] += p2[x2];
        }
        h_given_x1 += p1[x1]
            * dist
                .iter()
                .filter(|p| **p > 0.0)
                .map(|p| -p * log2(*p))
                .sum::<f64>();
    }
    [h_given_x2, h_given_x1]
}

/// Points `(k_0/k, .., k_{m-1}/k)` of the probability simplex.
pub fn simplex_grid(m: usize, k: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, k: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if m == 1 {
            cur.push(left as f64 / k as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a as f64 / k as f64);
            rec(m - 1, left - a, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, k, &mut Vec::new(), &mut out);
    out
}

/// Best `min_i [I(X_0;Y_i) - sum_{j != i} R_j]` over a simplex grid.
pub fn downlink_grid_optimum(rows: &[Vec<Vec<f64>>], rates: &[f64], grid: &[Vec<f64>]) -> f64 {
    let total: f64 = rates.iter().sum();
    grid.iter()
        .map(|p| {
            rows.iter()
                .zip(rates)
                .map(|(w, r)| mutual_information(p, w) - (total - r))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best smallest slack over every input law on a grid of step `1/k`:
/// `p(x_0)`, `p(q)` with up to three states and `p(x_i|q)` for binary users.
/// Downlink and uplink terms involve disjoint variables, so the joint maximum
/// of their minimum is the minimum of the two separate maxima.
pub fn full_grid_optimum(spec: &ChannelSpec, rates: &[f64; 2], k: usize) -> f64 {
    let relay_grid = simplex_grid(spec.relay_input_size, k);
    let rows = [marginal_rows(spec, 0), marginal_rows(spec, 1)];
    let down = downlink_grid_optimum(&rows, rates, &relay_grid);

    let laws1 = simplex_grid(spec.user_alphabets[0], k);
    let laws2 = simplex_grid(spec.user_alphabets[1], k);
    let mut points: Vec<[f64; 2]> = Vec::new();
    for p1 in &laws1 {
        for p2 in &laws2 {
            points.push(two_user_entropies(spec, p1, p2));
        }
    }
    // A point dominated by another never helps a mixture.
    let front: Vec<[f64; 2]> = points
        .iter()
        .filter(|p| {
            !points
                .iter()
                .any(|o| o[0] >= p[0] && o[1] >= p[1] && (o[0] > p[0] || o[1] > p[1]))
        })
        .copied()
        .collect();
    let weights = simplex_grid(3, k);
    let mut up = f64::NEG_INFINITY;
    for a in &front {
        for b in &front {
            for c in &front {
                for w in &weights {
                    let h0 = w[0] * a[0] + w[1] * b[0] + w[2] * c[0];
                    let h1 = w[0] * a[1] + w[1] * b[1] + w[2] * c[1];
                    up = up.max((h0 - rates[0]).min(h1 - rates[1]));
                }
            }
        }
    }
    down.min(up)
}

/// A binary two-user channel with a random uplink table and random binary
/// downlink marginals.
pub fn random_binary_spec<R: Rng>(rng: &mut R) -> ChannelSpec {
    let ny = rng.random_range(2..=4);
    let table: Vec<usize> = (0..4).map(|_| rng.random_range(0..ny)).collect();
    let row = |rng: &mut R| {
        let p: f64 = rng.random();
        vec![p, 1.0 - p]
    };
    let marginals = (0..2).map(|_| vec![row(rng), row(rng)]).collect();
    ChannelSpec::from_fn(
        vec![2, 2],
        ny,
        |x| table[x[0] * 2 + x[1]],
        2,
        vec![2, 2],
        Downlink::Marginals(marginals),
    )
    .expect("valid random spec")
}
