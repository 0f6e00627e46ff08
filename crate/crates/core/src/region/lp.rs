//! Small linear programs over sets of entropy vectors.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

/// Best uniform margin `t` such that some mixture `mu` of `points` satisfies
/// `sum_k mu_k points[k][u] - t >= demands[u]` for every coordinate `u`.
/// Returns `(t, mu)`.
pub(crate) fn mixture_margin(points: &[Vec<f64>], demands: &[f64]) -> (f64, Vec<f64>) {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let mu: Vec<Variable> = points.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for (u, &d) in demands.iter().enumerate() {
        let mut expr: Vec<(Variable, f64)> =
            mu.iter().zip(points).map(|(&v, h)| (v, h[u])).collect();
        expr.push((t, -1.0));
        lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, d);
    }
    let ones: Vec<(Variable, f64)> = mu.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    // Always feasible and bounded: t is free and the entropy vectors are finite.
    let solution = lp
        .solve()
        .ok()
        .and_then(|o| o.into_solution().ok())
        .expect("margin program is feasible and bounded");
    let weights = mu.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
    (solution.var_value(t), normalize(weights))
}

/// Whether `target` is weakly dominated by a convex combination of `others`.
pub(crate) fn dominated_by_mixture(others: &[&Vec<f64>], target: &[f64], tolerance: f64) -> bool {
    if others.is_empty() {
        return false;
    }
    let owned: Vec<Vec<f64>> = others.iter().map(|v| v.to_vec()).collect();
    let (t, _) = mixture_margin(&owned, target);
    t >= -tolerance
}

/// Splits `rates` into per-point shares `z_k` with
/// `sum_{j in U} z_{k,j} <= mu_k (points[k][U] + slack)` for every subset
/// `U` in `masks`, `sum_k z_k = rates`, `sum_k mu_k = 1`.
/// Returns `(k, mu_k, z_k / mu_k)` for the components with positive weight.
pub(crate) fn decompose_rates(
    points: &[Vec<f64>],
    masks: &[usize],
    rates: &[f64],
    slack: f64,
) -> Option<Vec<(usize, f64, Vec<f64>)>> {
    let l = rates.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mu: Vec<Variable> = points.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let z: Vec<Vec<Variable>> = points
        .iter()
        .map(|_| {
            (0..l)
                .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for (k, h) in points.iter().enumerate() {
        for (u, &mask) in masks.iter().enumerate() {
            let mut expr: Vec<(Variable, f64)> = (0..l)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| (z[k][j], 1.0))
                .collect();
            expr.push((mu[k], -(h[u] + slack)));
            lp.add_constraint(expr.as_slice(), ComparisonOp::Le, 0.0);
        }
    }
    for (j, &r) in rates.iter().enumerate() {
        let expr: Vec<(Variable, f64)> = z.iter().map(|zk| (zk[j], 1.0)).collect();
        lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, r);
    }
    let ones: Vec<(Variable, f64)> = mu.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    let solution = lp.solve().ok()?.into_solution().ok()?;
    let parts = mu
        .iter()
        .zip(&z)
        .enumerate()
        .filter_map(|(k, (&m, zk))| {
            let w = solution.var_value(m);
            (w > 1e-12).then(|| {
                (
                    k,
                    w,
                    zk.iter()
                        .map(|&v| solution.var_value(v).max(0.0) / w)
                        .collect(),
                )
            })
        })
        .collect();
    Some(parts)
}

/// Reduces a convex combination `sum_k w_k r_k` of points in `R^d` to at most
/// `d + 1` points with the same mean. Returns the surviving indices and weights.
pub(crate) fn caratheodory(points: &[Vec<f64>], weights: &[f64]) -> Vec<(usize, f64)> {
    let d = points.first().map_or(0, Vec::len);
    let mut active: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .collect();
    while active.len() > d + 1 {
        // Columns (r_k, 1) of the first d + 2 active points are dependent.
        let cols: Vec<usize> = (0..d + 2).collect();
        let matrix: Vec<Vec<f64>> = (0..=d)
            .map(|row| {
                cols.iter()
                    .map(|&c| {
                        if row < d {
                            points[active[c].0][row]
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect();
        let alpha = null_vector(matrix);
        let theta = cols
            .iter()
            .zip(&alpha)
            .filter(|(_, a)| **a > 1e-15)
            .map(|(&c, a)| active[c].1 / a)
            .fold(f64::INFINITY, f64::min);
        let mut dropped = None;
        for (&c, a) in cols.iter().zip(&alpha) {
            active[c].1 -= theta * a;
            if *a > 1e-15 && active[c].1 <= 1e-15 && dropped.is_none() {
                dropped = Some(c);
            }
        }
        let drop = dropped.unwrap_or_else(|| {
            // Numerically degenerate step: drop the lightest column.
            (0..cols.len())
                .min_by(|&a, &b| active[a].1.total_cmp(&active[b].1))
                .unwrap_or(0)
        });
        active.remove(drop);
        active.retain(|(_, w)| *w > 1e-15);
    }
    let total: f64 = active.iter().map(|(_, w)| w).sum();
    active.into_iter().map(|(k, w)| (k, w / total)).collect()
}

/// A non-zero vector in the kernel of a matrix with more columns than rows,
/// by Gaussian elimination with partial pivoting.
fn null_vector(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let rows = a.len();
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        if a[best][c].abs() < 1e-12 {
            continue;
        }
        a.swap(r, best);
        let pivot = a[r][c];
        a[r].iter_mut().for_each(|x| *x /= pivot);
        for other in 0..rows {
            if other != r {
                let factor = a[other][c];
                if factor != 0.0 {
                    let pivot_row = a[r].clone();
                    for (x, p) in a[other].iter_mut().zip(&pivot_row) {
                        *x -= factor * p;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..cols)
        .find(|c| !pivots.contains(c))
        .expect("more columns than rows");
    let mut v = vec![0.0; cols];
    v[free] = 1.0;
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -a[row][free];
    }
    v
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_of_square_corner() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (t, mu) = mixture_margin(&pts, &[0.25, 0.25]);
        assert!((t - 0.25).abs() < 1e-9);
        assert!((mu[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn domination() {
        let a = vec![1.0, 0.0];
        let b = vec![0.0, 1.0];
        assert!(dominated_by_mixture(&[&a, &b], &[0.5, 0.5], 1e-12));
        assert!(!dominated_by_mixture(&[&a, &b], &[0.6, 0.5], 1e-12));
    }

    #[test]
    fn caratheodory_preserves_mean() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 0.2],
        ];
        let w = vec![0.1, 0.2, 0.3, 0.15, 0.25];
        let mean = |sel: &[(usize, f64)]| {
            (0..2)
                .map(|d| sel.iter().map(|&(k, w)| w * pts[k][d]).sum::<f64>())
                .collect::<Vec<_>>()
        };
        let full: Vec<(usize, f64)> = w.iter().copied().enumerate().collect();
        let reduced = caratheodory(&pts, &w);
        assert!(reduced.len() <= 3);
        for (a, b) in mean(&full).iter().zip(mean(&reduced)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_of_interior_rates() {
        // Points in entropy space for masks {1}, {2}.
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let parts = decompose_rates(&pts, &[1, 2], &[0.4, 0.4], 0.0).unwrap();
        let mean: Vec<f64> = (0..2)
            .map(|j| parts.iter().map(|(_, w, r)| w * r[j]).sum())
            .collect();
        assert!((mean[0] - 0.4).abs() < 1e-9 && (mean[1] - 0.4).abs() < 1e-9);
        assert!(decompose_rates(&pts, &[1, 2], &[0.6, 0.6], 0.0).is_none());
    }
}
