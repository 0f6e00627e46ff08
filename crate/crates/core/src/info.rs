//! Exact discrete information measures and typicality tests.
//!
//! All logarithms are base 2 and `0 log 0 = 0`.

use crate::error::{invalid, usage, Result};

/// Absolute tolerance on the total mass of a probability vector.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy function `h2(p)` in bits.
pub fn h2(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// Entropy of a raw mass vector, without validation.
pub fn entropy_of_mass(mass: &[f64]) -> f64 {
    mass.iter().map(|&p| plogp(p)).sum::<f64>().max(0.0)
}

fn check_mass(mass: &[f64]) -> Result<()> {
    if mass.is_empty() {
        return invalid("distribution has empty support");
    }
    if let Some((k, p)) = mass
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p >= 0.0) || !p.is_finite())
    {
        return invalid(format!(
            "mass[{k}] = {p} is not a non-negative finite number"
        ));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return invalid(format!("mass sums to {total}, expected 1"));
    }
    Ok(())
}

/// A probability mass function over `0..support_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_mass(&mass)?;
        Ok(Self { mass })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution needs a non-empty support");
        Self {
            mass: vec![1.0 / size as f64; size],
        }
    }

    /// All mass on `symbol`.
    pub fn point(size: usize, symbol: usize) -> Self {
        let mut mass = vec![0.0; size];
        mass[symbol] = 1.0;
        Self { mass }
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_mass(&self.mass)
    }
}

/// Entropy `H(p)` in bits.
pub fn entropy(p: &Distribution) -> f64 {
    p.entropy()
}

/// A dense joint probability table over several finite random variables.
///
/// Storage is row-major: the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    axis_sizes: Vec<usize>,
    mass: Vec<f64>,
}

impl JointTable {
    pub fn new(axis_sizes: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        if axis_sizes.is_empty() || axis_sizes.contains(&0) {
            return invalid(format!(
                "axis sizes {axis_sizes:?} must be non-empty and positive"
            ));
        }
        let cells: usize = axis_sizes.iter().product();
        if cells != mass.len() {
            return invalid(format!(
                "axis sizes {axis_sizes:?} imply {cells} cells, got {}",
                mass.len()
            ));
        }
        check_mass(&mass)?;
        Ok(Self { axis_sizes, mass })
    }

    /// Builds a table by evaluating `f` on every coordinate tuple.
    pub fn from_fn(axis_sizes: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let cells: usize = axis_sizes.iter().product();
        let mut coords = vec![0; axis_sizes.len()];
        let mut mass = Vec::with_capacity(cells);
        for _ in 0..cells {
            mass.push(f(&coords));
            for axis in (0..coords.len()).rev() {
                coords[axis] += 1;
                if coords[axis] < axis_sizes[axis] {
                    break;
                }
                coords[axis] = 0;
            }
        }
        Self::new(axis_sizes, mass)
    }

    pub fn axis_sizes(&self) -> &[usize] {
        &self.axis_sizes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn num_axes(&self) -> usize {
        self.axis_sizes.len()
    }

    /// Flat index of a coordinate tuple.
    pub fn index_of(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.axis_sizes)
            .fold(0, |acc, (&c, &size)| acc * size + c)
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.num_axes()];
        for &a in axes {
            if a >= self.num_axes() {
                return usage(format!(
                    "axis {a} out of range for {} axes",
                    self.num_axes()
                ));
            }
            if seen[a] {
                return usage(format!("axis {a} listed twice"));
            }
            seen[a] = true;
        }
        Ok(())
    }

    /// Marginal over `axes`, in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointTable> {
        self.check_axes(axes)?;
        if axes.is_empty() {
            return Ok(JointTable {
                axis_sizes: vec![1],
                mass: vec![1.0],
            });
        }
        Ok(self.marginal_unchecked(axes))
    }

    fn marginal_unchecked(&self, axes: &[usize]) -> JointTable {
        let sizes: Vec<usize> = axes.iter().map(|&a| self.axis_sizes[a]).collect();
        let mut out = vec![0.0; sizes.iter().product()];
        let project = self.projector(axes);
        for (flat, &p) in self.mass.iter().enumerate() {
            out[project(flat)] += p;
        }
        JointTable {
            axis_sizes: sizes,
            mass: out,
        }
    }

    /// Returns a map from a flat index of this table to the flat index of the
    /// marginal table over `axes`.
    pub(crate) fn projector(&self, axes: &[usize]) -> impl Fn(usize) -> usize + '_ {
        let n = self.num_axes();
        let mut strides = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.axis_sizes[a + 1];
        }
        let picks: Vec<(usize, usize, usize)> = axes
            .iter()
            .map(|&a| (strides[a], self.axis_sizes[a], a))
            .collect();
        let sizes = self.axis_sizes.clone();
        move |flat: usize| {
            picks.iter().fold(0, |acc, &(stride, size, a)| {
                debug_assert_eq!(size, sizes[a]);
                acc * size + (flat / stride) % size
            })
        }
    }

    /// Joint entropy of the variables in `axes`.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        Ok(entropy_of_mass(&self.marginal(axes)?.mass))
    }
}

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if let Some(x) = a.iter().find(|x| b.contains(x)) {
        return usage(format!("axis {x} appears in both axis sets"));
    }
    Ok(())
}

/// `H(target | given) = H(target, given) - H(given)`.
pub fn conditional_entropy(joint: &JointTable, target: &[usize], given: &[usize]) -> Result<f64> {
    check_disjoint(target, given)?;
    let both: Vec<usize> = target.iter().chain(given).copied().collect();
    let h = joint.entropy_of(&both)? - joint.entropy_of(given)?;
    Ok(h.max(0.0))
}

/// `I(A; B) = H(A) + H(B) - H(A, B)`.
pub fn mutual_information(joint: &JointTable, a: &[usize], b: &[usize]) -> Result<f64> {
    check_disjoint(a, b)?;
    let both: Vec<usize> = a.iter().chain(b).copied().collect();
    let i = joint.entropy_of(a)? + joint.entropy_of(b)? - joint.entropy_of(&both)?;
    Ok(i.max(0.0))
}

/// `I(X; Y)` for input law `input` through the channel `rows[x][y]`.
pub fn channel_mutual_information(input: &[f64], rows: &[Vec<f64>]) -> f64 {
    let out_size = rows.first().map_or(0, Vec::len);
    let mut output = vec![0.0; out_size];
    for (px, row) in input.iter().zip(rows) {
        for (q, w) in output.iter_mut().zip(row) {
            *q += px * w;
        }
    }
    let mut cond = 0.0;
    for (px, row) in input.iter().zip(rows) {
        cond += px * entropy_of_mass(row);
    }
    (entropy_of_mass(&output) - cond).max(0.0)
}

/// Empirical distribution (type) of a symbol sequence.
pub fn empirical_type(seq: &[usize], alphabet_size: usize) -> Result<Distribution> {
    if alphabet_size == 0 {
        return usage("alphabet size must be positive");
    }
    if seq.is_empty() {
        return usage("empirical type of an empty sequence");
    }
    let mut counts = vec![0usize; alphabet_size];
    for (t, &s) in seq.iter().enumerate() {
        if s >= alphabet_size {
            return invalid(format!(
                "symbol {s} at position {t} outside alphabet of size {alphabet_size}"
            ));
        }
        counts[s] += 1;
    }
    let n = seq.len() as f64;
    Ok(Distribution {
        mass: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

fn joint_counts(seqs: &[&[usize]], reference: &JointTable) -> Result<(Vec<usize>, usize)> {
    if seqs.len() != reference.num_axes() {
        return usage(format!(
            "{} sequences supplied for a {}-axis reference",
            seqs.len(),
            reference.num_axes()
        ));
    }
    let n = seqs[0].len();
    if n == 0 {
        return usage("typicality test on empty sequences");
    }
    if let Some(s) = seqs.iter().find(|s| s.len() != n) {
        return usage(format!("sequence lengths differ ({} vs {n})", s.len()));
    }
    let mut counts = vec![0usize; reference.mass.len()];
    let mut coords = vec![0; seqs.len()];
    for t in 0..n {
        for (k, s) in seqs.iter().enumerate() {
            if s[t] >= reference.axis_sizes[k] {
                return invalid(format!("symbol {} out of range on axis {k}", s[t]));
            }
            coords[k] = s[t];
        }
        counts[reference.index_of(&coords)] += 1;
    }
    Ok((counts, n))
}

/// Robust (multiplicative) joint typicality: every joint cell `a` satisfies
/// `|pi(a) - p(a)| <= epsilon * p(a)`, so cells of zero reference mass must
/// not occur at all.
pub fn is_robust_typical(seqs: &[&[usize]], reference: &JointTable, epsilon: f64) -> Result<bool> {
    if !(epsilon >= 0.0) {
        return usage(format!("epsilon must be non-negative, got {epsilon}"));
    }
    let (counts, n) = joint_counts(seqs, reference)?;
    let n = n as f64;
    Ok(counts
        .iter()
        .zip(&reference.mass)
        .all(|(&c, &p)| (c as f64 / n - p).abs() <= epsilon * p))
}

/// Weak (entropy) joint typicality test over every non-empty subset of the
/// variables of a reference table: `|-(1/n) log2 p_S(s^n) - H(S)| < epsilon`.
///
/// The per-cell log-probabilities of every subset marginal are precomputed so
/// that a test costs `O(n * 2^k)` table lookups for `k` variables.
#[derive(Debug, Clone)]
pub struct WeakTypicality {
    axis_sizes: Vec<usize>,
    /// `cell_costs[cell * subsets + s]` is `-log2 p_S` of the projection of
    /// `cell`, or infinity when that marginal cell has zero mass.
    cell_costs: Vec<f64>,
    entropies: Vec<f64>,
    epsilon: f64,
}

impl WeakTypicality {
    pub fn new(reference: &JointTable, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return usage(format!("epsilon must be non-negative, got {epsilon}"));
        }
        let k = reference.num_axes();
        let subsets = (1usize << k) - 1;
        let cells = reference.mass.len();
        let mut cell_costs = vec![0.0; cells * subsets];
        let mut entropies = Vec::with_capacity(subsets);
        for s in 0..subsets {
            let axes: Vec<usize> = (0..k).filter(|a| (s + 1) >> a & 1 == 1).collect();
            let marginal = reference.marginal_unchecked(&axes);
            entropies.push(entropy_of_mass(&marginal.mass));
            let project = reference.projector(&axes);
            for cell in 0..cells {
                let p = marginal.mass[project(cell)];
                cell_costs[cell * subsets + s] = if p > 0.0 { -p.log2() } else { f64::INFINITY };
            }
        }
        Ok(Self {
            axis_sizes: reference.axis_sizes.clone(),
            cell_costs,
            entropies,
            epsilon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn axis_sizes(&self) -> &[usize] {
        &self.axis_sizes
    }

    /// Tests a sequence given as flat joint-cell indices.
    pub fn accepts_cells(&self, cells: impl IntoIterator<Item = usize>) -> bool {
        let subsets = self.entropies.len();
        let mut stack = [0.0; 64];
        let mut heap = Vec::new();
        let sums = if subsets <= stack.len() {
            &mut stack[..subsets]
        } else {
            heap.resize(subsets, 0.0);
            &mut heap[..]
        };
        let mut n = 0usize;
        for cell in cells {
            let row = &self.cell_costs[cell * subsets..(cell + 1) * subsets];
            for (acc, c) in sums.iter_mut().zip(row) {
                *acc += c;
            }
            n += 1;
        }
        if n == 0 {
            return false;
        }
        let n = n as f64;
        sums.iter()
            .zip(&self.entropies)
            .all(|(s, h)| s.is_finite() && (s / n - h).abs() < self.epsilon)
    }

    /// Tests aligned symbol sequences, one per axis.
    pub fn accepts(&self, seqs: &[&[usize]]) -> Result<bool> {
        if seqs.len() != self.axis_sizes.len() {
            return usage(format!(
                "{} sequences supplied for a {}-axis reference",
                seqs.len(),
                self.axis_sizes.len()
            ));
        }
        let n = seqs[0].len();
        if let Some(s) = seqs.iter().find(|s| s.len() != n) {
            return usage(format!("sequence lengths differ ({} vs {n})", s.len()));
        }
        let mut cells = Vec::with_capacity(n);
        for t in 0..n {
            let mut idx = 0;
            for (k, s) in seqs.iter().enumerate() {
                if s[t] >= self.axis_sizes[k] {
                    return invalid(format!("symbol {} out of range on axis {k}", s[t]));
                }
                idx = idx * self.axis_sizes[k] + s[t];
            }
            cells.push(idx);
        }
        Ok(self.accepts_cells(cells))
    }
}

/// One-shot weak typicality test; see [`WeakTypicality`].
pub fn is_weakly_typical(seqs: &[&[usize]], reference: &JointTable, epsilon: f64) -> Result<bool> {
    WeakTypicality::new(reference, epsilon)?.accepts(seqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table(sizes: &[usize], mass: &[f64]) -> JointTable {
        JointTable::new(sizes.to_vec(), mass.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&Distribution::new(vec![0.5, 0.5]).unwrap()), 1.0);
        assert_eq!(entropy(&Distribution::new(vec![1.0, 0.0]).unwrap()), 0.0);
        assert_abs_diff_eq!(entropy(&Distribution::uniform(4)), 2.0);
    }

    #[test]
    fn invalid_distributions() {
        assert!(matches!(
            Distribution::new(vec![0.5, 0.4]),
            Err(crate::Error::Validation(_))
        ));
        assert!(matches!(
            Distribution::new(vec![1.5, -0.5]),
            Err(crate::Error::Validation(_))
        ));
        assert!(Distribution::new(vec![]).is_err());
        assert!(JointTable::new(vec![2, 2], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn conditional_entropy_examples() {
        let indep = table(&[2, 2], &[0.25; 4]);
        assert_abs_diff_eq!(
            conditional_entropy(&indep, &[0], &[1]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let equal = table(&[2, 2], &[0.5, 0.0, 0.0, 0.5]);
        assert_abs_diff_eq!(
            conditional_entropy(&equal, &[0], &[1]).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        // Uniform over {(0,0),(0,1),(1,0)}: oracle sums p(b) H(A | B=b) directly.
        let third = 1.0 / 3.0;
        let j = table(&[2, 2], &[third, third, third, 0.0]);
        let oracle = (2.0 / 3.0) * 1.0 + (1.0 / 3.0) * 0.0;
        assert_abs_diff_eq!(
            conditional_entropy(&j, &[0], &[1]).unwrap(),
            oracle,
            epsilon = 1e-12
        );
        assert!(matches!(
            conditional_entropy(&j, &[0], &[0]),
            Err(crate::Error::Usage(_))
        ));
    }

    #[test]
    fn mutual_information_examples() {
        let indep = table(&[2, 2], &[0.25; 4]);
        assert_abs_diff_eq!(
            mutual_information(&indep, &[0], &[1]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let equal = table(&[2, 2], &[0.5, 0.0, 0.0, 0.5]);
        assert_abs_diff_eq!(
            mutual_information(&equal, &[0], &[1]).unwrap(),
            1.0,
            epsilon = 1e-12
        );

        // BSC(0.11) with uniform input; oracle sums p(x,y) log p(x,y)/(p(x)p(y)).
        let e = 0.11;
        let bsc = table(
            &[2, 2],
            &[0.5 * (1.0 - e), 0.5 * e, 0.5 * e, 0.5 * (1.0 - e)],
        );
        let mut oracle = 0.0;
        for (pxy, _) in bsc.mass().iter().zip(0..) {
            oracle += pxy * (pxy / 0.25f64).log2();
        }
        let mi = mutual_information(&bsc, &[0], &[1]).unwrap();
        assert_abs_diff_eq!(mi, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(mi, 0.500_084_041_8, epsilon = 1e-9);
        assert!(mutual_information(&bsc, &[0, 1], &[1]).is_err());
    }

    #[test]
    fn channel_mi_matches_table_mi() {
        let rows = vec![vec![0.9, 0.1, 0.0], vec![0.2, 0.3, 0.5]];
        let input = [0.3, 0.7];
        let j = JointTable::from_fn(vec![2, 3], |c| input[c[0]] * rows[c[0]][c[1]]).unwrap();
        assert_abs_diff_eq!(
            channel_mutual_information(&input, &rows),
            mutual_information(&j, &[0], &[1]).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empirical_type_examples() {
        assert_eq!(
            empirical_type(&[0, 1, 0, 1], 2).unwrap().mass(),
            &[0.5, 0.5]
        );
        assert_eq!(
            empirical_type(&[2, 2, 2], 3).unwrap().mass(),
            &[0.0, 0.0, 1.0]
        );
        assert_eq!(
            empirical_type(&[0, 0, 1, 2], 3).unwrap().mass(),
            &[0.5, 0.25, 0.25]
        );
        assert!(matches!(
            empirical_type(&[0, 3], 3),
            Err(crate::Error::Validation(_))
        ));
    }

    #[test]
    fn robust_typicality_examples() {
        let uniform = table(&[2, 2], &[0.25; 4]);
        let a = [0, 0, 1, 1];
        let b = [0, 1, 0, 1];
        assert!(is_robust_typical(&[&a, &b], &uniform, 1e-9).unwrap());

        let sparse = table(&[2, 2], &[0.5, 0.0, 0.0, 0.5]);
        assert!(!is_robust_typical(&[&[0, 1], &[0, 0]], &sparse, 10.0).unwrap());

        // 20 samples with type [0.3, 0.2, 0.25, 0.25] over cells (00, 01, 10, 11).
        let mut x = vec![];
        let mut y = vec![];
        for (cell, count) in [(0usize, 6usize), (1, 4), (2, 5), (3, 5)] {
            for _ in 0..count {
                x.push(cell / 2);
                y.push(cell % 2);
            }
        }
        assert!(is_robust_typical(&[&x, &y], &uniform, 0.25).unwrap());
        assert!(!is_robust_typical(&[&x, &y], &uniform, 0.1).unwrap());
        assert!(matches!(
            is_robust_typical(&[&[0, 1], &[0]], &uniform, 0.1),
            Err(crate::Error::Usage(_))
        ));
    }

    #[test]
    fn weak_typicality_on_equiprobable_law() {
        let uniform = table(&[2, 2], &[0.25; 4]);
        // Every pair of sequences is weakly typical for a uniform law.
        assert!(is_weakly_typical(&[&[0, 0, 0], &[1, 1, 1]], &uniform, 1e-9).unwrap());
        let equal = table(&[2, 2], &[0.5, 0.0, 0.0, 0.5]);
        assert!(is_weakly_typical(&[&[0, 1, 1], &[0, 1, 1]], &equal, 1e-9).unwrap());
        assert!(!is_weakly_typical(&[&[0, 1, 1], &[0, 1, 0]], &equal, 1e9).unwrap());
    }

    #[test]
    fn weak_typicality_window() {
        // BSC(0.05), uniform input: joint cost per symbol is 1 - log2(0.95) or
        // 1 - log2(0.05); the window |cost - H(X,Y)| < 0.2 admits 1..=3 flips in 32.
        let e = 0.05;
        let bsc = table(
            &[2, 2],
            &[0.5 * (1.0 - e), 0.5 * e, 0.5 * e, 0.5 * (1.0 - e)],
        );
        let test = WeakTypicality::new(&bsc, 0.2).unwrap();
        let x = vec![0usize; 32];
        for flips in 0..6 {
            let mut y = vec![0usize; 32];
            y.iter_mut().take(flips).for_each(|s| *s = 1);
            let expected = (1..=3).contains(&flips);
            assert_eq!(
                test.accepts(&[&x, &y]).unwrap(),
                expected,
                "flips = {flips}"
            );
        }
    }
}
