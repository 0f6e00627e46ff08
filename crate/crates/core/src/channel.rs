//! Channel descriptions: alphabets, deterministic uplink, stochastic downlink.
//!
//! Symbols are dense indices `0..size`. User indices are 0-based in this API
//! and 1-based in human-facing labels.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, usage, Result};
use crate::info::MASS_TOLERANCE;
use crate::ENUMERATION_CAP;

/// The relay-to-users channel `p*(y_1..y_L | x_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Downlink {
    /// `rows[x0]` is a distribution over output tuples `(y_1..y_L)`,
    /// row-major with `y_1` varying slowest.
    Joint(Vec<Vec<f64>>),
    /// `tables[i][x0]` is the distribution of `y_i` given `x0`; users'
    /// outputs are conditionally independent given `x0`.
    Marginals(Vec<Vec<Vec<f64>>>),
}

/// A restricted, separated MWRC with deterministic uplink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// `|X_1| .. |X_L|`.
    pub user_alphabets: Vec<usize>,
    /// `|X_0|`.
    pub relay_input_size: usize,
    /// `|Y_0|`.
    pub relay_output_size: usize,
    /// `|Y_1| .. |Y_L|`.
    pub user_output_sizes: Vec<usize>,
    /// `f*` as a dense table over `X_1 x .. x X_L`, row-major with user 1
    /// varying slowest.
    pub uplink: Vec<usize>,
    pub downlink: Downlink,
}

/// One problem found by [`ChannelSpec::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    /// A validation error listing every issue, if there is any.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let msgs: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        invalid(msgs.join("; "))
    }

    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            location: location.into(),
            message: message.into(),
        });
    }
}

/// Whether the channel falls in the special class where the capacity region
/// depends on the downlink only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialCaseReport {
    /// `|X_j| >= |X_0|` for every user.
    pub alphabet_condition: bool,
    /// `f*` is injective on the full input product, i.e. the relay observes
    /// the whole input tuple.
    pub injective_uplink: bool,
    /// Human-readable description of each violated condition.
    pub witness: Vec<String>,
}

impl SpecialCaseReport {
    pub fn applies(&self) -> bool {
        self.alphabet_condition && self.injective_uplink
    }
}

fn check_row(report: &mut ValidationReport, location: String, row: &[f64], width: usize) {
    if row.len() != width {
        report.push(
            location,
            format!("row has {} entries, expected {width}", row.len()),
        );
        return;
    }
    if let Some((k, p)) = row
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p >= 0.0) || !p.is_finite())
    {
        report.push(
            location,
            format!("entry {k} = {p} is not a non-negative probability"),
        );
        return;
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        report.push(location, format!("row sums to {total}, expected 1"));
    }
}

fn sample_index<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = k;
            if u < acc {
                return k;
            }
        }
    }
    last_positive
}

impl ChannelSpec {
    /// Builds a spec whose uplink table is generated from `f` and validates it.
    pub fn from_fn(
        user_alphabets: Vec<usize>,
        relay_output_size: usize,
        f: impl Fn(&[usize]) -> usize,
        relay_input_size: usize,
        user_output_sizes: Vec<usize>,
        downlink: Downlink,
    ) -> Result<Self> {
        let cells = user_alphabets.iter().map(|&s| s as f64).product::<f64>();
        if cells > ENUMERATION_CAP {
            return Err(crate::Error::Capacity {
                what: "uplink table".into(),
                needed: cells,
                cap: ENUMERATION_CAP,
            });
        }
        let mut uplink = Vec::with_capacity(cells as usize);
        for_each_tuple(&user_alphabets, |x| uplink.push(f(x)));
        Self {
            user_alphabets,
            relay_input_size,
            relay_output_size,
            user_output_sizes,
            uplink,
            downlink,
        }
        .validated()
    }

    /// Returns `self` if [`validate`](Self::validate) finds no issue.
    pub fn validated(self) -> Result<Self> {
        self.validate().into_result()?;
        Ok(self)
    }

    pub fn num_users(&self) -> usize {
        self.user_alphabets.len()
    }

    /// Number of input tuples `|X_1| * .. * |X_L|`.
    pub fn input_tuples(&self) -> usize {
        self.user_alphabets.iter().product()
    }

    /// Checks every structural invariant and lists all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let l = self.num_users();
        if l < 2 {
            r.push("users", format!("need at least 2 users, got {l}"));
        }
        for (i, &s) in self.user_alphabets.iter().enumerate() {
            if s == 0 {
                r.push(
                    format!("alphabets.users[{}]", i + 1),
                    "alphabet size must be >= 1",
                );
            }
        }
        if self.relay_input_size == 0 {
            r.push("alphabets.relay_input", "alphabet size must be >= 1");
        }
        if self.relay_output_size == 0 {
            r.push("alphabets.relay_output", "alphabet size must be >= 1");
        }
        if self.user_output_sizes.len() != l {
            r.push(
                "alphabets.user_outputs",
                format!(
                    "{} output alphabets for {l} users",
                    self.user_output_sizes.len()
                ),
            );
        }
        for (i, &s) in self.user_output_sizes.iter().enumerate() {
            if s == 0 {
                r.push(
                    format!("alphabets.user_outputs[{}]", i + 1),
                    "alphabet size must be >= 1",
                );
            }
        }
        let cells = self
            .user_alphabets
            .iter()
            .map(|&s| s as f64)
            .product::<f64>();
        if cells > ENUMERATION_CAP {
            r.push(
                "uplink",
                format!("{cells} input tuples exceed the cap {ENUMERATION_CAP}"),
            );
            return r;
        }
        if self.uplink.len() != self.input_tuples() {
            r.push(
                "uplink",
                format!(
                    "table has {} cells, expected {}",
                    self.uplink.len(),
                    self.input_tuples()
                ),
            );
        } else {
            let mut t = 0;
            for_each_tuple(&self.user_alphabets, |x| {
                let y = self.uplink[t];
                if y >= self.relay_output_size {
                    r.push(
                        format!("uplink{x:?}"),
                        format!(
                            "output {y} outside relay output alphabet of size {}",
                            self.relay_output_size
                        ),
                    );
                }
                t += 1;
            });
        }
        if !r.is_valid() || self.user_output_sizes.len() != l {
            return r;
        }
        match &self.downlink {
            Downlink::Joint(rows) => {
                let width: f64 = self.user_output_sizes.iter().map(|&s| s as f64).product();
                if width * self.relay_input_size as f64 > ENUMERATION_CAP {
                    r.push(
                        "downlink.joint",
                        "joint downlink table exceeds the enumeration cap",
                    );
                    return r;
                }
                if rows.len() != self.relay_input_size {
                    r.push(
                        "downlink.joint",
                        format!(
                            "{} rows, expected one per relay input ({})",
                            rows.len(),
                            self.relay_input_size
                        ),
                    );
                }
                for (x0, row) in rows.iter().enumerate() {
                    check_row(&mut r, format!("downlink.joint[{x0}]"), row, width as usize);
                }
            }
            Downlink::Marginals(tables) => {
                if tables.len() != l {
                    r.push(
                        "downlink.marginals",
                        format!("{} tables for {l} users", tables.len()),
                    );
                }
                for (i, table) in tables.iter().enumerate() {
                    if table.len() != self.relay_input_size {
                        r.push(
                            format!("downlink.marginals[{}]", i + 1),
                            format!("{} rows, expected {}", table.len(), self.relay_input_size),
                        );
                    }
                    let width = self.user_output_sizes.get(i).copied().unwrap_or(0);
                    for (x0, row) in table.iter().enumerate() {
                        check_row(
                            &mut r,
                            format!("downlink.marginals[{}][{x0}]", i + 1),
                            row,
                            width,
                        );
                    }
                }
            }
        }
        r
    }

    /// Flat uplink-table index of an input tuple (user 1 varies slowest).
    #[inline]
    pub fn tuple_index(&self, x: &[usize]) -> usize {
        x.iter()
            .zip(&self.user_alphabets)
            .fold(0, |acc, (&s, &size)| acc * size + s)
    }

    /// `y_0 = f*(x_1, .., x_L)`.
    pub fn apply_uplink(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.num_users() {
            return usage(format!(
                "{} symbols for {} users",
                x.len(),
                self.num_users()
            ));
        }
        for (i, (&s, &size)) in x.iter().zip(&self.user_alphabets).enumerate() {
            if s >= size {
                return usage(format!(
                    "user {} symbol {s} outside alphabet of size {size}",
                    i + 1
                ));
            }
        }
        Ok(self.uplink[self.tuple_index(x)])
    }

    /// Draws `(y_1, .., y_L)` given relay input `x0`.
    pub fn sample_downlink<R: Rng + ?Sized>(&self, x0: usize, rng: &mut R) -> Result<Vec<usize>> {
        if x0 >= self.relay_input_size {
            return usage(format!(
                "relay symbol {x0} outside alphabet of size {}",
                self.relay_input_size
            ));
        }
        let mut out = vec![0; self.num_users()];
        self.sample_downlink_into(x0, rng, &mut out);
        Ok(out)
    }

    pub(crate) fn sample_downlink_into<R: Rng + ?Sized>(
        &self,
        x0: usize,
        rng: &mut R,
        out: &mut [usize],
    ) {
        match &self.downlink {
            Downlink::Joint(rows) => {
                let mut k = sample_index(&rows[x0], rng);
                for i in (0..out.len()).rev() {
                    let size = self.user_output_sizes[i];
                    out[i] = k % size;
                    k /= size;
                }
            }
            Downlink::Marginals(tables) => {
                for (y, table) in out.iter_mut().zip(tables) {
                    *y = sample_index(&table[x0], rng);
                }
            }
        }
    }

    /// `p(y_i | x_0)` for user `user` (0-based) as rows indexed by `x_0`.
    pub fn downlink_marginal(&self, user: usize) -> Result<Vec<Vec<f64>>> {
        if user >= self.num_users() {
            return usage(format!(
                "user index {} out of range 1..={}",
                user + 1,
                self.num_users()
            ));
        }
        Ok(match &self.downlink {
            Downlink::Marginals(tables) => tables[user].clone(),
            Downlink::Joint(rows) => {
                let size = self.user_output_sizes[user];
                let inner: usize = self.user_output_sizes[user + 1..].iter().product();
                rows.iter()
                    .map(|row| {
                        let mut m = vec![0.0; size];
                        for (k, &p) in row.iter().enumerate() {
                            m[(k / inner) % size] += p;
                        }
                        m
                    })
                    .collect()
            }
        })
    }

    /// Evaluates the alphabet and injectivity conditions of the special class.
    pub fn check_special_case(&self) -> SpecialCaseReport {
        let mut witness = Vec::new();
        let mut alphabet_condition = true;
        for (j, &size) in self.user_alphabets.iter().enumerate() {
            if size < self.relay_input_size {
                alphabet_condition = false;
                witness.push(format!(
                    "|X_{}| = {size} < |X_0| = {}",
                    j + 1,
                    self.relay_input_size
                ));
            }
        }
        let mut injective_uplink = true;
        if self.relay_output_size < self.input_tuples() {
            injective_uplink = false;
            witness.push(format!(
                "|Y_0| = {} < {} input tuples",
                self.relay_output_size,
                self.input_tuples()
            ));
        }
        let mut first_seen: Vec<Option<usize>> = vec![None; self.relay_output_size];
        let mut tuples = Vec::new();
        for_each_tuple(&self.user_alphabets, |x| tuples.push(x.to_vec()));
        for (t, &y) in self.uplink.iter().enumerate() {
            if let Some(prev) = first_seen[y] {
                injective_uplink = false;
                witness.push(format!("f*{:?} = f*{:?} = {y}", tuples[prev], tuples[t]));
                break;
            }
            first_seen[y] = Some(t);
        }
        SpecialCaseReport {
            alphabet_condition,
            injective_uplink,
            witness,
        }
    }
}

/// Calls `f` on every tuple of the product alphabet, row-major with the first
/// coordinate varying slowest.
pub fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut x = vec![0; sizes.len()];
    loop {
        f(&x);
        let mut axis = sizes.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            x[axis] += 1;
            if x[axis] < sizes[axis] {
                break;
            }
            x[axis] = 0;
        }
    }
}

/// Noiseless downlink rows: every user receives `x_0`.
pub fn noiseless_marginals(num_users: usize, size: usize) -> Downlink {
    let identity: Vec<Vec<f64>> = (0..size)
        .map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
        .collect();
    Downlink::Marginals(vec![identity; num_users])
}

/// Independent binary symmetric downlinks with the given crossovers.
pub fn bsc_marginals(crossovers: &[f64]) -> Downlink {
    Downlink::Marginals(
        crossovers
            .iter()
            .map(|&e| vec![vec![1.0 - e, e], vec![e, 1.0 - e]])
            .collect(),
    )
}

impl ChannelSpec {
    /// Two binary users, `y_0 = x_1 xor x_2`, and the given downlink.
    pub fn xor(downlink: Downlink) -> Result<Self> {
        Self::from_fn(vec![2, 2], 2, |x| x[0] ^ x[1], 2, vec![2, 2], downlink)
    }

    /// Binary XOR uplink with a noiseless binary downlink.
    pub fn xor_noiseless() -> Self {
        Self::xor(noiseless_marginals(2, 2)).expect("preset is valid")
    }

    /// Binary XOR uplink with BSC(`crossover`) downlinks to both users.
    pub fn xor_bsc(crossover: f64) -> Result<Self> {
        Self::xor(bsc_marginals(&[crossover, crossover]))
    }

    /// Two binary users whose pair the relay observes exactly:
    /// `y_0 = 2 x_1 + x_2`.
    pub fn pair_copy(
        relay_input_size: usize,
        user_output_sizes: Vec<usize>,
        downlink: Downlink,
    ) -> Result<Self> {
        Self::from_fn(
            vec![2, 2],
            4,
            |x| 2 * x[0] + x[1],
            relay_input_size,
            user_output_sizes,
            downlink,
        )
    }
}
