//! Channel files, result documents and CSV output.
//!
//! A channel file is a JSON object:
//!
//! ```json
//! {
//!   "users": 2,
//!   "alphabets": { "users": [2, 2], "relay_input": 2, "relay_output": 2, "outputs": [2, 2] },
//!   "uplink": [0, 1, 1, 0],
//!   "downlink": { "marginals": [ [[1, 0], [0, 1]], [[1, 0], [0, 1]] ] },
//!   "labels": { "name": "xor" }
//! }
//! ```
//!
//! `uplink` is row-major over `(x_1, .., x_L)` with `x_1` varying slowest.
//! `downlink` holds either `"joint"` rows (one per relay symbol, over output
//! tuples in the same order) or `"marginals"` (`[user][x0][y]`). Unknown keys
//! are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelSpec, Downlink, Issue, ValidationReport};
use crate::error::{Error, Result};
use crate::region::{BoundaryPoint, Cut};
use crate::sim::ExperimentRow;

/// Version of the result-document and CSV layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Alphabet sizes as written in a channel file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alphabets {
    pub users: Vec<usize>,
    pub relay_input: usize,
    pub relay_output: usize,
    pub outputs: Vec<usize>,
}

/// The on-disk form of a [`ChannelSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub users: usize,
    pub alphabets: Alphabets,
    pub uplink: Vec<usize>,
    pub downlink: Downlink,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
}

impl ChannelFile {
    /// Parses a channel file. Syntax errors and unknown keys report line and
    /// column. The result is not yet validated; see [`ChannelFile::to_spec`].
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    fn spec_unchecked(&self) -> ChannelSpec {
        ChannelSpec {
            user_alphabets: self.alphabets.users.clone(),
            relay_input_size: self.alphabets.relay_input,
            relay_output_size: self.alphabets.relay_output,
            user_output_sizes: self.alphabets.outputs.clone(),
            uplink: self.uplink.clone(),
            downlink: self.downlink.clone(),
        }
    }

    /// Every problem with the described channel, the user count included.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.users != self.alphabets.users.len() {
            report.issues.push(Issue {
                location: "users".into(),
                message: format!(
                    "declared {} users but alphabets.users has {} entries",
                    self.users,
                    self.alphabets.users.len()
                ),
            });
        }
        report
            .issues
            .extend(self.spec_unchecked().validate().issues);
        report
    }

    /// Converts to a validated [`ChannelSpec`], listing every problem found.
    pub fn to_spec(&self) -> Result<ChannelSpec> {
        self.validate().into_result()?;
        Ok(self.spec_unchecked())
    }

    pub fn from_spec(spec: &ChannelSpec) -> Self {
        Self {
            users: spec.num_users(),
            alphabets: Alphabets {
                users: spec.user_alphabets.clone(),
                relay_input: spec.relay_input_size,
                relay_output: spec.relay_output_size,
                outputs: spec.user_output_sizes.clone(),
            },
            uplink: spec.uplink.clone(),
            downlink: spec.downlink.clone(),
            labels: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel files serialize")
    }
}

/// Parses and validates a channel file in one go.
pub fn parse_channel(text: &str) -> Result<ChannelSpec> {
    ChannelFile::parse(text)?.to_spec()
}

/// SHA-256 of the canonical (compact JSON) form of `spec`, in hex. Labels do
/// not enter the digest.
pub fn spec_digest(spec: &ChannelSpec) -> String {
    let canonical =
        serde_json::to_string(&ChannelFile::from_spec(spec)).expect("channel files serialize");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The command and flags a document was produced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    /// Flag names and values as given, in a fixed order.
    pub args: BTreeMap<String, String>,
}

/// Machine-readable output of one command. Contains no timestamps or
/// paths, so equal inputs give byte-identical documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: CommandEcho,
    pub digest: String,
    pub seed: Option<u64>,
    pub payload: serde_json::Value,
}

impl ResultDocument {
    pub fn new(
        command: CommandEcho,
        spec: &ChannelSpec,
        seed: Option<u64>,
        payload: impl Serialize,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            digest: spec_digest(spec),
            seed,
            payload: serde_json::to_value(payload).expect("payloads serialize"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

/// Formats `x` with 9 significant digits, in fixed notation when the
/// exponent is moderate and scientific otherwise. Trailing zeros are dropped.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let (mantissa, exponent) = sci.split_at(sci.find('e').expect("exponent"));
        format!("{}{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Stable label of a cut: `downlink:<i>` or `uplink:<j>+<k>` (1-based).
pub fn cut_id(cut: &Cut) -> String {
    match *cut {
        Cut::Downlink { user } => format!("downlink:{}", user + 1),
        Cut::Uplink { mask } => {
            let members: Vec<String> = (0..usize::BITS as usize)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| (j + 1).to_string())
                .collect();
            format!("uplink:{}", members.join("+"))
        }
    }
}

/// Header of the boundary CSV for `users` users:
/// `d_1..d_L, r_1..r_L, binding`.
pub fn region_csv_header(users: usize) -> String {
    let mut cols: Vec<String> = (1..=users).map(|i| format!("d_{i}")).collect();
    cols.extend((1..=users).map(|i| format!("r_{i}")));
    cols.push("binding".into());
    cols.join(",")
}

/// One CSV line per boundary point, header first.
pub fn region_csv(users: usize, points: &[BoundaryPoint]) -> String {
    let mut out = region_csv_header(users);
    out.push('\n');
    for p in points {
        let fields: Vec<String> = p
            .direction
            .iter()
            .chain(&p.rates)
            .map(|&v| format_sig(v))
            .collect();
        out.push_str(&fields.join(","));
        out.push(',');
        out.push_str(&cut_id(&p.binding));
        out.push('\n');
    }
    out
}

/// Header of the error-rate CSV for `users` users.
pub fn curve_csv_header(users: usize) -> String {
    let mut cols = vec!["n".to_string()];
    cols.extend((1..=users).map(|i| format!("rate_{i}")));
    cols.extend((1..=users).map(|i| format!("realized_{i}")));
    cols.extend(
        [
            "trials",
            "step1_miss",
            "step1_false",
            "step2_atypical",
            "step2_confusion",
            "overall",
            "half_width",
            "seed",
        ]
        .map(String::from),
    );
    cols.join(",")
}

/// One CSV line per block length, header first.
pub fn curve_csv(users: usize, rows: &[ExperimentRow]) -> String {
    let mut out = curve_csv_header(users);
    out.push('\n');
    for row in rows {
        let s = &row.summary;
        let mut fields = vec![row.block_length.to_string()];
        fields.extend(
            row.rates
                .iter()
                .chain(&row.realized_rates)
                .map(|&v| format_sig(v)),
        );
        fields.push(s.trials.to_string());
        fields.extend(
            [
                s.step1_miss,
                s.step1_false,
                s.step2_atypical,
                s.step2_confusion,
                s.overall,
                s.half_width,
            ]
            .map(format_sig),
        );
        fields.push(row.seed.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
