//! Membership queries, boundary tracing and the downlink-only special case.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, SpecialCaseReport};
use crate::error::{usage, Result};
use crate::region::downlink::{
    optimize_downlink, DownlinkOptimum, DOWNLINK_BUDGET, DOWNLINK_TOLERANCE,
};
use crate::region::hull::{HullConfig, UplinkHull};
use crate::region::lp::{caratheodory, decompose_rates, mixture_margin};
use crate::region::slack::{check_rates, pick_binding, rate_sums, Cut, InputDistribution};
use crate::strict_subsets;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Slack within which a rate tuple counts as on the boundary.
    pub tolerance: f64,
    pub hull: HullConfig,
    /// Iteration budget of the relay-input optimizer.
    pub downlink_budget: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            tolerance: DOWNLINK_TOLERANCE,
            hull: HullConfig::default(),
            downlink_budget: DOWNLINK_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    In,
    Out,
    Boundary,
}

/// A cut together with its best achievable slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BindingCut {
    pub cut: Cut,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub status: Status,
    pub rates: Vec<f64>,
    /// Smallest cut slack after optimizing the input law.
    pub min_slack: f64,
    /// The cut attaining `min_slack`.
    pub binding: BindingCut,
    /// Input law meeting every cut within tolerance; `None` when out.
    pub witness: Option<InputDistribution>,
    /// Set when out: the binding cut, whose best slack is negative.
    pub violated_cut: Option<BindingCut>,
    /// Relay-input optimizer diagnostics.
    pub downlink: DownlinkOptimum,
}

/// A boundary point found along a ray from the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub direction: Vec<f64>,
    pub scale: f64,
    pub rates: Vec<f64>,
    /// The cut that stops the ray.
    pub binding: Cut,
}

/// Outcome of asking for the downlink-only description of the region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Corollary {
    NotSpecialCase { report: SpecialCaseReport },
    Applies(CorollaryRegion),
}

/// When the uplink reveals every input tuple and every user alphabet is at
/// least as large as the relay's, the region is cut out by the downlink alone:
/// `sum_{j != i} R_j <= I(X_0; Y_i)` for one common `p(x_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRegion {
    /// `max_{p(x_0)} I(X_0; Y_i)` per user: the right-hand side of each cut
    /// taken on its own.
    pub cut_values: Vec<f64>,
    pub tolerance: f64,
    pub downlink_budget: usize,
}

impl CorollaryRegion {
    /// Membership in the downlink-only region, optimizing one `p(x_0)` for
    /// all cuts jointly.
    pub fn membership(
        &self,
        spec: &ChannelSpec,
        rates: &[f64],
    ) -> Result<(Status, DownlinkOptimum)> {
        let opt = optimize_downlink(spec, rates, self.tolerance, self.downlink_budget)?;
        Ok((classify(opt.min_slack, self.tolerance), opt))
    }
}

fn classify(min_slack: f64, tolerance: f64) -> Status {
    if min_slack > tolerance {
        Status::In
    } else if min_slack >= -tolerance {
        Status::Boundary
    } else {
        Status::Out
    }
}

/// A channel's capacity region with its uplink entropy hull precomputed.
#[derive(Debug, Clone)]
pub struct Region {
    spec: ChannelSpec,
    config: RegionConfig,
    hull: UplinkHull,
    vectors: Vec<Vec<f64>>,
    masks: Vec<usize>,
}

impl Region {
    pub fn new(spec: &ChannelSpec, config: RegionConfig) -> Result<Self> {
        if !(config.tolerance > 0.0) {
            return usage("tolerance must be positive");
        }
        let spec = spec.clone().validated()?;
        let hull = UplinkHull::build(&spec, config.hull)?;
        let vectors = hull.entropy_vectors();
        let masks = strict_subsets(spec.num_users()).collect();
        Ok(Self {
            spec,
            config,
            hull,
            vectors,
            masks,
        })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn config(&self) -> &RegionConfig {
        &self.config
    }

    pub fn hull(&self) -> &UplinkHull {
        &self.hull
    }

    /// Decides whether `rates` lies in the closed region. Downlink and uplink
    /// cuts share no variables, so each side is optimized separately: the
    /// relay input by [`optimize_downlink`], the time-shared user laws by a
    /// linear program over the hull.
    pub fn membership(&self, rates: &[f64]) -> Result<MembershipVerdict> {
        check_rates(&self.spec, rates)?;
        let tol = self.config.tolerance;
        let downlink = optimize_downlink(&self.spec, rates, tol, self.config.downlink_budget)?;
        let sums = rate_sums(rates);
        let (margin, mu) = mixture_margin(&self.vectors, &sums);
        let uplink_slacks = self
            .masks
            .iter()
            .zip(&sums)
            .enumerate()
            .map(|(u, (&mask, s))| {
                let h: f64 = mu.iter().zip(&self.vectors).map(|(m, v)| m * v[u]).sum();
                (Cut::Uplink { mask }, h - s)
            });
        let downlink_slacks = downlink
            .slacks
            .iter()
            .enumerate()
            .map(|(user, &s)| (Cut::Downlink { user }, s));
        let (cut, _) =
            pick_binding(downlink_slacks.chain(uplink_slacks), tol).expect("at least one cut");
        let min_slack = downlink.min_slack.min(margin);
        let binding = BindingCut {
            cut,
            slack: min_slack,
        };
        let status = classify(min_slack, tol);
        let (witness, violated_cut) = match status {
            Status::Out => (None, Some(binding)),
            _ => (
                Some(self.witness(rates, margin, &downlink.relay_input)),
                None,
            ),
        };
        Ok(MembershipVerdict {
            status,
            rates: rates.to_vec(),
            min_slack,
            binding,
            witness,
            violated_cut,
            downlink,
        })
    }

    /// Builds `p(q) prod_i p(x_i|q)` with at most `L + 1` states: the rate
    /// tuple is split across hull points, and the split is reduced in rate
    /// space.
    fn witness(&self, rates: &[f64], margin: f64, relay_input: &[f64]) -> InputDistribution {
        let mut slack = (-margin).max(0.0) + 1e-9;
        let parts = loop {
            if let Some(parts) = decompose_rates(&self.vectors, &self.masks, rates, slack) {
                if !parts.is_empty() {
                    break parts;
                }
            }
            slack *= 10.0;
            assert!(slack < 1.0, "rate split must exist within tolerance");
        };
        let points: Vec<Vec<f64>> = parts.iter().map(|(_, _, r)| r.clone()).collect();
        let weights: Vec<f64> = parts.iter().map(|(_, w, _)| *w).collect();
        let kept = caratheodory(&points, &weights);
        InputDistribution {
            q_weights: kept.iter().map(|&(_, w)| w).collect(),
            user_conditionals: kept
                .iter()
                .map(|&(k, _)| self.hull.points[parts[k].0].inputs.clone())
                .collect(),
            relay_input: relay_input.to_vec(),
        }
    }

    /// Scales `direction` to the edge of the region by bisection on
    /// membership (boundary points count as members).
    pub fn boundary_trace(&self, direction: &[f64]) -> Result<BoundaryPoint> {
        if direction.len() != self.spec.num_users() {
            return usage(format!(
                "direction has {} entries for {} users",
                direction.len(),
                self.spec.num_users()
            ));
        }
        if direction.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return usage("direction entries must be non-negative");
        }
        let largest = direction.iter().copied().fold(0.0, f64::max);
        if largest == 0.0 {
            return usage("direction must have a positive entry");
        }
        let scaled = |t: f64| direction.iter().map(|d| d * t).collect::<Vec<f64>>();
        let member = |t: f64| -> Result<MembershipVerdict> { self.membership(&scaled(t)) };
        // Any single user's rate is capped by the singleton uplink cut.
        let mut hi = (self.spec.relay_output_size as f64).log2() / largest + self.config.tolerance;
        let mut lo = 0.0;
        let mut outside = member(hi)?;
        if outside.status != Status::Out {
            lo = hi;
        }
        while hi - lo > self.config.tolerance {
            let mid = 0.5 * (lo + hi);
            let verdict = member(mid)?;
            if verdict.status == Status::Out {
                hi = mid;
                outside = verdict;
            } else {
                lo = mid;
            }
        }
        Ok(BoundaryPoint {
            direction: direction.to_vec(),
            scale: lo,
            rates: scaled(lo),
            binding: outside.binding.cut,
        })
    }

    /// The downlink-only description, when the special-case conditions hold.
    pub fn corollary(&self) -> Result<Corollary> {
        corollary_region(
            &self.spec,
            self.config.tolerance,
            self.config.downlink_budget,
        )
    }
}

/// `k` two-user directions evenly spaced in angle from `(1, 0)` to `(0, 1)`;
/// a single direction is the diagonal. The axis directions are exact.
pub fn quarter_circle_directions(k: usize) -> Vec<Vec<f64>> {
    let last = k.saturating_sub(1);
    (0..k)
        .map(|j| match j {
            _ if k == 1 => vec![1.0, 1.0],
            0 => vec![1.0, 0.0],
            _ if j == last => vec![0.0, 1.0],
            _ => {
                let (s, c) = (std::f64::consts::FRAC_PI_2 * j as f64 / last as f64).sin_cos();
                vec![c, s]
            }
        })
        .collect()
}

/// The downlink-only description of the region, or the special-case report
/// explaining why it does not apply.
pub fn corollary_region(
    spec: &ChannelSpec,
    tolerance: f64,
    downlink_budget: usize,
) -> Result<Corollary> {
    let report = spec.check_special_case();
    if !report.applies() {
        return Ok(Corollary::NotSpecialCase { report });
    }
    let cut_values = (0..spec.num_users())
        .map(|i| crate::region::downlink::downlink_capacity(spec, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corollary::Applies(CorollaryRegion {
        cut_values,
        tolerance,
        downlink_budget,
    }))
}
