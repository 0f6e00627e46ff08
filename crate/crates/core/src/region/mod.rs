//! The capacity region: constraint evaluation, relay-input optimization, the
//! time-shared uplink entropy hull, membership and boundary tracing.

mod downlink;
mod hull;
mod lp;
mod membership;
mod slack;

pub use downlink::{
    downlink_capacity, optimize_downlink, DownlinkOptimum, DOWNLINK_BUDGET, DOWNLINK_TOLERANCE,
};
pub use hull::{HullConfig, HullPoint, UplinkHull};
pub use membership::{
    corollary_region, quarter_circle_directions, BindingCut, BoundaryPoint, Corollary,
    CorollaryRegion, MembershipVerdict, Region, RegionConfig, Status,
};
pub(crate) use slack::check_rates;
pub use slack::{
    constraint_slacks, downlink_mi_vector, rate_sums, uplink_entropy_vector, ConstraintSlack, Cut,
    InputDistribution,
};
