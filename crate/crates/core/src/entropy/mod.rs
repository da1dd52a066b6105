//! Metric entropy of point clouds in metric groups.
//!
//! `𝒩_ε(X)` is measured by a greedy net whose centers are points of `X`,
//! scanned in the canonical (sorted) order of the cloud. The greedy net is a
//! maximal `ε`-separated set, hence `𝒩_ε(X) ≤ |S_ε| ≤ 𝒩_{ε/2}(X)` holds
//! exactly for every run. Ball membership is the open test `d < ε`, with a
//! `1e-12` slack against rounding.

mod energy;
mod metric;
mod net;
mod profile;

pub use energy::{approx_energy, approx_energy_capped, ApproxEnergy, ENERGY_QUADRUPLE_CAP};
pub use metric::{MetricCloud, MetricGroup, MetricProfile, Point, Region, WordMetric, TOL};
pub use net::{
    cover_is_sound, covering_number, entropy_report, is_maximal_separated, separated_set, within, Cover, EntropyReport, EntropyRow,
    NetIndex,
};
pub use profile::{
    entropy_tripling_check, entropy_tripling_check_capped, metric_profile_check, EntropyTripling, MetricReport, MetricRow, ProfileOptions,
    PRODUCT_CLOUD_CAP,
};
