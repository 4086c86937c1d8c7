//! Norm artifacts, sorted component profiles and distributional checks.

mod bessel;
mod distribution;
mod profile;

pub use bessel::{bessel_k0, product_density};
pub use distribution::{
    component_distribution, component_samples, pair_cosines, product_distribution,
    product_samples, report_from_samples, sample_pair_cosines, Bin, DistributionReport,
    Reference, BIN_SPAN, DEFAULT_SAMPLES, NUM_BINS,
};
pub use profile::{
    norm_rank_correlation, rank_analysis, sorted_profiles, ProfileMode, RankRecord,
    SortedProfile,
};
