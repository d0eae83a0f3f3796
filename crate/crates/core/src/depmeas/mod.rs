//! Pseudo-observations, bivariate rank dependence measures and their
//! block-wise aggregation into moment vectors.
//!
//! Ranks are stored as integers `2 * average_rank`, so rank-product sums and
//! tail counts are exact and independent of summation order.

mod measures;
mod moments;
mod rank;

pub use measures::{kendall_stat, pseudo_obs, qdep_stat, spearman_stat};
pub use moments::{empirical_moments, simulated_moments, Measure, MomentSpec};

pub(crate) use moments::rank_indices;
pub(crate) use rank::RankIndex;
