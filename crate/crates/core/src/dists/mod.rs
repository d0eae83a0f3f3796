//! Univariate distributions used by the factor model.
//!
//! Three families are needed: Hansen's standardized skewed Student-t (for the
//! latent factor and the idiosyncratic errors), the standard normal (Monte
//! Carlo margins and simulable normal factors), and the law of `log|Z|` for a
//! standard normal `Z` (log-absolute transformed GARCH innovations).
//!
//! The skewed-t is parametrised by the inverse degrees of freedom `zeta`
//! (`dof = 1/zeta > 2`) and the skewness `xi`, matching the packing of the
//! copula parameter vector.

mod logabs;
mod normal;
mod skewt;
mod student;

pub use logabs::{logabsnormal_cdf, logabsnormal_pdf, logabsnormal_quantile, LOGABS_MEAN, LOGABS_VAR};
pub use normal::{normal_cdf, normal_cdf_quantile, normal_pdf, normal_quantile, Direction};
pub use skewt::{skewt_cdf, skewt_pdf, skewt_quantile, SkewT, SkewTTable};
pub use student::{StudentT, StudentTTable};

pub(crate) use logabs::logabs_quantile_unchecked;
pub(crate) use normal::ppnd16;
