//! Inference after SMM estimation: finite-difference Jacobian of the
//! simulated moments, bootstrap covariance of the moment gap, sandwich
//! covariance, t statistics and the overidentification test.

mod bootstrap;
mod jacobian;
mod jtest;
mod linalg;
mod report;
mod sandwich;

pub use bootstrap::{bootstrap_sigma, bootstrap_sigma_with_indices, BootstrapMode};
pub use jacobian::{numeric_jacobian, numeric_jacobian_of, Difference, Jacobian};
pub use jtest::{j_limit_matrix, j_test, JMode, JTest};
pub use linalg::regularized_inverse;
pub use report::{infer, InferenceOptions, InferenceReport};
pub use sandwich::{omega, std_errors, t_stats};
