//! The SMM objective, its bounded derivative-free minimization and the
//! optional second step with an estimated efficient weight.

mod estimate;
mod multistart;
mod nelder_mead;
mod problem;

pub use estimate::{smm_estimate, SmmOptions, SmmResult};
pub use multistart::{multi_start, ranked_starts, start_points, StartChoice};
pub use nelder_mead::{nelder_mead_bounded, NelderMeadOptions, NelderMeadOutcome};
pub use problem::{Evaluation, SmmProblem, PENALTY};

pub(crate) use problem::quadratic_form;
