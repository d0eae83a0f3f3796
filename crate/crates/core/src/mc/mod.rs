//! Monte Carlo harness for the simulation designs.
//!
//! Every replication draws AR(1)-GARCH(1,1) returns whose innovations have
//! the design's factor copula, fits and filters the margins, recovers the
//! observable factor where there is one, and then estimates and tests the
//! copula parameters. Replication seeds are derived from the master seed, so
//! results do not depend on the number of worker threads.

mod design;
mod dgp;
mod run;
mod summary;

pub use design::{DesignId, McDesign, McZMode, MARGIN_PARAMS, QDEP_NARROW, QDEP_WIDE, Z_AR, Z_GARCH};
pub use dgp::{Dgp, MarginalCdf, McData};
pub use run::{replication_seed, run_design, run_replication, run_replications, McRun, Replication};
pub use summary::McSummary;
