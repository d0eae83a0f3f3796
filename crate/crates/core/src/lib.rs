//! Simulated method of moments for factor copulas with simulable latent
//! factors and factors estimable from exogenous data.

pub mod depmeas;
pub mod dists;
pub mod error;
pub mod infer;
pub mod margins;
pub mod mc;
pub mod seeds;
pub mod simcore;
pub mod smm;

pub use error::{Error, Result};
