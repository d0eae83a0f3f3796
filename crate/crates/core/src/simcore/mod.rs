//! Common random numbers and simulation of the factor panel.

mod bank;
mod simulate;
mod spec;

pub use bank::{make_draw_bank, BankDims, DrawBank};
pub(crate) use bank::open_uniform;
pub use simulate::{simulate_panel, Panel};
pub(crate) use simulate::check_inputs;
pub use spec::{FactorCopulaSpec, Family, Slot, ZFamily, ZMode, LOADING_BOUND, XI_BOUNDS, ZETA_BOUNDS};

