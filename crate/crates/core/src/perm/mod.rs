//! Exact permanents, heaviness thresholds and expansion identities.

mod expansion;
mod kernel;
mod table;
mod threshold;

pub use expansion::{
    choose_noncancelling_pair, double_expansion, is_heavy, minor_permanent, permanent_submatrix,
    row_expansion, NoncancellingPair, PairCase,
};
pub use kernel::{
    permanent, permanent_glynn_i128, permanent_naive, permanent_ryser, permanent_ryser_i128,
    ryser_fits_i128, PermanentValue, NAIVE_MAX, RYSER_MAX,
};
pub use table::{SubsetPermanents, TABLE_MAX_GROUND};
pub use threshold::{ln_bigint, ln_rational, HeavinessThreshold, RationalPower};
