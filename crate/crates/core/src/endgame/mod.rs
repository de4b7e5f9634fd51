//! One survival step for a complement-disjoint family of heavy minors.
//!
//! Each heavy pair `(A_ℓ, B_ℓ)` is grown by one index into a quadruple
//! with a large `x_i x_j` coefficient. After one new row `x` is exposed,
//! the permanents `P_ℓ(x)` of the grown blocks are classified as in the
//! anti-concentration argument and the surviving blocks are returned.

mod quadruple;
mod run;
mod state;

pub use quadruple::{
    build_quadruples, check_endgame_family, find_endgame_family, verify_quadruples, Quadruple,
};
pub use run::{endgame_step_run, EndgameOutcome, EndgameSummary};
pub use state::{
    at_least_root, at_most_power, classify_indices, t_ell_statistics, EndgameState, IndexRecord,
    Label,
};
