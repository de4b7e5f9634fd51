//! Small-ball probabilities of Rademacher polynomials by exhaustive
//! enumeration, coefficient graphs, and the anti-concentration bounds as
//! checkable formulas.

mod bounds;
mod exact;
mod graph;
mod poly;

pub use bounds::{
    binomial, ceil_root, elo_tail, fact_linear_nondegenerate_check,
    fact_quadratic_nondegenerate_check, markov_fraction_bound, mnv_check, EloTail, MnvProbe,
    NondegenerateCheck,
};
pub use exact::{exact_distribution, ExactDistribution, EXACT_MAX_VARS};
pub use graph::{greedy_maximal_matching, greedy_vertex_cover, matching_number, CoefficientGraph};
pub use poly::QuadraticPolynomial;
