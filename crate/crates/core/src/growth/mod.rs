//! Random growth of heavy minors.
//!
//! Every process here owns a [`SymmetricMatrixProcess`](crate::matrix::SymmetricMatrixProcess)
//! and exposes one new row and column per step. Heaviness events over
//! all subsets of a fixed row set are decided exactly through
//! [`SubsetPermanents`](crate::perm::SubsetPermanents), which caps the
//! ground at 24 indices.

mod cover;
mod exact;
mod family;
mod pipeline;
mod steps;
mod weak;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::distribution::EntryDistribution;
use crate::perm::HeavinessThreshold;

pub use cover::{
    first_heavy_start, growth_threshold, iterative_cover_run, iterative_cover_run_for,
    iterative_growth_run, iterative_growth_run_for, CoverOutcome, CoverStep, CoverTrace,
    CoverVariant,
};
pub use exact::{augment_success_probability, corner_success_probability};
pub use family::{HeavyFamily, HeavyRecord};
pub use pipeline::{grow_single_minor_run, PipelineOutcome, PipelineSchedule, StageRecord};
pub use steps::{
    augment_one_column, classify_growth_step, corner_step, Branch, ChildHistogram, CornerStep,
};
pub use weak::{weak_growth_run, GrowthTrace, StepCase, WeakGrowthOutcome, WeakStep};

pub const DEFAULT_FAMILY_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub n: usize,
    pub r: usize,
    pub l: usize,
    pub s: usize,
    pub t: usize,
    pub delta: BigRational,
    pub epsilon: BigRational,
    pub big_k: BigRational,
    /// Target threshold, when one is fixed in advance.
    pub lambda: Option<HeavinessThreshold>,
    pub distribution: EntryDistribution,
    pub family_cap: usize,
}

impl GrowthParams {
    /// Parameters for the weak-growth process alone.
    pub fn weak(n: usize, r: usize, delta: BigRational, big_k: BigRational) -> Self {
        GrowthParams {
            n,
            r,
            l: 0,
            s: 0,
            t: 0,
            delta,
            epsilon: BigRational::new(1.into(), 10.into()),
            big_k,
            lambda: None,
            distribution: EntryDistribution::rademacher(),
            family_cap: DEFAULT_FAMILY_CAP,
        }
    }
}
