use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::distribution::EntryDistribution;
use crate::error::{contract, invariant, LabError, Result};
use crate::index_set::IndexSet;
use crate::matrix::Matrix;
use crate::perm::{permanent_submatrix, HeavinessThreshold, TABLE_MAX_GROUND};
use crate::seed::SeedSpec;

use super::cover::{
    growth_threshold, iterative_cover_run_for, iterative_growth_run_for, CoverOutcome,
};
use super::weak::weak_growth_run;
use super::{GrowthParams, DEFAULT_FAMILY_CAP};

/// Stage lengths of the four-stage composition after weak growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSchedule {
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub delta: BigRational,
    pub big_k: BigRational,
    /// Steps of the first cover stage (`3R` in the lemma).
    pub j1: usize,
    /// Steps of the first growth stage (`5R`).
    pub j2: usize,
    /// Steps of the second growth stage (`5L²`).
    pub j3: usize,
    pub distribution: EntryDistribution,
    pub family_cap: usize,
}

impl PipelineSchedule {
    pub fn lemma_lengths(
        n: usize,
        l: usize,
        r: usize,
        delta: BigRational,
        big_k: BigRational,
    ) -> Self {
        PipelineSchedule {
            n,
            l,
            r,
            delta,
            big_k,
            j1: 3 * r,
            j2: 5 * r,
            j3: 5 * l * l,
            distribution: EntryDistribution::rademacher(),
            family_cap: DEFAULT_FAMILY_CAP,
        }
    }

    pub fn with_steps(mut self, j1: usize, j2: usize, j3: usize) -> Self {
        (self.j1, self.j2, self.j3) = (j1, j2, j3);
        self
    }

    /// Length of the final cover stage.
    pub fn j4(&self) -> usize {
        3 * self.l
    }

    /// Dimension handed to weak growth, `n - j1 - j2 - j3 - 3L`.
    pub fn n_weak(&self) -> Option<usize> {
        self.n.checked_sub(self.j1 + self.j2 + self.j3 + self.j4())
    }

    pub fn validate(&self) -> Result<usize> {
        let bad = |msg: String| Err(LabError::InvalidParams(msg));
        if self.l < 2 {
            return bad(format!("L = {} must be at least 2", self.l));
        }
        if self.r <= self.l * self.l {
            return bad(format!(
                "R = {} must exceed L² = {}",
                self.r,
                self.l * self.l
            ));
        }
        if self.n > TABLE_MAX_GROUND {
            return Err(LabError::Capacity {
                what: "pipeline dimension",
                limit: TABLE_MAX_GROUND,
                got: self.n,
            });
        }
        match self.n_weak() {
            Some(nw) if nw > self.r => Ok(nw),
            nw => bad(format!(
                "n' = n - j1 - j2 - j3 - 3L = {} must exceed R = {} (n = {}, j = {}, {}, {}, L = {})",
                nw.map_or_else(|| "negative".into(), |v| v.to_string()),
                self.r,
                self.n,
                self.j1,
                self.j2,
                self.j3,
                self.l
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub dim_in: usize,
    pub dim_out: usize,
    /// Witness rows are `{row_lo_in..dim_in}` on entry and `{row_lo_out..dim_out}` on exit.
    pub row_lo_in: usize,
    pub row_lo_out: usize,
    pub threshold_in: HeavinessThreshold,
    pub threshold_out: HeavinessThreshold,
    pub succeeded: bool,
    pub q_trajectory: Vec<Option<usize>>,
    pub failures: usize,
    pub progress_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub schedule: PipelineSchedule,
    pub stages: Vec<StageRecord>,
    pub failed_stage: Option<String>,
    /// Final weak-growth threshold `λ`.
    pub lambda: Option<HeavinessThreshold>,
    /// `λ / 2^(R-L)`.
    pub composed: Option<HeavinessThreshold>,
    /// `relabel[p-1]` is the original index at process position `p`.
    pub relabel: Vec<usize>,
    /// The sampled matrix in original labels, when all stages ran.
    pub matrix: Option<Matrix>,
    /// `B` in original labels, `|B| = n - L`, `{1..n} \ Y ⊆ B`.
    pub b: Option<IndexSet>,
    pub rows: Option<IndexSet>,
    pub permanent: Option<BigInt>,
}

impl PipelineOutcome {
    pub fn succeeded(&self) -> bool {
        self.b.is_some()
    }

    /// Output rows of each stage are the input rows of the next.
    pub fn check_wiring(&self) -> Result<()> {
        for w in self.stages.windows(2) {
            if w[0].dim_out != w[1].dim_in
                || w[0].row_lo_out != w[1].row_lo_in
                || w[0].threshold_out != w[1].threshold_in
            {
                return Err(invariant(format!(
                    "stage {} does not feed stage {}",
                    w[0].name, w[1].name
                )));
            }
        }
        Ok(())
    }
}

/// Process position → original index: `X` first, `Y` last, the rest in
/// between, each block in increasing order.
fn relabelling(n: usize, x: &IndexSet, y: &IndexSet) -> Vec<usize> {
    let rest = (1..=n).filter(|i| !x.contains(*i) && !y.contains(*i));
    x.iter().chain(rest).chain(y.iter()).collect()
}

fn stage(
    name: &str,
    out: &CoverOutcome,
    row_lo_in: usize,
    row_lo_out: usize,
    threshold_in: &HeavinessThreshold,
    threshold_out: HeavinessThreshold,
) -> StageRecord {
    StageRecord {
        name: name.into(),
        dim_in: out.trace.n,
        dim_out: out.matrix.n(),
        row_lo_in,
        row_lo_out,
        threshold_in: threshold_in.clone(),
        threshold_out,
        succeeded: out.trace.succeeded(),
        q_trajectory: out.trace.q_trajectory(),
        failures: out.trace.failures(),
        progress_steps: out.trace.progress_steps(),
    }
}

/// Weak growth to `n'`, then cover(`S=R`), growth(`T=L²`, `S=R`),
/// growth(`T=L`, `S=L²`) and cover(`S=L`) up to dimension `n`.
pub fn grow_single_minor_run(
    x: &IndexSet,
    y: &IndexSet,
    schedule: &PipelineSchedule,
    seed: SeedSpec,
) -> Result<PipelineOutcome> {
    let n_weak = schedule.validate()?;
    let (n, l, r) = (schedule.n, schedule.l, schedule.r);
    if x.len() != l || y.len() != 3 * l || !x.is_disjoint(y) {
        return Err(contract(format!(
            "need disjoint |X| = {l}, |Y| = {}; got X = {x}, Y = {y}",
            3 * l
        )));
    }
    if x.iter().chain(y.iter()).any(|i| i > n) {
        return Err(contract(format!("X, Y must lie in {{1..{n}}}")));
    }
    let relabel = relabelling(n, x, y);
    let mut outcome = PipelineOutcome {
        schedule: schedule.clone(),
        stages: Vec::new(),
        failed_stage: None,
        lambda: None,
        composed: None,
        relabel: relabel.clone(),
        matrix: None,
        b: None,
        rows: None,
        permanent: None,
    };

    let mut weak_params =
        GrowthParams::weak(n_weak, r, schedule.delta.clone(), schedule.big_k.clone());
    weak_params.l = l;
    weak_params.distribution = schedule.distribution.clone();
    weak_params.family_cap = schedule.family_cap;
    let weak = weak_growth_run(&weak_params, seed)?;
    let lambda = weak.trace.final_lambda.clone();
    let Some(start) = weak
        .family
        .as_ref()
        .and_then(|f| f.records.first())
        .map(|rec| rec.cols)
    else {
        outcome.failed_stage = Some("weak".into());
        return Ok(outcome);
    };
    let composed = lambda.div_pow2((r - l) as u32);
    if growth_threshold(&growth_threshold(&lambda, r, l * l), l * l, l) != composed {
        return Err(invariant("composed threshold differs from λ/2^(R-L)"));
    }
    outcome.lambda = Some(lambda.clone());
    outcome.composed = Some(composed.clone());

    let c1 = iterative_cover_run_for(&weak.matrix, &start, r, schedule.j1, &lambda, seed)?;
    outcome
        .stages
        .push(stage("cover-R", &c1, r + 1, r + 1, &lambda, lambda.clone()));
    let Some(b1) = c1.b_prime() else {
        outcome.failed_stage = Some("cover-R".into());
        return Ok(outcome);
    };

    let lam2 = growth_threshold(&lambda, r, l * l);
    let g1 = iterative_growth_run_for(&c1.matrix, &b1, r, l * l, schedule.j2, &lambda, seed)?;
    outcome.stages.push(stage(
        "growth-L2",
        &g1,
        r + 1,
        l * l + 1,
        &lambda,
        lam2.clone(),
    ));
    let Some(b2) = g1.b_prime() else {
        outcome.failed_stage = Some("growth-L2".into());
        return Ok(outcome);
    };

    let g2 = iterative_growth_run_for(&g1.matrix, &b2, l * l, l, schedule.j3, &lam2, seed)?;
    outcome.stages.push(stage(
        "growth-L",
        &g2,
        l * l + 1,
        l + 1,
        &lam2,
        composed.clone(),
    ));
    let Some(b3) = g2.b_prime() else {
        outcome.failed_stage = Some("growth-L".into());
        return Ok(outcome);
    };

    let c2 = iterative_cover_run_for(&g2.matrix, &b3, l, schedule.j4(), &composed, seed)?;
    outcome.stages.push(stage(
        "cover-L",
        &c2,
        l + 1,
        l + 1,
        &composed,
        composed.clone(),
    ));
    outcome.check_wiring()?;
    let m = c2.matrix.to_matrix();
    let original = Matrix::from_fn(n, n, |i, j| {
        let (p, q) = (position(&relabel, i + 1), position(&relabel, j + 1));
        m.get(p - 1, q - 1)
    });
    outcome.matrix = Some(original.clone());
    let Some(b4) = c2.b_prime() else {
        outcome.failed_stage = Some("cover-L".into());
        return Ok(outcome);
    };

    let to_orig = |s: &IndexSet| IndexSet::from_indices(n, s.iter().map(|p| relabel[p - 1]));
    let rows = to_orig(&IndexSet::range(n, l + 1, n)?)?;
    let b = to_orig(&b4)?;
    let outside_y = IndexSet::full(n)?.difference(&y.regrounded(n)?);
    if b.len() != n - l
        || !outside_y.is_subset(&b)
        || rows != IndexSet::full(n)?.difference(&x.regrounded(n)?)
    {
        return Err(invariant(format!(
            "final sets rows = {rows}, B = {b} violate the output shape"
        )));
    }
    let per = permanent_submatrix(&original, &rows, &b)?;
    if !composed.admits(&per) {
        return Err(invariant(format!(
            "final permanent {per} is below {composed}"
        )));
    }
    outcome.b = Some(b);
    outcome.rows = Some(rows);
    outcome.permanent = Some(per);
    Ok(outcome)
}

fn position(relabel: &[usize], original: usize) -> usize {
    relabel
        .iter()
        .position(|&v| v == original)
        .expect("relabelling is a permutation")
        + 1
}
