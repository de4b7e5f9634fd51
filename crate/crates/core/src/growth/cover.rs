use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{contract, invariant, LabError, Result};
use crate::index_set::{low_mask, IndexSet};
use crate::matrix::{extend_symmetric, SymmetricMatrixProcess};
use crate::perm::{permanent_submatrix, HeavinessThreshold, SubsetPermanents, TABLE_MAX_GROUND};
use crate::seed::SeedSpec;

use super::family::{HeavyFamily, HeavyRecord};
use super::steps::corner_step;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverVariant {
    /// `Q_m = min |{1..n} \ B′|`, target `0`.
    Cover,
    /// `Q_m = min Q ≥ T` with a `λ/2^(S-Q)`-heavy prefix witness, target `T`.
    Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverStep {
    pub m: usize,
    /// `None` stands for `∞`.
    pub q: Option<usize>,
    /// Bound certified by the constructive step from the previous witness.
    pub constructive_q: Option<usize>,
    /// Column chosen by the failure-avoiding augmentation.
    pub kept_column: Option<usize>,
    /// Column chosen by the progress augmentation (cover variant).
    pub progress_column: Option<usize>,
    /// Outcome of the corner step (growth variant).
    pub corner_heavy: Option<bool>,
    pub failure: bool,
    pub progress: bool,
    /// First witness column set attaining `q`.
    pub witness: Option<IndexSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverTrace {
    pub variant: CoverVariant,
    /// Dimension of the starting matrix.
    pub n: usize,
    pub s: usize,
    /// Lower limit of `Q` (growth variant; `0` for cover).
    pub t: usize,
    pub lambda: HeavinessThreshold,
    pub q_start: Option<usize>,
    pub steps: Vec<CoverStep>,
}

fn key(q: Option<usize>) -> usize {
    q.unwrap_or(usize::MAX)
}

/// `λ / 2^(S-Q)`, exact for `Q` on either side of `S`.
pub fn growth_threshold(lambda: &HeavinessThreshold, s: usize, q: usize) -> HeavinessThreshold {
    if q <= s {
        lambda.div_pow2((s - q) as u32)
    } else {
        lambda.mul_pow2((q - s) as u32)
    }
}

impl CoverTrace {
    pub fn target(&self) -> usize {
        match self.variant {
            CoverVariant::Cover => 0,
            CoverVariant::Growth => self.t,
        }
    }

    pub fn final_q(&self) -> Option<usize> {
        self.steps.last().map_or(self.q_start, |s| s.q)
    }

    pub fn succeeded(&self) -> bool {
        self.final_q() == Some(self.target())
    }

    pub fn failures(&self) -> usize {
        self.steps.iter().filter(|s| s.failure).count()
    }

    pub fn progress_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.progress).count()
    }

    pub fn q_trajectory(&self) -> Vec<Option<usize>> {
        std::iter::once(self.q_start)
            .chain(self.steps.iter().map(|s| s.q))
            .collect()
    }

    /// Check the failure/progress labels, the constructive bounds and the
    /// range of every `Q_m`.
    pub fn check(&self) -> Result<()> {
        let target = self.target();
        let mut prev = self.q_start;
        for (idx, st) in self.steps.iter().enumerate() {
            let m = self.n + idx + 1;
            if st.m != m {
                return Err(invariant(format!("step index {} recorded as {}", m, st.m)));
            }
            let failure = key(st.q) > key(prev);
            let progress = key(st.q) < key(prev)
                || (st.q == Some(target) && prev == Some(target))
                || prev.is_none();
            if failure != st.failure || progress != st.progress {
                return Err(invariant(format!(
                    "step {m}: failure/progress labels disagree with Q"
                )));
            }
            if key(st.q) > key(st.constructive_q) {
                return Err(invariant(format!(
                    "step {m}: exact Q = {:?} exceeds the constructive bound {:?}",
                    st.q, st.constructive_q
                )));
            }
            if let Some(q) = st.q {
                let ok = match self.variant {
                    CoverVariant::Cover => q <= self.n,
                    CoverVariant::Growth => q >= self.t && 2 * q <= m,
                };
                if !ok || st.witness.is_none() {
                    return Err(invariant(format!("step {m}: Q = {q} out of range")));
                }
            }
            prev = st.q;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CoverOutcome {
    pub trace: CoverTrace,
    /// Final witness at the target `Q`, re-verified with an independent kernel.
    pub witness: Option<HeavyRecord>,
    pub matrix: SymmetricMatrixProcess,
}

impl CoverOutcome {
    pub fn b_prime(&self) -> Option<IndexSet> {
        self.witness.as_ref().map(|w| w.cols)
    }
}

/// Tables of one step, keyed by the first row.
struct StepTables<'a> {
    m: &'a SymmetricMatrixProcess,
    tables: BTreeMap<usize, SubsetPermanents>,
}

impl<'a> StepTables<'a> {
    fn new(m: &'a SymmetricMatrixProcess) -> Self {
        StepTables {
            m,
            tables: BTreeMap::new(),
        }
    }

    /// Permanents of rows `{lo, …, m}` against every column set of `{1..m}`.
    fn rows_from(&mut self, lo: usize) -> Result<&SubsetPermanents> {
        if !self.tables.contains_key(&lo) {
            let top = self.m.n();
            let t = SubsetPermanents::compute(
                &self.m.to_matrix(),
                &IndexSet::range(top, lo, top)?,
                top,
            )?;
            self.tables.insert(lo, t);
        }
        Ok(&self.tables[&lo])
    }
}

fn heavy(v: Option<i128>, min_abs: u128) -> bool {
    v.is_some_and(|v| v.unsigned_abs() >= min_abs)
}

/// Smallest `i ∈ I` with `b | {i}` heavy in `table`; the table-backed form
/// of `augment_one_column`.
fn first_heavy_extension(
    table: &SubsetPermanents,
    b: u64,
    i_mask: u64,
    min_abs: u128,
) -> Option<usize> {
    let mut rest = i_mask;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg();
        rest ^= bit;
        if heavy(table.get_mask(b | bit), min_abs) {
            return Some(bit.trailing_zeros() as usize + 1);
        }
    }
    None
}

fn exact_cover_q(t: &SubsetPermanents, n: usize, min_abs: u128) -> Option<(usize, u64)> {
    let low = low_mask(n);
    let mut best: Option<(usize, u64)> = None;
    for mask in t.heavy_masks(min_abs) {
        let q = n - (mask & low).count_ones() as usize;
        if best.is_none_or(|(b, _)| q < b) {
            best = Some((q, mask));
        }
    }
    best
}

fn exact_growth_q(
    tables: &mut StepTables,
    lambda: &HeavinessThreshold,
    s: usize,
    t: usize,
) -> Result<Option<(usize, u64)>> {
    let m = tables.m.n();
    for q in t..=m / 2 {
        let min_abs = growth_threshold(lambda, s, q).min_admitted_u128();
        let prefix = low_mask(q);
        let table = tables.rows_from(q + 1)?;
        if let Some(mask) = table
            .heavy_masks(min_abs)
            .find(|mask| mask & prefix == prefix)
        {
            return Ok(Some((q, mask)));
        }
    }
    Ok(None)
}

fn check_start(
    m: &SymmetricMatrixProcess,
    b: &IndexSet,
    s: usize,
    steps: usize,
    lambda: &HeavinessThreshold,
) -> Result<()> {
    let n = m.n();
    if s == 0 || s >= n {
        return Err(LabError::InvalidParams(format!(
            "need 1 ≤ S < n, got S = {s}, n = {n}"
        )));
    }
    if n + steps > TABLE_MAX_GROUND {
        return Err(LabError::Capacity {
            what: "cover/growth final dimension",
            limit: TABLE_MAX_GROUND,
            got: n + steps,
        });
    }
    if b.len() != n - s || b.iter().last().is_some_and(|i| i > n) {
        return Err(contract(format!(
            "B = {b} must be an (n-S)-subset of {{1..{n}}}"
        )));
    }
    let rows = IndexSet::range(n, s + 1, n)?;
    if !lambda.admits(&permanent_submatrix(
        &m.to_matrix(),
        &rows,
        &b.regrounded(n)?,
    )?) {
        return Err(contract(format!("M[{rows}, {b}] is not {lambda}-heavy")));
    }
    Ok(())
}

fn finish(
    trace: CoverTrace,
    m: SymmetricMatrixProcess,
    witness_mask: Option<u64>,
    rows_lo: usize,
    threshold: HeavinessThreshold,
) -> Result<CoverOutcome> {
    trace.check()?;
    let witness = match witness_mask.filter(|_| trace.succeeded()) {
        None => None,
        Some(mask) => {
            let top = m.n();
            let rows = IndexSet::range(top, rows_lo, top)?;
            let cols = IndexSet::from_bits(top, mask)?;
            let per: BigInt = permanent_submatrix(&m.to_matrix(), &rows, &cols)?;
            let mut fam = HeavyFamily::new(threshold, top);
            fam.push(rows, cols, per)?;
            fam.verify(&m.to_matrix())?;
            fam.records.pop()
        }
    };
    Ok(CoverOutcome {
        trace,
        witness,
        matrix: m,
    })
}

/// `3S` extension steps tracking `Q_m`, the fewest columns of `{1..n}`
/// missing from a `λ`-heavy witness on rows `{S+1..m}`.
pub fn iterative_cover_run(
    m_n: &SymmetricMatrixProcess,
    b: &IndexSet,
    s: usize,
    lambda: &HeavinessThreshold,
    seed: SeedSpec,
) -> Result<CoverOutcome> {
    iterative_cover_run_for(m_n, b, s, 3 * s, lambda, seed)
}

/// [`iterative_cover_run`] with an explicit number of steps.
pub fn iterative_cover_run_for(
    m_n: &SymmetricMatrixProcess,
    b: &IndexSet,
    s: usize,
    steps: usize,
    lambda: &HeavinessThreshold,
    seed: SeedSpec,
) -> Result<CoverOutcome> {
    check_start(m_n, b, s, steps, lambda)?;
    let n = m_n.n();
    let min_abs = lambda.min_admitted_u128();
    let mut m = m_n.clone();
    let start = SubsetPermanents::compute(&m.to_matrix(), &IndexSet::range(n, s + 1, n)?, n)?;
    let mut state = exact_cover_q(&start, n, min_abs);
    let mut trace = CoverTrace {
        variant: CoverVariant::Cover,
        n,
        s,
        t: 0,
        lambda: lambda.clone(),
        q_start: state.map(|x| x.0),
        steps: Vec::new(),
    };
    for _ in 0..steps {
        let next = extend_symmetric(&m, seed)?;
        let top = next.n();
        let mut tables = StepTables::new(&next);
        let table = tables.rows_from(s + 1)?;
        let (mut kept, mut progress_col, mut constructive) = (None, None, None);
        if let Some((q, wit)) = state {
            let i_keep = low_mask(top - 1) & !wit;
            kept = first_heavy_extension(table, wit, i_keep, min_abs);
            if let Some(i) = kept {
                constructive = Some(q - usize::from(i <= n));
            }
            if q > 0 {
                progress_col = first_heavy_extension(table, wit, low_mask(n) & !wit, min_abs);
                if progress_col.is_some() {
                    constructive = Some(q - 1);
                }
            }
        }
        let new_state = exact_cover_q(table, n, min_abs);
        let (prev, q) = (state.map(|x| x.0), new_state.map(|x| x.0));
        trace.steps.push(CoverStep {
            m: top,
            q,
            constructive_q: constructive,
            kept_column: kept,
            progress_column: progress_col,
            corner_heavy: None,
            failure: key(q) > key(prev),
            progress: key(q) < key(prev) || (q == Some(0) && prev == Some(0)) || prev.is_none(),
            witness: new_state
                .map(|x| IndexSet::from_bits(top, x.1))
                .transpose()?,
        });
        state = new_state;
        m = next;
    }
    finish(trace, m, state.map(|x| x.1), s + 1, lambda.clone())
}

/// `5S` extension steps tracking `Q_m`, the least `Q ≥ T` with a
/// `λ/2^(S-Q)`-heavy witness `B′ ⊇ {1..Q}` on rows `{Q+1..m}`.
pub fn iterative_growth_run(
    m_n: &SymmetricMatrixProcess,
    b: &IndexSet,
    s: usize,
    t: usize,
    lambda: &HeavinessThreshold,
    seed: SeedSpec,
) -> Result<CoverOutcome> {
    iterative_growth_run_for(m_n, b, s, t, 5 * s, lambda, seed)
}

/// [`iterative_growth_run`] with an explicit number of steps.
pub fn iterative_growth_run_for(
    m_n: &SymmetricMatrixProcess,
    b: &IndexSet,
    s: usize,
    t: usize,
    steps: usize,
    lambda: &HeavinessThreshold,
    seed: SeedSpec,
) -> Result<CoverOutcome> {
    if t < 2 || t >= s {
        return Err(LabError::InvalidParams(format!(
            "need 2 ≤ T < S, got T = {t}, S = {s}"
        )));
    }
    check_start(m_n, b, s, steps, lambda)?;
    let n = m_n.n();
    if !IndexSet::range(n, 1, s)?.is_subset(&b.regrounded(n)?) {
        return Err(contract(format!("B = {b} must contain {{1..{s}}}")));
    }
    let mut m = m_n.clone();
    let mut state = exact_growth_q(&mut StepTables::new(&m), lambda, s, t)?;
    let mut trace = CoverTrace {
        variant: CoverVariant::Growth,
        n,
        s,
        t,
        lambda: lambda.clone(),
        q_start: state.map(|x| x.0),
        steps: Vec::new(),
    };
    for _ in 0..steps {
        let next = extend_symmetric(&m, seed)?;
        let top = next.n();
        let mut tables = StepTables::new(&next);
        let (mut kept, mut corner_heavy, mut constructive) = (None, None, None);
        if let Some((q, wit)) = state {
            let lam_q = growth_threshold(lambda, s, q);
            let table = tables.rows_from(q + 1)?;
            kept = first_heavy_extension(
                table,
                wit,
                low_mask(top - 1) & !wit,
                lam_q.min_admitted_u128(),
            );
            if kept.is_some() {
                constructive = Some(q);
            }
            if q > t {
                let a_set = IndexSet::range(top - 1, q + 1, top - 1)?;
                let b_set = IndexSet::from_bits(top - 1, wit)?;
                let mut free = a_set.difference(&b_set).iter();
                let (b1, b2) = match (free.next(), free.next()) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return Err(invariant(format!("step {top}: fewer than two free rows"))),
                };
                let corner = corner_step(&next.to_matrix(), &a_set, &b_set, q, b1, b2, &lam_q)?;
                if corner.rows != IndexSet::range(top, q, top)? {
                    return Err(invariant(format!(
                        "step {top}: corner rows {}",
                        corner.rows
                    )));
                }
                let table = tables.rows_from(q)?;
                if table.get(&corner.cols).map(BigInt::from) != Some(corner.permanent.clone()) {
                    return Err(invariant(format!(
                        "step {top}: corner permanent disagrees with table"
                    )));
                }
                if corner.heavy {
                    constructive = Some(q - 1);
                }
                corner_heavy = Some(corner.heavy);
            }
        }
        let new_state = exact_growth_q(&mut tables, lambda, s, t)?;
        let (prev, q) = (state.map(|x| x.0), new_state.map(|x| x.0));
        trace.steps.push(CoverStep {
            m: top,
            q,
            constructive_q: constructive,
            kept_column: kept,
            progress_column: None,
            corner_heavy,
            failure: key(q) > key(prev),
            progress: key(q) < key(prev) || (q == Some(t) && prev == Some(t)) || prev.is_none(),
            witness: new_state
                .map(|x| IndexSet::from_bits(top, x.1))
                .transpose()?,
        });
        state = new_state;
        m = next;
    }
    let threshold = growth_threshold(lambda, s, t);
    finish(trace, m, state.map(|x| x.1), t + 1, threshold)
}

/// First `B ⊇ {1..prefix}` in mask order with `M[{S+1..n}, B]` `λ`-heavy.
pub fn first_heavy_start(
    m: &SymmetricMatrixProcess,
    s: usize,
    prefix: usize,
    lambda: &HeavinessThreshold,
) -> Result<Option<IndexSet>> {
    let n = m.n();
    let t = SubsetPermanents::compute(&m.to_matrix(), &IndexSet::range(n, s + 1, n)?, n)?;
    let p = low_mask(prefix);
    let found = t
        .heavy_masks(lambda.min_admitted_u128())
        .find(|mask| mask & p == p);
    found.map(|mask| IndexSet::from_bits(n, mask)).transpose()
}
