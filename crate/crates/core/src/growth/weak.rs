use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{contract, invariant, LabError, Result};
use crate::index_set::IndexSet;
use crate::matrix::{extend_symmetric, SymmetricMatrixProcess};
use crate::perm::{HeavinessThreshold, SubsetPermanents, TABLE_MAX_GROUND};
use crate::seed::SeedSpec;

use super::family::HeavyFamily;
use super::steps::{child_counts, classify_masks, Branch, ChildHistogram};
use super::GrowthParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepCase {
    I,
    II,
    III,
    IV,
}

impl StepCase {
    /// The amount subtracted from `W` besides the drift `1 - δ`.
    fn w_penalty(self) -> i64 {
        match self {
            StepCase::I => 3,
            StepCase::II => 1,
            StepCase::III | StepCase::IV => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StepCase::I => "i",
            StepCase::II => "ii",
            StepCase::III => "iii",
            StepCase::IV => "iv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakStep {
    pub k: usize,
    pub n_k: BigRational,
    pub lambda_k: HeavinessThreshold,
    pub w_k: BigRational,
    /// `λ_k`-heavy `k`-subsets of `{1, …, k+R}` at this step.
    pub heavy_count: u64,
    pub parents_truncated: bool,
    pub children: ChildHistogram,
    /// `λ_k`-heavy `(k+1)`-subsets after the extension.
    pub next_heavy: u64,
    /// `λ_k^+`-heavy `(k+1)`-subsets after the extension.
    pub next_heavy_plus: u64,
    pub case: StepCase,
    pub n_next: BigRational,
    pub lambda_next: HeavinessThreshold,
    pub w_next: BigRational,
    /// Children whose new permanent was re-derived from the row expansion.
    pub expansion_checks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub n: usize,
    pub r: usize,
    pub delta: BigRational,
    pub big_k: BigRational,
    pub steps: Vec<WeakStep>,
    /// `W_1, …, W_{n-R}`, frozen after an abort.
    pub w: Vec<BigRational>,
    /// Step at which case (iv) occurred (`0` when `E(1, 1, 1)` fails).
    pub aborted_at: Option<usize>,
    pub final_n: BigRational,
    pub final_lambda: HeavinessThreshold,
    /// Whether `δ < 1/16` and `δn ≤ R ≤ 2δn`.
    pub asymptotic_regime: bool,
    pub reached_target: Option<bool>,
}

fn ceil_u64(x: &BigRational) -> u64 {
    x.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

impl GrowthTrace {
    pub fn case_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for s in &self.steps {
            c[s.case as usize] += 1;
        }
        c
    }

    pub fn labels(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.case.label())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Re-derive every recorded quantity from its definition.
    pub fn check(&self) -> Result<()> {
        let r = BigRational::from_integer(self.r.into());
        let n = BigRational::from_integer(self.n.into());
        let eight = BigRational::from_integer(8.into());
        let plus_ratio = &r / (&eight * &self.big_k);
        let minus_ratio = &r / (&eight * &n);
        let exponent = BigRational::new(1.into(), 2.into()) - &self.delta;
        let drift = BigRational::one() - &self.delta;
        let fail = |msg: String| Err(invariant(msg));
        let mut expect_n = BigRational::one();
        let mut expect_lambda = HeavinessThreshold::one();
        let mut expect_w = BigRational::zero();
        for (idx, s) in self.steps.iter().enumerate() {
            let k = idx + 1;
            if s.k != k || s.n_k != expect_n || s.lambda_k != expect_lambda || s.w_k != expect_w {
                return fail(format!(
                    "step {k}: state does not continue the previous step"
                ));
            }
            if ceil_u64(&s.n_k) > 1u64 << (k + self.r).min(63) {
                return fail(format!(
                    "step {k}: N_k = {} exceeds 2^{}",
                    s.n_k,
                    k + self.r
                ));
            }
            if s.heavy_count < ceil_u64(&s.n_k) {
                return fail(format!("step {k}: E(k, N_k, λ_k) does not hold"));
            }
            let h = &s.children;
            if h.below_k + h.at_least_k != (h.r * h.parents) as u64 || h.r != self.r {
                return fail(format!("step {k}: Σ q|S_q| ≠ RN"));
            }
            let sum: u64 = h.histogram.iter().map(|&(q, c)| (q * c) as u64).sum();
            if sum != h.below_k + h.at_least_k {
                return fail(format!("step {k}: histogram does not sum to RN"));
            }
            let branch = if 2 * h.below_k >= (h.r * h.parents) as u64 {
                Branch::EPrime
            } else {
                Branch::EDoublePrime
            };
            if branch != h.branch {
                return fail(format!(
                    "step {k}: branch label disagrees with the histogram"
                ));
            }
            let n_plus = &s.n_k * &plus_ratio;
            let n_minus = &s.n_k * &minus_ratio;
            let lambda_plus = s.lambda_k.times_power(&self.big_k, &exponent)?;
            let case = if branch == Branch::EPrime && s.next_heavy >= ceil_u64(&n_plus) {
                StepCase::I
            } else if branch == Branch::EDoublePrime && s.next_heavy_plus >= ceil_u64(&n_minus) {
                StepCase::II
            } else if s.next_heavy >= ceil_u64(&n_minus) {
                StepCase::III
            } else {
                StepCase::IV
            };
            if case != s.case {
                return fail(format!(
                    "step {k}: case {:?} recorded, {case:?} derived",
                    s.case
                ));
            }
            let (n_next, l_next) = match case {
                StepCase::I => (n_plus, s.lambda_k.clone()),
                StepCase::II => (n_minus, lambda_plus),
                StepCase::III => (n_minus, s.lambda_k.clone()),
                StepCase::IV => (s.n_k.clone(), s.lambda_k.clone()),
            };
            if case != StepCase::IV && (s.n_next != n_next || s.lambda_next != l_next) {
                return fail(format!("step {k}: N/λ update does not match case {case:?}"));
            }
            let w_next = &s.w_k + &drift - BigRational::from_integer(case.w_penalty().into());
            if s.w_next != w_next {
                return fail(format!("step {k}: W recurrence violated"));
            }
            if self.w.get(k) != Some(&w_next) && k < self.w.len() {
                return fail(format!(
                    "step {k}: W trajectory disagrees with the step record"
                ));
            }
            if case == StepCase::IV && idx + 1 != self.steps.len() {
                return fail(format!("step {k}: process continued after abort"));
            }
            expect_n = s.n_next.clone();
            expect_lambda = s.lambda_next.clone();
            expect_w = s.w_next.clone();
        }
        if self.w.first().is_some_and(|w| !w.is_zero()) {
            return fail("W_1 ≠ 0".into());
        }
        let last = self.steps.len();
        if self.w.iter().skip(last + 1).any(|w| *w != expect_w) {
            return fail("W not frozen after the last step".into());
        }
        let aborted = self.steps.last().is_some_and(|s| s.case == StepCase::IV);
        if aborted != self.aborted_at.is_some_and(|k| k > 0) {
            return fail("abort flag disagrees with the step cases".into());
        }
        if !aborted
            && self.aborted_at.is_none()
            && (self.final_n != expect_n || self.final_lambda != expect_lambda)
        {
            return fail("final N/λ differ from the last step".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct WeakGrowthOutcome {
    pub trace: GrowthTrace,
    /// Witnesses for `E(n-R, N_{n-R}, λ_{n-R})`: rows `{R+1, …, n}`.
    pub family: Option<HeavyFamily>,
    pub matrix: SymmetricMatrixProcess,
    /// Heavy sets beyond the family cap were dropped.
    pub family_truncated: bool,
}

fn rows_from(r: usize, top: usize) -> Result<IndexSet> {
    IndexSet::range(top, r + 1, top)
}

/// Heavy `k`-subsets of the current matrix, rows `{R+1, …, k+R}`.
fn table(m: &SymmetricMatrixProcess, r: usize) -> Result<SubsetPermanents> {
    let top = m.n();
    SubsetPermanents::compute(&m.to_matrix(), &rows_from(r, top)?, top)
}

fn heavy_count(t: &SubsetPermanents, lambda: &HeavinessThreshold) -> u64 {
    t.count_heavy(lambda.min_admitted_u128()) as u64
}

/// Run the `N_k / λ_k / W_k` case process of the weak growth lemma from
/// `k = 1` to `n - R`, exposing one row and column per step.
pub fn weak_growth_run(params: &GrowthParams, seed: SeedSpec) -> Result<WeakGrowthOutcome> {
    let (n, r) = (params.n, params.r);
    if r == 0 || r >= n {
        return Err(LabError::InvalidParams(format!(
            "need 1 ≤ R < n, got R = {r}, n = {n}"
        )));
    }
    if n > TABLE_MAX_GROUND {
        return Err(LabError::Capacity {
            what: "weak growth dimension",
            limit: TABLE_MAX_GROUND,
            got: n,
        });
    }
    let half = BigRational::new(1.into(), 2.into());
    if params.delta <= BigRational::zero() || params.delta >= half {
        return Err(LabError::InvalidParams(format!(
            "δ = {} must lie in (0, 1/2)",
            params.delta
        )));
    }
    if params.big_k <= BigRational::one() {
        return Err(LabError::InvalidParams(format!(
            "K = {} must exceed 1",
            params.big_k
        )));
    }
    params.distribution.require_nontrivial()?;
    let cap = params.family_cap.max(1);

    let rn = BigRational::from_integer(r.into());
    let nn = BigRational::from_integer(n.into());
    let eight = BigRational::from_integer(8.into());
    let plus_ratio = &rn / (&eight * &params.big_k);
    let minus_ratio = &rn / (&eight * &nn);
    let exponent = &half - &params.delta;
    let drift = BigRational::one() - &params.delta;

    let mut m = crate::matrix::sample_symmetric(r + 1, &params.distribution, seed)?;
    let mut cur = table(&m, r)?;
    let mut n_k = BigRational::one();
    let mut lambda_k = HeavinessThreshold::one();
    let mut w_k = BigRational::zero();
    let mut w = vec![BigRational::zero()];
    let mut steps = Vec::new();
    let mut aborted_at = None;
    if heavy_count(&cur, &lambda_k) < 1 {
        aborted_at = Some(0);
    }

    let mut k = 1;
    while aborted_at.is_none() && k < n - r {
        let min_abs = lambda_k.min_admitted_u128();
        let need = ceil_u64(&n_k).max(1) as usize;
        let heavy: Vec<u64> = cur.heavy_masks(min_abs).take(need.min(cap)).collect();
        let heavy_total = cur.count_heavy(min_abs) as u64;
        let truncated = need > cap;
        let children = classify_masks(&heavy, k, r, &params.big_k)?;

        let next = extend_symmetric(&m, seed)?;
        let next_table = table(&next, r)?;
        let expansion_checks = cross_check_expansion(&cur, &next_table, &next, &heavy, k + r)?;

        let n_plus = &n_k * &plus_ratio;
        let n_minus = &n_k * &minus_ratio;
        let lambda_plus = lambda_k.times_power(&params.big_k, &exponent)?;
        let next_heavy = heavy_count(&next_table, &lambda_k);
        let next_heavy_plus = heavy_count(&next_table, &lambda_plus);
        let case = if children.branch == Branch::EPrime && next_heavy >= ceil_u64(&n_plus) {
            StepCase::I
        } else if children.branch == Branch::EDoublePrime && next_heavy_plus >= ceil_u64(&n_minus) {
            StepCase::II
        } else if next_heavy >= ceil_u64(&n_minus) {
            StepCase::III
        } else {
            StepCase::IV
        };
        let (n_next, lambda_next) = match case {
            StepCase::I => (n_plus, lambda_k.clone()),
            StepCase::II => (n_minus, lambda_plus),
            StepCase::III => (n_minus, lambda_k.clone()),
            StepCase::IV => (n_k.clone(), lambda_k.clone()),
        };
        let w_next = &w_k + &drift - BigRational::from_integer(case.w_penalty().into());
        steps.push(WeakStep {
            k,
            n_k: n_k.clone(),
            lambda_k: lambda_k.clone(),
            w_k: w_k.clone(),
            heavy_count: heavy_total,
            parents_truncated: truncated,
            children,
            next_heavy,
            next_heavy_plus,
            case,
            n_next: n_next.clone(),
            lambda_next: lambda_next.clone(),
            w_next: w_next.clone(),
            expansion_checks,
        });
        w.push(w_next.clone());
        w_k = w_next;
        if case == StepCase::IV {
            aborted_at = Some(k);
            break;
        }
        n_k = n_next;
        lambda_k = lambda_next;
        m = next;
        cur = next_table;
        k += 1;
    }
    while w.len() < n - r {
        w.push(w_k.clone());
    }

    let asymptotic_regime = params.delta < BigRational::new(1.into(), 16.into())
        && &params.delta * &nn <= rn
        && rn <= &params.delta * &nn * BigRational::from_integer(2.into());

    let mut family = None;
    let mut family_truncated = false;
    if aborted_at.is_none() {
        let need = ceil_u64(&n_k).max(1) as usize;
        family_truncated = need > cap;
        let mut fam = HeavyFamily::new(lambda_k.clone(), m.n());
        let rows = rows_from(r, m.n())?;
        for (mask, v) in cur
            .entries()
            .iter()
            .filter(|e| lambda_k.admits(&BigInt::from(e.1)))
            .take(need.min(cap))
        {
            fam.push(rows, IndexSet::from_bits(m.n(), *mask)?, BigInt::from(*v))?;
        }
        family = Some(fam);
    }
    let reached_target = params
        .lambda
        .as_ref()
        .filter(|_| aborted_at.is_none())
        .map(|target| lambda_reaches(&lambda_k, target));
    let trace = GrowthTrace {
        n,
        r,
        delta: params.delta.clone(),
        big_k: params.big_k.clone(),
        steps,
        w,
        aborted_at,
        final_n: n_k,
        final_lambda: lambda_k,
        asymptotic_regime,
        reached_target,
    };
    trace.check()?;
    Ok(WeakGrowthOutcome {
        trace,
        family,
        matrix: m,
        family_truncated,
    })
}

/// `λ ≥ target`, decided through the integer ceilings when either side
/// carries an irrational factor.
fn lambda_reaches(lambda: &HeavinessThreshold, target: &HeavinessThreshold) -> bool {
    match (lambda.as_rational(), target.as_rational()) {
        (Some(a), Some(b)) => a >= b,
        _ => lambda.min_admitted() >= target.min_admitted(),
    }
}

/// Re-derive a few child permanents from the row expansion over all their
/// parents and compare with the table of the extended matrix.
fn cross_check_expansion(
    old: &SubsetPermanents,
    new: &SubsetPermanents,
    m_next: &SymmetricMatrixProcess,
    parents: &[u64],
    ground: usize,
) -> Result<usize> {
    let row = m_next.n();
    let mut checked = 0;
    for (&child, _) in child_counts(parents, ground).iter().take(8) {
        let mut sum: i128 = 0;
        let mut bits = child;
        while bits != 0 {
            let bit = bits & bits.wrapping_neg();
            bits ^= bit;
            let b = bit.trailing_zeros() as usize + 1;
            let parent = old
                .get_mask(child ^ bit)
                .ok_or_else(|| contract("parent missing from table"))?;
            sum = sum.wrapping_add(parent.wrapping_mul(m_next.entry(row, b) as i128));
        }
        let direct = new
            .get_mask(child)
            .ok_or_else(|| contract("child missing from table"))?;
        if direct != sum {
            return Err(invariant(format!(
                "row expansion of child {child:#b} gives {sum}, table gives {direct}"
            )));
        }
        checked += 1;
    }
    Ok(checked)
}
