use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::anticonc::QuadraticPolynomial;
use crate::error::{invariant, LabError, Result};
use crate::growth::HeavyFamily;
use crate::index_set::IndexSet;
use crate::matrix::{extend_symmetric, SymmetricMatrixProcess};
use crate::perm::{double_expansion, permanent_submatrix, HeavinessThreshold};
use crate::seed::SeedSpec;

use super::quadruple::{build_quadruples, Quadruple};
use super::state::{at_least_root, classify_indices, EndgameState, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndgameSummary {
    pub m: usize,
    pub easy: usize,
    pub short: usize,
    pub interesting: usize,
    pub bad: usize,
    /// Indices with `|P_ℓ| ≥ τ` at the realised row.
    pub qualifying: usize,
    /// `⌈m/36⌉`.
    pub needed: usize,
    /// Short indices whose `σ`-truncation reaches `λ/2`.
    pub short_large: usize,
    /// Interesting indices with `T_ℓ ≥ m^(1/6)`.
    pub t_large: usize,
    /// Of those, how many still have `|P*_ℓ| < σ`.
    pub t_large_small: usize,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct EndgameOutcome {
    pub quadruples: Vec<Quadruple>,
    pub state: EndgameState,
    /// `P_ℓ` at the realised row, one per index.
    pub values: Vec<BigInt>,
    pub summary: EndgameSummary,
    /// `⌈m/36⌉` sets `A*_ℓ ∪ {n+1}`, `B*_ℓ ∪ {n+1}`, `λ/(4n⁴)`-heavy.
    pub family: Option<HeavyFamily>,
    pub matrix: SymmetricMatrixProcess,
}

/// Extend `m_n` by one row and column and try to keep `⌈m/36⌉` of the
/// `m` heavy pairs alive at threshold `λ/(4n⁴)`.
pub fn endgame_step_run(
    m_n: &SymmetricMatrixProcess,
    family: &HeavyFamily,
    seed: SeedSpec,
) -> Result<EndgameOutcome> {
    if !m_n.distribution().off_diag.is_rademacher() {
        return Err(LabError::InvalidDistribution(
            "the endgame step folds x_i² = 1 and needs Rademacher off-diagonal entries".into(),
        ));
    }
    let n = m_n.n();
    let mat = m_n.to_matrix();
    let quadruples = build_quadruples(&mat, family)?;
    let next = extend_symmetric(m_n, seed)?;
    let (x, z) = next
        .last_row()
        .ok_or_else(|| invariant("extension has no last row"))?;
    let ext = next.to_matrix();

    let i_set = IndexSet::from_indices(n, quadruples.iter().flat_map(|q| [q.i, q.j]))?;
    let fixed = (1..=n)
        .filter(|i| !i_set.contains(*i))
        .map(|i| (i, x[i - 1]))
        .collect();
    let mut polys: Vec<QuadraticPolynomial> = Vec::with_capacity(quadruples.len());
    let mut values = Vec::with_capacity(quadruples.len());
    for q in &quadruples {
        let full = double_expansion(&mat, &q.a_star, &q.b_star, z)?;
        let rows = q.a_star.regrounded(n + 1)?.with(n + 1)?;
        let cols = q.b_star.regrounded(n + 1)?.with(n + 1)?;
        let direct = permanent_submatrix(&ext, &rows, &cols)?;
        let p = full.substitute(&fixed)?;
        let (v_full, v_p) = (full.evaluate(&x)?, p.evaluate(&x)?);
        if v_full != direct || v_p != direct {
            return Err(invariant(format!(
                "P_ℓ evaluates to {v_p} (full {v_full}) but the extended permanent is {direct}"
            )));
        }
        polys.push(p);
        values.push(direct);
    }

    let mut state = EndgameState::new(n, family.lambda.clone(), polys, i_set)?;
    classify_indices(&mut state, &x)?;
    let m = quadruples.len();
    let needed = m.div_ceil(36);
    let qualifying: Vec<usize> = (0..m).filter(|&l| state.tau.admits(&values[l])).collect();

    let half = state.lambda.half();
    let mut short_large = 0;
    let (mut t_large, mut t_large_small) = (0, 0);
    for rec in &state.records {
        match rec.label {
            Some(Label::Short) => {
                if half.admits(&truncate_below(&rec.poly, &state.sigma)?.evaluate(&x)?) {
                    short_large += 1;
                }
            }
            Some(Label::Interesting) if rec.t_ell.is_some_and(|t| at_least_root(t, m, 6)) => {
                t_large += 1;
                let p_star = rec.p_star.as_ref().expect("interesting indices carry P*");
                if !state.sigma.admits(&p_star.evaluate(&x)?) {
                    t_large_small += 1;
                }
            }
            _ => {}
        }
    }

    let success = qualifying.len() >= needed;
    let new_family = if success {
        let mut fam = HeavyFamily::new(state.tau.clone(), n + 1);
        for &l in qualifying.iter().take(needed) {
            let q = &quadruples[l];
            fam.push(
                q.a_star.regrounded(n + 1)?.with(n + 1)?,
                q.b_star.regrounded(n + 1)?.with(n + 1)?,
                values[l].clone(),
            )?;
        }
        fam.complement_disjoint = true;
        fam.verify(&ext)?;
        Some(fam)
    } else {
        None
    };
    let summary = EndgameSummary {
        m,
        easy: state.count(Label::Easy),
        short: state.count(Label::Short),
        interesting: state.count(Label::Interesting),
        bad: state.bad.len(),
        qualifying: qualifying.len(),
        needed,
        short_large,
        t_large,
        t_large_small,
        success,
    };
    Ok(EndgameOutcome {
        quadruples,
        state,
        values,
        summary,
        family: new_family,
        matrix: next,
    })
}

/// `f` with every term of absolute value below `r` deleted.
fn truncate_below(f: &QuadraticPolynomial, r: &HeavinessThreshold) -> Result<QuadraticPolynomial> {
    let mut p = QuadraticPolynomial::new(f.n_vars());
    if r.admits(f.constant()) {
        p.add_constant(f.constant());
    }
    for (i, c) in f.linear_terms().filter(|(_, c)| r.admits(c)) {
        p.add_linear(i, c)?;
    }
    for ((i, j), c) in f.quadratic_terms().filter(|(_, c)| r.admits(c)) {
        p.add_quadratic(i, j, c)?;
    }
    Ok(p)
}
