use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{contract, LabError, Result};
use crate::perm::HeavinessThreshold;

use super::exact::exact_distribution;
use super::graph::{matching_number, CoefficientGraph};
use super::poly::QuadraticPolynomial;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `C(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EloTail {
    /// Number of degree-1 coefficients with `|c| ≥ r`.
    pub m: usize,
    /// `Pr(|f(ξ)| ≤ t·r)`.
    pub exact: BigRational,
    /// `(⌈t⌉ + 1) · C(m, ⌊m/2⌋) · 2^(-m)`.
    pub binomial: BigRational,
    /// `3t/√m`, for display.
    pub simple: f64,
    pub exact_le_binomial: bool,
    /// Decided exactly as `binomial² · m ≤ 9t²`.
    pub binomial_le_simple: bool,
}

impl EloTail {
    pub fn holds(&self) -> bool {
        self.exact_le_binomial && self.binomial_le_simple
    }
}

/// Exact small-ball probability of a linear `f` against the
/// Erdős–Littlewood–Offord chain.
pub fn elo_tail(
    f: &QuadraticPolynomial,
    r: &HeavinessThreshold,
    t: &BigRational,
) -> Result<EloTail> {
    if !f.is_linear() {
        return Err(contract("elo_tail needs a linear polynomial"));
    }
    if *t < BigRational::one() {
        return Err(contract(format!("t = {t} must be at least 1")));
    }
    let m = f.linear_terms().filter(|(_, c)| r.admits(c)).count();
    if m == 0 {
        return Err(LabError::InvalidParams(
            "no degree-1 coefficient reaches r; the bound is undefined".into(),
        ));
    }
    let tr = r.scaled(t)?;
    let dist = exact_distribution(f)?;
    let exact = dist.probability_where(|v| tr.cmp_abs(v) != std::cmp::Ordering::Greater);
    let mu = m as u64;
    let binomial = BigRational::from_integer((t.ceil().to_integer() + 1) * binomial(mu, mu / 2))
        / BigRational::from_integer(BigInt::one() << mu);
    let binomial_le_simple =
        &binomial * &binomial * BigRational::from_integer(mu.into()) <= t * t * q(9, 1);
    let simple = 3.0 * t.to_f64().unwrap_or(f64::NAN) / (m as f64).sqrt();
    Ok(EloTail {
        m,
        exact_le_binomial: exact <= binomial,
        exact,
        binomial,
        simple,
        binomial_le_simple,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NondegenerateCheck {
    /// `Pr(|f(ξ)| < r)`.
    pub probability: BigRational,
    pub bound: BigRational,
    pub holds: bool,
}

fn small_ball_strict(f: &QuadraticPolynomial, r: &HeavinessThreshold) -> Result<BigRational> {
    Ok(exact_distribution(f)?.probability_where(|v| !r.admits(v)))
}

/// `Pr(|f| < r) ≤ 1/2` for a linear `f` with some coefficient (constant
/// included) of size at least `r`.
pub fn fact_linear_nondegenerate_check(
    f: &QuadraticPolynomial,
    r: &HeavinessThreshold,
) -> Result<NondegenerateCheck> {
    if !f.is_linear() {
        return Err(contract("expected a linear polynomial"));
    }
    if !r.admits(f.constant()) && !f.linear_terms().any(|(_, c)| r.admits(c)) {
        return Err(contract(format!("no coefficient of {f} reaches {r}")));
    }
    let probability = small_ball_strict(f, r)?;
    let bound = q(1, 2);
    Ok(NondegenerateCheck {
        holds: probability <= bound,
        probability,
        bound,
    })
}

/// `Pr(|f| < r) ≤ 3/4` for `f` with some degree-2 coefficient of size at
/// least `r`.
pub fn fact_quadratic_nondegenerate_check(
    f: &QuadraticPolynomial,
    r: &HeavinessThreshold,
) -> Result<NondegenerateCheck> {
    if !f.quadratic_terms().any(|(_, c)| r.admits(c)) {
        return Err(contract(format!(
            "no quadratic coefficient of {f} reaches {r}"
        )));
    }
    let probability = small_ball_strict(f, r)?;
    let bound = q(3, 4);
    Ok(NondegenerateCheck {
        holds: probability <= bound,
        probability,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnvProbe {
    pub nu: usize,
    /// `Pr(|f(ξ)| ≤ r)`.
    pub exact: BigRational,
    /// `(ln ν)^C / √ν`.
    pub bound: f64,
}

impl MnvProbe {
    pub fn margin(&self) -> f64 {
        self.bound - self.exact.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact small-ball probability next to `(log ν)^C / ν^(1/2)` for a
/// caller-chosen `C`. Reported, never asserted.
pub fn mnv_check(f: &QuadraticPolynomial, r: &HeavinessThreshold, c: f64) -> Result<MnvProbe> {
    let nu = matching_number(&CoefficientGraph::from_polynomial(f, r));
    if nu < 3 {
        return Err(LabError::InvalidParams(format!(
            "matching number {nu} < 3; the bound needs ν ≥ 3"
        )));
    }
    let exact =
        exact_distribution(f)?.probability_where(|v| r.cmp_abs(v) != std::cmp::Ordering::Greater);
    let nuf = nu as f64;
    Ok(MnvProbe {
        nu,
        exact,
        bound: nuf.ln().powf(c) / nuf.sqrt(),
    })
}

/// `(p - q)/(1 - q)`: a lower bound on `Pr(X ≥ q)` for `X ∈ [0, 1]` with
/// mean at least `p`.
pub fn markov_fraction_bound(p: &BigRational, q_: &BigRational) -> Result<BigRational> {
    let one = BigRational::one();
    if !(p < &one && q_ < p && q_.is_positive()) {
        return Err(LabError::InvalidParams(format!(
            "need 1 > p > q > 0, got p = {p}, q = {q_}"
        )));
    }
    Ok((p - q_) / (one - q_))
}

/// `⌈x^(1/k)⌉` for a non-negative integer `x`.
pub fn ceil_root(x: u64, k: u32) -> u64 {
    let r = x.nth_root(k);
    if r.pow(k) == x {
        r
    } else {
        r + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(n: i64) -> HeavinessThreshold {
        HeavinessThreshold::from_integer(n).unwrap()
    }

    #[test]
    fn elo_examples() {
        let f = QuadraticPolynomial::linear_from(0, &[1, 1]);
        let e = elo_tail(&f, &lam(1), &q(1, 1)).unwrap();
        assert_eq!(
            (e.m, e.exact.clone(), e.binomial.clone()),
            (2, q(1, 2), q(1, 1))
        );
        assert!(e.holds());
        let f = QuadraticPolynomial::linear_from(0, &[1, 1, 1, 1]);
        let e = elo_tail(&f, &lam(1), &q(1, 1)).unwrap();
        assert_eq!((e.exact.clone(), e.binomial.clone()), (q(3, 8), q(3, 4)));
        let f = QuadraticPolynomial::linear_from(0, &[5]);
        let e = elo_tail(&f, &lam(5), &q(1, 1)).unwrap();
        assert_eq!((e.exact.clone(), e.binomial.clone()), (q(1, 1), q(1, 1)));
        assert!(e.holds());
        assert!(elo_tail(
            &QuadraticPolynomial::linear_from(0, &[1]),
            &lam(2),
            &q(1, 1)
        )
        .is_err());
    }

    #[test]
    fn fact_boundaries() {
        let f = QuadraticPolynomial::linear_from(1, &[1]);
        let c = fact_linear_nondegenerate_check(&f, &lam(1)).unwrap();
        assert_eq!(c.probability, q(1, 2));
        assert!(c.holds);
        let mut g = QuadraticPolynomial::linear_from(1, &[1, 1]);
        g.add_quadratic(1, 2, &BigInt::one()).unwrap();
        let c = fact_quadratic_nondegenerate_check(&g, &lam(1)).unwrap();
        assert_eq!(c.probability, q(3, 4));
        assert!(c.holds);
        assert!(fact_quadratic_nondegenerate_check(
            &QuadraticPolynomial::linear_from(3, &[1]),
            &lam(1)
        )
        .is_err());
    }

    #[test]
    fn mnv_three_disjoint_products() {
        let mut f = QuadraticPolynomial::new(6);
        for (i, j) in [(1, 2), (3, 4), (5, 6)] {
            f.add_quadratic(i, j, &BigInt::one()).unwrap();
        }
        let p = mnv_check(&f, &lam(1), 1.0).unwrap();
        assert_eq!((p.nu, p.exact.clone()), (3, q(3, 4)));
        assert!((p.bound - 3f64.ln() / 3f64.sqrt()).abs() < 1e-12);
        let mut g = QuadraticPolynomial::new(4);
        g.add_quadratic(1, 2, &BigInt::one()).unwrap();
        assert!(mnv_check(&g, &lam(1), 1.0).is_err());
    }

    #[test]
    fn markov_fraction() {
        assert_eq!(markov_fraction_bound(&q(1, 2), &q(1, 4)).unwrap(), q(1, 3));
        assert_eq!(
            markov_fraction_bound(&q(3, 10), &q(29, 100)).unwrap(),
            q(1, 71)
        );
        assert!(markov_fraction_bound(&q(1, 4), &q(1, 2)).is_err());
        assert!(markov_fraction_bound(&q(1, 1), &q(1, 2)).is_err());
        // p = 1 - 3K^(-δ) with K = 2^60, δ = 1/20: K^(-δ) = 1/8.
        let p = q(1, 1) - q(3, 1) * q(1, 8);
        assert_eq!(markov_fraction_bound(&p, &q(1, 4)).unwrap(), q(1, 2));
    }

    #[test]
    fn roots() {
        assert_eq!(ceil_root(64, 6), 2);
        assert_eq!(ceil_root(65, 6), 3);
        assert_eq!(ceil_root(1, 3), 1);
        assert_eq!(ceil_root(0, 3), 0);
        assert_eq!(binomial(6, 3), BigInt::from(20));
    }
}
