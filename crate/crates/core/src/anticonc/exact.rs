use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{LabError, Result};

use super::poly::QuadraticPolynomial;

/// Largest number of active variables enumerated exhaustively.
pub const EXACT_MAX_VARS: usize = 24;

/// Law of `f(ξ)` for uniform `ξ ∈ {-1, 1}^n`, stored as counts out of
/// `2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    n_vars: usize,
    /// `(value, count, witness)` sorted by value. Bit `k` of the witness is
    /// set when `ξ_{k+1} = +1`.
    atoms: Vec<(BigInt, u64, u64)>,
}

impl ExactDistribution {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn total(&self) -> u64 {
        1u64 << self.n_vars
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&BigInt, u64)> {
        self.atoms.iter().map(|(v, c, _)| (v, *c))
    }

    /// A `±1` point attaining `value`.
    pub fn witness(&self, value: &BigInt) -> Option<Vec<i64>> {
        let k = self.atoms.binary_search_by(|a| a.0.cmp(value)).ok()?;
        let mask = self.atoms[k].2;
        Some(
            (0..self.n_vars)
                .map(|b| if mask >> b & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    /// `(value, probability)` pairs.
    pub fn to_pairs(&self) -> Vec<(BigInt, BigRational)> {
        self.atoms
            .iter()
            .map(|(v, c, _)| (v.clone(), self.ratio(*c)))
            .collect()
    }

    fn ratio(&self, count: u64) -> BigRational {
        BigRational::new(BigInt::from(count), BigInt::from(self.total()))
    }

    pub fn count_where(&self, mut pred: impl FnMut(&BigInt) -> bool) -> u64 {
        self.atoms.iter().filter(|a| pred(&a.0)).map(|a| a.1).sum()
    }

    pub fn probability_where(&self, pred: impl FnMut(&BigInt) -> bool) -> BigRational {
        self.ratio(self.count_where(pred))
    }
}

/// Exact distribution by Gray-code enumeration of the active variables.
pub fn exact_distribution(f: &QuadraticPolynomial) -> Result<ExactDistribution> {
    let n = f.n_vars();
    if n > 62 {
        return Err(LabError::Capacity {
            what: "polynomial variables",
            limit: 62,
            got: n,
        });
    }
    let active = f.support();
    let a = active.len();
    if a > EXACT_MAX_VARS {
        return Err(LabError::Capacity {
            what: "active variables for exact enumeration",
            limit: EXACT_MAX_VARS,
            got: a,
        });
    }
    let mult = 1u64 << (n - a);
    let pos: HashMap<usize, usize> = active.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let lift = |m: u64| -> u64 {
        // active-variable mask to full mask; inactive variables at +1
        let mut full = (1u64 << n) - 1;
        for (k, &v) in active.iter().enumerate() {
            if m >> k & 1 == 0 {
                full &= !(1u64 << (v - 1));
            }
        }
        full
    };
    let counts: HashMap<BigInt, (u64, u64)> = match small_coeffs(f, &pos, a) {
        Some((c0, lin, quad)) => gray_i128(c0, &lin, &quad, a)
            .into_iter()
            .map(|(v, (c, w))| (BigInt::from(v), (c, w)))
            .collect(),
        None => {
            let mut out: HashMap<BigInt, (u64, u64)> = HashMap::new();
            for m in 0..(1u64 << a) {
                let x: Vec<i64> = (0..n)
                    .map(|k| if lift(m) >> k & 1 == 1 { 1 } else { -1 })
                    .collect();
                let v = f.evaluate(&x)?;
                out.entry(v).or_insert((0, m)).0 += 1;
            }
            out
        }
    };
    let mut atoms: Vec<(BigInt, u64, u64)> = counts
        .into_iter()
        .map(|(v, (c, w))| (v, c * mult, lift(w)))
        .collect();
    atoms.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(ExactDistribution { n_vars: n, atoms })
}

type Coeffs = (i128, Vec<i128>, Vec<Vec<i128>>);

fn small_coeffs(f: &QuadraticPolynomial, pos: &HashMap<usize, usize>, a: usize) -> Option<Coeffs> {
    if f.l1_norm().bits() > 120 {
        return None;
    }
    let c0 = f.constant().to_i128()?;
    let mut lin = vec![0i128; a];
    for (i, c) in f.linear_terms() {
        lin[pos[&i]] = c.to_i128()?;
    }
    let mut quad = vec![vec![0i128; a]; a];
    for ((i, j), c) in f.quadratic_terms() {
        let c = c.to_i128()?;
        quad[pos[&i]][pos[&j]] = c;
        quad[pos[&j]][pos[&i]] = c;
    }
    Some((c0, lin, quad))
}

/// Counts and first witnesses (over the `a` active variables) of every
/// value. Starts at `ξ = (-1, …, -1)`.
fn gray_i128(c0: i128, lin: &[i128], quad: &[Vec<i128>], a: usize) -> HashMap<i128, (u64, u64)> {
    let mut xi = vec![-1i128; a];
    // field_k = lin_k + Σ_j quad_kj ξ_j, so f = c0 + Σ_k ξ_k lin_k + ½ Σ_k ξ_k (field_k - lin_k)
    let mut field: Vec<i128> = (0..a)
        .map(|k| lin[k] + (0..a).map(|j| quad[k][j] * xi[j]).sum::<i128>())
        .collect();
    let mut value = c0;
    for k in 0..a {
        value += xi[k] * lin[k];
        for j in k + 1..a {
            value += quad[k][j] * xi[k] * xi[j];
        }
    }
    let mut out: HashMap<i128, (u64, u64)> = HashMap::new();
    let mut mask = 0u64;
    out.insert(value, (1, 0));
    for t in 1u64..(1u64 << a) {
        let k = t.trailing_zeros() as usize;
        let old = xi[k];
        value -= 2 * old * field[k];
        for (j, fj) in field.iter_mut().enumerate() {
            if j != k {
                *fj -= 2 * quad[j][k] * old;
            }
        }
        xi[k] = -old;
        mask ^= 1 << k;
        out.entry(value).or_insert((0, mask)).0 += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(f: &QuadraticPolynomial) -> Vec<(BigInt, u64)> {
        let n = f.n_vars();
        let mut m: std::collections::BTreeMap<BigInt, u64> = Default::default();
        for bits in 0..(1u64 << n) {
            let x: Vec<i64> = (0..n)
                .map(|k| if bits >> k & 1 == 1 { 1 } else { -1 })
                .collect();
            *m.entry(f.evaluate(&x).unwrap()).or_default() += 1;
        }
        m.into_iter().collect()
    }

    #[test]
    fn gray_enumeration_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=9);
            let mut f = QuadraticPolynomial::new(n);
            f.add_constant(&BigInt::from(rng.gen_range(-3..=3)));
            for i in 1..=n {
                if rng.gen_bool(0.6) {
                    f.add_linear(i, &BigInt::from(rng.gen_range(-4..=4)))
                        .unwrap();
                }
                for j in i + 1..=n {
                    if rng.gen_bool(0.3) {
                        f.add_quadratic(i, j, &BigInt::from(rng.gen_range(-4..=4)))
                            .unwrap();
                    }
                }
            }
            let d = exact_distribution(&f).unwrap();
            let got: Vec<(BigInt, u64)> = d.atoms().map(|(v, c)| (v.clone(), c)).collect();
            assert_eq!(got, brute(&f), "{f}");
            for (v, _) in &got {
                assert_eq!(&f.evaluate(&d.witness(v).unwrap()).unwrap(), v);
            }
        }
    }

    #[test]
    fn capacity() {
        let f = QuadraticPolynomial::linear_from(0, &[1; 25]);
        assert!(matches!(
            exact_distribution(&f),
            Err(LabError::Capacity { .. })
        ));
    }
}
