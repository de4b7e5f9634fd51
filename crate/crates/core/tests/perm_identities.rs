use std::time::Instant;

use num_bigint::BigInt;
use permlab::perm::{
    choose_noncancelling_pair, double_expansion, is_heavy, minor_permanent, permanent,
    permanent_naive, permanent_ryser, permanent_submatrix, row_expansion, HeavinessThreshold,
    PairCase,
};
use permlab::{sample_symmetric, EntryDistribution, IndexSet, Matrix, SeedSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sym(n: usize, seed: u64) -> Matrix {
    sample_symmetric(n, &EntryDistribution::rademacher(), SeedSpec::new(seed, 0))
        .unwrap()
        .to_matrix()
}

fn random_set(rng: &mut impl Rng, n: usize, k: usize) -> IndexSet {
    let mut v: Vec<usize> = (1..=n).collect();
    v.shuffle(rng);
    IndexSet::from_indices(n, v[..k].iter().copied()).unwrap()
}

/// Matrix of `rows × cols` of `m` with 1-based sets, via plain indexing.
fn block(m: &Matrix, a: &IndexSet, b: &IndexSet) -> Matrix {
    let r: Vec<usize> = a.iter().map(|i| i - 1).collect();
    let c: Vec<usize> = b.iter().map(|j| j - 1).collect();
    m.select(&r, &c)
}

#[test]
fn ryser_matches_naive_on_symmetric_sign_matrices() {
    for n in 1..=8 {
        for t in 0..200 {
            let m = sym(n, 1000 * n as u64 + t);
            assert_eq!(permanent_ryser(&m).unwrap(), permanent_naive(&m).unwrap());
        }
    }
}

#[test]
fn submatrix_and_minor_against_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for t in 0..200 {
        let m = sym(6, t);
        let a = random_set(&mut rng, 6, 4);
        let b = random_set(&mut rng, 6, 4);
        let want = permanent_naive(&block(&m, &a, &b)).unwrap();
        assert_eq!(permanent_submatrix(&m, &a, &b).unwrap(), want);
        let i = a.to_vec()[rng.gen_range(0..4)];
        let j = b.to_vec()[rng.gen_range(0..4)];
        let want = permanent_naive(&block(&m, &a.without(i), &b.without(j))).unwrap();
        assert_eq!(minor_permanent(&m, &a, &b, i, j).unwrap(), want);
    }
    let m = sym(5, 3);
    let s = IndexSet::from_indices(5, [2]).unwrap();
    assert_eq!(
        permanent_submatrix(&m, &s, &s).unwrap(),
        BigInt::from(m.get(1, 1))
    );
    assert_eq!(minor_permanent(&m, &s, &s, 2, 2).unwrap(), BigInt::from(1));
    let full = IndexSet::full(5).unwrap();
    assert_eq!(
        permanent_submatrix(&m, &full, &full).unwrap(),
        permanent_ryser(&m).unwrap()
    );
    let ones = Matrix::filled(5, 1);
    let a3 = IndexSet::from_indices(5, [1, 2, 3]).unwrap();
    let b3 = IndexSet::from_indices(5, [2, 4, 5]).unwrap();
    assert_eq!(
        minor_permanent(&ones, &a3, &b3, 1, 5).unwrap(),
        BigInt::from(2)
    );
    assert!(minor_permanent(&ones, &a3, &b3, 4, 5).is_err());
    assert!(permanent_submatrix(&m, &a3, &s).is_err());
}

#[test]
fn row_expansion_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..300 {
        let m = sym(5, 77 + t);
        let a = random_set(&mut rng, 5, 2);
        let b = random_set(&mut rng, 5, 3);
        let coeffs = row_expansion(&m, &a, &b).unwrap();
        let x: Vec<i64> = (0..5).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let ext = m.with_row(&x).unwrap();
        let lhs: BigInt = coeffs.iter().map(|(&i, c)| c * x[i - 1]).sum();
        let a_ext = a.regrounded(6).unwrap().with(6).unwrap();
        let direct = permanent_naive(&block(&ext, &a_ext, &b.regrounded(6).unwrap())).unwrap();
        assert_eq!(lhs, direct);
    }
    let m = sym(4, 1);
    let e = IndexSet::empty(4).unwrap();
    let b = IndexSet::from_indices(4, [3]).unwrap();
    assert_eq!(row_expansion(&m, &e, &b).unwrap()[&3], BigInt::from(1));
    let ones = Matrix::filled(6, 1);
    let a = IndexSet::from_indices(6, [1, 2, 3]).unwrap();
    let b = IndexSet::from_indices(6, [2, 3, 5, 6]).unwrap();
    assert!(row_expansion(&ones, &a, &b)
        .unwrap()
        .values()
        .all(|c| *c == BigInt::from(6)));
    assert!(row_expansion(&ones, &a, &a).is_err());
}

fn extend_sym(m: &Matrix, x: &[i64], z: i64) -> Matrix {
    let n = m.rows();
    Matrix::from_fn(n + 1, n + 1, |i, j| match (i == n, j == n) {
        (true, true) => z,
        (true, false) => x[j],
        (false, true) => x[i],
        _ => m.get(i, j),
    })
}

#[test]
fn double_expansion_identity_all_sign_rows() {
    for t in 0..40 {
        let m = sym(4, 500 + t);
        let a = IndexSet::from_indices(4, [1, 2, 3]).unwrap();
        for z in [-1, 1] {
            let p = double_expansion(&m, &a, &a, z).unwrap();
            for bits in 0..16u32 {
                let x: Vec<i64> = (0..4)
                    .map(|k| if bits >> k & 1 == 1 { 1 } else { -1 })
                    .collect();
                let ext = extend_sym(&m, &x, z);
                let s = IndexSet::from_indices(5, [1, 2, 3, 5]).unwrap();
                assert_eq!(
                    p.evaluate(&x).unwrap(),
                    permanent_naive(&block(&ext, &s, &s)).unwrap()
                );
            }
        }
    }
    let m = sym(3, 9);
    let e = IndexSet::empty(3).unwrap();
    let p = double_expansion(&m, &e, &e, -1).unwrap();
    assert_eq!(p.constant(), &BigInt::from(-1));
    assert_eq!(p.support(), Vec::<usize>::new());
}

#[test]
fn double_expansion_full_set_coefficients_are_twice_the_minor() {
    for t in 0..20 {
        let m = sym(5, 900 + t);
        let full = IndexSet::full(5).unwrap();
        let p = double_expansion(&m, &full, &full, 1).unwrap();
        for i in 1..=5 {
            for j in i + 1..=5 {
                let minor = minor_permanent(&m, &full, &full, i, j).unwrap();
                assert_eq!(p.quadratic_coeff(i, j), minor * 2);
            }
        }
    }
}

#[test]
fn heaviness_against_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..300 {
        let m = sym(6, 3000 + t);
        let k = rng.gen_range(1..=5);
        let a = random_set(&mut rng, 6, k);
        let b = random_set(&mut rng, 6, k);
        let lam = HeavinessThreshold::new(rng.gen_range(1..40), rng.gen_range(1..5)).unwrap();
        let per = permanent_naive(&block(&m, &a, &b)).unwrap();
        let want =
            BigInt::from(per.magnitude().clone()) * lam.scale().denom() >= *lam.scale().numer();
        assert_eq!(is_heavy(&m, &a, &b, &lam).unwrap(), want);
    }
}

#[test]
fn noncancelling_pair_first_case_reading() {
    // per M[A,B] = 1 and the s = 1 candidate is non-negative.
    let m = Matrix::filled(4, 1);
    let a = IndexSet::from_indices(4, [1, 2]).unwrap();
    let b = IndexSet::from_indices(4, [3, 4]).unwrap();
    let lam = HeavinessThreshold::from_integer(2).unwrap();
    let out = choose_noncancelling_pair(&m, &a, &b, 3, 1, 2, &lam).unwrap();
    assert_eq!((out.i, out.j, out.case), (1, 3, PairCase::Corner(1)));
    assert_eq!(out.b_prime, b.with(1).unwrap());
    assert_eq!(out.a_prime, a.with(3).unwrap());
    assert!(choose_noncancelling_pair(&m, &a, &b, 1, 3, 4, &lam).is_err());
    assert!(choose_noncancelling_pair(&m, &a, &b, 3, 1, 1, &lam).is_err());
    let too_heavy = HeavinessThreshold::from_integer(3).unwrap();
    assert!(choose_noncancelling_pair(&m, &a, &b, 3, 1, 2, &too_heavy).is_err());
}

#[test]
fn noncancelling_pair_exhaustive_n4() {
    let mut checked = 0;
    for m in permlab::moments::all_sign_matrices(4).unwrap() {
        for am in permlab::index_set::k_subsets(4, 2) {
            let a_set = IndexSet::from_bits(4, am).unwrap();
            let b_set = a_set.complement();
            let per = permanent_submatrix(&m, &a_set, &b_set).unwrap();
            if per == BigInt::from(0) {
                continue;
            }
            let lam = HeavinessThreshold::from_integer(per.magnitude().clone()).unwrap();
            let av = a_set.to_vec();
            for a in b_set.iter() {
                for (b1, b2) in [(av[0], av[1]), (av[1], av[0])] {
                    let out =
                        choose_noncancelling_pair(&m, &a_set, &b_set, a, b1, b2, &lam).unwrap();
                    let s = minor_permanent(&m, &out.a_prime, &out.b_prime, out.i, out.j).unwrap()
                        + minor_permanent(&m, &out.a_prime, &out.b_prime, out.j, out.i).unwrap();
                    assert!(lam.half().admits(&s), "{m:?} A={a_set} B={b_set} a={a}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn noncancelling_pair_random_n8() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut checked = 0;
    for t in 0..3000u64 {
        let m = sym(8, 7000 + t);
        let k = rng.gen_range(2..=5);
        let mut idx: Vec<usize> = (1..=8).collect();
        idx.shuffle(&mut rng);
        // A ∩ B common part plus a ∈ B\A and b1, b2 ∈ A\B
        let (a, b1, b2) = (idx[0], idx[1], idx[2]);
        let common = &idx[3..3 + k - 2];
        let extra_b = idx[3 + k - 2];
        let a_set = IndexSet::from_indices(8, common.iter().copied().chain([b1, b2])).unwrap();
        let b_set = IndexSet::from_indices(8, common.iter().copied().chain([a, extra_b])).unwrap();
        let per = permanent_submatrix(&m, &a_set, &b_set).unwrap();
        if per == BigInt::from(0) {
            continue;
        }
        let lam = HeavinessThreshold::from_integer(per.magnitude().clone()).unwrap();
        let out = choose_noncancelling_pair(&m, &a_set, &b_set, a, b1, b2, &lam).unwrap();
        let s = minor_permanent(&m, &out.a_prime, &out.b_prime, out.i, out.j).unwrap()
            + minor_permanent(&m, &out.a_prime, &out.b_prime, out.j, out.i).unwrap();
        assert!(lam.half().admits(&s));
        checked += 1;
    }
    assert!(checked > 1000);
}

#[test]
fn ryser_24_is_fast() {
    let m = sym(24, 1);
    let start = Instant::now();
    let v = permanent_ryser(&m).unwrap();
    let ryser = start.elapsed();
    let start = Instant::now();
    assert_eq!(permanent(&m).unwrap(), v);
    eprintln!("n=24 ryser {ryser:?}, dispatch {:?}", start.elapsed());
    assert!(ryser.as_secs_f64() < 10.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permanent_invariant_under_simultaneous_permutation(seed in any::<u64>(), n in 1usize..8) {
        let m = sym(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        let mut q: Vec<usize> = (0..n).collect();
        q.shuffle(&mut rng);
        prop_assert_eq!(permanent(&m.select(&p, &q)).unwrap(), permanent(&m).unwrap());
        prop_assert_eq!(permanent(&m.transpose()).unwrap(), permanent(&m).unwrap());
    }
}
