use std::collections::BTreeMap;

use num_bigint::BigInt;
use permlab::anticonc::QuadraticPolynomial;
use permlab::endgame::{
    at_least_root, at_most_power, build_quadruples, classify_indices, endgame_step_run,
    find_endgame_family, t_ell_statistics, verify_quadruples, EndgameState, Label,
};
use permlab::growth::HeavyFamily;
use permlab::perm::{double_expansion, permanent_submatrix, HeavinessThreshold};
use permlab::{sample_symmetric, EntryDistribution, IndexSet, Matrix, SeedSpec};

fn sym(n: usize, seed: u64) -> Matrix {
    sample_symmetric(n, &EntryDistribution::rademacher(), SeedSpec::new(seed, 0))
        .unwrap()
        .to_matrix()
}

#[test]
fn single_complement_quadruple() {
    let mut seed = 0;
    let (m, per) = loop {
        let m = sym(4, seed);
        let a = IndexSet::from_indices(4, [1, 2, 3]).unwrap();
        let b = IndexSet::from_indices(4, [1, 2, 4]).unwrap();
        let per = permanent_submatrix(&m, &a, &b).unwrap();
        if per != BigInt::from(0) {
            break (m, per);
        }
        seed += 1;
    };
    let a = IndexSet::from_indices(4, [1, 2, 3]).unwrap();
    let b = IndexSet::from_indices(4, [1, 2, 4]).unwrap();
    let lambda = HeavinessThreshold::from_integer(per.magnitude().clone()).unwrap();
    let mut fam = HeavyFamily::new(lambda.clone(), 4);
    fam.push(a, b, per.clone()).unwrap();
    let qs = build_quadruples(&m, &fam).unwrap();
    assert_eq!(qs.len(), 1);
    let full = IndexSet::full(4).unwrap();
    assert_eq!(
        (qs[0].a_star, qs[0].b_star, qs[0].i, qs[0].j),
        (full, full, 4, 3)
    );
    assert_eq!(qs[0].coefficient, per * 2);
    verify_quadruples(&m, &qs, 1, &lambda).unwrap();
}

#[test]
fn two_complement_quadruples_on_random_matrices() {
    let lambda = HeavinessThreshold::one();
    let mut built = 0;
    for seed in 0..40 {
        let m = sym(8, seed);
        let Some(fam) = find_endgame_family(&m, 2, 2, &lambda).unwrap() else {
            continue;
        };
        assert_eq!(fam.len(), 2);
        let qs = build_quadruples(&m, &fam).unwrap();
        verify_quadruples(&m, &qs, 2, &lambda).unwrap();
        for q in &qs {
            assert_eq!(q.a_star.len(), 7);
            let c = double_expansion(&m, &q.a_star, &q.b_star, 0)
                .unwrap()
                .quadratic_coeff(q.i, q.j);
            assert_eq!(c, q.coefficient);
        }
        built += 1;
    }
    assert!(built > 20);
}

#[test]
fn family_shape_is_enforced() {
    // Rows and columns share the complement {6}.
    let s = IndexSet::from_indices(6, [1, 2, 3, 4, 5]).unwrap();
    let (m, per) = (0..)
        .map(|seed| {
            let m = sym(6, seed);
            let per = permanent_submatrix(&m, &s, &s).unwrap();
            (m, per)
        })
        .find(|(_, p)| *p != BigInt::from(0))
        .unwrap();
    let mut fam = HeavyFamily::new(HeavinessThreshold::one(), 6);
    fam.push(s, s, per).unwrap();
    assert!(build_quadruples(&m, &fam).is_err());
}

#[test]
fn root_and_power_comparisons() {
    assert!(at_least_root(2, 64, 6));
    assert!(!at_least_root(1, 2, 6));
    assert!(at_least_root(0, 0, 6));
    assert!(at_most_power(4, 2, 64, 1, 6));
    assert!(!at_most_power(5, 2, 64, 1, 6));
}

/// `λ = 4n⁴` makes `τ = 1` and `σ = n²`.
fn state_with(polys: Vec<QuadraticPolynomial>, n: usize) -> EndgameState {
    let lambda = HeavinessThreshold::from_integer(4 * n.pow(4)).unwrap();
    let i_set = IndexSet::full(n).unwrap();
    EndgameState::new(n, lambda, polys, i_set).unwrap()
}

#[test]
fn classification_of_hand_built_polynomials() {
    let n = 10;
    let big = BigInt::from(100);
    let mut easy = QuadraticPolynomial::new(n);
    easy.add_quadratic(1, 2, &big).unwrap();
    let mut short = QuadraticPolynomial::new(n);
    short.add_linear(3, &big).unwrap();
    let mut interesting = QuadraticPolynomial::new(n);
    for i in 1..=8 {
        interesting.add_linear(i, &big).unwrap();
    }
    let x = vec![1; n];

    let mut st = state_with(vec![easy], n);
    classify_indices(&mut st, &x).unwrap();
    assert_eq!(st.records[0].label, Some(Label::Easy));

    let mut st = state_with(vec![short], n);
    classify_indices(&mut st, &x).unwrap();
    assert_eq!(st.records[0].label, Some(Label::Short));
    assert_eq!(st.records[0].large_good_vars, 1);

    let mut st = state_with(vec![interesting], n);
    classify_indices(&mut st, &x).unwrap();
    let rec = &st.records[0];
    assert_eq!(rec.label, Some(Label::Interesting));
    assert_eq!(rec.t_ell, Some(8));
    assert!(st.bad.is_empty());
    assert_eq!(st.t_ell(0, &BTreeMap::new()).unwrap(), 8);
}

#[test]
fn zero_polynomials_are_short() {
    let n = 6;
    let mut st = state_with(vec![QuadraticPolynomial::new(n); 3], n);
    classify_indices(&mut st, &[1; 6]).unwrap();
    assert_eq!(st.count(Label::Short), 3);
    assert_eq!(st.count(Label::Easy) + st.count(Label::Interesting), 0);
}

#[test]
fn t_ell_after_fixing_the_cover() {
    let sigma = HeavinessThreshold::from_integer(100).unwrap();
    let mut p = QuadraticPolynomial::new(4);
    p.add_quadratic(1, 2, &BigInt::from(100)).unwrap();
    p.add_linear(3, &BigInt::from(100)).unwrap();
    p.add_linear(4, &BigInt::from(1)).unwrap();
    let s = IndexSet::from_indices(4, [1]).unwrap();
    let values: BTreeMap<usize, i64> = [(1, -1)].into();
    assert_eq!(t_ell_statistics(&p, &s, &values, &sigma).unwrap(), 2);
    assert!(t_ell_statistics(&p, &s, &BTreeMap::new(), &sigma).is_err());
    let empty = IndexSet::empty(4).unwrap();
    assert!(t_ell_statistics(&p, &empty, &BTreeMap::new(), &sigma).is_err());
}

#[test]
fn endgame_runs_at_twelve() {
    let dist = EntryDistribution::rademacher();
    let lambda = HeavinessThreshold::from_integer(1000).unwrap();
    let (mut ran, mut wins) = (0, 0);
    for seed in 0..40 {
        let m = sample_symmetric(12, &dist, SeedSpec::new(seed, 0)).unwrap();
        let Some(fam) = find_endgame_family(&m.to_matrix(), 1, 4, &lambda).unwrap() else {
            continue;
        };
        let out = endgame_step_run(&m, &fam, SeedSpec::new(seed, 1)).unwrap();
        ran += 1;
        let s = &out.summary;
        assert_eq!(s.easy + s.short + s.interesting, 4);
        assert_eq!(s.needed, 1);
        let ext = out.matrix.to_matrix();
        for (q, v) in out.quadruples.iter().zip(&out.values) {
            let rows = q.a_star.regrounded(13).unwrap().with(13).unwrap();
            let cols = q.b_star.regrounded(13).unwrap().with(13).unwrap();
            assert_eq!(&permanent_submatrix(&ext, &rows, &cols).unwrap(), v);
        }
        if let Some(f) = &out.family {
            wins += 1;
            assert!(s.success);
            f.verify(&ext).unwrap();
            assert_eq!(f.lambda, out.state.tau);
        }
    }
    assert!(ran > 20);
    assert!(wins > 0);
}

#[test]
fn endgame_rejects_non_rademacher_rows() {
    use num_rational::BigRational;
    use permlab::FiniteLaw;
    let third = BigRational::new(1.into(), 3.into());
    let law = FiniteLaw::new(vec![(-1, third.clone()), (0, third.clone()), (1, third)]).unwrap();
    let dist = EntryDistribution::new(law.clone(), law);
    let m = sample_symmetric(6, &dist, SeedSpec::new(1, 0)).unwrap();
    let fam = HeavyFamily::new(HeavinessThreshold::one(), 6);
    assert!(endgame_step_run(&m, &fam, SeedSpec::new(1, 1)).is_err());
}
