use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use permlab::growth::{
    augment_success_probability, classify_growth_step, corner_success_probability,
    first_heavy_start, grow_single_minor_run, growth_threshold, iterative_cover_run,
    iterative_growth_run, weak_growth_run, Branch, GrowthParams, PipelineSchedule,
};
use permlab::index_set::k_subsets;
use permlab::moments::all_sign_matrices;
use permlab::perm::{permanent_submatrix, HeavinessThreshold};
use permlab::{sample_symmetric, EntryDistribution, IndexSet, Matrix, SeedSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn set(n: usize, mask: u64) -> IndexSet {
    IndexSet::from_bits(n, mask).unwrap()
}

fn lambda_of(m: &Matrix, a: &IndexSet, b: &IndexSet) -> Option<HeavinessThreshold> {
    let p = permanent_submatrix(m, a, b).unwrap();
    (!p.is_zero()).then(|| HeavinessThreshold::from_integer(p.abs()).unwrap())
}

fn augment_sweep(k: usize) -> (usize, usize) {
    let dist = EntryDistribution::rademacher();
    let (mut checked, mut bad) = (0, 0);
    for m in all_sign_matrices(k).unwrap() {
        for size in 0..=k {
            for am in k_subsets(k, size) {
                for bm in k_subsets(k, size) {
                    let (a, b) = (set(k, am), set(k, bm));
                    let Some(lambda) = lambda_of(&m, &a, &b) else {
                        continue;
                    };
                    let free = !bm & ((1u64 << k) - 1);
                    let mut im = free;
                    while im != 0 {
                        let i_set = set(k, im);
                        let p = augment_success_probability(&m, &a, &b, &i_set, &lambda, &dist)
                            .unwrap();
                        let floor = BigRational::one() - q(1, 1 << i_set.len());
                        checked += 1;
                        if p < floor {
                            bad += 1;
                        }
                        im = (im - 1) & free;
                    }
                }
            }
        }
    }
    (checked, bad)
}

#[test]
fn augment_exact_on_all_three_by_three() {
    let (checked, bad) = augment_sweep(3);
    assert!(checked > 1000);
    assert_eq!(bad, 0);
}

#[test]
fn augment_exact_on_all_four_by_four() {
    let (checked, bad) = augment_sweep(4);
    assert!(checked > 10_000);
    assert_eq!(bad, 0);
}

#[test]
fn corner_exact_on_all_four_by_four() {
    let dist = EntryDistribution::rademacher();
    let quarter = q(1, 4);
    let (mut checked, mut bad) = (0, 0);
    for m in all_sign_matrices(4).unwrap() {
        for am in k_subsets(4, 2) {
            let (a_set, b_set) = (set(4, am), set(4, !am & 0xf));
            let Some(lambda) = lambda_of(&m, &a_set, &b_set) else {
                continue;
            };
            let av = a_set.to_vec();
            for a in b_set.iter() {
                for (b1, b2) in [(av[0], av[1]), (av[1], av[0])] {
                    let p =
                        corner_success_probability(&m, &a_set, &b_set, a, b1, b2, &lambda, &dist)
                            .unwrap();
                    checked += 1;
                    if p < quarter {
                        bad += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
    assert_eq!(bad, 0);
}

#[test]
fn corner_has_no_instance_on_three_by_three() {
    // a ∈ B \ A and two elements of A \ B need |A ∪ B| ≥ |A| + 2 with |A| ≥ 2.
    let mut found = 0;
    for size in 2..=3 {
        for am in k_subsets(3, size) {
            for bm in k_subsets(3, size) {
                if (bm & !am).count_ones() >= 1 && (am & !bm).count_ones() >= 2 {
                    found += 1;
                }
            }
        }
    }
    assert_eq!(found, 0);
}

#[test]
fn augment_probability_for_identity_like_block() {
    // M[{1},{1}] = (1); the new row hits column 1 or 2 with a non-cancelling
    // 2×2 permanent x_i·m + z·m' exactly when the signs line up.
    let m = Matrix::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
    let a = IndexSet::from_indices(2, [1]).unwrap();
    let i_set = IndexSet::from_indices(2, [2]).unwrap();
    let p = augment_success_probability(
        &m,
        &a,
        &a,
        &i_set,
        &HeavinessThreshold::one(),
        &EntryDistribution::rademacher(),
    )
    .unwrap();
    // per [[1,1],[x1,x2]] = x1 + x2, nonzero half the time.
    assert_eq!(p, q(1, 2));
}

fn random_family(rng: &mut impl Rng, k: usize, ground: usize, count: usize) -> Vec<IndexSet> {
    let mut all: Vec<u64> = k_subsets(ground, k).collect();
    all.shuffle(rng);
    all.truncate(count);
    all.into_iter().map(|m| set(ground, m)).collect()
}

#[test]
fn double_counting_on_random_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let r = rng.gen_range(1..5);
        let k = rng.gen_range(1..6);
        let total = permlab::anticonc::binomial((k + r) as u64, k as u64);
        let cap: usize = total.try_into().unwrap();
        let count = rng.gen_range(1..=cap.min(40));
        let fam = random_family(&mut rng, k, k + r, count);
        let big_k = q(rng.gen_range(2..12), 2);
        let h = classify_growth_step(&fam, k, r, &big_k).unwrap();
        assert_eq!(h.below_k + h.at_least_k, (r * count) as u64);
        let weighted: usize = h.histogram.iter().map(|(q, c)| q * c).sum();
        assert_eq!(weighted, r * count);
        let expect = if 2 * h.below_k >= (r * count) as u64 {
            Branch::EPrime
        } else {
            Branch::EDoublePrime
        };
        assert_eq!(h.branch, expect);
        assert!(h.histogram.iter().all(|&(q, _)| q <= k + 1));
    }
}

#[test]
fn full_layer_children_have_k_plus_one_parents() {
    let fam: Vec<IndexSet> = k_subsets(6, 2).map(|m| set(6, m)).collect();
    let h = classify_growth_step(&fam, 2, 4, &q(3, 1)).unwrap();
    assert_eq!(h.histogram, vec![(3, 20)]);
    assert_eq!(h.branch, Branch::EDoublePrime);
}

#[test]
fn weak_traces_are_legal() {
    for (n, r) in [(10, 2), (14, 3), (16, 4)] {
        let params = GrowthParams::weak(n, r, q(1, 4), q(3, 1));
        for seed in 0..20 {
            let out = weak_growth_run(&params, SeedSpec::new(seed, 0)).unwrap();
            out.trace.check().unwrap();
            assert!(out.trace.steps.len() <= n - r);
            if let Some(fam) = &out.family {
                fam.verify(&out.matrix.to_matrix()).unwrap();
            }
        }
    }
}

#[test]
fn weak_run_is_reproducible() {
    let params = GrowthParams::weak(12, 3, q(1, 4), q(2, 1));
    let a = weak_growth_run(&params, SeedSpec::new(9, 4)).unwrap();
    let b = weak_growth_run(&params, SeedSpec::new(9, 4)).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.matrix, b.matrix);
}

#[test]
fn cover_traces_are_legal() {
    let dist = EntryDistribution::rademacher();
    let lambda = HeavinessThreshold::one();
    let mut wins = 0;
    let mut ran = 0;
    for seed in 0..40 {
        let m = sample_symmetric(12, &dist, SeedSpec::new(seed, 0)).unwrap();
        let Some(b) = first_heavy_start(&m, 3, 0, &lambda).unwrap() else {
            continue;
        };
        let out = iterative_cover_run(&m, &b, 3, &lambda, SeedSpec::new(seed, 1)).unwrap();
        out.trace.check().unwrap();
        assert_eq!(out.trace.steps.len(), 9);
        ran += 1;
        if out.trace.succeeded() {
            wins += 1;
            let w = out.witness.unwrap();
            assert!(lambda.admits(&w.permanent));
            assert_eq!(w.rows, IndexSet::range(21, 4, 21).unwrap());
        }
    }
    assert!(ran > 30);
    assert!(wins > 0);
}

#[test]
fn growth_traces_are_legal() {
    let dist = EntryDistribution::rademacher();
    let lambda = HeavinessThreshold::one();
    for seed in 0..30 {
        let m = sample_symmetric(7, &dist, SeedSpec::new(seed, 0)).unwrap();
        let Some(b) = first_heavy_start(&m, 3, 3, &lambda).unwrap() else {
            continue;
        };
        let out = iterative_growth_run(&m, &b, 3, 2, &lambda, SeedSpec::new(seed, 1)).unwrap();
        out.trace.check().unwrap();
        assert_eq!(out.trace.steps.len(), 15);
        if let Some(w) = out.witness {
            assert!(growth_threshold(&lambda, 3, 2).admits(&w.permanent));
        }
    }
}

#[test]
fn growth_threshold_halves_per_missing_column() {
    let lambda = HeavinessThreshold::from_integer(64).unwrap();
    assert_eq!(
        growth_threshold(&lambda, 5, 2).min_admitted(),
        BigInt::from(8)
    );
    assert_eq!(
        growth_threshold(&lambda, 5, 5).min_admitted(),
        BigInt::from(64)
    );
}

#[test]
fn pipeline_wiring() {
    let schedule = PipelineSchedule::lemma_lengths(20, 2, 5, q(1, 4), q(2, 1)).with_steps(5, 1, 2);
    let x = IndexSet::from_indices(20, [3, 9]).unwrap();
    let y = IndexSet::from_indices(20, [1, 2, 4, 5, 6, 7]).unwrap();
    let mut wins = 0;
    for seed in 0..6 {
        let out = grow_single_minor_run(&x, &y, &schedule, SeedSpec::new(seed, 0)).unwrap();
        out.check_wiring().unwrap();
        if out.failed_stage.as_deref() != Some("weak") {
            assert_eq!(out.stages[0].name, "cover-R");
        }
        if out.succeeded() {
            wins += 1;
            let rows = out.rows.unwrap();
            let b = out.b.unwrap();
            assert!(x.is_disjoint(&rows));
            assert!(y.complement().is_subset(&b));
            assert_eq!(b.len(), 18);
            let per = permanent_submatrix(out.matrix.as_ref().unwrap(), &rows, &b).unwrap();
            assert_eq!(Some(per.clone()), out.permanent);
            assert!(out.composed.as_ref().unwrap().admits(&per));
        }
    }
    assert!(wins > 0);
}

#[test]
fn pipeline_rejects_lemma_lengths_at_sixteen() {
    let schedule = PipelineSchedule::lemma_lengths(16, 2, 5, q(1, 4), q(2, 1));
    let err = schedule.validate().unwrap_err().to_string();
    assert!(err.contains("R = 5"), "{err}");
}
