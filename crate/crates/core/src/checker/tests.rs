use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::pattern::{build_constraint_tensor, random_pattern, PivotRule, SamplingPattern};
use crate::tensor::Shape;

fn shape(d: &[usize]) -> Shape {
    Shape::new(d.to_vec()).unwrap()
}

fn rank(r: &[usize]) -> RankVector {
    RankVector::new(r.to_vec()).unwrap()
}

fn zero(v: &[&[usize]]) -> Vec<Vec<usize>> {
    v.iter().map(|x| x.iter().map(|c| c - 1).collect()).collect()
}

fn motivating() -> SamplingPattern {
    SamplingPattern::new(shape(&[2, 2, 2]), zero(&[&[1, 1, 1], &[2, 1, 1], &[1, 2, 1], &[1, 1, 2]])).unwrap()
}

fn example_one() -> ConstraintTensor {
    let s = zero(&[
        &[1, 1, 1],
        &[1, 2, 1],
        &[2, 3, 1],
        &[3, 3, 1],
        &[1, 1, 2],
        &[2, 1, 2],
        &[3, 2, 2],
        &[1, 3, 3],
        &[3, 2, 3],
    ]);
    let pivots = zero(&[&[2, 3, 1], &[3, 3, 1], &[1, 1, 2], &[2, 1, 2], &[1, 3, 3], &[3, 2, 3]]);
    let p = SamplingPattern::new(shape(&[3, 3, 3]), s).unwrap();
    build_constraint_tensor(&p, &rank(&[1, 2]), &PivotRule::Explicit(pivots), false).unwrap()
}

// Independent brute-force evaluation straight from the cell lists.

fn brute_rows(ct: &ConstraintTensor, cols: &[usize], i: usize) -> usize {
    let set: HashSet<usize> = cols
        .iter()
        .flat_map(|&k| ct.column(k).cells().map(move |c| c[i]).collect::<Vec<_>>())
        .collect();
    set.len()
}

fn brute_capacity(ct: &ConstraintTensor, cols: &[usize]) -> i64 {
    let d = ct.pattern_shape().order();
    let r = ct.rank();
    (0..d - 1)
        .map(|i| {
            let (lo, hi) = (r.get(i) as i64, r.get(i + 1) as i64);
            (lo * hi * brute_rows(ct, cols, i) as i64 - hi * hi).max(0)
        })
        .sum()
}

fn subsets(cols: &[usize]) -> Vec<Vec<usize>> {
    (1u64..(1 << cols.len()))
        .map(|mask| {
            (0..cols.len())
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| cols[j])
                .collect()
        })
        .collect()
}

fn brute_witness(ct: &ConstraintTensor, cols: &[usize]) -> Option<Vec<usize>> {
    subsets(cols)
        .into_iter()
        .filter(|s| brute_capacity(ct, s) < s.len() as i64)
        .min_by(|a, b| (a.len(), a).cmp(&(b.len(), b)))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

#[test]
fn example_one_column_rows() {
    let ct = example_one();
    // Column from slice 2: cells (1,1), (2,1), (3,2).
    assert_eq!(ct.column(2).slice, 1);
    assert_eq!(nonzero_rows(&[2], &ct, 1).unwrap(), 3);
    assert_eq!(nonzero_rows(&[2], &ct, 2).unwrap(), 2);
    assert_eq!(nonzero_rows(&[0, 1, 2], &ct, 1).unwrap(), 3);
    assert_eq!(nonzero_rows(&[], &ct, 1).unwrap(), 0);
    assert!(nonzero_rows(&[0], &ct, 3).is_err());
}

#[test]
fn motivating_capacity() {
    let ct = build_constraint_tensor(&motivating(), &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
    assert_eq!(independence_capacity(&[0, 1], &ct), 2);
    assert_eq!(independence_capacity(&[], &ct), 0);
    let sel = SubtensorSelection::all(&ct).unwrap();
    let res = check_condition_ii(&sel, &ct, &SearchBudget::default());
    assert_eq!(res.status, ConditionStatus::Verified);
    assert_eq!(res.mode, VerificationMode::Exhaustive);
}

#[test]
fn one_row_per_mode_has_no_capacity() {
    // Pivot (1,1) in both slices, extras (1,2)... use a 1×2×2 shape: every
    // column touches one row of mode 1.
    let p = SamplingPattern::full(shape(&[1, 2, 2]));
    let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
    assert_eq!(nonzero_rows(&[0], &ct, 1).unwrap(), 1);
    assert_eq!(independence_capacity(&[0], &ct), 1);
    let p = SamplingPattern::new(shape(&[1, 1, 2]), zero(&[&[1, 1, 1], &[1, 1, 2]])).unwrap();
    let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
    assert_eq!(ct.num_columns(), 0);
}

#[test]
fn duplicate_columns_are_falsified() {
    // Same pivot (1,1) and extra cell (2,2) in both slices.
    let p = SamplingPattern::new(
        shape(&[2, 2, 2]),
        zero(&[&[1, 1, 1], &[2, 2, 1], &[1, 1, 2], &[2, 2, 2]]),
    )
    .unwrap();
    let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
    assert_eq!(ct.num_columns(), 2);
    assert_eq!(ct.column(0).cells().collect::<Vec<_>>(), ct.column(1).cells().collect::<Vec<_>>());
    // Both cells differ in each mode: capacity (2−1)+(2−1) = 2 ≥ 2.
    assert_eq!(independence_capacity(&[0, 1], &ct), 2);

    // With a single shared cell in mode 1 the pair is over-counted.
    let p = SamplingPattern::new(
        shape(&[1, 3, 2]),
        zero(&[&[1, 1, 1], &[1, 2, 1], &[1, 1, 2], &[1, 2, 2]]),
    )
    .unwrap();
    let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
    let sel = SubtensorSelection::all(&ct).unwrap();
    let res = check_condition_ii(&sel, &ct, &SearchBudget::default());
    assert_eq!(res.status, ConditionStatus::Falsified);
    assert_eq!(res.witness, Some(vec![0, 1]));
    assert_eq!(independence_capacity(&[0, 1], &ct), 1);
}

#[test]
fn example_one_all_subsets_match_brute_force() {
    let ct = example_one();
    let sel = SubtensorSelection::all(&ct).unwrap();
    let res = check_condition_ii(&sel, &ct, &SearchBudget::default());
    let brute = brute_witness(&ct, &[0, 1, 2]);
    assert_eq!(res.witness, brute);
    assert_eq!(
        res.status,
        if brute.is_some() { ConditionStatus::Falsified } else { ConditionStatus::Verified }
    );
    for s in subsets(&[0, 1, 2]) {
        assert_eq!(independence_capacity(&s, &ct), brute_capacity(&ct, &s));
    }
}

#[test]
fn motivating_example_is_finite_but_not_certified_unique() {
    let budget = SearchBudget::default();
    let finite = check_finite(&motivating(), &rank(&[1, 1]), &budget).unwrap();
    assert_eq!(finite.verdict, Verdict::FinitelyCompletable);
    assert_eq!(finite.reverify(), Some(true));
    assert_eq!(
        finite.witness,
        Some(Witness::Certificate {
            finite: vec![0, 1],
            modes: vec![]
        })
    );
    let unique = check_unique(&motivating(), &rank(&[1, 1]), &budget).unwrap();
    assert_eq!(unique.verdict, Verdict::Unknown);
    assert!(unique.diagnostics.notes.iter().any(|n| n.contains("0 columns remain")));
}

#[test]
fn too_few_samples_are_falsified_by_counting() {
    let p = SamplingPattern::new(shape(&[2, 2, 2]), zero(&[&[1, 1, 1], &[2, 1, 1], &[1, 1, 2]])).unwrap();
    let r = check_finite(&p, &rank(&[1, 1]), &SearchBudget::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Falsified);
    assert_eq!(r.witness, Some(Witness::TooFewColumns { available: 1, required: 2 }));
    assert_eq!(r.reverify(), Some(true));
    let u = check_unique(&p, &rank(&[1, 1]), &SearchBudget::default()).unwrap();
    assert_eq!(u.verdict, Verdict::Falsified);
}

#[test]
fn capacity_shortfall_is_falsified() {
    // Four samples in mode-2 row 1 of slice 1 plus one in slice 2:
    // K = 3 >= M = 2 + 2 − 2... on 3×2×2, M = 3 + 2 − 2 = 3.
    let p = SamplingPattern::new(
        shape(&[3, 2, 2]),
        zero(&[&[1, 1, 1], &[2, 1, 1], &[3, 1, 1], &[1, 1, 2], &[2, 1, 2]]),
    )
    .unwrap();
    let r = check_finite(&p, &rank(&[1, 1]), &SearchBudget::default()).unwrap();
    assert_eq!(r.diagnostics.columns_required, 3);
    assert_eq!(r.diagnostics.columns_total, 3);
    // m_1 = 3, m_2 = 1: capacity 2 + 0 < 3.
    assert_eq!(
        r.witness,
        Some(Witness::CapacityShortfall { capacity: 2, required: 3 })
    );
    assert_eq!(r.verdict, Verdict::Falsified);
    assert_eq!(r.reverify(), Some(true));
}

#[test]
fn assumption_failure() {
    let p = SamplingPattern::new(shape(&[2, 2, 2]), zero(&[&[1, 1, 1], &[2, 1, 1]])).unwrap();
    let budget = SearchBudget::default();
    assert!(matches!(
        check_finite(&p, &rank(&[1, 1]), &budget),
        Err(Error::Assumption1Violated { .. })
    ));
    let r = assess(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, CheckKind::Finite, &budget).unwrap();
    assert_eq!(r.verdict, Verdict::NotGuaranteed);
    assert_eq!(r.witness, Some(Witness::Assumption1 { deficient: vec![1] }));
}

#[test]
fn full_observation_is_unique() {
    let budget = SearchBudget::default();
    let p = SamplingPattern::full(shape(&[3, 3, 3]));
    let u = check_unique(&p, &rank(&[1, 1]), &budget).unwrap();
    assert_eq!(u.verdict, Verdict::UniquelyCompletable);
    assert_eq!(u.reverify(), Some(true));

    // For (1,2,1) the mode-3 selection needs three columns whose pivot and
    // extra cells cover all three mode-3 rows pairwise, so pivots must differ
    // in x_3 across slices: slice s pivots on (s,s,s).
    let p = SamplingPattern::full(shape(&[3, 3, 3, 3]));
    let pivots: Vec<Vec<usize>> = (0..3).map(|s| vec![s, s, s, s]).collect();
    let u = check_unique_with(&p, &rank(&[1, 2, 1]), &PivotRule::Explicit(pivots), &budget).unwrap();
    assert_eq!(u.verdict, Verdict::UniquelyCompletable);
    assert_eq!(u.reverify(), Some(true));
}

#[test]
fn pivot_placement_matters_for_uniqueness() {
    // Rank (2,2) on 4×4×4: a single column needs m_1 >= 3, so its two
    // pivots must sit in different mode-1 rows. Lexicographic pivots share
    // row 1 and cannot certify; diagonal pivots can.
    let p = SamplingPattern::full(shape(&[4, 4, 4]));
    let r = rank(&[2, 2]);
    let budget = SearchBudget::default();
    let lex = check_unique(&p, &r, &budget).unwrap();
    assert_eq!(lex.verdict, Verdict::Unknown);
    let diagonal: Vec<Vec<usize>> = (0..4).flat_map(|s| [vec![0, 0, s], vec![1, 1, s]]).collect();
    let u = check_unique_with(&p, &r, &PivotRule::Explicit(diagonal), &budget).unwrap();
    assert_eq!(u.verdict, Verdict::UniquelyCompletable);
    assert_eq!(u.reverify(), Some(true));
}

#[test]
fn large_selection_with_tiny_budget_is_unknown() {
    let p = SamplingPattern::full(shape(&[6, 6, 6]));
    let r = rank(&[2, 2]);
    let budget = SearchBudget {
        max_subsets: 50,
        max_nodes: 5,
        random_trials: 10,
        seed: 1,
    };
    let report = check_finite(&p, &r, &budget).unwrap();
    assert_eq!(report.diagnostics.columns_required, 12 + 24 - 8);
    assert_eq!(report.verdict, Verdict::Unknown);
}

#[test]
fn report_text_lists_keys() {
    let finite = check_finite(&motivating(), &rank(&[1, 1]), &SearchBudget::default()).unwrap();
    let text = finite.to_text();
    assert!(text.starts_with("format: ttcomplete-report v1\n"));
    for key in ["verdict: FinitelyCompletable", "witness_columns: 1 2", "witness_profile: 2 2", "columns_required: 2"] {
        assert!(text.contains(key), "{key} missing in\n{text}");
    }
    assert_eq!(
        finite.to_csv_row().split(',').count(),
        CompletabilityReport::CSV_HEADER.split(',').count()
    );
}

fn random_ct(seed: u64) -> ConstraintTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..3).map(|_| rng.random_range(2..=4)).collect();
    let s = shape(&dims);
    let r1 = rng.random_range(1..=2.min(dims[0]));
    let r2 = rng.random_range(1..=2.min(dims[2]));
    let r = rank(&[r1, r2]);
    let p = random_pattern(&s, rng.random_range(0.3..0.9), seed).unwrap();
    build_constraint_tensor(&p, &r, &PivotRule::Lexicographic, true).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn condition_ii_matches_brute_force(seed in any::<u64>(), pick in any::<u64>()) {
        let ct = random_ct(seed);
        prop_assume!(ct.num_columns() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let k = ct.num_columns();
        let t = rng.random_range(1..=k.min(10));
        let cols: Vec<usize> = rand::seq::index::sample(&mut rng, k, t).into_iter().collect();
        let sel = SubtensorSelection::new(cols.clone(), &ct).unwrap();
        let res = check_condition_ii(&sel, &ct, &SearchBudget::default());
        let brute = brute_witness(&ct, sel.columns());
        prop_assert_eq!(&res.witness, &brute);
        if let Some(w) = &res.witness {
            prop_assert!(independence_capacity(w, &ct) < w.len() as i64);
        }
    }

    #[test]
    fn rows_are_monotone(seed in any::<u64>()) {
        let ct = random_ct(seed);
        let k = ct.num_columns();
        prop_assume!(k >= 2);
        let all: Vec<usize> = (0..k).collect();
        for i in 1..=2 {
            let part = nonzero_rows(&all[..k / 2], &ct, i).unwrap();
            let whole = nonzero_rows(&all, &ct, i).unwrap();
            prop_assert!(part <= whole);
            prop_assert_eq!(whole, brute_rows(&ct, &all, i - 1));
        }
    }

    #[test]
    fn finite_verdict_matches_brute_force(seed in any::<u64>()) {
        let ct = random_ct(seed);
        prop_assume!(ct.num_columns() <= 12);
        let m = required_columns(&ct);
        let report = check_finite_constraint(&ct, &SearchBudget::default());
        let exists = combinations(ct.num_columns(), m)
            .into_iter()
            .any(|c| brute_witness(&ct, &c).is_none());
        let expected = if exists { Verdict::FinitelyCompletable } else { Verdict::Falsified };
        prop_assert_eq!(report.verdict, expected);
        if report.verdict == Verdict::FinitelyCompletable {
            prop_assert_eq!(report.reverify(), Some(true));
        }
    }

    #[test]
    fn unique_certificates_reverify(seed in any::<u64>()) {
        let ct = random_ct(seed);
        let report = check_unique_constraint(&ct, &SearchBudget::default());
        if report.verdict == Verdict::UniquelyCompletable {
            prop_assert_eq!(report.reverify(), Some(true));
            let Some(Witness::Certificate { finite, modes }) = &report.witness else { unreachable!() };
            let mut all: Vec<usize> = finite.iter().chain(modes.iter().flatten()).copied().collect();
            let n = all.len();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), n);
            let f = check_finite_constraint(&ct, &SearchBudget::default());
            prop_assert_eq!(f.verdict, Verdict::FinitelyCompletable);
        }
        let _ = BTreeSet::<usize>::new();
    }
}
