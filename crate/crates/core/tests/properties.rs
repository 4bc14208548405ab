use num_rational::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use metric_lines::canon::{canonical_code, canonical_representatives};
use metric_lines::lines::{all_lines, dbe_verdict, line_of, line_of_fast};
use metric_lines::metric::{pairs, parse_distance_matrix, DistanceMatrix};
use metric_lines::structure::{are_twins, check_twin_line_laws};
use metric_lines::verify::{
    c8_witnesses, five_point_configuration, random_rational_metric, sweep_range, verify_theorem, SweepConfig,
    SweepMode, SweepRange, TheoremReport,
};
use metric_lines::{code_from_space, space_from_code, validate_metric, MetricSpace, OneTwoSpace, PointSet};

fn code_strategy(max_n: usize) -> impl Strategy<Value = (usize, u64)> {
    (2..=max_n).prop_flat_map(|n| (Just(n), 0..1u64 << (n * (n - 1) / 2)))
}

fn metric_strategy(max_n: usize) -> impl Strategy<Value = MetricSpace> {
    (2..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_rational_metric(n, &mut rng).0
    })
}

fn scaled(space: &MetricSpace, factor: &BigRational) -> MetricSpace {
    let n = space.n();
    let rows = (0..n)
        .map(|i| (0..n).map(|j| space.dist(i, j) * factor).collect())
        .collect();
    validate_metric(DistanceMatrix::from_rows(rows).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn code_round_trip((n, code) in code_strategy(8)) {
        let space = space_from_code(n, code).unwrap();
        prop_assert_eq!(code_from_space(&space).unwrap().code, code);
        // {1,2} labelings always satisfy the triangle inequality.
        prop_assert!(validate_metric(space.to_matrix()).is_ok());
    }

    #[test]
    fn twins_are_symmetric((n, code) in code_strategy(7)) {
        let space = space_from_code(n, code).unwrap();
        for (u, v) in pairs(n) {
            prop_assert_eq!(are_twins(&space, u, v), are_twins(&space, v, u));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lines_contain_endpoints_and_are_symmetric(space in metric_strategy(6)) {
        for (u, v) in pairs(space.n()) {
            let line = line_of(&space, u, v);
            prop_assert!(line.contains(u) && line.contains(v));
            prop_assert_eq!(&line, &line_of(&space, v, u));
        }
    }

    #[test]
    fn scaling_preserves_lines(space in metric_strategy(5), p in 1i64..50, q in 1i64..50) {
        let factor = BigRational::new(p.into(), q.into());
        let bigger = scaled(&space, &factor);
        prop_assert_eq!(all_lines(&space), all_lines(&bigger));
        prop_assert_eq!(dbe_verdict(&space), dbe_verdict(&bigger));
    }

    #[test]
    fn matrix_text_round_trip(space in metric_strategy(6)) {
        let text = space.matrix().to_text();
        let again = parse_distance_matrix(&text).unwrap();
        prop_assert_eq!(&again, space.matrix());
        prop_assert_eq!(again.to_text(), text);
    }

    #[test]
    fn canonical_code_ignores_relabeling((n, code) in code_strategy(6), seed in any::<u64>()) {
        let space = space_from_code(n, code).unwrap();
        let canon = canonical_code(&space).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        for _ in 0..100 {
            perm.shuffle(&mut rng);
            prop_assert_eq!(canonical_code(&space.relabel(&perm)).unwrap(), canon);
        }
    }
}

/// Minimum code over every relabeling, by plain enumeration of permutations.
fn brute_canonical(space: &OneTwoSpace) -> u64 {
    fn heap(k: usize, perm: &mut Vec<usize>, space: &OneTwoSpace, best: &mut u64) {
        if k <= 1 {
            *best = (*best).min(code_from_space(&space.relabel(perm)).unwrap().code);
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, space, best);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            perm.swap(j, k - 1);
        }
    }
    let mut perm: Vec<usize> = (0..space.n()).collect();
    let mut best = u64::MAX;
    heap(space.n(), &mut perm, space, &mut best);
    best
}

#[test]
fn canonical_code_matches_brute_force_minimum() {
    for n in 1..=5 {
        for code in 0..1u64 << (n * (n - 1) / 2) {
            let s = space_from_code(n, code).unwrap();
            assert_eq!(canonical_code(&s).unwrap().code, brute_canonical(&s), "n={n} code={code}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [6, 7] {
        for _ in 0..20 {
            let code = rand::Rng::gen_range(&mut rng, 0..1u64 << (n * (n - 1) / 2));
            let s = space_from_code(n, code).unwrap();
            assert_eq!(canonical_code(&s).unwrap().code, brute_canonical(&s), "n={n} code={code}");
        }
    }
}

#[test]
fn class_counts_match_unlabeled_graph_counts() {
    // Unlabeled graphs on n vertices: 1, 2, 4, 11, 34, 156, 1044.
    let counts: Vec<usize> = (1..=7)
        .map(|n| canonical_representatives(n).unwrap().len())
        .collect();
    assert_eq!(counts, vec![1, 2, 4, 11, 34, 156, 1044]);
}

#[test]
fn representatives_are_their_own_canonical_codes() {
    for n in 2..=6 {
        for code in canonical_representatives(n).unwrap() {
            let s = space_from_code(n, code).unwrap();
            assert_eq!(canonical_code(&s).unwrap().code, code);
        }
    }
}

#[test]
fn iso_and_all_agree() {
    for n in 2..=6 {
        let all = verify_theorem(n, SweepMode::All, &SweepConfig::default()).unwrap();
        let iso = verify_theorem(n, SweepMode::Iso, &SweepConfig::default()).unwrap();
        assert_eq!(all.dbe_failures, iso.dbe_failures, "n={n}");
        assert_eq!(all.min_lines_overall, iso.min_lines_overall, "n={n}");
        assert_eq!(all.min_lines_no_universal, iso.min_lines_no_universal, "n={n}");
    }
}

#[test]
fn partition_does_not_change_the_report() {
    let config = SweepConfig::default();
    let n = 5;
    let whole = sweep_range(SweepRange::full(n).unwrap(), &config);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let mut cuts: Vec<u64> = (0..6).map(|_| rand::Rng::gen_range(&mut rng, 0..=1024)).collect();
        cuts.extend([0, 1024]);
        cuts.sort();
        let mut parts: Vec<TheoremReport> = cuts
            .windows(2)
            .map(|w| sweep_range(SweepRange::new(n, w[0], w[1]).unwrap(), &config))
            .collect();
        parts.shuffle(&mut rng);
        let merged = parts.into_iter().reduce(TheoremReport::merge).unwrap();
        assert_eq!(merged, whole);
    }
    let threaded = sweep_range(
        SweepRange::full(n).unwrap(),
        &SweepConfig {
            jobs: 4,
            ..SweepConfig::default()
        },
    );
    assert_eq!(threaded, whole);
}

#[test]
fn fast_lines_match_definition_exhaustively_small() {
    for n in 2..=5 {
        for code in 0..1u64 << (n * (n - 1) / 2) {
            let s = space_from_code(n, code).unwrap();
            let m = s.to_metric();
            for (u, v) in pairs(n) {
                assert_eq!(line_of_fast(&s, u, v), line_of(&m, u, v), "n={n} code={code} {u}{v}");
            }
        }
    }
}

#[test]
fn twin_laws_hold_exhaustively_small() {
    for n in 2..=5 {
        for code in 0..1u64 << (n * (n - 1) / 2) {
            let s = space_from_code(n, code).unwrap();
            assert!(check_twin_line_laws(&s).is_empty(), "n={n} code={code}");
        }
    }
}

#[test]
fn five_point_configuration_lines() {
    let s = five_point_configuration();
    let m = s.to_metric();
    let (u, v, w, x) = (0, 1, 2, 3);
    let all5 = PointSet::full(5);
    assert!(all5.is_subset(&line_of(&m, u, x)));
    assert!(all5.is_subset(&line_of(&m, v, w)));
}

#[test]
fn six_point_witnesses() {
    let ws = c8_witnesses();
    assert_eq!(ws.len(), 6);
    // Frozen from an independent brute-force line count.
    let counts: Vec<usize> = ws.iter().map(|w| w.line_count).collect();
    assert_eq!(counts, vec![12, 12, 12, 10, 11, 9]);
    let codes: Vec<u64> = ws.iter().map(|w| w.code).collect();
    assert_eq!(codes, vec![4737, 21121, 7041, 23425, 15249, 31633]);
    for w in &ws {
        assert!(w.line_count >= 6);
        assert!(!w.has_universal);
        let metric = validate_metric(w.space.to_matrix()).unwrap();
        assert_eq!(metric_lines::as_one_two(&metric).unwrap(), w.space);
        assert_eq!(all_lines(&metric).line_count(), w.line_count);
    }
}

#[test]
fn min_lines_small_n() {
    // Frozen from an independent brute-force sweep.
    let expected = [
        (2, (1, 0), None),
        (3, (1, 1), Some((3, 0))),
        (4, (1, 12), Some((4, 15))),
        (5, (4, 20), Some((5, 207))),
        (6, (4, 656), Some((9, 35))),
    ];
    let config = SweepConfig::default();
    let rows = metric_lines::verify::min_lines_table(2, 6, SweepMode::All, &config).unwrap();
    for (row, (n, overall, no_uni)) in rows.iter().zip(expected) {
        assert_eq!(row.n, n);
        let o = row.min_lines_overall.unwrap();
        assert_eq!((o.lines, o.code), overall, "n={n}");
        assert_eq!(row.min_lines_no_universal.map(|m| (m.lines, m.code)), no_uni, "n={n}");
    }
}
