//! Property tests for invariants that should hold on arbitrary inputs, not
//! just the hand-picked anchors in the unit suites.

use av1324_core::combinatorics::{
    embed_blue_full, embed_blue_nonroot, embed_red_tree, enumerate_forests, enumerate_trees,
    forest_to_luka_pattern, hasse_graph, parse_forest, parse_tree, PlaneForest, PlaneTree,
    PointSeq,
};
use av1324_core::lukasiewicz::{
    count_occurrences, occurrence_distribution, Convention, LukaPath, LukaPattern,
};
use av1324_core::oracle::{sample_w0, WParams};
use av1324_core::patterns::{q_count, quartic_contains_1324, seq_contains_1324, QMode};
use av1324_core::series::{binomial, catalan};
use num_bigint::BigInt;
use proptest::prelude::*;

fn arb_sized_tree(lo: usize, hi: usize) -> impl Strategy<Value = PlaneTree> {
    (lo..=hi).prop_flat_map(|n| {
        let trees = enumerate_trees(n).unwrap();
        (0..trees.len()).prop_map(move |i| trees[i].clone())
    })
}

fn arb_sized_forest(lo: usize, hi: usize) -> impl Strategy<Value = PlaneForest> {
    (lo..=hi).prop_flat_map(|n| {
        let forests = enumerate_forests(n);
        (0..forests.len()).prop_map(move |i| forests[i].clone())
    })
}

fn arb_distinct_values(max_len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::btree_set(1u32..=60, 0..=max_len)
        .prop_map(|s| s.into_iter().collect::<Vec<_>>())
        .prop_shuffle()
}

fn fixed_patterns() -> impl Strategy<Value = LukaPattern> {
    prop::sample::select(vec![vec![1], vec![1, 0], vec![1, 0, 1], vec![1, 1, -1]])
        .prop_map(|steps| LukaPattern::new(steps).unwrap())
}

proptest! {
    #[test]
    fn tree_codec_roundtrip(t in arb_sized_tree(1, 9)) {
        let code = t.encode();
        prop_assert_eq!(code.len(), 2 * t.size());
        prop_assert_eq!(parse_tree(&code).unwrap(), t);
    }

    #[test]
    fn forest_codec_roundtrip(f in arb_sized_forest(1, 9)) {
        let code = f.encode();
        prop_assert_eq!(code.len(), 2 * f.size());
        prop_assert_eq!(parse_forest(&code).unwrap(), f);
    }

    #[test]
    fn rank_normalization_preserves_containment(values in arb_distinct_values(10)) {
        prop_assume!(!values.is_empty());
        let seq = PointSeq::new(values.clone()).unwrap();
        let normalized = seq.rank_normalized();
        prop_assert_eq!(
            quartic_contains_1324(seq.values()),
            quartic_contains_1324(normalized.values())
        );
        prop_assert_eq!(hasse_graph(&seq), hasse_graph(&normalized));
    }

    #[test]
    fn incremental_detector_matches_quartic(values in arb_distinct_values(10)) {
        prop_assert_eq!(seq_contains_1324(&values), quartic_contains_1324(&values));
    }

    #[test]
    fn conventions_differ_exactly_on_a_leading_occurrence(
        f in arb_sized_forest(1, 8),
        p in fixed_patterns(),
    ) {
        let path = LukaPath::new(forest_to_luka_pattern(&f)).unwrap();
        let all = count_occurrences(&path, &p, Convention::All);
        let skip = count_occurrences(&path, &p, Convention::SkipFirst);
        let starts = path.steps().len() >= p.len() && path.steps()[..p.len()] == *p.steps();
        prop_assert_eq!(all - skip, u64::from(starts));
    }

    #[test]
    fn interleaving_count_bounds_and_agreement(
        t in arb_sized_tree(2, 5),
        f in arb_sized_forest(1, 3),
    ) {
        let pruned = q_count(&t, &f, QMode::Pruned).unwrap();
        let naive = q_count(&t, &f, QMode::Naive).unwrap();
        prop_assert_eq!(pruned, naive);
        prop_assert!(pruned >= 2);
        let cap = binomial((t.size() - 1 + f.size()) as i64, f.size() as i64);
        prop_assert!(BigInt::from(pruned) <= cap);
    }

    #[test]
    fn embeddings_are_permutations(t in arb_sized_tree(1, 9)) {
        let n = t.size();
        for (seq, len) in [
            (embed_red_tree(&t), n),
            (embed_blue_full(&t), n),
            (embed_blue_nonroot(&t), n - 1),
        ] {
            prop_assert_eq!(seq.len(), len);
            let mut sorted = seq.values().to_vec();
            sorted.sort_unstable();
            let want: Vec<u32> = (1..=len as u32).collect();
            prop_assert_eq!(sorted, want);
        }
        // The blue embedding is the red one reversed and complemented.
        let red = embed_red_tree(&t);
        let blue = embed_blue_full(&t);
        for p in 0..n {
            prop_assert_eq!(blue.values()[p], n as u32 + 1 - red.values()[n - 1 - p]);
        }
    }

    #[test]
    fn sampled_members_avoid_and_span(
        (t, k, d, l) in (1usize..=2, 1usize..=3, 1usize..=2)
            .prop_flat_map(|(t, k, d)| (Just(t), Just(k), Just(d), d + 1..=4usize)),
        seed in any::<u64>(),
    ) {
        let params =
            WParams { blue_count: t, red_size: k, blue_size: l, root_degree: d };
        for s in sample_w0(&params, 3, seed).unwrap() {
            prop_assert_eq!(s.perm.len(), params.perm_len());
            prop_assert!(s.perm.is_permutation());
            prop_assert!(!seq_contains_1324(s.perm.values()));
        }
    }

    #[test]
    fn distribution_mass_is_catalan(
        n in 1usize..=8,
        p in fixed_patterns(),
        skip_first in any::<bool>(),
    ) {
        let conv = if skip_first { Convention::SkipFirst } else { Convention::All };
        let dist = occurrence_distribution(&p, n, conv).unwrap();
        let total: BigInt = dist.values().map(|v| BigInt::from(v.clone())).sum();
        prop_assert_eq!(total, catalan(n as u64));
    }
}
