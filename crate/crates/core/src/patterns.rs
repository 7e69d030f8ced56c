//! Classical-pattern containment, an incremental 1324 guard, and the count
//! Q of 1324-avoiding interleavings of a blue tree body with a red forest.

use crate::combinatorics::{
    embed_blue_nonroot, embed_forest, PlaneForest, PlaneTree, PointSeq,
};
use crate::error::{Error, Result};

/// How to count interleavings: the pruned search and the plain one must
/// always agree; the plain one exists to keep the pruned one honest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMode {
    Pruned,
    Naive,
}

/// Brute-force scan over all position quadruples. Kept deliberately free of
/// shared logic with the incremental detector.
pub fn quartic_contains_1324(v: &[u32]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if v[j] <= v[i] {
                continue;
            }
            for k in j + 1..n {
                if !(v[i] < v[k] && v[k] < v[j]) {
                    continue;
                }
                for l in k + 1..n {
                    if v[l] > v[j] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Largest value a future element may take without completing a 1324, i.e.
/// the minimum over 132 occurrences of that occurrence's largest value.
/// `None` means no 132 occurrence yet, so nothing is forbidden.
pub fn guard_threshold(values: &[u32]) -> Option<u32> {
    let n = values.len();
    let mut min_before = vec![u32::MAX; n];
    let mut m = u32::MAX;
    for (i, &x) in values.iter().enumerate() {
        min_before[i] = m;
        m = m.min(x);
    }
    let mut best: Option<u32> = None;
    for j in 0..n {
        for k in j + 1..n {
            if min_before[j] < values[k] && values[k] < values[j] {
                best = Some(best.map_or(values[j], |b| b.min(values[j])));
            }
        }
    }
    best
}

/// Left-to-right detector: an element completes a 1324 exactly when it
/// exceeds the running guard threshold.
pub fn seq_contains_1324(values: &[u32]) -> bool {
    let n = values.len();
    let mut threshold = u32::MAX;
    let mut min_before = vec![u32::MAX; n];
    let mut prefix_min = u32::MAX;
    for i in 0..n {
        let x = values[i];
        if threshold < u32::MAX && x > threshold {
            return true;
        }
        // x closes a 132 as its final element whenever some earlier value v
        // exceeds x with a still smaller value before v.
        for j in 0..i {
            let v = values[j];
            if v > x && min_before[j] < x && v < threshold {
                threshold = v;
            }
        }
        min_before[i] = prefix_min;
        prefix_min = prefix_min.min(x);
    }
    false
}

fn general_contains(seq: &[u32], pat: &[u32]) -> bool {
    fn rec(seq: &[u32], pat: &[u32], start: usize, chosen: &mut Vec<u32>) -> bool {
        let i = chosen.len();
        if i == pat.len() {
            return true;
        }
        if seq.len() - start < pat.len() - i {
            return false;
        }
        for p in start..seq.len() {
            let x = seq[p];
            if (0..i).all(|t| (pat[t] < pat[i]) == (chosen[t] < x)) {
                chosen.push(x);
                if rec(seq, pat, p + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(seq, pat, 0, &mut Vec::with_capacity(pat.len()))
}

/// Classical-pattern containment. Dispatches to the fast 1324 detector when
/// the pattern is order-isomorphic to 1324.
pub fn contains_pattern(seq: &PointSeq, pat: &PointSeq) -> Result<bool> {
    if pat.is_empty() {
        return Err(Error::domain("pattern must be nonempty"));
    }
    if pat.rank_normalized().values() == [1, 3, 2, 4] {
        return Ok(seq_contains_1324(seq.values()));
    }
    Ok(general_contains(seq.values(), pat.values()))
}

/// Guard value cap; values must be at most this for [`Guard`].
pub const GUARD_MAX_VALUE: u32 = 63;

/// Incremental 1324 guard over a growing sequence of distinct values in
/// 1..=63. Supports O(1)-undo so a search can backtrack.
#[derive(Debug, Clone)]
pub struct Guard {
    placed: u64,
    min_before: [u32; 64],
    prefix_min: u32,
    threshold: u32, // u32::MAX encodes "no 132 yet"
}

/// Token to roll back one `place`.
#[derive(Debug, Clone, Copy)]
pub struct Undo {
    x: u32,
    prev_threshold: u32,
    prev_prefix_min: u32,
}

impl Default for Guard {
    fn default() -> Self {
        Self::new()
    }
}

impl Guard {
    pub fn new() -> Self {
        Guard {
            placed: 0,
            min_before: [u32::MAX; 64],
            prefix_min: u32::MAX,
            threshold: u32::MAX,
        }
    }

    /// Current threshold; appending anything above it completes a 1324.
    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn creates_1324(&self, x: u32) -> bool {
        self.threshold < u32::MAX && x > self.threshold
    }

    /// Appends `x`, assuming `!creates_1324(x)` was already checked.
    pub fn place(&mut self, x: u32) -> Undo {
        debug_assert!((1..=GUARD_MAX_VALUE).contains(&x));
        debug_assert!(self.placed & (1 << x) == 0, "value {x} placed twice");
        let undo = Undo {
            x,
            prev_threshold: self.threshold,
            prev_prefix_min: self.prefix_min,
        };
        // New 132 occurrences closed by x have their largest value at some
        // already placed v > x preceded by a value below x. Scanning placed
        // values upward, the first such v is the smallest.
        if x < GUARD_MAX_VALUE {
            let mut bits = self.placed & !((1u64 << (x + 1)) - 1);
            while bits != 0 {
                let v = bits.trailing_zeros();
                if self.min_before[v as usize] < x {
                    if v < self.threshold {
                        self.threshold = v;
                    }
                    break;
                }
                bits &= bits - 1;
            }
        }
        self.min_before[x as usize] = self.prefix_min;
        self.placed |= 1 << x;
        if x < self.prefix_min {
            self.prefix_min = x;
        }
        undo
    }

    pub fn unplace(&mut self, undo: Undo) {
        self.placed &= !(1 << undo.x);
        self.min_before[undo.x as usize] = u32::MAX;
        self.threshold = undo.prev_threshold;
        self.prefix_min = undo.prev_prefix_min;
    }
}

/// Interleaving count over raw value sequences. `blue` and `red` each keep
/// their internal order; every placed value must be distinct and at most 63.
/// The search prunes branches whose remaining red values are already doomed.
pub(crate) fn q_count_seqs(blue: &[u32], red: &[u32]) -> u64 {
    // Suffix maxima of red: once the guard threshold drops below the max of
    // what red still owes, no completion avoids 1324.
    let mut suffix_max = vec![0u32; red.len() + 1];
    for j in (0..red.len()).rev() {
        suffix_max[j] = suffix_max[j + 1].max(red[j]);
    }
    fn dfs(
        blue: &[u32],
        red: &[u32],
        suffix_max: &[u32],
        i: usize,
        j: usize,
        guard: &mut Guard,
    ) -> u64 {
        if suffix_max[j] > guard.threshold() {
            return 0;
        }
        if i == blue.len() && j == red.len() {
            return 1;
        }
        let mut total = 0;
        if i < blue.len() && !guard.creates_1324(blue[i]) {
            let undo = guard.place(blue[i]);
            total += dfs(blue, red, suffix_max, i + 1, j, guard);
            guard.unplace(undo);
        }
        if j < red.len() && !guard.creates_1324(red[j]) {
            let undo = guard.place(red[j]);
            total += dfs(blue, red, suffix_max, i, j + 1, guard);
            guard.unplace(undo);
        }
        total
    }
    dfs(blue, red, &suffix_max, 0, 0, &mut Guard::new())
}

fn q_count_naive_seqs(blue: &[u32], red: &[u32]) -> Result<u64> {
    if blue.len() + red.len() > 20 {
        return Err(Error::resource(format!(
            "naive interleaving over {} points is too large",
            blue.len() + red.len()
        )));
    }
    fn rec(blue: &[u32], red: &[u32], i: usize, j: usize, buf: &mut Vec<u32>) -> u64 {
        if i == blue.len() && j == red.len() {
            return u64::from(!quartic_contains_1324(buf));
        }
        let mut total = 0;
        if i < blue.len() {
            buf.push(blue[i]);
            total += rec(blue, red, i + 1, j, buf);
            buf.pop();
        }
        if j < red.len() {
            buf.push(red[j]);
            total += rec(blue, red, i, j + 1, buf);
            buf.pop();
        }
        total
    }
    Ok(rec(blue, red, 0, 0, &mut Vec::with_capacity(blue.len() + red.len())))
}

/// Builds the blue and red value sequences for a (tree, forest) pair: the
/// tree's blue body keeps values 1..|T|-1, the forest sits entirely above it.
pub fn q_sequences(tree: &PlaneTree, forest: &PlaneForest) -> (PointSeq, PointSeq) {
    let blue = embed_blue_nonroot(tree);
    let red = embed_forest(forest).shifted(tree.size() as u32);
    (blue, red)
}

/// Number of 1324-avoiding interleavings of the pair's blue body and red
/// forest embedding.
pub fn q_count(tree: &PlaneTree, forest: &PlaneForest, mode: QMode) -> Result<u64> {
    let (blue, red) = q_sequences(tree, forest);
    let total = tree.size() + forest.size();
    match mode {
        QMode::Pruned => {
            if total as u32 > GUARD_MAX_VALUE {
                return Err(Error::resource(format!(
                    "pair spans {total} values, guard handles at most {GUARD_MAX_VALUE}"
                )));
            }
            Ok(q_count_seqs(blue.values(), red.values()))
        }
        QMode::Naive => q_count_naive_seqs(blue.values(), red.values()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{parse_forest, parse_tree};

    fn perms(n: u32) -> Vec<Vec<u32>> {
        fn rec(rest: &mut Vec<u32>, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if rest.is_empty() {
                out.push(cur.clone());
                return;
            }
            for i in 0..rest.len() {
                let v = rest.remove(i);
                cur.push(v);
                rec(rest, cur, out);
                cur.pop();
                rest.insert(i, v);
            }
        }
        let mut out = Vec::new();
        rec(&mut (1..=n).collect(), &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn detectors_agree_on_all_small_permutations() {
        for n in 1..=7 {
            for p in perms(n) {
                let quartic = quartic_contains_1324(&p);
                assert_eq!(seq_contains_1324(&p), quartic, "perm {p:?}");
                let pat = PointSeq::new(vec![1, 3, 2, 4]).unwrap();
                let seq = PointSeq::new(p.clone()).unwrap();
                assert_eq!(general_contains(&p, pat.values()), quartic, "perm {p:?}");
                assert_eq!(contains_pattern(&seq, &pat).unwrap(), quartic);
            }
        }
    }

    #[test]
    fn guard_matches_fresh_threshold_scan() {
        for n in 1..=6 {
            for p in perms(n) {
                let mut guard = Guard::new();
                for (i, &x) in p.iter().enumerate() {
                    let fresh = guard_threshold(&p[..i]);
                    assert_eq!(
                        guard.threshold(),
                        fresh.unwrap_or(u32::MAX),
                        "prefix {:?}",
                        &p[..i]
                    );
                    if guard.creates_1324(x) {
                        assert!(seq_contains_1324(&p[..=i]));
                        break;
                    }
                    guard.place(x);
                }
            }
        }
    }

    #[test]
    fn guard_undo_restores_state() {
        let seq = [2u32, 5, 3, 1, 4, 6];
        let mut guard = Guard::new();
        let mut undos = Vec::new();
        for &x in &seq[..4] {
            undos.push(guard.place(x));
        }
        let snapshot = (guard.threshold(), guard.placed, guard.prefix_min);
        let u = guard.place(4);
        guard.unplace(u);
        assert_eq!((guard.threshold(), guard.placed, guard.prefix_min), snapshot);
    }

    #[test]
    fn known_pair_counts_fifteen() {
        let t = parse_tree("((()()))").unwrap();
        let f = parse_forest("()(())").unwrap();
        assert_eq!(q_count(&t, &f, QMode::Pruned).unwrap(), 15);
        assert_eq!(q_count(&t, &f, QMode::Naive).unwrap(), 15);
    }

    #[test]
    fn tiny_pairs() {
        // Up to three points every interleaving avoids, so Q is the plain
        // binomial count of interleavings.
        let t2 = parse_tree("(())").unwrap();
        let f1 = parse_forest("()").unwrap();
        let f2 = parse_forest("()()").unwrap();
        assert_eq!(q_count(&t2, &f1, QMode::Pruned).unwrap(), 2);
        assert_eq!(q_count(&t2, &f2, QMode::Pruned).unwrap(), 3);
        // Blue block then red block always avoids.
        for (tc, fc) in [("(())", "(()())"), ("((()))", "()()()"), ("(()())", "(())")] {
            let t = parse_tree(tc).unwrap();
            let f = parse_forest(fc).unwrap();
            assert!(q_count(&t, &f, QMode::Pruned).unwrap() >= 1);
        }
    }

    #[test]
    fn modes_agree_on_small_pairs() {
        use crate::combinatorics::{enumerate_forests, enumerate_trees};
        for ts in 2..=4usize {
            for fs in 1..=(6 - ts) {
                for t in enumerate_trees(ts).unwrap() {
                    for f in enumerate_forests(fs) {
                        let a = q_count(&t, &f, QMode::Pruned).unwrap();
                        let b = q_count(&t, &f, QMode::Naive).unwrap();
                        assert_eq!(a, b, "tree {t}, forest {f}");
                    }
                }
            }
        }
    }

    #[test]
    fn general_pattern_dispatch() {
        let seq = PointSeq::new(vec![4, 1, 3, 2]).unwrap();
        let dec = PointSeq::new(vec![3, 2, 1]).unwrap();
        assert!(contains_pattern(&seq, &dec).unwrap());
        let inc = PointSeq::new(vec![1, 2, 3]).unwrap();
        assert!(!contains_pattern(&seq, &inc).unwrap());
        let empty = PointSeq::new(vec![]).unwrap();
        assert!(contains_pattern(&seq, &empty).is_err());
    }

    #[test]
    fn naive_mode_refuses_oversized_input() {
        let t = parse_tree("(((((((((((())))))))))))").unwrap(); // 12-chain
        let f = parse_forest("()()()()()()()()()()").unwrap(); // 10 singletons
        assert!(matches!(q_count(&t, &f, QMode::Naive), Err(Error::Resource(_))));
        assert!(q_count(&t, &f, QMode::Pruned).is_ok());
    }
}
