//! Plane trees, forests, their paren codes, and the geometric embeddings
//! that turn them into point sequences.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Ordered rooted tree. `size` counts vertices, so a leaf has size 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    children: Vec<PlaneTree>,
}

impl PlaneTree {
    pub fn leaf() -> Self {
        PlaneTree { children: Vec::new() }
    }

    pub fn new(children: Vec<PlaneTree>) -> Self {
        PlaneTree { children }
    }

    pub fn children(&self) -> &[PlaneTree] {
        &self.children
    }

    pub fn root_degree(&self) -> usize {
        self.children.len()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(PlaneTree::size).sum::<usize>()
    }

    /// Balanced-paren code: a tree is `(` + its children's codes + `)`.
    pub fn encode(&self) -> String {
        let mut s = String::with_capacity(2 * self.size());
        self.encode_into(&mut s);
        s
    }

    fn encode_into(&self, s: &mut String) {
        s.push('(');
        for c in &self.children {
            c.encode_into(s);
        }
        s.push(')');
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Ordered sequence of plane trees. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneForest {
    components: Vec<PlaneTree>,
}

impl PlaneForest {
    pub fn new(components: Vec<PlaneTree>) -> Self {
        PlaneForest { components }
    }

    pub fn components(&self) -> &[PlaneTree] {
        &self.components
    }

    pub fn size(&self) -> usize {
        self.components.iter().map(PlaneTree::size).sum()
    }

    pub fn encode(&self) -> String {
        let mut s = String::with_capacity(2 * self.size());
        for c in &self.components {
            c.encode_into(&mut s);
        }
        s
    }
}

impl fmt::Display for PlaneForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

fn parse_components(code: &str) -> Result<Vec<PlaneTree>> {
    let mut stack: Vec<Vec<PlaneTree>> = vec![Vec::new()];
    for (i, ch) in code.chars().enumerate() {
        match ch {
            '(' => stack.push(Vec::new()),
            ')' => {
                if stack.len() == 1 {
                    return Err(Error::Parse { pos: i + 1, msg: "unmatched ')'".into() });
                }
                let children = stack.pop().expect("depth checked");
                stack
                    .last_mut()
                    .expect("depth checked")
                    .push(PlaneTree::new(children));
            }
            c => {
                return Err(Error::Parse {
                    pos: i + 1,
                    msg: format!("unexpected character {c:?}, want '(' or ')'"),
                })
            }
        }
    }
    if stack.len() > 1 {
        return Err(Error::Parse { pos: code.len(), msg: "unclosed '('".into() });
    }
    Ok(stack.pop().expect("root list"))
}

/// Parses a paren code that must be a single tree.
pub fn parse_tree(code: &str) -> Result<PlaneTree> {
    let mut comps = parse_components(code)?;
    match comps.len() {
        0 => Err(Error::Parse { pos: 1, msg: "empty code, want one tree".into() }),
        1 => Ok(comps.pop().expect("len checked")),
        _ => {
            let first_len = 2 * comps[0].size();
            Err(Error::Parse {
                pos: first_len + 1,
                msg: "trailing input after first tree".into(),
            })
        }
    }
}

pub fn parse_forest(code: &str) -> Result<PlaneForest> {
    Ok(PlaneForest::new(parse_components(code)?))
}

/// All balanced sequences of `pairs` paren pairs, lexicographic with '(' < ')'.
fn gen_balanced(pairs: usize) -> Vec<String> {
    fn rec(open_left: usize, depth: usize, buf: &mut String, out: &mut Vec<String>) {
        if open_left == 0 && depth == 0 {
            out.push(buf.clone());
            return;
        }
        if open_left > 0 {
            buf.push('(');
            rec(open_left - 1, depth + 1, buf, out);
            buf.pop();
        }
        if depth > 0 {
            buf.push(')');
            rec(open_left, depth - 1, buf, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    rec(pairs, 0, &mut String::with_capacity(2 * pairs), &mut out);
    out
}

/// All plane trees with `n` vertices, in lex order of their codes.
pub fn enumerate_trees(n: usize) -> Result<Vec<PlaneTree>> {
    if n == 0 {
        return Err(Error::domain("a tree has at least one vertex"));
    }
    // Code of an n-vertex tree wraps an (n-1)-vertex forest code, and the wrap
    // preserves lex order.
    gen_balanced(n - 1)
        .iter()
        .map(|f| parse_tree(&format!("({f})")))
        .collect()
}

/// All plane forests with `n` vertices total, in lex order. `n = 0` yields
/// just the empty forest.
pub fn enumerate_forests(n: usize) -> Vec<PlaneForest> {
    gen_balanced(n)
        .iter()
        .map(|f| parse_forest(f).expect("generated codes are balanced"))
        .collect()
}

/// Finite set of points with distinct positive values, read left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSeq(Vec<u32>);

impl PointSeq {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &v in &values {
            if v == 0 {
                return Err(Error::domain("point values must be positive"));
            }
            if !seen.insert(v) {
                return Err(Error::domain(format!("duplicate value {v}")));
            }
        }
        Ok(PointSeq(values))
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces each value by its rank (1 = smallest), keeping order.
    pub fn rank_normalized(&self) -> PointSeq {
        let mut sorted: Vec<u32> = self.0.clone();
        sorted.sort_unstable();
        let ranked = self
            .0
            .iter()
            .map(|v| sorted.binary_search(v).expect("value present") as u32 + 1)
            .collect();
        PointSeq(ranked)
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.0.len() as u32;
        self.0.iter().all(|&v| v <= n)
    }

    pub fn shifted(&self, offset: u32) -> PointSeq {
        PointSeq(self.0.iter().map(|v| v + offset).collect())
    }
}

impl fmt::Display for PointSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Cover relation of the point sequence, as 0-based position pairs (i, j)
/// with i < j: the value at i sits below the value at j with nothing from
/// the open interval strictly between them in value.
pub type HasseEdges = BTreeSet<(usize, usize)>;

pub fn hasse_graph(seq: &PointSeq) -> HasseEdges {
    let v = seq.values();
    let mut edges = HasseEdges::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] >= v[j] {
                continue;
            }
            let blocked = (i + 1..j).any(|k| v[i] < v[k] && v[k] < v[j]);
            if !blocked {
                edges.insert((i, j));
            }
        }
    }
    edges
}

fn fill_red(t: &PlaneTree, pos: &mut usize, lo: u32, out: &mut [u32]) {
    out[*pos] = lo;
    *pos += 1;
    // Children read left to right take value bands from the top down, so the
    // first (earliest-position) child subtree sits highest.
    let mut hi_excl = lo + t.size() as u32;
    for c in &t.children {
        let band_lo = hi_excl - c.size() as u32;
        fill_red(c, pos, band_lo, out);
        hi_excl = band_lo;
    }
}

/// Embeds a tree growing up and to the right: preorder positions, root at
/// the minimum value of its band.
pub fn embed_red_tree(t: &PlaneTree) -> PointSeq {
    let n = t.size();
    let mut out = vec![0u32; n];
    let mut pos = 0;
    fill_red(t, &mut pos, 1, &mut out);
    PointSeq(out)
}

/// Embeds a tree growing down and to the left: the reverse complement of
/// the red embedding, so the root lands last at the maximum value.
pub fn embed_blue_full(t: &PlaneTree) -> PointSeq {
    let red = embed_red_tree(t);
    let n = red.len() as u32;
    let vals = red.values();
    PointSeq((0..red.len()).map(|p| n + 1 - vals[red.len() - 1 - p]).collect())
}

/// Blue embedding with the root removed; values are 1..size-1.
pub fn embed_blue_nonroot(t: &PlaneTree) -> PointSeq {
    let mut full = embed_blue_full(t).0;
    full.pop();
    PointSeq(full)
}

/// Embeds a forest: each component red-embedded, components read left to
/// right taking value bands from the top down.
pub fn embed_forest(f: &PlaneForest) -> PointSeq {
    let n = f.size();
    let mut out = vec![0u32; n];
    let mut pos = 0;
    let mut hi_excl = n as u32 + 1;
    for c in &f.components {
        let band_lo = hi_excl - c.size() as u32;
        fill_red(c, &mut pos, band_lo, &mut out);
        hi_excl = band_lo;
    }
    PointSeq(out)
}

fn push_path_rev_preorder(t: &PlaneTree, out: &mut Vec<i64>) {
    for c in t.children.iter().rev() {
        push_path_rev_preorder(c, out);
    }
    out.push(1 - t.children.len() as i64);
}

/// Lattice-path code of a tree: vertices in reverse preorder, a vertex with
/// r children contributing the step 1 - r. Ends at height 1.
pub fn tree_to_luka_path(t: &PlaneTree) -> Vec<i64> {
    let mut out = Vec::with_capacity(t.size());
    push_path_rev_preorder(t, &mut out);
    out
}

/// Path code of a forest: component codes concatenated right to left. Ends
/// at height = number of components.
pub fn forest_to_luka_pattern(f: &PlaneForest) -> Vec<i64> {
    let mut out = Vec::with_capacity(f.size());
    for c in f.components.iter().rev() {
        push_path_rev_preorder(c, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALAN: [u64; 13] =
        [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012];

    #[test]
    fn codec_roundtrip_and_order() {
        for n in 1..=8 {
            let trees = enumerate_trees(n).unwrap();
            assert_eq!(trees.len() as u64, CATALAN[n - 1], "tree count at {n}");
            let mut prev: Option<String> = None;
            for t in &trees {
                assert_eq!(t.size(), n);
                let code = t.encode();
                assert_eq!(parse_tree(&code).unwrap(), *t);
                if let Some(p) = &prev {
                    assert!(*p < code, "codes out of order: {p} !< {code}");
                }
                prev = Some(code);
            }
        }
        for n in 0..=8 {
            let forests = enumerate_forests(n);
            assert_eq!(forests.len() as u64, CATALAN[n], "forest count at {n}");
            for f in &forests {
                assert_eq!(parse_forest(&f.encode()).unwrap(), *f);
            }
        }
    }

    #[test]
    fn parse_errors_name_positions() {
        match parse_forest(")(") {
            Err(Error::Parse { pos: 1, .. }) => {}
            other => panic!("want unmatched at 1, got {other:?}"),
        }
        match parse_forest("()(") {
            Err(Error::Parse { pos: 3, .. }) => {}
            other => panic!("want unclosed at 3, got {other:?}"),
        }
        match parse_forest("(a)") {
            Err(Error::Parse { pos: 2, .. }) => {}
            other => panic!("want bad char at 2, got {other:?}"),
        }
        match parse_tree("()()") {
            Err(Error::Parse { pos: 3, .. }) => {}
            other => panic!("want trailing input at 3, got {other:?}"),
        }
        assert!(parse_tree("").is_err());
        assert!(parse_forest("").unwrap().components().is_empty());
        assert!(enumerate_trees(0).is_err());
    }

    #[test]
    fn embedding_anchors() {
        let red = |c: &str| embed_red_tree(&parse_tree(c).unwrap()).0;
        assert_eq!(red("(()())"), vec![1, 3, 2]);
        assert_eq!(red("((()))"), vec![1, 2, 3]);
        assert_eq!(red("()"), vec![1]);

        let t = parse_tree("((()()))").unwrap();
        assert_eq!(embed_blue_full(&t).0, vec![2, 1, 3, 4]);
        assert_eq!(embed_blue_nonroot(&t).0, vec![2, 1, 3]);

        let forest = |c: &str| embed_forest(&parse_forest(c).unwrap()).0;
        assert_eq!(forest("()(())"), vec![3, 1, 2]);
        assert_eq!(forest("()()"), vec![2, 1]);
        assert_eq!(forest(""), Vec::<u32>::new());
    }

    #[test]
    fn blue_root_is_global_max_at_last_position() {
        for n in 1..=7 {
            for t in enumerate_trees(n).unwrap() {
                let full = embed_blue_full(&t);
                assert_eq!(*full.values().last().unwrap(), n as u32);
            }
        }
    }

    #[test]
    fn hasse_of_1324_is_a_diamond() {
        let seq = PointSeq::new(vec![1, 3, 2, 4]).unwrap();
        let want: HasseEdges = [(0, 1), (0, 2), (1, 3), (2, 3)].into_iter().collect();
        assert_eq!(hasse_graph(&seq), want);
    }

    #[test]
    fn tree_edges_are_cover_edges_of_red_embedding() {
        // Parent-child pairs of the tree appear in the cover relation of its
        // red embedding, with parent at the earlier position.
        fn rec(t: &PlaneTree, pos: &mut usize, parent: Option<usize>, edges: &HasseEdges) {
            let me = *pos;
            *pos += 1;
            if let Some(p) = parent {
                assert!(edges.contains(&(p, me)), "missing cover edge {p}-{me}");
            }
            for c in t.children() {
                rec(c, pos, Some(me), edges);
            }
        }
        for n in 1..=7 {
            for t in enumerate_trees(n).unwrap() {
                let edges = hasse_graph(&embed_red_tree(&t));
                rec(&t, &mut 0, None, &edges);
            }
        }
    }

    #[test]
    fn path_codes() {
        let path = |c: &str| tree_to_luka_path(&parse_tree(c).unwrap());
        assert_eq!(path("()"), vec![1]);
        assert_eq!(path("(())"), vec![1, 0]);
        assert_eq!(path("(()())"), vec![1, 1, -1]);
        let pat = |c: &str| forest_to_luka_pattern(&parse_forest(c).unwrap());
        assert_eq!(pat("()(())"), vec![1, 0, 1]);
        assert_eq!(pat("()"), vec![1]);
        assert_eq!(pat(""), Vec::<i64>::new());
        // Final height of a tree path is 1; of a forest, its component count.
        for n in 1..=8 {
            for t in enumerate_trees(n).unwrap() {
                assert_eq!(tree_to_luka_path(&t).iter().sum::<i64>(), 1);
            }
        }
        for f in enumerate_forests(5) {
            let sum: i64 = forest_to_luka_pattern(&f).iter().sum();
            assert_eq!(sum as usize, f.components().len());
        }
    }

    #[test]
    fn rank_normalization() {
        let s = PointSeq::new(vec![10, 3, 7]).unwrap();
        assert_eq!(s.rank_normalized().0, vec![3, 1, 2]);
        assert!(!s.is_permutation());
        assert!(s.rank_normalized().is_permutation());
        assert!(PointSeq::new(vec![1, 1]).is_err());
        assert!(PointSeq::new(vec![0]).is_err());
        assert_eq!(s.shifted(2).0, vec![12, 5, 9]);
    }
}
