//! Reference implementations kept deliberately independent of the fast
//! paths: exhaustive avoider counts, exhaustive and sampled assembly of the
//! structured avoider class, fringe statistics, and small-path enumeration.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{
    embed_blue_full, embed_red_tree, enumerate_trees, PlaneForest, PlaneTree, PointSeq,
};
use crate::error::{Error, Result};
use crate::lukasiewicz::LukaPath;
use crate::patterns::{quartic_contains_1324, Guard};
use crate::series::{binomial, catalan, Rat};

const AVOIDER_CAP: usize = 10;
const AVOIDER_NAIVE_CAP: usize = 8;
const PATH_ENUM_CAP: usize = 14;
const EMPIRICAL_SIZE_CAP: usize = 10;
const EMPIRICAL_DEGREE_CAP: usize = 5;
const ENUM_W0_CAP: u64 = 2_000_000;

/// Number of 1324-avoiding permutations of [n], by guarded prefix search.
/// Only avoiding prefixes are extended, so the tree visited is the set of
/// avoiding partial permutations.
pub fn count_avoiders(n: usize) -> Result<u64> {
    if n > AVOIDER_CAP {
        return Err(Error::resource(format!(
            "avoider count for n = {n} exceeds cap {AVOIDER_CAP}"
        )));
    }
    fn dfs(n: u32, used: u64, guard: &mut Guard) -> u64 {
        let placed = used.count_ones();
        if placed == n {
            return 1;
        }
        let mut total = 0;
        for x in 1..=n {
            if used & (1 << x) != 0 || guard.creates_1324(x) {
                continue;
            }
            let undo = guard.place(x);
            total += dfs(n, used | (1 << x), guard);
            guard.unplace(undo);
        }
        total
    }
    Ok(dfs(n as u32, 0, &mut Guard::new()))
}

/// Same count by full permutation generation and the quadruple scan.
pub fn count_avoiders_naive(n: usize) -> Result<u64> {
    if n > AVOIDER_NAIVE_CAP {
        return Err(Error::resource(format!(
            "naive avoider count for n = {n} exceeds cap {AVOIDER_NAIVE_CAP}"
        )));
    }
    // Heap's algorithm over the value array.
    let mut a: Vec<u32> = (1..=n as u32).collect();
    let mut c = vec![0usize; n];
    let mut total = u64::from(!quartic_contains_1324(&a));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            total += u64::from(!quartic_contains_1324(&a));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// All valid paths of length `n`, optionally restricted to one final height.
pub fn enumerate_paths(n: usize, final_height: Option<i64>) -> Vec<LukaPath> {
    assert!(n <= PATH_ENUM_CAP, "path enumeration capped at {PATH_ENUM_CAP}");
    fn rec(n: usize, h: i64, buf: &mut Vec<i64>, want: Option<i64>, out: &mut Vec<LukaPath>) {
        if buf.len() == n {
            if want.is_none() || want == Some(h) {
                out.push(LukaPath::new(buf.clone()).expect("construction keeps validity"));
            }
            return;
        }
        let lo = if h == 0 { 1 } else { 1 - h };
        for s in lo..=1 {
            buf.push(s);
            rec(n, h + s, buf, want, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, &mut Vec::with_capacity(n), final_height, &mut out);
    out
}

/// Occurrences of `pat` in `path` that are immediately followed by a step
/// falling by at least the pattern's final height.
pub fn path_merge_occurrences(path: &[i64], pat: &[i64]) -> u64 {
    let m = pat.len();
    let h: i64 = pat.iter().sum();
    if path.len() < m + 1 {
        return 0;
    }
    let mut count = 0;
    for k in 0..=path.len() - m - 1 {
        if path[k..k + m] == *pat && path[k + m] <= -h {
            count += 1;
        }
    }
    count
}

/// Vertices of `tree` with more children than `forest` has components whose
/// leftmost child subtrees equal the components, in order.
pub fn fringe_occurrences(tree: &PlaneTree, forest: &PlaneForest) -> u64 {
    fn rec(t: &PlaneTree, comps: &[PlaneTree], total: &mut u64) {
        if t.children().len() > comps.len() && t.children()[..comps.len()] == *comps {
            *total += 1;
        }
        for c in t.children() {
            rec(c, comps, total);
        }
    }
    let mut total = 0;
    rec(tree, forest.components(), &mut total);
    total
}

/// Shape parameters of the structured class: `blue_count + 1` red trees of
/// `red_size` vertices alternating with `blue_count` blue trees of
/// `blue_size` vertices whose roots have degree `root_degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WParams {
    pub blue_count: usize,
    pub red_size: usize,
    pub blue_size: usize,
    pub root_degree: usize,
}

impl WParams {
    pub fn validate(&self) -> Result<()> {
        if self.blue_count < 1 {
            return Err(Error::domain("need at least one blue tree"));
        }
        if self.red_size < 1 {
            return Err(Error::domain("red trees need at least one vertex"));
        }
        if self.root_degree < 1 {
            return Err(Error::domain("blue root degree must be at least 1"));
        }
        if self.blue_size < self.root_degree + 1 {
            return Err(Error::domain(format!(
                "blue trees with root degree {} need at least {} vertices",
                self.root_degree,
                self.root_degree + 1
            )));
        }
        Ok(())
    }

    pub fn perm_len(&self) -> usize {
        (self.blue_count + 1) * self.red_size + self.blue_count * self.blue_size
    }
}

/// Closed-form size of the class: independent tree choices times one
/// position and one value interleaving per blue tree.
pub fn w0_count(params: &WParams) -> Result<BigInt> {
    params.validate()?;
    let (t, k, l, d) = (
        params.blue_count as i64,
        params.red_size as i64,
        params.blue_size as i64,
        params.root_degree as i64,
    );
    let red = catalan((k - 1) as u64);
    let blue = BigInt::from(d) * binomial(2 * l - 3 - d, l - 2) / BigInt::from(l - 1);
    let shuffle = binomial(k - 1 + d, d);
    Ok(red.pow(t as u32 + 1) * blue.pow(t as u32) * shuffle.pow(2 * t as u32))
}

/// One assembled member with enough bookkeeping to audit it: the chosen
/// trees and each tree vertex's (position, value) in preorder.
#[derive(Debug, Clone)]
pub struct W0Sample {
    pub perm: PointSeq,
    pub red_trees: Vec<PlaneTree>,
    pub blue_trees: Vec<PlaneTree>,
    pub red_vertices: Vec<Vec<(usize, u32)>>,
    pub blue_vertices: Vec<Vec<(usize, u32)>>,
}

/// Per-tree geometry used by the walks.
struct RedGeom {
    /// Body preorder indices sorted by local embedding value, descending.
    body_by_val_desc: Vec<usize>,
}

struct BlueGeom {
    /// Walk-ordered blocks (last child first). Each block lists preorder
    /// indices twice: in within-block position order and by local value
    /// descending.
    blocks_pos: Vec<Vec<usize>>,
    blocks_val: Vec<Vec<usize>>,
    root_idx: usize,
}

fn red_geom(t: &PlaneTree) -> RedGeom {
    let vals = embed_red_tree(t);
    let mut body: Vec<usize> = (1..t.size()).collect();
    body.sort_by(|a, b| vals.values()[*b].cmp(&vals.values()[*a]));
    RedGeom { body_by_val_desc: body }
}

fn blue_geom(t: &PlaneTree) -> BlueGeom {
    let n = t.size();
    let full = embed_blue_full(t);
    // Preorder index q sits at reversed position n - 1 - q in the blue
    // embedding.
    let local_val = |q: usize| full.values()[n - 1 - q];
    let mut blocks_pos = Vec::new();
    let mut blocks_val = Vec::new();
    let mut start = 1usize; // preorder index where the next child subtree starts
    let mut spans = Vec::new();
    for c in t.children() {
        spans.push((start, start + c.size()));
        start += c.size();
    }
    for (lo, hi) in spans.into_iter().rev() {
        // Within a block, blue positions run opposite to preorder.
        let pos_order: Vec<usize> = (lo..hi).rev().collect();
        let mut val_order: Vec<usize> = (lo..hi).collect();
        val_order.sort_by(|a, b| local_val(*b).cmp(&local_val(*a)));
        blocks_pos.push(pos_order);
        blocks_val.push(val_order);
    }
    BlueGeom { blocks_pos, blocks_val, root_idx: 0 }
}

/// Interleaving of `blocks` block slots among `singles` single slots,
/// encoded as the flag sequence (true = block), blocks taken in order.
type Shuffle = Vec<bool>;

fn all_shuffles(singles: usize, blocks: usize) -> Vec<Shuffle> {
    fn rec(s: usize, b: usize, buf: &mut Shuffle, out: &mut Vec<Shuffle>) {
        if s == 0 && b == 0 {
            out.push(buf.clone());
            return;
        }
        if s > 0 {
            buf.push(false);
            rec(s - 1, b, buf, out);
            buf.pop();
        }
        if b > 0 {
            buf.push(true);
            rec(s, b - 1, buf, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    rec(singles, blocks, &mut Vec::new(), &mut out);
    out
}

fn sample_shuffle(rng: &mut ChaCha8Rng, singles: usize, blocks: usize) -> Shuffle {
    let mut flags = vec![false; singles + blocks];
    let mut chosen: Vec<usize> = index::sample(rng, singles + blocks, blocks).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        flags[i] = true;
    }
    flags
}

fn assemble(
    params: &WParams,
    red_trees: Vec<PlaneTree>,
    blue_trees: Vec<PlaneTree>,
    pos_shuffles: &[Shuffle],
    val_shuffles: &[Shuffle],
) -> W0Sample {
    let (t, k) = (params.blue_count, params.red_size);
    let n = params.perm_len();
    let red_geo: Vec<RedGeom> = red_trees.iter().map(red_geom).collect();
    let blue_geo: Vec<BlueGeom> = blue_trees.iter().map(blue_geom).collect();
    let mut red_pos = vec![vec![usize::MAX; k]; t + 1];
    let mut blue_pos = vec![vec![usize::MAX; params.blue_size]; t];
    let mut red_val = vec![vec![0u32; k]; t + 1];
    let mut blue_val = vec![vec![0u32; params.blue_size]; t];

    // Position walk: leading red root, then per blue tree the interleaved
    // section, its root, and the next red root; the last red body trails.
    let mut pos = 0usize;
    red_pos[0][0] = pos;
    pos += 1;
    for i in 1..=t {
        let mut body = (1..k).peekable(); // preorder order of the previous red body
        let mut blocks = blue_geo[i - 1].blocks_pos.iter();
        for &is_block in &pos_shuffles[i - 1] {
            if is_block {
                for &q in blocks.next().expect("shuffle has d block slots") {
                    blue_pos[i - 1][q] = pos;
                    pos += 1;
                }
            } else {
                let q = body.next().expect("shuffle has k-1 single slots");
                red_pos[i - 1][q] = pos;
                pos += 1;
            }
        }
        blue_pos[i - 1][blue_geo[i - 1].root_idx] = pos;
        pos += 1;
        red_pos[i][0] = pos;
        pos += 1;
    }
    for q in 1..k {
        red_pos[t][q] = pos;
        pos += 1;
    }
    debug_assert_eq!(pos, n);

    // Value walk, descending: leading red body then its root, then per blue
    // tree the root, the interleaved bands, and the next red root.
    let mut val = n as u32;
    for &q in &red_geo[0].body_by_val_desc {
        red_val[0][q] = val;
        val -= 1;
    }
    red_val[0][0] = val;
    val -= 1;
    for i in 1..=t {
        blue_val[i - 1][blue_geo[i - 1].root_idx] = val;
        val -= 1;
        let mut body = red_geo[i].body_by_val_desc.iter();
        let mut bands = blue_geo[i - 1].blocks_val.iter();
        for &is_block in &val_shuffles[i - 1] {
            if is_block {
                for &q in bands.next().expect("shuffle has d block slots") {
                    blue_val[i - 1][q] = val;
                    val -= 1;
                }
            } else {
                let &q = body.next().expect("shuffle has k-1 single slots");
                red_val[i][q] = val;
                val -= 1;
            }
        }
        red_val[i][0] = val;
        val -= 1;
    }
    debug_assert_eq!(val, 0);

    let mut perm = vec![0u32; n];
    let mut red_vertices = Vec::with_capacity(t + 1);
    for i in 0..=t {
        let mut verts = Vec::with_capacity(k);
        for q in 0..k {
            perm[red_pos[i][q]] = red_val[i][q];
            verts.push((red_pos[i][q], red_val[i][q]));
        }
        red_vertices.push(verts);
    }
    let mut blue_vertices = Vec::with_capacity(t);
    for i in 0..t {
        let mut verts = Vec::with_capacity(params.blue_size);
        for q in 0..params.blue_size {
            perm[blue_pos[i][q]] = blue_val[i][q];
            verts.push((blue_pos[i][q], blue_val[i][q]));
        }
        blue_vertices.push(verts);
    }
    W0Sample {
        perm: PointSeq::new(perm).expect("walks assign each value once"),
        red_trees,
        blue_trees,
        red_vertices,
        blue_vertices,
    }
}

fn blue_candidates(params: &WParams) -> Result<Vec<PlaneTree>> {
    let all = enumerate_trees(params.blue_size)?;
    let filtered: Vec<PlaneTree> = all
        .into_iter()
        .filter(|t| t.root_degree() == params.root_degree)
        .collect();
    if filtered.is_empty() {
        return Err(Error::internal("no blue tree candidates despite valid parameters"));
    }
    Ok(filtered)
}

fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `count` independent members. Sample `i` depends only on
/// `(seed, i)`, so runs are reproducible and order-insensitive.
pub fn sample_w0(params: &WParams, count: usize, seed: u64) -> Result<Vec<W0Sample>> {
    params.validate()?;
    let reds = enumerate_trees(params.red_size)?;
    let blues = blue_candidates(params)?;
    let (t, k, d) = (params.blue_count, params.red_size, params.root_degree);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed, i as u64));
        let red_trees: Vec<PlaneTree> =
            (0..=t).map(|_| reds[rng.gen_range(0..reds.len())].clone()).collect();
        let blue_trees: Vec<PlaneTree> =
            (0..t).map(|_| blues[rng.gen_range(0..blues.len())].clone()).collect();
        let mut pos_shuffles = Vec::with_capacity(t);
        let mut val_shuffles = Vec::with_capacity(t);
        for _ in 0..t {
            pos_shuffles.push(sample_shuffle(&mut rng, k - 1, d));
            val_shuffles.push(sample_shuffle(&mut rng, k - 1, d));
        }
        out.push(assemble(params, red_trees, blue_trees, &pos_shuffles, &val_shuffles));
    }
    Ok(out)
}

/// Every member, in a deterministic order.
pub fn enumerate_w0(params: &WParams) -> Result<Vec<W0Sample>> {
    params.validate()?;
    let total = w0_count(params)?;
    match total.to_u64() {
        Some(c) if c <= ENUM_W0_CAP => {}
        _ => {
            return Err(Error::resource(format!(
                "class holds {total} members, enumeration capped at {ENUM_W0_CAP}"
            )))
        }
    }
    let reds = enumerate_trees(params.red_size)?;
    let blues = blue_candidates(params)?;
    let (t, k, d) = (params.blue_count, params.red_size, params.root_degree);
    let shuffles = all_shuffles(k - 1, d);

    // Odometer over all independent choices.
    let mut out = Vec::new();
    let mut choice_sizes = Vec::new();
    choice_sizes.extend(std::iter::repeat(reds.len()).take(t + 1));
    choice_sizes.extend(std::iter::repeat(blues.len()).take(t));
    choice_sizes.extend(std::iter::repeat(shuffles.len()).take(2 * t));
    let mut digits = vec![0usize; choice_sizes.len()];
    loop {
        let red_trees: Vec<PlaneTree> = (0..=t).map(|i| reds[digits[i]].clone()).collect();
        let blue_trees: Vec<PlaneTree> =
            (0..t).map(|i| blues[digits[t + 1 + i]].clone()).collect();
        let pos_shuffles: Vec<Shuffle> =
            (0..t).map(|i| shuffles[digits[2 * t + 1 + i]].clone()).collect();
        let val_shuffles: Vec<Shuffle> =
            (0..t).map(|i| shuffles[digits[3 * t + 1 + i]].clone()).collect();
        out.push(assemble(params, red_trees, blue_trees, &pos_shuffles, &val_shuffles));
        let mut carry = digits.len();
        while carry > 0 {
            digits[carry - 1] += 1;
            if digits[carry - 1] < choice_sizes[carry - 1] {
                break;
            }
            digits[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    Ok(out)
}

/// Statistic whose finite-size mean has an independent generating-function
/// route; this enumeration route averages the raw objects directly.
#[derive(Debug, Clone)]
pub enum EmpiricalKind<'a> {
    BlueSubtree { blue_size: usize, root_degree: usize, subtree: &'a PlaneTree },
    Gap { red_size: usize, root_count: usize, gap: usize },
    RedForest { red_size: usize, forest: &'a PlaneForest },
}

/// Mean proportion of marked slots, averaged uniformly over the family.
pub fn empirical_mean(kind: EmpiricalKind) -> Result<Rat> {
    let rat = |n: u64, d: u64| Rat::new(BigInt::from(n), BigInt::from(d));
    match kind {
        EmpiricalKind::BlueSubtree { blue_size, root_degree, subtree } => {
            if blue_size > EMPIRICAL_SIZE_CAP || root_degree > EMPIRICAL_DEGREE_CAP {
                return Err(Error::resource("empirical family too large"));
            }
            let trees: Vec<PlaneTree> = enumerate_trees(blue_size)?
                .into_iter()
                .filter(|t| t.root_degree() == root_degree)
                .collect();
            if trees.is_empty() {
                return Err(Error::domain(format!(
                    "no {blue_size}-vertex trees with root degree {root_degree}"
                )));
            }
            let hits: u64 = trees
                .iter()
                .map(|t| t.children().iter().filter(|c| *c == subtree).count() as u64)
                .sum();
            Ok(rat(hits, trees.len() as u64 * root_degree as u64))
        }
        EmpiricalKind::Gap { red_size, root_count, gap } => {
            if red_size > EMPIRICAL_SIZE_CAP || root_count > EMPIRICAL_DEGREE_CAP {
                return Err(Error::resource("empirical family too large"));
            }
            // Compositions of red_size - 1 into one leading free run plus
            // root_count marked gaps.
            fn rec(parts_left: usize, rest: usize, gap: usize, hits: &mut u64, total: &mut u64, cur_hits: u64) {
                if parts_left == 0 {
                    if rest == 0 {
                        *total += 1;
                        *hits += cur_hits;
                    }
                    return;
                }
                for take in 0..=rest {
                    rec(
                        parts_left - 1,
                        rest - take,
                        gap,
                        hits,
                        total,
                        cur_hits + u64::from(take == gap),
                    );
                }
            }
            let mut hits = 0;
            let mut total = 0;
            for lead in 0..red_size {
                rec(root_count, red_size - 1 - lead, gap, &mut hits, &mut total, 0);
            }
            Ok(rat(hits, total * root_count as u64))
        }
        EmpiricalKind::RedForest { red_size, forest } => {
            if red_size > EMPIRICAL_SIZE_CAP {
                return Err(Error::resource("empirical family too large"));
            }
            let trees = enumerate_trees(red_size)?;
            let hits: u64 = trees.iter().map(|t| fringe_occurrences(t, forest)).sum();
            Ok(rat(hits, trees.len() as u64 * red_size as u64))
        }
    }
}
