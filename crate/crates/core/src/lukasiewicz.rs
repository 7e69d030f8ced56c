//! Lattice paths with steps in {1, 0, -1, -2, ...} staying strictly positive
//! after the start, and occurrence counting of one such path inside another.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Longest path length `occurrence_distribution` accepts before refusing.
pub const DEFAULT_LEN_CAP: usize = 40;

/// Checks the defining conditions: every step is at most +1 and every
/// partial sum is at least 1.
pub fn validate_path(steps: &[i64]) -> Result<()> {
    let mut h = 0i64;
    for (i, &s) in steps.iter().enumerate() {
        if s > 1 {
            return Err(Error::domain(format!("step {} is {s}, want at most 1", i + 1)));
        }
        h += s;
        if h < 1 {
            return Err(Error::domain(format!(
                "height after step {} is {h}, want at least 1",
                i + 1
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LukaPath(Vec<i64>);

impl LukaPath {
    pub fn new(steps: Vec<i64>) -> Result<Self> {
        validate_path(&steps)?;
        Ok(LukaPath(steps))
    }

    pub fn steps(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn final_height(&self) -> i64 {
        self.0.iter().sum()
    }
}

/// Nonempty path used as the needle in occurrence counting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LukaPattern(Vec<i64>);

impl LukaPattern {
    pub fn new(steps: Vec<i64>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::domain("pattern must be nonempty"));
        }
        validate_path(&steps)?;
        Ok(LukaPattern(steps))
    }

    pub fn steps(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Height reached at the end of the pattern.
    pub fn final_height(&self) -> i64 {
        self.0.iter().sum()
    }
}

/// Which occurrences count: all of them, or all except one anchored at the
/// very start of the host path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    All,
    SkipFirst,
}

/// Number of contiguous occurrences of `pat` in `path` under `conv`.
pub fn count_occurrences(path: &LukaPath, pat: &LukaPattern, conv: Convention) -> u64 {
    let s = path.steps();
    let p = pat.steps();
    if p.len() > s.len() {
        return 0;
    }
    let mut count = 0;
    for k in 0..=s.len() - p.len() {
        if conv == Convention::SkipFirst && k == 0 {
            continue;
        }
        if &s[k..k + p.len()] == p {
            count += 1;
        }
    }
    count
}

/// Self-overlap terms of a pattern: pairs `(i, h_i)` for each proper shift
/// `i` where the last `m - i` steps equal the first `m - i` steps, with
/// `h_i` the height of the pattern's prefix of length `i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AutoCorr {
    pub terms: Vec<(usize, i64)>,
}

pub fn autocorrelation(pat: &LukaPattern) -> AutoCorr {
    let p = pat.steps();
    let m = p.len();
    let mut terms = Vec::new();
    for i in 1..m {
        if p[i..] == p[..m - i] {
            let h: i64 = p[..i].iter().sum();
            terms.push((i, h));
        }
    }
    AutoCorr { terms }
}

/// Pattern-matching automaton on step sequences. States 0..=m track the
/// longest pattern prefix that is a suffix of the input read so far.
#[derive(Debug, Clone)]
pub struct PatternAutomaton {
    pat: Vec<i64>,
    fail: Vec<usize>,
}

impl PatternAutomaton {
    pub fn new(pat: &LukaPattern) -> Self {
        let p = pat.steps().to_vec();
        let m = p.len();
        // Classic failure function: fail[q] = length of the longest proper
        // prefix of p[..q] that is also a suffix of it.
        let mut fail = vec![0usize; m + 1];
        let mut k = 0usize;
        for q in 1..m {
            while k > 0 && p[k] != p[q] {
                k = fail[k];
            }
            if p[k] == p[q] {
                k += 1;
            }
            fail[q + 1] = k;
        }
        PatternAutomaton { pat: p, fail }
    }

    pub fn pattern_len(&self) -> usize {
        self.pat.len()
    }

    /// Feeds one step; a return value of `pattern_len()` means an occurrence
    /// just ended here.
    pub fn step(&self, mut q: usize, s: i64) -> usize {
        let m = self.pat.len();
        if q == m {
            q = self.fail[m];
        }
        while q > 0 && self.pat[q] != s {
            q = self.fail[q];
        }
        if self.pat[q] == s {
            q + 1
        } else {
            0
        }
    }
}

/// Exact distribution of the occurrence count of `pat` over all valid paths
/// of length `n`, any final height. Keys are occurrence counts, values the
/// number of paths attaining them.
pub fn occurrence_distribution(
    pat: &LukaPattern,
    n: usize,
    conv: Convention,
) -> Result<BTreeMap<u64, BigUint>> {
    if n > DEFAULT_LEN_CAP {
        return Err(Error::resource(format!(
            "path length {n} exceeds cap {DEFAULT_LEN_CAP}"
        )));
    }
    let auto = PatternAutomaton::new(pat);
    let m = auto.pattern_len();
    // state[(height, q)] = polynomial in the occurrence-count marker,
    // coefficient c = number of path prefixes with c occurrences so far.
    type Poly = Vec<BigUint>;
    let mut state: BTreeMap<(i64, usize), Poly> = BTreeMap::new();
    state.insert((0, 0), vec![BigUint::one()]);
    for pos in 0..n {
        let mut next: BTreeMap<(i64, usize), Poly> = BTreeMap::new();
        for ((h, q), poly) in &state {
            // Steps from height h: up one, or down to any height >= 1.
            let lo = if *h == 0 { 1 } else { 1 - h };
            for s in (lo..=1).rev() {
                let nh = h + s;
                let nq = auto.step(*q, s);
                let matched =
                    nq == m && (conv == Convention::All || pos + 1 != m);
                let entry = next.entry((nh, nq)).or_default();
                let shift = usize::from(matched);
                if entry.len() < poly.len() + shift {
                    entry.resize(poly.len() + shift, BigUint::zero());
                }
                for (c, v) in poly.iter().enumerate() {
                    entry[c + shift] += v;
                }
            }
        }
        state = next;
    }
    let mut dist: BTreeMap<u64, BigUint> = BTreeMap::new();
    for (_, poly) in state {
        for (c, v) in poly.into_iter().enumerate() {
            if !v.is_zero() {
                *dist.entry(c as u64).or_default() += v;
            }
        }
    }
    Ok(dist)
}

/// Sum of occurrence counts over all valid paths of length `n`.
pub fn total_occurrences(pat: &LukaPattern, n: usize, conv: Convention) -> Result<BigUint> {
    let dist = occurrence_distribution(pat, n, conv)?;
    let mut total = BigUint::zero();
    for (c, v) in dist {
        total += v * BigUint::from(c);
    }
    Ok(total)
}

/// Mean, variance, and skewness of a count distribution, exact up to the
/// final float conversion.
pub fn distribution_stats(dist: &BTreeMap<u64, BigUint>) -> Result<(f64, f64, f64)> {
    let total: BigUint = dist.values().sum();
    if total.is_zero() {
        return Err(Error::domain("empty distribution"));
    }
    let big = |b: &BigUint| BigRational::from_integer(b.clone().into());
    let n = big(&total);
    let raw = |k: u32| -> BigRational {
        let mut acc = BigRational::zero();
        for (c, v) in dist {
            let c = BigRational::from_integer((*c).into());
            acc += c.pow(k as i32) * big(v);
        }
        acc / n.clone()
    };
    let m1 = raw(1);
    let m2 = raw(2);
    let m3 = raw(3);
    let var = m2.clone() - m1.clone() * m1.clone();
    let central3 = m3 - BigRational::from_integer(3.into()) * m1.clone() * m2
        + BigRational::from_integer(2.into()) * m1.clone() * m1.clone() * m1.clone();
    let to_f = |r: &BigRational| r.to_f64().expect("rational fits in f64");
    let mean = to_f(&m1);
    let var_f = to_f(&var);
    let skew = if var_f > 0.0 {
        to_f(&central3) / var_f.powf(1.5)
    } else {
        0.0
    };
    Ok((mean, var_f, skew))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{enumerate_forests, forest_to_luka_pattern};

    fn pat(steps: &[i64]) -> LukaPattern {
        LukaPattern::new(steps.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LukaPath::new(vec![1, 0, -1]).is_err()); // dips to 0
        assert!(LukaPath::new(vec![2]).is_err());
        assert!(LukaPath::new(vec![-1]).is_err());
        assert!(LukaPath::new(vec![]).unwrap().is_empty());
        assert!(LukaPattern::new(vec![]).is_err());
        let p = LukaPath::new(vec![1, 1, -1, 0]).unwrap();
        assert_eq!(p.final_height(), 1);
    }

    #[test]
    fn reference_path_has_three_occurrences() {
        let path = LukaPath::new(vec![
            1, 1, 1, 1, 0, -2, 1, 0, 1, 0, 1, 1, -3, -2, 1, 0, 1, -1,
        ])
        .unwrap();
        let p = pat(&[1, 0, 1]);
        assert_eq!(count_occurrences(&path, &p, Convention::All), 3);
        assert_eq!(count_occurrences(&path, &p, Convention::SkipFirst), 3);
    }

    #[test]
    fn convention_differs_only_at_start() {
        let p = pat(&[1, 0]);
        let host = LukaPath::new(vec![1, 0, 1, 0]).unwrap();
        assert_eq!(count_occurrences(&host, &p, Convention::All), 2);
        assert_eq!(count_occurrences(&host, &p, Convention::SkipFirst), 1);
    }

    #[test]
    fn autocorrelation_examples() {
        assert!(autocorrelation(&pat(&[1])).terms.is_empty());
        assert_eq!(autocorrelation(&pat(&[1, 1])).terms, vec![(1, 1)]);
        assert_eq!(
            autocorrelation(&pat(&[1, 1, 0, 1, 1])).terms,
            vec![(3, 2), (4, 3)]
        );
        // Shift 2 leaves the single step [1], which is also the prefix.
        assert_eq!(autocorrelation(&pat(&[1, 0, 1])).terms, vec![(2, 1)]);
    }

    #[test]
    fn automaton_matches_window_scan() {
        let p = pat(&[1, 0, 1]);
        let auto = PatternAutomaton::new(&p);
        let host = [1i64, 0, 1, 0, 1, 1, 0, 1, -2, 1];
        let mut q = 0;
        let mut hits = 0;
        for &s in &host {
            q = auto.step(q, s);
            if q == p.len() {
                hits += 1;
            }
        }
        let path = LukaPath::new(host.to_vec()).unwrap();
        assert_eq!(hits, count_occurrences(&path, &p, Convention::All));
    }

    #[test]
    fn distribution_total_is_catalan() {
        // Valid paths of length n are counted by the n-th Catalan number.
        let catalan = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];
        let p = pat(&[1, 0, 1]);
        for n in 1..=10 {
            let dist = occurrence_distribution(&p, n, Convention::All).unwrap();
            let total: BigUint = dist.values().sum();
            assert_eq!(total, BigUint::from(catalan[n]), "n = {n}");
        }
    }

    #[test]
    fn distribution_agrees_with_exhaustive_scan() {
        let p = pat(&[1, 0]);
        for n in 1..=9 {
            for conv in [Convention::All, Convention::SkipFirst] {
                let dist = occurrence_distribution(&p, n, conv).unwrap();
                let mut brute: BTreeMap<u64, BigUint> = BTreeMap::new();
                for path in crate::oracle::enumerate_paths(n, None) {
                    let c = count_occurrences(&path, &p, conv);
                    *brute.entry(c).or_default() += BigUint::one();
                }
                assert_eq!(dist, brute, "n = {n}, conv = {conv:?}");
            }
        }
    }

    #[test]
    fn skip_first_shifts_mass_by_at_most_one() {
        let p = pat(&[1, 0, 1]);
        for n in [4usize, 7, 9] {
            let all = total_occurrences(&p, n, Convention::All).unwrap();
            let skip = total_occurrences(&p, n, Convention::SkipFirst).unwrap();
            // Difference = number of paths starting with the pattern.
            assert!(skip <= all);
        }
    }

    #[test]
    fn forest_patterns_are_valid() {
        for n in 1..=6 {
            for f in enumerate_forests(n) {
                let steps = forest_to_luka_pattern(&f);
                let p = LukaPattern::new(steps).unwrap();
                assert_eq!(p.final_height() as usize, f.components().len());
            }
        }
    }

    #[test]
    fn stats_of_bernoulli_like_distribution() {
        let mut dist: BTreeMap<u64, BigUint> = BTreeMap::new();
        dist.insert(0, BigUint::from(3u32));
        dist.insert(1, BigUint::from(1u32));
        let (mean, var, _skew) = distribution_stats(&dist).unwrap();
        assert!((mean - 0.25).abs() < 1e-15);
        assert!((var - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn length_cap_enforced() {
        let p = pat(&[1]);
        assert!(occurrence_distribution(&p, DEFAULT_LEN_CAP + 1, Convention::All).is_err());
    }
}
