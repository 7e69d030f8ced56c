//! The pair table: for every (tree, forest) pair up to a size budget, the
//! exact count of 1324-avoiding interleavings, in a canonical order with a
//! byte-stable on-disk format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as IoWrite};
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::combinatorics::{
    embed_blue_nonroot, embed_forest, enumerate_forests, enumerate_trees, parse_forest,
    parse_tree,
};
use crate::error::{Error, Result};
use crate::patterns::q_count_seqs;
use crate::series::catalan;

/// One stored pair. `tree_code` has at least two vertices, `forest_code` at
/// least one, and `q` counts the avoiding interleavings of their embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QRecord {
    pub tree_code: String,
    pub forest_code: String,
    pub q: u64,
}

/// Per-record data the asymptotic weighting consumes: the weight depends on
/// the pair only through (tree size, forest size, component count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedPair {
    pub tree_size: usize,
    pub pattern_len: usize,
    pub pattern_height: usize,
    pub q: u64,
    pub ln_q: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QTableMeta {
    pub built_ms: Option<u64>,
    pub threads: Option<usize>,
    pub pair_count: usize,
}

#[derive(Debug, Clone)]
pub struct QTable {
    records: Vec<QRecord>,
    derived: Vec<DerivedPair>,
    coverage: usize,
    meta: QTableMeta,
}

/// Number of pairs in shell `s` (tree and forest sizes summing to `s`).
pub fn expected_shell_count(s: usize) -> u64 {
    if s < 3 {
        return 0;
    }
    let c = catalan(s as u64) - BigInt::from(2) * catalan(s as u64 - 1);
    c.to_u64().expect("shell count fits in u64")
}

/// Total records for a complete table covering shells up to `n`.
pub fn expected_record_count(n: usize) -> u64 {
    (3..=n).map(expected_shell_count).sum()
}

struct TreeEntry {
    code: String,
    blue: Vec<u32>,
    size: usize,
}

struct ForestEntry {
    code: String,
    red_base: Vec<u32>,
}

fn tree_entries_up_to(max_size: usize) -> Result<Vec<Vec<TreeEntry>>> {
    // Index by size; sizes 0 and 1 stay empty (single vertices have no blue
    // body to interleave).
    let mut by_size: Vec<Vec<TreeEntry>> = Vec::with_capacity(max_size + 1);
    for size in 0..=max_size {
        if size < 2 {
            by_size.push(Vec::new());
            continue;
        }
        let entries = enumerate_trees(size)?
            .into_iter()
            .map(|t| TreeEntry {
                code: t.encode(),
                blue: embed_blue_nonroot(&t).values().to_vec(),
                size,
            })
            .collect();
        by_size.push(entries);
    }
    Ok(by_size)
}

fn forest_entries_up_to(max_size: usize) -> Vec<Vec<ForestEntry>> {
    let mut by_size: Vec<Vec<ForestEntry>> = Vec::with_capacity(max_size + 1);
    for size in 0..=max_size {
        if size < 1 {
            by_size.push(Vec::new());
            continue;
        }
        let entries = enumerate_forests(size)
            .into_iter()
            .map(|f| ForestEntry {
                code: f.encode(),
                red_base: embed_forest(&f).values().to_vec(),
            })
            .collect();
        by_size.push(entries);
    }
    by_size
}

/// Tree order within a shell: codes sorted lexicographically across all
/// admissible sizes. No code is a prefix of another, so the order is total.
fn shell_tree_order<'a>(trees: &'a [Vec<TreeEntry>], shell: usize) -> Vec<&'a TreeEntry> {
    let mut refs: Vec<&TreeEntry> = Vec::new();
    for size in 2..=shell.saturating_sub(1) {
        if shell - size >= 1 {
            refs.extend(trees[size].iter());
        }
    }
    refs.sort_by(|a, b| a.code.cmp(&b.code));
    refs
}

fn run_jobs<F, T>(threads: usize, f: F) -> Result<T>
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    if threads == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::internal(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// Builds the complete table for shells 3..=`max_n`. `threads = 0` uses the
/// default pool. Output is identical for every thread count.
pub fn build_q_table(max_n: usize, threads: usize) -> Result<QTable> {
    let start = Instant::now();
    let mut records: Vec<QRecord> = Vec::new();
    if max_n >= 3 {
        let trees = tree_entries_up_to(max_n - 1)?;
        let forests = forest_entries_up_to(max_n - 2);
        for shell in 3..=max_n {
            let order = shell_tree_order(&trees, shell);
            let mut jobs: Vec<(&TreeEntry, &ForestEntry)> = Vec::new();
            for te in order {
                for fe in &forests[shell - te.size] {
                    jobs.push((te, fe));
                }
            }
            let qs: Vec<u64> = run_jobs(threads, || {
                jobs.par_iter()
                    .map(|(te, fe)| {
                        let red: Vec<u32> =
                            fe.red_base.iter().map(|v| v + te.size as u32).collect();
                        q_count_seqs(&te.blue, &red)
                    })
                    .collect()
            })?;
            records.extend(jobs.iter().zip(qs).map(|((te, fe), q)| QRecord {
                tree_code: te.code.clone(),
                forest_code: fe.code.clone(),
                q,
            }));
        }
    }
    let derived = derive(&records)?;
    let coverage = infer_coverage(&records);
    debug_assert_eq!(coverage, max_n.max(2));
    let meta = QTableMeta {
        built_ms: Some(start.elapsed().as_millis() as u64),
        threads: Some(threads),
        pair_count: records.len(),
    };
    Ok(QTable { records, derived, coverage, meta })
}

fn derive(records: &[QRecord]) -> Result<Vec<DerivedPair>> {
    records
        .iter()
        .map(|r| {
            let t = parse_tree(&r.tree_code)?;
            let f = parse_forest(&r.forest_code)?;
            Ok(DerivedPair {
                tree_size: t.size(),
                pattern_len: f.size(),
                pattern_height: f.components().len(),
                q: r.q,
                ln_q: (r.q as f64).ln(),
            })
        })
        .collect()
}

/// Largest `n` with shells 3..=n all present at their expected sizes,
/// assuming records arrive in canonical order. Floor is 2.
fn infer_coverage(records: &[QRecord]) -> usize {
    let mut coverage = 2;
    let mut idx = 0;
    loop {
        let shell = coverage + 1;
        let want = expected_shell_count(shell) as usize;
        let in_shell = records[idx..]
            .iter()
            .take_while(|r| r.tree_code.len() / 2 + r.forest_code.len() / 2 == shell)
            .count();
        if in_shell < want {
            return coverage;
        }
        idx += want;
        coverage = shell;
    }
}

impl QTable {
    pub fn records(&self) -> &[QRecord] {
        &self.records
    }

    pub fn derived(&self) -> &[DerivedPair] {
        &self.derived
    }

    pub fn coverage(&self) -> usize {
        self.coverage
    }

    pub fn meta(&self) -> &QTableMeta {
        &self.meta
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Writes the table as `tree,forest,q` lines. Output bytes depend only
    /// on the records.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(b"tree,forest,q\n")?;
        for r in &self.records {
            writeln!(w, "{},{},{}", r.tree_code, r.forest_code, r.q)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads and fully validates a saved table: header, code syntax, size
    /// floors, the per-pair value bounds, and strict canonical ordering.
    pub fn load(path: &Path) -> Result<QTable> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h == "tree,forest,q" => {}
            Some(Ok(h)) => {
                return Err(Error::ParseLine {
                    line: 1,
                    msg: format!("bad header {h:?}, want \"tree,forest,q\""),
                })
            }
            Some(Err(e)) => return Err(e.into()),
            None => return Err(Error::ParseLine { line: 1, msg: "empty file".into() }),
        }
        let mut records = Vec::new();
        let mut prev_key: Option<(usize, String, String)> = None;
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            let mut fields = line.split(',');
            let (tree_code, forest_code, q_str) =
                match (fields.next(), fields.next(), fields.next(), fields.next()) {
                    (Some(t), Some(f), Some(q), None) => (t, f, q),
                    _ => {
                        return Err(Error::ParseLine {
                            line: line_no,
                            msg: "want exactly three comma-separated fields".into(),
                        })
                    }
                };
            let at = |e: Error| match e {
                Error::Parse { pos, msg } => Error::ParseLine {
                    line: line_no,
                    msg: format!("position {pos}: {msg}"),
                },
                other => other,
            };
            let tree = parse_tree(tree_code).map_err(at)?;
            let forest = parse_forest(forest_code).map_err(at)?;
            if tree.size() < 2 {
                return Err(Error::ParseLine {
                    line: line_no,
                    msg: "tree needs at least two vertices".into(),
                });
            }
            if forest.size() < 1 {
                return Err(Error::ParseLine {
                    line: line_no,
                    msg: "forest must be nonempty".into(),
                });
            }
            let q: u64 = q_str.parse().map_err(|e| Error::ParseLine {
                line: line_no,
                msg: format!("bad count {q_str:?}: {e}"),
            })?;
            let upper = crate::series::binomial(
                (tree.size() - 1 + forest.size()) as i64,
                forest.size() as i64,
            );
            if q < 2 || BigInt::from(q) > upper {
                return Err(Error::ParseLine {
                    line: line_no,
                    msg: format!("count {q} outside [2, {upper}]"),
                });
            }
            let key = (tree.size() + forest.size(), tree_code.to_string(), forest_code.to_string());
            if let Some(p) = &prev_key {
                if *p >= key {
                    return Err(Error::ParseLine {
                        line: line_no,
                        msg: "records out of canonical order".into(),
                    });
                }
            }
            prev_key = Some(key);
            records.push(QRecord {
                tree_code: tree_code.to_string(),
                forest_code: forest_code.to_string(),
                q,
            });
        }
        let derived = derive(&records)?;
        let coverage = infer_coverage(&records);
        let meta = QTableMeta { built_ms: None, threads: None, pair_count: records.len() };
        Ok(QTable { records, derived, coverage, meta })
    }
}

/// Compares the table against a fresh canonical enumeration of every shell
/// up to `n`, naming the first missing or mismatched pair.
pub fn validate_coverage(table: &QTable, n: usize) -> Result<()> {
    if n <= 2 {
        return Ok(());
    }
    let trees = tree_entries_up_to(n - 1)?;
    let forests = forest_entries_up_to(n - 2);
    let mut idx = 0;
    for shell in 3..=n {
        for te in shell_tree_order(&trees, shell) {
            for fe in &forests[shell - te.size] {
                match table.records.get(idx) {
                    None => {
                        return Err(Error::coverage(format!(
                            "table ends before pair ({}, {}) of shell {shell}",
                            te.code, fe.code
                        )))
                    }
                    Some(r) if r.tree_code != te.code || r.forest_code != fe.code => {
                        return Err(Error::coverage(format!(
                            "record {idx} is ({}, {}), want ({}, {})",
                            r.tree_code, r.forest_code, te.code, fe.code
                        )))
                    }
                    Some(_) => idx += 1,
                }
            }
        }
    }
    Ok(())
}
