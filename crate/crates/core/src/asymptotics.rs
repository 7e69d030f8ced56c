//! Growth-rate estimates: the exponential rate of the structured class, the
//! limiting densities of small configurations inside it, and the weighted
//! lower bound that combines those densities with exact interleaving counts.

use crate::combinatorics::{PlaneForest, PlaneTree};
use crate::error::{Error, Result};
use crate::qtable::QTable;

/// `x ln x`, extended by continuity with `0 ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_domain(lambda: f64, delta: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::domain(format!("lambda must be finite and positive, got {lambda}")));
    }
    if !delta.is_finite() || !(0.0..=1.0).contains(&delta) {
        return Err(Error::domain(format!("delta must lie in [0, 1], got {delta}")));
    }
    Ok(())
}

/// Natural log of the per-unit exponential rate of the structured class with
/// blue/red size ratio `lambda` and blue root-degree fraction `delta`.
pub fn log_e(lambda: f64, delta: f64) -> Result<f64> {
    check_domain(lambda, delta)?;
    Ok(4f64.ln() + lambda * (xlnx(2.0 - delta) - xlnx(1.0 - delta))
        + 2.0 * (xlnx(1.0 + delta * lambda) - xlnx(delta * lambda)))
}

pub fn e_eval(lambda: f64, delta: f64) -> Result<f64> {
    Ok(log_e(lambda, delta)?.exp())
}

/// Baseline growth-rate bound without interleaving corrections,
/// `E(lambda, delta)^(1/(1+lambda))`.
pub fn g0(lambda: f64, delta: f64) -> Result<f64> {
    Ok((log_e(lambda, delta)? / (1.0 + lambda)).exp())
}

/// The unique stationary point of `delta -> log_e(lambda, delta)` in (0, 1),
/// the positive root of `d^2 l(l+2) + d(1-2l) - 1 = 0`.
pub fn delta_star(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::domain(format!("lambda must be finite and positive, got {lambda}")));
    }
    let disc = 1.0 + 4.0 * lambda + 8.0 * lambda * lambda;
    Ok((2.0 * lambda - 1.0 + disc.sqrt()) / (2.0 * lambda * (lambda + 2.0)))
}

/// A configuration whose limiting density inside the structured class has a
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanKind {
    /// A fixed blue subtree with `size` vertices hanging at a given slot.
    BlueSubtree { size: usize },
    /// Exactly `gap` unused positions between consecutive red vertices.
    Gap { gap: usize },
    /// Strictly more than `gap` unused positions there.
    GapAbove { gap: usize },
    /// A fixed forest matched in full at a red vertex: its leftmost subtrees
    /// equal the forest and one more child follows.
    RedForest { size: usize },
    /// A fixed forest matched as a prefix of the step sequence at a red
    /// position, with no constraint on what follows.
    RedFringe { size: usize, components: usize },
}

/// Limiting density of `kind` as the class size grows, at the given shape
/// parameters. Red-side kinds do not depend on them at all.
pub fn closed_form_mean(kind: MeanKind, lambda: f64, delta: f64) -> Result<f64> {
    check_domain(lambda, delta)?;
    let dl = delta * lambda;
    match kind {
        MeanKind::BlueSubtree { size } => {
            if size == 0 {
                return Err(Error::domain("blue subtree needs at least one vertex"));
            }
            Ok((1.0 - delta).powi(size as i32 - 1) / (2.0 - delta).powi(2 * size as i32 - 1))
        }
        MeanKind::Gap { gap } => Ok(dl / (1.0 + dl).powi(gap as i32 + 1)),
        MeanKind::GapAbove { gap } => Ok((1.0 + dl).powi(-(gap as i32) - 1)),
        MeanKind::RedForest { size } => Ok(0.5f64.powi(2 * size as i32 + 1)),
        MeanKind::RedFringe { size, components } => {
            let bad = (components == 0) != (size == 0) || components > size;
            if bad {
                return Err(Error::domain(format!(
                    "fringe shape ({size}, {components}) is not a forest"
                )));
            }
            Ok(0.5f64.powi(2 * size as i32 - components as i32))
        }
    }
}

/// Limiting weight of a (tree, forest) pair, which depends on the pair only
/// through the tree size `i`, the forest size `m`, and its component count
/// `h`: the tree density times the two ways the forest region can close.
pub fn mu_pair_from_stats(i: usize, m: usize, h: usize, lambda: f64, delta: f64) -> Result<f64> {
    if i == 0 || m == 0 || h == 0 || h > m {
        return Err(Error::domain(format!("bad pair shape i={i}, m={m}, h={h}")));
    }
    let beta = closed_form_mean(MeanKind::BlueSubtree { size: i }, lambda, delta)?;
    let at_m = closed_form_mean(MeanKind::Gap { gap: m }, lambda, delta)?
        * closed_form_mean(MeanKind::RedFringe { size: m, components: h }, lambda, delta)?;
    let above_m = closed_form_mean(MeanKind::GapAbove { gap: m }, lambda, delta)?
        * closed_form_mean(MeanKind::RedForest { size: m }, lambda, delta)?;
    Ok(beta * (at_m + above_m))
}

pub fn mu_pair(tree: &PlaneTree, forest: &PlaneForest, lambda: f64, delta: f64) -> Result<f64> {
    mu_pair_from_stats(tree.size(), forest.size(), forest.components().len(), lambda, delta)
}

/// Reusable evaluator for the bound at one size budget: the pair filter and
/// log-count extraction happen once, each evaluation only rebuilds the
/// (lambda, delta)-dependent weight table.
pub struct BoundEvaluator {
    n: usize,
    keys: Vec<u32>,
    lnqs: Vec<f64>,
}

impl BoundEvaluator {
    /// `n <= 2` needs no table; larger budgets require one whose coverage
    /// reaches `n`.
    pub fn new(n: usize, table: Option<&QTable>) -> Result<BoundEvaluator> {
        let mut keys = Vec::new();
        let mut lnqs = Vec::new();
        if n >= 3 {
            let table = table.ok_or_else(|| {
                Error::domain(format!("a pair table is required for size budget {n}"))
            })?;
            if table.coverage() < n {
                return Err(Error::coverage(format!(
                    "table covers shells up to {}, need {n}",
                    table.coverage()
                )));
            }
            for d in table.derived() {
                if d.tree_size + d.pattern_len <= n {
                    let key = (d.tree_size * n + d.pattern_len) * n + d.pattern_height;
                    keys.push(key as u32);
                    lnqs.push(d.ln_q);
                }
            }
        }
        Ok(BoundEvaluator { n, keys, lnqs })
    }

    pub fn pair_count(&self) -> usize {
        self.keys.len()
    }

    /// Log of the growth-rate bound at this size budget.
    pub fn eval_log(&self, lambda: f64, delta: f64) -> Result<f64> {
        let base = log_e(lambda, delta)?;
        if self.n <= 2 {
            return Ok(base / (1.0 + lambda));
        }
        // Weight lookup keyed by (tree size, forest size, component count).
        let n = self.n;
        let mut mu = vec![0.0f64; n * n * n];
        for i in 2..n {
            for m in 1..=(n - i) {
                for h in 1..=m {
                    mu[(i * n + m) * n + h] = mu_pair_from_stats(i, m, h, lambda, delta)?;
                }
            }
        }
        // Neumaier-compensated sum in stored (canonical) order.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (key, lnq) in self.keys.iter().zip(&self.lnqs) {
            let term = mu[*key as usize] * lnq;
            let t = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
            sum = t;
        }
        Ok((base + 2.0 * delta * lambda * (sum + comp)) / (1.0 + lambda))
    }
}

/// Log of the growth-rate bound with pairs up to total size `n`.
pub fn g_n_log(lambda: f64, delta: f64, n: usize, table: Option<&QTable>) -> Result<f64> {
    BoundEvaluator::new(n, table)?.eval_log(lambda, delta)
}

/// The growth-rate bound itself.
pub fn g_n(lambda: f64, delta: f64, n: usize, table: Option<&QTable>) -> Result<f64> {
    Ok(g_n_log(lambda, delta, n, table)?.exp())
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// Results within this log-value distance of the best are considered
    /// ties; the lexicographically smallest point wins.
    pub tol: f64,
    pub max_iters: usize,
    /// How many best grid cells seed a local refinement.
    pub starts: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { tol: 1e-6, max_iters: 500, starts: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub lambda: f64,
    pub delta: f64,
    /// The bound at the optimum.
    pub value: f64,
    pub log_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Grid cells whose log value came within 1e-3 of the best cell.
    pub candidates: Vec<(f64, f64)>,
    pub refined_starts: usize,
}

const BOX_LO: (f64, f64) = (0.3, 0.50);
const BOX_HI: (f64, f64) = (1.2, 0.95);
const GRID_STEP: f64 = 0.05;
const SIMPLEX_STEP: f64 = 0.025;
const DIAMETER_TOL: f64 = 1e-9;
const SPREAD_TOL: f64 = 1e-13;

fn clip(p: (f64, f64)) -> (f64, f64) {
    (p.0.clamp(BOX_LO.0, BOX_HI.0), p.1.clamp(BOX_LO.1, BOX_HI.1))
}

struct NmOutcome {
    point: (f64, f64),
    value: f64,
    converged: bool,
}

/// Standard Nelder-Mead (reflect 1, expand 2, contract 1/2, shrink 1/2) on a
/// clipped box, minimizing.
fn nelder_mead<F>(f: &mut F, start: (f64, f64), max_iters: usize) -> Result<NmOutcome>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let offset = |x: f64, lo: f64, hi: f64| if x + SIMPLEX_STEP <= hi { x + SIMPLEX_STEP } else { (x - SIMPLEX_STEP).max(lo) };
    let pts = [
        start,
        (offset(start.0, BOX_LO.0, BOX_HI.0), start.1),
        (start.0, offset(start.1, BOX_LO.1, BOX_HI.1)),
    ];
    let mut simplex: Vec<((f64, f64), f64)> = Vec::with_capacity(3);
    for p in pts {
        simplex.push((p, f(p.0, p.1)?));
    }
    let mut converged = false;
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        let (best, second, worst) = (simplex[0], simplex[1], simplex[2]);
        let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs().max((a.1 - b.1).abs());
        let diameter = dist(best.0, second.0).max(dist(best.0, worst.0)).max(dist(second.0, worst.0));
        if diameter < DIAMETER_TOL && (worst.1 - best.1).abs() < SPREAD_TOL {
            converged = true;
            break;
        }
        let c = ((best.0 .0 + second.0 .0) / 2.0, (best.0 .1 + second.0 .1) / 2.0);
        let xr = clip((2.0 * c.0 - worst.0 .0, 2.0 * c.1 - worst.0 .1));
        let fr = f(xr.0, xr.1)?;
        if fr < best.1 {
            let xe = clip((c.0 + 2.0 * (xr.0 - c.0), c.1 + 2.0 * (xr.1 - c.1)));
            let fe = f(xe.0, xe.1)?;
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second.1 {
            simplex[2] = (xr, fr);
        } else {
            let xc = if fr < worst.1 {
                clip((c.0 + 0.5 * (xr.0 - c.0), c.1 + 0.5 * (xr.1 - c.1)))
            } else {
                clip((c.0 + 0.5 * (worst.0 .0 - c.0), c.1 + 0.5 * (worst.0 .1 - c.1)))
            };
            let fc = f(xc.0, xc.1)?;
            if fc < fr.min(worst.1) {
                simplex[2] = (xc, fc);
            } else {
                for k in 1..3 {
                    let p = clip((
                        best.0 .0 + 0.5 * (simplex[k].0 .0 - best.0 .0),
                        best.0 .1 + 0.5 * (simplex[k].0 .1 - best.0 .1),
                    ));
                    simplex[k] = (p, f(p.0, p.1)?);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    Ok(NmOutcome { point: simplex[0].0, value: simplex[0].1, converged })
}

/// Maximizes the bound at size budget `n` over the shape box: a coarse grid
/// scan followed by local refinement from the best cells. Deterministic.
pub fn maximize_g_n(
    n: usize,
    table: Option<&QTable>,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    let evaluator = BoundEvaluator::new(n, table)?;
    let mut evaluations = 0usize;
    let mut eval = |lambda: f64, delta: f64| -> Result<f64> {
        evaluations += 1;
        // Minimization form.
        Ok(-evaluator.eval_log(lambda, delta)?)
    };

    let mut cells: Vec<((f64, f64), f64)> = Vec::new();
    let mut a = 0;
    loop {
        let lambda = BOX_LO.0 + GRID_STEP * a as f64;
        if lambda > BOX_HI.0 + 1e-12 {
            break;
        }
        let mut b = 0;
        loop {
            let delta = BOX_LO.1 + GRID_STEP * b as f64;
            if delta > BOX_HI.1 + 1e-12 {
                break;
            }
            cells.push(((lambda, delta), eval(lambda, delta)?));
            b += 1;
        }
        a += 1;
    }
    cells.sort_by(|x, y| {
        x.1.partial_cmp(&y.1)
            .expect("finite objective")
            .then(x.0.partial_cmp(&y.0).expect("finite points"))
    });
    let best_cell = cells[0].1;
    let candidates: Vec<(f64, f64)> =
        cells.iter().take_while(|c| c.1 - best_cell <= 1e-3).map(|c| c.0).collect();

    let starts = opts.starts.min(cells.len());
    let mut outcomes: Vec<NmOutcome> = Vec::with_capacity(starts);
    for cell in cells.iter().take(starts) {
        outcomes.push(nelder_mead(&mut eval, cell.0, opts.max_iters)?);
    }
    let best_value = outcomes
        .iter()
        .map(|o| o.value)
        .fold(f64::INFINITY, f64::min);
    let mut tied: Vec<&NmOutcome> =
        outcomes.iter().filter(|o| o.value - best_value <= opts.tol).collect();
    tied.sort_by(|a, b| a.point.partial_cmp(&b.point).expect("finite points"));
    let winner = tied[0];
    let log_value = -winner.value;
    Ok(OptimizeResult {
        lambda: winner.point.0,
        delta: winner.point.1,
        value: log_value.exp(),
        log_value,
        evaluations,
        converged: outcomes.iter().all(|o| o.converged),
        candidates,
        refined_starts: starts,
    })
}
