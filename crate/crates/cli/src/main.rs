//! `av1324`: enumeration, interleaving counts, bound evaluation, and the
//! verification suites, with one machine-readable run report per invocation
//! on standard error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use av1324_core::asymptotics::{maximize_g_n, BoundEvaluator, OptimizeOptions};
use av1324_core::checks::{self, CheckOutcome};
use av1324_core::combinatorics::{enumerate_forests, enumerate_trees, parse_forest, parse_tree};
use av1324_core::lukasiewicz::{
    count_occurrences, distribution_stats, occurrence_distribution, Convention, LukaPath,
    LukaPattern,
};
use av1324_core::patterns::{q_count, QMode};
use av1324_core::qtable::{build_q_table, QTable};
use av1324_core::{Error, Result};

const EXIT_HELP: &str = "Exit codes:\n  \
    0  success\n  \
    2  usage error\n  \
    3  bad input (flags, files, parse, resource limits)\n  \
    4  table coverage insufficient\n  \
    5  verification checks failed\n  \
    1  internal error";

#[derive(Parser)]
#[command(
    name = "av1324",
    version,
    about = "Lower-bound machinery for the growth rate of 1324-avoiding permutations",
    after_help = EXIT_HELP
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate plane trees or forests
    Trees {
        #[command(subcommand)]
        cmd: TreesCmd,
    },
    /// Interleaving counts for (tree, forest) pairs
    Q {
        #[command(subcommand)]
        cmd: QCmd,
    },
    /// Growth-rate bound evaluation and maximization
    Bound {
        #[command(subcommand)]
        cmd: BoundCmd,
    },
    /// Lattice-path pattern statistics
    Luka {
        #[command(subcommand)]
        cmd: LukaCmd,
    },
    /// Cross-validation batteries
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum TreesCmd {
    /// List all objects of one size, one code per line
    Enum(TreesEnumArgs),
}

#[derive(Args)]
struct TreesEnumArgs {
    /// Vertex count
    #[arg(long)]
    size: usize,
    /// Object kind
    #[arg(long, value_enum)]
    kind: TreeKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeKind {
    Tree,
    Forest,
}

#[derive(Subcommand)]
enum QCmd {
    /// Count 1324-avoiding interleavings of one pair
    Pair(QPairArgs),
    /// Build the full pair table up to a size budget
    Table(QTableArgs),
}

#[derive(Args)]
struct QPairArgs {
    /// Tree code, e.g. "((()()))"
    #[arg(long)]
    tree: String,
    /// Forest code, e.g. "()(())"
    #[arg(long)]
    forest: String,
    /// Use the unpruned reference algorithm
    #[arg(long)]
    naive: bool,
}

#[derive(Args)]
struct QTableArgs {
    /// Largest tree-plus-forest size to cover
    #[arg(long)]
    max_n: usize,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all available)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Evaluate the bound at one shape point
    Eval(BoundEvalArgs),
    /// Maximize the bound over the shape box
    Maximize(BoundMaxArgs),
}

#[derive(Args)]
struct BoundEvalArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    delta: f64,
    /// Pair-size budget
    #[arg(long)]
    max_n: usize,
    /// Pair table file (required for budgets above 2)
    #[arg(long)]
    q_table: Option<PathBuf>,
}

#[derive(Args)]
struct BoundMaxArgs {
    /// Pair-size budget
    #[arg(long)]
    max_n: usize,
    /// Pair table file (required for budgets above 2)
    #[arg(long)]
    q_table: Option<PathBuf>,
    /// Tie-breaking tolerance on the log value
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand)]
enum LukaCmd {
    /// Count pattern occurrences in one path
    Count(LukaCountArgs),
    /// Exact occurrence distribution over all paths of one length
    Dist(LukaDistArgs),
}

#[derive(Args)]
struct LukaCountArgs {
    /// Pattern steps, comma-separated, e.g. 1,0,1
    #[arg(long)]
    pattern: String,
    /// Path steps, comma-separated
    #[arg(long)]
    path: String,
    /// Leave an occurrence anchored at the start uncounted
    #[arg(long)]
    skip_first: bool,
}

#[derive(Args)]
struct LukaDistArgs {
    /// Pattern steps, comma-separated
    #[arg(long)]
    pattern: String,
    /// Path length
    #[arg(long)]
    len: usize,
    /// Leave an occurrence anchored at the start uncounted
    #[arg(long)]
    skip_first: bool,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Generating-function identities
    Gf {
        /// Largest series order and coefficient index
        #[arg(long, default_value_t = 12)]
        max_k: usize,
    },
    /// Finite-size means and the assembled bound
    Means,
    /// Counting oracles, table determinism, and sampling
    Oracle {
        /// Table size budget under test
        #[arg(long, default_value_t = 8)]
        n: usize,
    },
    /// Embeddings and class assembly
    Embed,
}

struct RunOutput {
    inputs: Value,
    outputs: Value,
    threads: usize,
    checks_failed: bool,
}

fn effective_threads(flag: usize) -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let want = if flag == 0 { available } else { flag };
    match std::env::var("AV1324_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => want.min(cap),
        _ => want,
    }
}

fn parse_steps(kind: &str, text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .enumerate()
        .map(|(i, tok)| {
            tok.trim().parse::<i64>().map_err(|e| {
                Error::domain(format!("{kind} entry {} ({tok:?}): {e}", i + 1))
            })
        })
        .collect()
}

fn load_table(path: &Option<PathBuf>, max_n: usize) -> Result<Option<QTable>> {
    match path {
        Some(p) => Ok(Some(QTable::load(p)?)),
        None if max_n <= 2 => Ok(None),
        None => Err(Error::domain(format!(
            "budget {max_n} needs --q-table (only budgets 0..=2 work without one)"
        ))),
    }
}

fn print_checks(outcomes: &[CheckOutcome]) -> (usize, usize) {
    let mut passed = 0;
    let mut failed = 0;
    for o in outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {:<44} {}", o.name, o.detail);
        if o.passed {
            passed += 1;
        } else {
            failed += 1;
        }
    }
    println!("{passed} passed, {failed} failed");
    (passed, failed)
}

fn checks_output(name: &str, outcomes: Vec<CheckOutcome>) -> RunOutput {
    let (passed, failed) = print_checks(&outcomes);
    RunOutput {
        inputs: json!({ "battery": name }),
        outputs: json!({
            "passed": passed,
            "failed": failed,
            "checks": outcomes
                .iter()
                .map(|o| json!({ "name": o.name, "passed": o.passed, "detail": o.detail }))
                .collect::<Vec<_>>(),
        }),
        threads: 1,
        checks_failed: failed > 0,
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Trees { cmd: TreesCmd::Enum(_) } => "trees enum",
        Cmd::Q { cmd: QCmd::Pair(_) } => "q pair",
        Cmd::Q { cmd: QCmd::Table(_) } => "q table",
        Cmd::Bound { cmd: BoundCmd::Eval(_) } => "bound eval",
        Cmd::Bound { cmd: BoundCmd::Maximize(_) } => "bound maximize",
        Cmd::Luka { cmd: LukaCmd::Count(_) } => "luka count",
        Cmd::Luka { cmd: LukaCmd::Dist(_) } => "luka dist",
        Cmd::Verify { cmd: VerifyCmd::Gf { .. } } => "verify gf",
        Cmd::Verify { cmd: VerifyCmd::Means } => "verify means",
        Cmd::Verify { cmd: VerifyCmd::Oracle { .. } } => "verify oracle",
        Cmd::Verify { cmd: VerifyCmd::Embed } => "verify embed",
    }
}

fn run(cmd: &Cmd) -> Result<RunOutput> {
    match cmd {
        Cmd::Trees { cmd: TreesCmd::Enum(args) } => {
            if args.size > 12 {
                return Err(Error::resource(format!(
                    "size {} enumerates too many objects to list (cap 12)",
                    args.size
                )));
            }
            let codes: Vec<String> = match args.kind {
                TreeKind::Tree => {
                    enumerate_trees(args.size)?.iter().map(|t| t.encode()).collect()
                }
                TreeKind::Forest => {
                    enumerate_forests(args.size).iter().map(|f| f.encode()).collect()
                }
            };
            for code in &codes {
                println!("{code}");
            }
            let kind = match args.kind {
                TreeKind::Tree => "tree",
                TreeKind::Forest => "forest",
            };
            Ok(RunOutput {
                inputs: json!({ "size": args.size, "kind": kind }),
                outputs: json!({ "count": codes.len() }),
                threads: 1,
                checks_failed: false,
            })
        }
        Cmd::Q { cmd: QCmd::Pair(args) } => {
            let tree = parse_tree(&args.tree)?;
            let forest = parse_forest(&args.forest)?;
            let mode = if args.naive { QMode::Naive } else { QMode::Pruned };
            let q = q_count(&tree, &forest, mode)?;
            println!("{q}");
            Ok(RunOutput {
                inputs: json!({
                    "tree": args.tree,
                    "forest": args.forest,
                    "naive": args.naive,
                }),
                outputs: json!({ "q": q }),
                threads: 1,
                checks_failed: false,
            })
        }
        Cmd::Q { cmd: QCmd::Table(args) } => {
            let threads = effective_threads(args.threads);
            let table = build_q_table(args.max_n, threads)?;
            table.save(&args.out)?;
            let built_ms = table.meta().built_ms.unwrap_or(0);
            println!(
                "{} records covering sizes up to {} in {} ms with {} threads -> {}",
                table.len(),
                table.coverage(),
                built_ms,
                threads,
                args.out.display()
            );
            Ok(RunOutput {
                inputs: json!({
                    "max_n": args.max_n,
                    "out": args.out.display().to_string(),
                    "threads": args.threads,
                }),
                outputs: json!({
                    "records": table.len(),
                    "coverage": table.coverage(),
                    "built_ms": built_ms,
                }),
                threads,
                checks_failed: false,
            })
        }
        Cmd::Bound { cmd: BoundCmd::Eval(args) } => {
            let table = load_table(&args.q_table, args.max_n)?;
            let evaluator = BoundEvaluator::new(args.max_n, table.as_ref())?;
            let log_g = evaluator.eval_log(args.lambda, args.delta)?;
            let g = log_g.exp();
            println!("g = {g:.10}");
            println!("log g = {log_g:.10}");
            println!("pairs used = {}", evaluator.pair_count());
            Ok(RunOutput {
                inputs: json!({
                    "lambda": args.lambda,
                    "delta": args.delta,
                    "max_n": args.max_n,
                    "q_table": args.q_table.as_ref().map(|p| p.display().to_string()),
                }),
                outputs: json!({
                    "g": g,
                    "log_g": log_g,
                    "pairs_used": evaluator.pair_count(),
                }),
                threads: 1,
                checks_failed: false,
            })
        }
        Cmd::Bound { cmd: BoundCmd::Maximize(args) } => {
            if !(args.tol.is_finite() && args.tol > 0.0) {
                return Err(Error::domain(format!("tolerance must be positive, got {}", args.tol)));
            }
            let table = load_table(&args.q_table, args.max_n)?;
            let opts = OptimizeOptions { tol: args.tol, ..OptimizeOptions::default() };
            let r = maximize_g_n(args.max_n, table.as_ref(), &opts)?;
            println!("g = {:.10}", r.value);
            println!("log g = {:.10}", r.log_value);
            println!("lambda = {:.8}", r.lambda);
            println!("delta = {:.8}", r.delta);
            println!("evaluations = {}", r.evaluations);
            println!("refined starts = {}", r.refined_starts);
            println!("converged = {}", r.converged);
            Ok(RunOutput {
                inputs: json!({
                    "max_n": args.max_n,
                    "q_table": args.q_table.as_ref().map(|p| p.display().to_string()),
                    "tol": args.tol,
                }),
                outputs: json!({
                    "g": r.value,
                    "log_g": r.log_value,
                    "lambda": r.lambda,
                    "delta": r.delta,
                    "evaluations": r.evaluations,
                    "converged": r.converged,
                    "refined_starts": r.refined_starts,
                    "candidates": r.candidates.iter().map(|c| json!([c.0, c.1])).collect::<Vec<_>>(),
                }),
                threads: 1,
                checks_failed: false,
            })
        }
        Cmd::Luka { cmd: LukaCmd::Count(args) } => {
            let pattern = LukaPattern::new(parse_steps("pattern", &args.pattern)?)?;
            let path = LukaPath::new(parse_steps("path", &args.path)?)?;
            let conv = if args.skip_first { Convention::SkipFirst } else { Convention::All };
            let occurrences = count_occurrences(&path, &pattern, conv);
            println!("{occurrences}");
            Ok(RunOutput {
                inputs: json!({
                    "pattern": args.pattern,
                    "path": args.path,
                    "skip_first": args.skip_first,
                }),
                outputs: json!({ "occurrences": occurrences }),
                threads: 1,
                checks_failed: false,
            })
        }
        Cmd::Luka { cmd: LukaCmd::Dist(args) } => {
            let pattern = LukaPattern::new(parse_steps("pattern", &args.pattern)?)?;
            let conv = if args.skip_first { Convention::SkipFirst } else { Convention::All };
            let dist = occurrence_distribution(&pattern, args.len, conv)?;
            let (mean, variance, skewness) = distribution_stats(&dist)?;
            let mut histogram = serde_json::Map::new();
            for (occurrences, paths) in &dist {
                println!("{occurrences}\t{paths}");
                histogram.insert(occurrences.to_string(), Value::String(paths.to_string()));
            }
            println!("mean = {mean:.8}");
            println!("variance = {variance:.8}");
            println!("skewness = {skewness:.8}");
            Ok(RunOutput {
                inputs: json!({
                    "pattern": args.pattern,
                    "len": args.len,
                    "skip_first": args.skip_first,
                }),
                outputs: json!({
                    "histogram": histogram,
                    "mean": mean,
                    "variance": variance,
                    "skewness": skewness,
                }),
                threads: 1,
                checks_failed: false,
            })
        }
        Cmd::Verify { cmd } => match cmd {
            VerifyCmd::Gf { max_k } => Ok(checks_output("gf", checks::verify_gf(*max_k)?)),
            VerifyCmd::Means => Ok(checks_output("means", checks::verify_means()?)),
            VerifyCmd::Oracle { n } => Ok(checks_output("oracle", checks::verify_oracle(*n)?)),
            VerifyCmd::Embed => Ok(checks_output("embed", checks::verify_embed()?)),
        },
    }
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::ParseLine { .. }
        | Error::Domain(_)
        | Error::Resource(_)
        | Error::Io(_) => 3,
        Error::Coverage(_) => 4,
        Error::Internal(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let name = command_name(&cli.cmd);
    match run(&cli.cmd) {
        Ok(out) => {
            let report = json!({
                "command": name,
                "inputs": out.inputs,
                "outputs": out.outputs,
                "wall_ms": start.elapsed().as_millis() as u64,
                "threads": out.threads,
                "version": env!("CARGO_PKG_VERSION"),
            });
            eprintln!("{report}");
            if out.checks_failed {
                ExitCode::from(5)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
