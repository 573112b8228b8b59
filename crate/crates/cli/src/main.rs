//! `sessprog`: type checking, execution and progress analysis of `.ssp`
//! programs.
//!
//! Exit status: 0 accepted / verified / holds, 1 rejected / violated /
//! unknown, 2 unreadable or unparsable input, 3 a search limit was hit.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sessprog_core::measure::{binder_table, check_decrease, emeasure};
use sessprog_core::progress::{oracle_dynamic, verify_static, ProgressStatus};
use sessprog_core::semantics::{approximant, canonicalize, cap_indices, reachable, step, trace_line};
use sessprog_core::syntax::ast::{Index, Process};
use sessprog_core::syntax::{parse_program, parse_type};
use sessprog_core::typecheck::{check_closed, SolveResult};
use sessprog_core::types::{dual_full, dual_strict_report, TypeError};

use report::{emit, state_hash, Outcome};

#[derive(Parser, Debug)]
#[command(name = "sessprog", version, about = "Priority-based session types with bounded recursion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Judgment index for `check`: a natural number or `inf`.
    #[arg(long, global = true, value_parser = parse_index)]
    judgment_index: Option<Index>,
    /// Approximation index for `run`, `oracle`, `explore` and `measure`.
    #[arg(long, global = true)]
    approx: Option<u64>,
    /// Bound on distinct states kept by an exploration.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_states: usize,
    /// Bound on the length of a `run` trace.
    #[arg(long, global = true, default_value_t = 1000)]
    max_steps: usize,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for the redex choices of `run`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

const DEFAULT_APPROX: u64 = 2;

#[derive(Subcommand, Debug)]
enum Command {
    /// Type check a closed program and solve its priority constraints.
    Check { file: PathBuf },
    /// Follow one seeded pseudo-random reduction sequence.
    Run { file: PathBuf },
    /// Explore the reachable states of an approximant.
    Explore { file: PathBuf },
    /// Verify progress by type checking the 0-approximant.
    Progress { file: PathBuf },
    /// Decide progress of an approximant by exhaustive exploration.
    Oracle { file: PathBuf },
    /// Print the termination measure and the weight of each recursion.
    Measure {
        file: PathBuf,
        /// Also explore the reduction graph and check every edge.
        #[arg(long)]
        decrease: bool,
    },
    /// Print the n-approximant of a user process.
    Approx { n: u64, file: PathBuf },
    /// Compare two session types under both notions of duality.
    Dual { left: String, right: String },
}

fn parse_index(s: &str) -> Result<Index, String> {
    s.parse()
}

fn load(file: &PathBuf) -> Result<Process, Outcome> {
    let src = std::fs::read_to_string(file)
        .map_err(|e| Outcome::input(format!("{}: {e}", file.display())))?;
    parse_program(&src)
        .map(|p| p.process)
        .map_err(|e| Outcome::input(format!("{}:{e}", file.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match dispatch(&cli.command, &cli.opts) {
        Ok(o) | Err(o) => o,
    };
    emit(&outcome, cli.opts.json)
}

fn dispatch(cmd: &Command, opts: &Opts) -> Result<Outcome, Outcome> {
    match cmd {
        Command::Check { file } => {
            let program = {
                let src = std::fs::read_to_string(file)
                    .map_err(|e| Outcome::input(format!("{}: {e}", file.display())))?;
                parse_program(&src).map_err(|e| Outcome::input(format!("{}:{e}", file.display())))?
            };
            let iota = opts.judgment_index.unwrap_or(Index::Inf);
            let verdict = check_closed(&program, iota);
            let mut text = String::new();
            if verdict.accepted {
                text.push_str("accepted\n");
                if let Some(SolveResult::Assignment { values }) = &verdict.solution {
                    for (v, n) in values {
                        text.push_str(&format!("  {v} = {n}\n"));
                    }
                }
            } else {
                text.push_str("rejected\n");
            }
            let errors = verdict.diagnostics.iter().map(|d| d.to_string()).collect();
            Ok(Outcome::new(if verdict.accepted { 0 } else { 1 }, text, &verdict).with_errors(errors))
        }
        Command::Run { file } => run(&load(file)?, opts),
        Command::Explore { file } => explore(&load(file)?, opts),
        Command::Progress { file } => {
            let p = load(file)?;
            if let Some(i) = opts.judgment_index.filter(|i| !i.is_zero()) {
                return Err(Outcome::usage(format!(
                    "progress is verified at judgment index 0, not {i}"
                )));
            }
            let v = verify_static(&p).map_err(|e| Outcome::failure(e.to_string()))?;
            Ok(progress_outcome(&v))
        }
        Command::Oracle { file } => {
            let p = load(file)?;
            let n = opts.approx.unwrap_or(DEFAULT_APPROX);
            let v = oracle_dynamic(&p, n, opts.max_states).map_err(|e| Outcome::failure(e.to_string()))?;
            Ok(progress_outcome(&v))
        }
        Command::Measure { file, decrease } => measure(&load(file)?, *decrease, opts),
        Command::Approx { n, file } => {
            let p = load(file)?;
            let q = approximant(&p, Index::Fin(*n)).map_err(|e| Outcome::failure(e.to_string()))?;
            #[derive(Serialize)]
            struct Approx {
                index: u64,
                process: String,
            }
            let text = format!("{q}\n");
            Ok(Outcome::new(0, text, &Approx { index: *n, process: q.to_string() }))
        }
        Command::Dual { left, right } => dual(left, right),
    }
}

fn progress_outcome(v: &sessprog_core::progress::ProgressVerdict) -> Outcome {
    let code = match v.status {
        ProgressStatus::VerifiedStatic | ProgressStatus::HoldsDynamicAtBound => 0,
        ProgressStatus::Unknown if v.truncated => 3,
        ProgressStatus::ViolatedDynamic | ProgressStatus::Unknown => 1,
    };
    Outcome::new(code, report::progress_text(v), v)
}

fn run(p: &Process, opts: &Opts) -> Result<Outcome, Outcome> {
    let p = match opts.approx {
        Some(n) => cap_indices(p, Index::Fin(n)),
        None => p.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut state = canonicalize(&p);
    #[derive(Serialize)]
    struct Step {
        step: usize,
        label: sessprog_core::semantics::RedexLabel,
        state: String,
        hash: String,
    }
    #[derive(Serialize)]
    struct Run {
        seed: u64,
        initial: String,
        steps: Vec<Step>,
        normal_form: bool,
    }
    let mut steps = Vec::new();
    let mut text = format!("-\tstart\t-\t{state}\n");
    let mut normal = false;
    for i in 0..opts.max_steps {
        let mut succ = step(&state);
        if succ.is_empty() {
            normal = true;
            break;
        }
        let (label, next) = succ.swap_remove(rng.gen_range(0..succ.len()));
        text.push_str(&trace_line(i, &label, &next));
        text.push('\n');
        steps.push(Step {
            step: i,
            label,
            state: next.to_string(),
            hash: state_hash(&next),
        });
        state = next;
    }
    if !normal && step(&state).is_empty() {
        normal = true;
    }
    let body = Run {
        seed: opts.seed,
        initial: canonicalize(&p).to_string(),
        steps,
        normal_form: normal,
    };
    let code = if normal { 0 } else { 3 };
    let mut out = Outcome::new(code, text, &body);
    if !normal {
        out = out.with_errors(vec![format!("stopped after {} steps", opts.max_steps)]);
    }
    Ok(out)
}

fn explore(p: &Process, opts: &Opts) -> Result<Outcome, Outcome> {
    let n = opts.approx.unwrap_or(DEFAULT_APPROX);
    let q = cap_indices(p, Index::Fin(n));
    let space = reachable(&canonicalize(&q), opts.max_states);
    let normal = space.normal_forms();
    #[derive(Serialize)]
    struct NormalForm {
        id: usize,
        hash: String,
        state: String,
        stable_shape: bool,
    }
    #[derive(Serialize)]
    struct Explore {
        approx: u64,
        states: usize,
        edges: usize,
        longest_path: usize,
        truncated: bool,
        normal_forms: Vec<NormalForm>,
        hashes: Vec<String>,
    }
    let body = Explore {
        approx: n,
        states: space.states.len(),
        edges: space.edges.len(),
        longest_path: space.longest_path(),
        truncated: space.truncated,
        normal_forms: normal
            .iter()
            .map(|&id| NormalForm {
                id,
                hash: state_hash(&space.states[id]),
                state: space.states[id].to_string(),
                stable_shape: sessprog_core::progress::normal_form_shape(&space.states[id]),
            })
            .collect(),
        hashes: space.states.iter().map(state_hash).collect(),
    };
    let mut text = format!(
        "states\t{}\nedges\t{}\nlongest path\t{}\ntruncated\t{}\nnormal forms\t{}\n",
        body.states,
        body.edges,
        body.longest_path,
        body.truncated,
        body.normal_forms.len()
    );
    for nf in &body.normal_forms {
        text.push_str(&format!(
            "  #{}\t{}\t{}\n",
            nf.id,
            if nf.stable_shape { "stable" } else { "pending" },
            nf.state
        ));
    }
    Ok(Outcome::new(if space.truncated { 3 } else { 0 }, text, &body))
}

fn measure(p: &Process, decrease: bool, opts: &Opts) -> Result<Outcome, Outcome> {
    let q = match opts.approx {
        Some(n) => cap_indices(p, Index::Fin(n)),
        None => p.clone(),
    };
    let fail = |e: sessprog_core::measure::MeasureError| {
        Outcome::failure(format!("{e}; pass --approx N to measure an approximant"))
    };
    let e = emeasure(&q).map_err(fail)?;
    let rows = binder_table(&q).map_err(fail)?;
    let report = if decrease {
        Some(check_decrease(&q, opts.max_states).map_err(fail)?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct Measure {
        process: String,
        measure: String,
        binders: Vec<sessprog_core::measure::BinderRow>,
        #[serde(skip_serializing_if = "Option::is_none")]
        decrease: Option<sessprog_core::measure::DecreaseReport>,
    }
    let mut text = format!("E = {e}\n");
    let width = rows.iter().map(|r| r.var.len()).max().unwrap_or(0).max(3);
    if !rows.is_empty() {
        text.push_str(&format!("{:<width$}  {:>5}  {:>8}  {}\n", "var", "index", "V", "E"));
        for r in &rows {
            text.push_str(&format!(
                "{:<width$}  {:>5}  {:>8}  {}\n",
                r.var,
                r.index.to_string(),
                r.weight.to_string(),
                r.measure
            ));
        }
    }
    let mut code = 0;
    if let Some(r) = &report {
        text.push_str(&format!(
            "states {}  edges {}  longest path {}  violations {}\n",
            r.states,
            r.edges,
            r.longest_path,
            r.violations.len()
        ));
        code = if !r.holds() {
            1
        } else if r.truncated {
            3
        } else {
            0
        };
    }
    let body = Measure {
        process: q.to_string(),
        measure: e.to_string(),
        binders: rows,
        decrease: report,
    };
    Ok(Outcome::new(code, text, &body))
}

fn dual(left: &str, right: &str) -> Result<Outcome, Outcome> {
    let t = parse_type(left).map_err(|e| Outcome::input(format!("left type:{e}")))?;
    let s = parse_type(right).map_err(|e| Outcome::input(format!("right type:{e}")))?;
    let strict = dual_strict_report(&t, &s);
    let full = match dual_full(&t, &s) {
        Ok(b) => b,
        Err(e @ TypeError::DepthExceeded(_)) => return Err(Outcome::limit(e.to_string())),
        Err(e) => return Err(Outcome::failure(e.to_string())),
    };
    #[derive(Serialize)]
    struct Dual {
        left: String,
        right: String,
        strict: bool,
        full: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        mismatch: Option<sessprog_core::types::DualityMismatch>,
    }
    let body = Dual {
        left: t.to_string(),
        right: s.to_string(),
        strict: strict.is_ok(),
        full,
        mismatch: strict.err(),
    };
    let text = format!("strict\t{}\nfull\t{}\n", body.strict, body.full);
    Ok(Outcome::new(if full { 0 } else { 1 }, text, &body))
}
