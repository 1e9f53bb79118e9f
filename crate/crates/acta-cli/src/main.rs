//! `acta`: command-line front door to the action-system workbench.
//!
//! Subcommands: `check` (parse + validate a model), `wp` / `guard`
//! (predicate queries), `equal` / `refine` (semantic comparison, optionally
//! cross-checked by the all-postconditions oracle), `laws` (the algebraic
//! law catalog), `simulate` (seeded, scripted, or exhaustive execution), and
//! `reach` (breadth-first reachability with DOT export).
//!
//! Exit codes: 0 success, 1 verification/check failure, 2 usage or parse
//! error. All output is deterministic for fixed inputs and seeds; the
//! `ACTA_ORACLE_CAP` environment variable overrides the oracle's default
//! 16-state size cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use acta_core::dsl::{parse_action_with_labels, parse_pred, parse_system};
use acta_core::engine::{
    reach_dot, reachable_capped, run, trace_lines, EngineError, ExecConfig, Policy, TraceStatus,
    DEFAULT_REACH_CAP,
};
use acta_core::laws::{
    all_ok, builtin_laws, check_all, check_law, law_by_id, Budget, CheckReport, Necessity,
    Verdict, DEFAULT_LAW_SEED,
};
use acta_core::pred::pretty_predicate;
use acta_core::semantics::{
    denote, refines_witness, wp_oracle_compare, Denotation, OracleVerdict, Relation,
    DEFAULT_ORACLE_CAP,
};
use acta_core::space::StateSpace;
use acta_core::SystemModel;

#[derive(Parser)]
#[command(
    name = "acta",
    version,
    about = "Workbench for action systems: wp queries, refinement, algebraic laws, simulation, reachability"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a model file
    Check {
        /// Model file (.as)
        file: PathBuf,
    },
    /// Weakest precondition of an action for a postcondition
    Wp {
        file: PathBuf,
        /// Action expression; may reference the model's labels
        #[arg(long)]
        action: String,
        /// Postcondition predicate
        #[arg(long)]
        post: String,
    },
    /// Guard (enabling predicate) of an action
    Guard {
        file: PathBuf,
        #[arg(long)]
        action: String,
    },
    /// Semantic equality of two action expressions
    Equal {
        file: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        /// Cross-check with the all-postconditions oracle
        #[arg(long)]
        oracle: bool,
    },
    /// Refinement: every behavior of rhs is allowed by lhs
    Refine {
        file: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[arg(long)]
        oracle: bool,
    },
    /// List or check the algebraic law catalog
    Laws {
        /// List the catalog instead of checking
        #[arg(long)]
        list: bool,
        /// A law id (L1..L21) or `all`
        #[arg(long, default_value = "all")]
        check: String,
        /// State count of the checking space
        #[arg(long, default_value_t = 2)]
        states: u64,
        /// `default`, `exhaustive`, or a sample count
        #[arg(long, default_value = "default")]
        budget: String,
        /// Seed for sampled budgets
        #[arg(long)]
        seed: Option<u64>,
        /// Line-oriented machine-readable output
        #[arg(long)]
        machine: bool,
    },
    /// Execute a model under a scheduling policy
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PolicyArg::Random)]
        policy: PolicyArg,
        /// Comma-separated labels for --policy scripted
        #[arg(long, value_delimiter = ',')]
        script: Vec<String>,
        /// Write the line-delimited trace here
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Reachable states and transitions from the initial state
    Reach {
        file: PathBuf,
        /// Write a GraphViz DOT rendering here
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Exploration cap (default one million states)
        #[arg(long)]
        cap: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Random,
    Exhaustive,
    Scripted,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

const OK: ExitCode = ExitCode::SUCCESS;
const FAILED: ExitCode = ExitCode::FAILURE;

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Check { file } => cmd_check(&file),
        Cmd::Wp { file, action, post } => cmd_wp(&file, &action, &post),
        Cmd::Guard { file, action } => cmd_guard(&file, &action),
        Cmd::Equal { file, lhs, rhs, oracle } => {
            cmd_compare(&file, &lhs, &rhs, Relation::Equal, oracle)
        }
        Cmd::Refine { file, lhs, rhs, oracle } => {
            cmd_compare(&file, &lhs, &rhs, Relation::Refines, oracle)
        }
        Cmd::Laws { list, check, states, budget, seed, machine } => {
            cmd_laws(list, &check, states, &budget, seed, machine)
        }
        Cmd::Simulate { file, steps, seed, policy, script, trace } => {
            cmd_simulate(&file, steps, seed, policy, script, trace.as_deref())
        }
        Cmd::Reach { file, dot, cap } => cmd_reach(&file, dot.as_deref(), cap),
    }
}

fn load_model(path: &Path) -> Result<(SystemModel, StateSpace), String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    let model = parse_system(&text)
        .map_err(|e| e.with_file(path.display().to_string()).to_string())?;
    let space = model.space().map_err(|e| e.to_string())?;
    Ok((model, space))
}

/// Parse a query expression, close its label references, and denote it.
fn query_denotation(
    text: &str,
    model: &SystemModel,
    space: &StateSpace,
) -> Result<Denotation, String> {
    let expr = parse_action_with_labels(text, model, space)
        .map_err(|e| format!("in `{}`: {}", text, e))?;
    let closed = model.close_expr(&expr).map_err(|e| e.to_string())?;
    denote(&closed, space).map_err(|e| e.to_string())
}

fn oracle_cap() -> Result<u32, String> {
    match std::env::var("ACTA_ORACLE_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("ACTA_ORACLE_CAP must be a state count, got `{}`", v)),
        Err(_) => Ok(DEFAULT_ORACLE_CAP),
    }
}

fn cmd_check(file: &Path) -> Result<ExitCode, String> {
    let (model, space) = load_model(file)?;
    println!(
        "ok: system {} — {} variables, {} states, {} actions",
        model.name,
        space.var_count(),
        space.state_count(),
        model.actions.len()
    );
    Ok(OK)
}

fn cmd_wp(file: &Path, action: &str, post: &str) -> Result<ExitCode, String> {
    let (model, space) = load_model(file)?;
    let den = query_denotation(action, &model, &space)?;
    let q = parse_pred(post, &space)
        .map_err(|e| format!("in `{}`: {}", post, e))?
        .denote(&space)
        .map_err(|e| e.to_string())?;
    let wp = den.wp(&q);
    println!("states: {} of {}", wp.count(), space.state_count());
    println!("wp: {}", pretty_predicate(&wp, &space));
    Ok(OK)
}

fn cmd_guard(file: &Path, action: &str) -> Result<ExitCode, String> {
    let (model, space) = load_model(file)?;
    let den = query_denotation(action, &model, &space)?;
    let g = den.guard();
    println!("states: {} of {}", g.count(), space.state_count());
    println!("guard: {}", pretty_predicate(&g, &space));
    Ok(OK)
}

fn cmd_compare(
    file: &Path,
    lhs: &str,
    rhs: &str,
    relation: Relation,
    oracle: bool,
) -> Result<ExitCode, String> {
    let (model, space) = load_model(file)?;
    let l = query_denotation(lhs, &model, &space)?;
    let r = query_denotation(rhs, &model, &space)?;
    let oracle_verdict = if oracle {
        let cap = oracle_cap()?;
        Some(
            wp_oracle_compare(&l, &r, relation, cap)
                .map_err(|e| format!("{} (set ACTA_ORACLE_CAP to raise the cap)", e))?,
        )
    } else {
        None
    };
    let witness = match relation {
        Relation::Equal => {
            (0..space.state_count()).find(|&s| l.outcome(s) != r.outcome(s))
        }
        Relation::Refines => refines_witness(&l, &r),
    };
    let holds = witness.is_none();
    println!("{}", if holds { "holds" } else { "fails" });
    if let Some(s) = witness {
        println!(
            "witness state: ({}) — lhs {}, rhs {}",
            space.format_state(s),
            l.outcome(s),
            r.outcome(s)
        );
    }
    match oracle_verdict {
        Some(OracleVerdict::Confirmed) => {
            println!("oracle: agrees over all {} postconditions", 1u64 << space.state_count());
            if !holds {
                println!("oracle disagrees with the pointwise verdict; this is a bug");
                return Ok(FAILED);
            }
        }
        Some(OracleVerdict::Violated { q, s }) => {
            println!(
                "oracle: violated at state ({}) under postcondition {}",
                space.format_state(s),
                pretty_predicate(&q, &space)
            );
            if holds {
                println!("oracle disagrees with the pointwise verdict; this is a bug");
                return Ok(FAILED);
            }
        }
        None => {}
    }
    Ok(if holds { OK } else { FAILED })
}

fn parse_budget(budget: &str, seed: Option<u64>) -> Result<Budget, String> {
    match budget {
        "default" => Ok(match seed {
            Some(seed) => Budget::Random { seed, samples: acta_core::laws::DEFAULT_SAMPLES },
            None => Budget::Default,
        }),
        "exhaustive" => Ok(Budget::Exhaustive),
        n => {
            let samples: u64 = n
                .parse()
                .map_err(|_| format!("--budget takes `default`, `exhaustive`, or a count, got `{}`", n))?;
            Ok(Budget::Random { seed: seed.unwrap_or(DEFAULT_LAW_SEED), samples })
        }
    }
}

fn necessity_text(n: Necessity) -> &'static str {
    match n {
        Necessity::NotApplicable => "n/a",
        Necessity::Found => "found",
        Necessity::NotFound => "not-found",
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "FAILS",
        Verdict::Vacuous => "VACUOUS",
    }
}

fn print_report_human(r: &CheckReport) {
    let mut line = format!(
        "{:<4} {:<32} {:<8} instances={} applicable={} checked={} violations={}",
        r.law_id, r.law_name, verdict_text(r.verdict), r.instances, r.applicable, r.checked,
        r.violations
    );
    if r.necessity != Necessity::NotApplicable {
        line.push_str(&format!(" necessity={}", necessity_text(r.necessity)));
    }
    println!("{}", line);
    if r.verdict == Verdict::Fails {
        if let Some(w) = &r.witness {
            println!("     counterexample: {}", w);
        }
    }
    if let Some(w) = &r.necessity_witness {
        println!("     condition is necessary: dropping it fails at {}", w);
    }
}

fn print_report_machine(r: &CheckReport) {
    println!(
        "law\t{}\t{}\tstates={}\tinstances={}\tapplicable={}\tchecked={}\tviolations={}\tnecessity={}",
        r.law_id,
        verdict_text(r.verdict).to_ascii_lowercase(),
        r.states,
        r.instances,
        r.applicable,
        r.checked,
        r.violations,
        necessity_text(r.necessity)
    );
}

fn cmd_laws(
    list: bool,
    check: &str,
    states: u64,
    budget: &str,
    seed: Option<u64>,
    machine: bool,
) -> Result<ExitCode, String> {
    if list {
        for law in builtin_laws() {
            println!("{}\t{}\t{}", law.id, law.name, law.statement);
        }
        return Ok(OK);
    }
    let budget = parse_budget(budget, seed)?;
    let reports: Vec<CheckReport> = if check.eq_ignore_ascii_case("all") {
        check_all(states, budget).map_err(|e| e.to_string())?
    } else {
        let law = law_by_id(check).ok_or_else(|| {
            format!("unknown law `{}`; valid ids are L1..L21 or `all`", check)
        })?;
        vec![check_law(&law, states, budget).map_err(|e| e.to_string())?]
    };
    for r in &reports {
        if machine {
            print_report_machine(r);
        } else {
            print_report_human(r);
        }
    }
    let ok = all_ok(&reports);
    let failed = reports.iter().filter(|r| !r.ok()).count();
    let noun = if reports.len() == 1 { "law" } else { "laws" };
    if machine {
        println!("summary\t{}", if ok { "ok" } else { "fail" });
    } else if ok {
        println!("result: ok ({} {} checked on {} states)", reports.len(), noun, states);
    } else {
        println!(
            "result: FAIL ({} of {} {} violated on {} states)",
            failed,
            reports.len(),
            noun,
            states
        );
    }
    Ok(if ok { OK } else { FAILED })
}

fn cmd_simulate(
    file: &Path,
    steps: usize,
    seed: u64,
    policy: PolicyArg,
    script: Vec<String>,
    trace_path: Option<&Path>,
) -> Result<ExitCode, String> {
    let (model, space) = load_model(file)?;
    let policy = match policy {
        PolicyArg::Random => {
            if !script.is_empty() {
                return Err("--script requires --policy scripted".into());
            }
            Policy::Random { seed }
        }
        PolicyArg::Exhaustive => {
            if !script.is_empty() {
                return Err("--script requires --policy scripted".into());
            }
            Policy::Exhaustive
        }
        PolicyArg::Scripted => {
            if script.is_empty() {
                return Err("--policy scripted needs --script LABEL[,LABEL...]".into());
            }
            Policy::Scripted(script)
        }
    };
    let config = ExecConfig { policy, max_steps: steps, record_trace: true };
    let trace = match run(&model, &config) {
        Ok(t) => t,
        Err(e @ (EngineError::NotSchedulable { .. } | EngineError::UnknownScriptLabel(_))) => {
            eprintln!("scheduling error: {}", e);
            return Ok(FAILED);
        }
        Err(e) => return Err(e.to_string()),
    };
    println!("status: {}", trace.status);
    println!("steps: {}", trace.step_count);
    println!("final: {}", space.format_state(trace.final_state));
    if let Some(path) = trace_path {
        fs::write(path, trace_lines(&trace, &space))
            .map_err(|e| format!("{}: {}", path.display(), e))?;
        println!("trace written to {}", path.display());
    }
    Ok(match trace.status {
        TraceStatus::Aborted { .. } => FAILED,
        _ => OK,
    })
}

fn cmd_reach(file: &Path, dot: Option<&Path>, cap: Option<usize>) -> Result<ExitCode, String> {
    let (model, space) = load_model(file)?;
    let graph = reachable_capped(&model, cap.unwrap_or(DEFAULT_REACH_CAP))
        .map_err(|e| e.to_string())?;
    println!("states: {}", graph.nodes.len());
    println!("edges: {}", graph.edges.len());
    println!("terminals: {}", graph.terminals.len());
    println!("aborting: {}", graph.aborting.len());
    if let Some(path) = dot {
        fs::write(path, reach_dot(&graph, &space))
            .map_err(|e| format!("{}: {}", path.display(), e))?;
        println!("dot written to {}", path.display());
    }
    Ok(OK)
}
