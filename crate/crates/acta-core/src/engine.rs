//! Execution of a validated system: repeatedly pick one enabled action and
//! fire it, with no fairness of any kind, until nothing is enabled (the run
//! terminates), a chosen action aborts, or a step budget runs out. Also
//! breadth-first reachability with DOT export and line-delimited traces.
//!
//! Scheduling respects the `run` composition through its core semantics: a
//! label under the right side of `//` is only schedulable while the left
//! side's guard (the union of its labels' guards) is false, exactly the
//! fall-through of prioritised choice. Within one step, the policy picks
//! among schedulable labels, then among the chosen action's successor
//! states; the random policy is uniform on both and fully determined by its
//! seed.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::{ActionError, ActionExpr};
use crate::dsl::{ModelError, SystemModel};
use crate::semantics::{denote, Denotation, Outcome};
use crate::space::{StateId, StateSpace};

/// Reachability refuses to explore more states than this by default.
pub const DEFAULT_REACH_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// Uniform over schedulable actions, then uniform over successors.
    Random { seed: u64 },
    /// Systematic enumeration: `run` walks every edge of the reachable
    /// graph once instead of following a single path.
    Exhaustive,
    /// Fire exactly these labels in order; deterministic (first successor).
    Scripted(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecConfig {
    pub policy: Policy,
    pub max_steps: usize,
    pub record_trace: bool,
}

impl Default for ExecConfig {
    fn default() -> ExecConfig {
        ExecConfig { policy: Policy::Random { seed: 0 }, max_steps: 1000, record_trace: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStatus {
    /// The step budget (or the script) ran out first.
    RunningLimit,
    /// No action was enabled; the state is final.
    Terminated,
    /// The chosen action's outcome was abort.
    Aborted { label: String },
}

impl fmt::Display for TraceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStatus::RunningLimit => write!(f, "running-limit"),
            TraceStatus::Terminated => write!(f, "terminated"),
            TraceStatus::Aborted { label } => write!(f, "aborted {}", label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub index: usize,
    pub from: StateId,
    pub label: String,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub init: StateId,
    /// Empty when `record_trace` was off; `step_count` still counts.
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
    pub final_state: StateId,
    pub step_count: usize,
}

/// Everything reachable from the initial state, in breadth-first discovery
/// order; edges carry the index of the firing action into `labels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    pub init: StateId,
    pub nodes: Vec<StateId>,
    pub labels: Vec<String>,
    pub edges: Vec<(StateId, usize, StateId)>,
    /// States with no schedulable action.
    pub terminals: Vec<StateId>,
    /// (state, action) pairs whose outcome is abort.
    pub aborting: Vec<(StateId, usize)>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("scripted label `{0}` does not exist in the model")]
    UnknownScriptLabel(String),
    #[error("scripted action `{label}` is not schedulable at state ({state})")]
    NotSchedulable { label: String, state: String },
    #[error("reachable exploration exceeded the cap of {cap} states")]
    CapExceeded { cap: usize },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Step { label: String, to: StateId },
    Terminated,
    Aborted { label: String },
    /// Scripted policy only: the script is consumed.
    ScriptEnded,
}

/// The `run` composition reduced to scheduling structure over action
/// indices.
enum Sched {
    Label(usize),
    Choice(Box<Sched>, Box<Sched>),
    Priority(Box<Sched>, Box<Sched>),
}

pub struct Executor {
    space: StateSpace,
    init: StateId,
    names: Vec<String>,
    dens: Vec<Denotation>,
    tree: Sched,
    rng: Option<ChaCha8Rng>,
    script: Vec<String>,
    cursor: usize,
}

impl Executor {
    pub fn new(model: &SystemModel, config: &ExecConfig) -> Result<Executor, EngineError> {
        let space = model.validate()?;
        let names: Vec<String> = model.labels().map(String::from).collect();
        let mut dens = Vec::with_capacity(names.len());
        for label in &names {
            let closed = model.closed_action(label)?;
            dens.push(denote(&closed, &space)?);
        }
        let tree = build_sched(&model.composition(), &names);
        let (rng, script) = match &config.policy {
            Policy::Random { seed } => (Some(ChaCha8Rng::seed_from_u64(*seed)), Vec::new()),
            Policy::Exhaustive => (None, Vec::new()),
            Policy::Scripted(labels) => {
                for l in labels {
                    if !names.contains(l) {
                        return Err(EngineError::UnknownScriptLabel(l.clone()));
                    }
                }
                (None, labels.clone())
            }
        };
        let init = model.init_state(&space);
        Ok(Executor { space, init, names, dens, tree, rng, script, cursor: 0 })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn init_state(&self) -> StateId {
        self.init
    }

    pub fn labels(&self) -> &[String] {
        &self.names
    }

    pub fn denotation(&self, action: usize) -> &Denotation {
        &self.dens[action]
    }

    /// Indices of the actions the scheduler may pick at `s`, in composition
    /// order, honoring priority fall-through.
    pub fn eligible(&self, s: StateId) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_eligible(&self.tree, s, &mut out);
        out
    }

    fn collect_eligible(&self, tree: &Sched, s: StateId, out: &mut Vec<usize>) {
        match tree {
            Sched::Label(i) => {
                if self.dens[*i].guard().contains(s) {
                    out.push(*i);
                }
            }
            Sched::Choice(a, b) => {
                self.collect_eligible(a, s, out);
                self.collect_eligible(b, s, out);
            }
            Sched::Priority(a, b) => {
                let before = out.len();
                self.collect_eligible(a, s, out);
                if out.len() == before {
                    self.collect_eligible(b, s, out);
                }
            }
        }
    }

    /// One execution step from `s` under this executor's policy.
    pub fn step(&mut self, s: StateId) -> Result<StepResult, EngineError> {
        let eligible = self.eligible(s);
        if eligible.is_empty() {
            return Ok(StepResult::Terminated);
        }
        let chosen = match (&mut self.rng, self.script.is_empty()) {
            (Some(rng), _) => eligible[rng.gen_range(0..eligible.len())],
            (None, true) => eligible[0], // exhaustive step(): deterministic first
            (None, false) => {
                if self.cursor >= self.script.len() {
                    return Ok(StepResult::ScriptEnded);
                }
                let label = self.script[self.cursor].clone();
                let idx = self.names.iter().position(|n| *n == label).expect("validated script");
                if !eligible.contains(&idx) {
                    return Err(EngineError::NotSchedulable {
                        label,
                        state: self.space.format_state(s),
                    });
                }
                self.cursor += 1;
                idx
            }
        };
        let label = self.names[chosen].clone();
        match self.dens[chosen].outcome(s) {
            Outcome::Abort => Ok(StepResult::Aborted { label }),
            Outcome::Miracle => unreachable!("eligible actions are enabled"),
            Outcome::Enabled(succs) => {
                let to = match &mut self.rng {
                    Some(rng) => succs[rng.gen_range(0..succs.len())],
                    None => succs[0],
                };
                Ok(StepResult::Step { label, to })
            }
        }
    }
}

fn build_sched(expr: &ActionExpr, names: &[String]) -> Sched {
    match expr {
        ActionExpr::Ref(l) => {
            Sched::Label(names.iter().position(|n| n == l).expect("validated run clause"))
        }
        ActionExpr::Choice(a, b) => {
            Sched::Choice(Box::new(build_sched(a, names)), Box::new(build_sched(b, names)))
        }
        ActionExpr::Priority(a, b) => {
            Sched::Priority(Box::new(build_sched(a, names)), Box::new(build_sched(b, names)))
        }
        _ => unreachable!("validated run clause holds only labels, [] and //"),
    }
}

/// One scheduling step from an arbitrary state. Fresh policy state per call:
/// the same seed picks the same action.
pub fn step(
    model: &SystemModel,
    state: StateId,
    config: &ExecConfig,
) -> Result<StepResult, EngineError> {
    Executor::new(model, config)?.step(state)
}

/// Execute from the initial state until termination, abort, or the step
/// budget; under the exhaustive policy, enumerate the reachable edge set
/// instead of following one path.
pub fn run(model: &SystemModel, config: &ExecConfig) -> Result<Trace, EngineError> {
    let mut ex = Executor::new(model, config)?;
    if config.policy == Policy::Exhaustive {
        return exhaustive_run(&ex, config);
    }
    let mut steps = Vec::new();
    let mut state = ex.init;
    let mut status = TraceStatus::RunningLimit;
    let mut count = 0usize;
    while count < config.max_steps {
        if matches!(config.policy, Policy::Scripted(_)) && ex.cursor >= ex.script.len() {
            break; // script consumed: the run hit its limit
        }
        match ex.step(state)? {
            StepResult::Terminated => {
                status = TraceStatus::Terminated;
                break;
            }
            StepResult::Aborted { label } => {
                status = TraceStatus::Aborted { label };
                break;
            }
            StepResult::ScriptEnded => break,
            StepResult::Step { label, to } => {
                if config.record_trace {
                    steps.push(TraceStep { index: count, from: state, label, to });
                }
                state = to;
                count += 1;
            }
        }
    }
    Ok(Trace { init: ex.init, steps, status, final_state: state, step_count: count })
}

fn exhaustive_run(ex: &Executor, config: &ExecConfig) -> Result<Trace, EngineError> {
    let graph = bfs(ex, usize::MAX)?;
    let mut steps = Vec::new();
    let mut status = TraceStatus::Terminated;
    let mut count = 0usize;
    for &(from, action, to) in &graph.edges {
        if count >= config.max_steps {
            status = TraceStatus::RunningLimit;
            break;
        }
        if config.record_trace {
            steps.push(TraceStep {
                index: count,
                from,
                label: graph.labels[action].clone(),
                to,
            });
        }
        count += 1;
    }
    Ok(Trace { init: ex.init, steps, status, final_state: ex.init, step_count: count })
}

/// Breadth-first closure from the initial state over all schedulable
/// actions, capped at [`DEFAULT_REACH_CAP`] states.
pub fn reachable(model: &SystemModel) -> Result<ReachGraph, EngineError> {
    reachable_capped(model, DEFAULT_REACH_CAP)
}

pub fn reachable_capped(model: &SystemModel, cap: usize) -> Result<ReachGraph, EngineError> {
    let ex = Executor::new(model, &ExecConfig { policy: Policy::Exhaustive, ..Default::default() })?;
    bfs(&ex, cap)
}

fn bfs(ex: &Executor, cap: usize) -> Result<ReachGraph, EngineError> {
    let mut seen: HashSet<StateId> = HashSet::new();
    let mut nodes: Vec<StateId> = Vec::new();
    let mut edges: Vec<(StateId, usize, StateId)> = Vec::new();
    let mut terminals: Vec<StateId> = Vec::new();
    let mut aborting: Vec<(StateId, usize)> = Vec::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();
    seen.insert(ex.init);
    nodes.push(ex.init);
    queue.push_back(ex.init);
    while let Some(s) = queue.pop_front() {
        let eligible = ex.eligible(s);
        if eligible.is_empty() {
            terminals.push(s);
            continue;
        }
        for i in eligible {
            match ex.dens[i].outcome(s) {
                Outcome::Abort => aborting.push((s, i)),
                Outcome::Miracle => unreachable!("eligible actions are enabled"),
                Outcome::Enabled(succs) => {
                    for &t in succs {
                        edges.push((s, i, t));
                        if seen.insert(t) {
                            if nodes.len() >= cap {
                                return Err(EngineError::CapExceeded { cap });
                            }
                            nodes.push(t);
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
    }
    Ok(ReachGraph {
        init: ex.init,
        nodes,
        labels: ex.names.clone(),
        edges,
        terminals,
        aborting,
    })
}

/// Chaining, enabledness, and successor membership of every step.
pub fn verify_trace(model: &SystemModel, trace: &Trace) -> Result<(), EngineError> {
    let ex = Executor::new(model, &ExecConfig { policy: Policy::Exhaustive, ..Default::default() })?;
    let mut at = trace.init;
    for step in &trace.steps {
        if step.from != at {
            return Err(EngineError::InvalidTrace(format!(
                "step {} starts at ({}) but the run is at ({})",
                step.index,
                ex.space.format_state(step.from),
                ex.space.format_state(at)
            )));
        }
        let idx = ex
            .names
            .iter()
            .position(|n| *n == step.label)
            .ok_or_else(|| EngineError::InvalidTrace(format!("unknown label {}", step.label)))?;
        if !ex.eligible(step.from).contains(&idx) {
            return Err(EngineError::InvalidTrace(format!(
                "step {}: `{}` is not schedulable at ({})",
                step.index,
                step.label,
                ex.space.format_state(step.from)
            )));
        }
        match ex.dens[idx].outcome(step.from) {
            Outcome::Enabled(succs) if succs.contains(&step.to) => {}
            _ => {
                return Err(EngineError::InvalidTrace(format!(
                    "step {}: ({}) is not a successor of `{}` at ({})",
                    step.index,
                    ex.space.format_state(step.to),
                    step.label,
                    ex.space.format_state(step.from)
                )));
            }
        }
        at = step.to;
    }
    Ok(())
}

// ---------------- export formats ----------------

/// Line-delimited trace: a `# init` header, one `index<TAB>label<TAB>valuation`
/// record per step (the valuation is the successor's), and a `# status`
/// footer.
pub fn trace_lines(trace: &Trace, space: &StateSpace) -> String {
    let mut out = String::new();
    out.push_str(&format!("# init\t{}\n", space.format_state(trace.init)));
    for step in &trace.steps {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            step.index,
            step.label,
            space.format_state(step.to)
        ));
    }
    out.push_str(&format!("# status\t{}\n", trace.status));
    out
}

/// GraphViz DOT rendering: nodes carry valuations, edges the firing action's
/// label; the initial node is bold, terminal nodes double-bordered, and
/// abort-capable nodes red.
pub fn reach_dot(graph: &ReachGraph, space: &StateSpace) -> String {
    let mut out = String::new();
    out.push_str("digraph reachable {\n  rankdir=LR;\n  node [shape=box];\n");
    let terminal: HashSet<StateId> = graph.terminals.iter().copied().collect();
    let aborting: HashSet<StateId> = graph.aborting.iter().map(|&(s, _)| s).collect();
    let mut idx: HashMap<StateId, usize> = HashMap::new();
    for (i, &s) in graph.nodes.iter().enumerate() {
        idx.insert(s, i);
        let mut attrs = vec![format!("label=\"{}\"", space.format_state(s).replace(", ", "\\n"))];
        if s == graph.init {
            attrs.push("style=bold".into());
        }
        if terminal.contains(&s) {
            attrs.push("peripheries=2".into());
        }
        if aborting.contains(&s) {
            attrs.push("color=red".into());
        }
        out.push_str(&format!("  n{} [{}];\n", i, attrs.join(", ")));
    }
    for &(from, action, to) in &graph.edges {
        out.push_str(&format!(
            "  n{} -> n{} [label=\"{}\"];\n",
            idx[&from], idx[&to], graph.labels[action]
        ));
    }
    out.push_str("}\n");
    out
}
