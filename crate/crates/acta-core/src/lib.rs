//! Workbench core for action systems over finite state spaces: exact
//! weakest-precondition semantics, guard/body decomposition, refinement
//! checking with an independent brute-force oracle, a machine-checked
//! catalog of the algebra of `[]`, `//`, `;`, and `\\`, a small modeling
//! language, and a fairness-free execution engine.

pub mod action;
pub mod dsl;
pub mod engine;
pub mod gen;
pub mod laws;
pub mod pred;
pub mod semantics;
pub mod space;

pub use action::{ActionError, ActionExpr};
pub use dsl::{
    parse_action, parse_pred, parse_system, print_action, print_pred, print_system, ModelError,
    NamedAction, ParseError, SystemModel,
};
pub use engine::{
    reach_dot, reachable, reachable_capped, run, step, trace_lines, verify_trace, EngineError,
    ExecConfig, Executor, Policy, ReachGraph, StepResult, Trace, TraceStatus, TraceStep,
};
pub use laws::{builtin_laws, check_all, check_law, Budget, CheckReport, Law, Verdict};
pub use pred::{Operand, PredExpr, StateSet};
pub use semantics::{
    denote, equal, eval_at, refines, refines_witness, wp_oracle_compare, Denotation, Outcome,
    OracleVerdict, Relation,
};
pub use space::{StateId, StateSpace, VarDecl};
