//! Exact denotational semantics of actions.
//!
//! Every action over a finite space denotes a total map from states to
//! outcomes. An outcome is `Abort` (the action may fail), `Miracle` (the
//! action is disabled; it satisfies every postcondition), or `Enabled(T)`
//! with a nonempty set of demonically chosen successors. This is the unique
//! conjunctive predicate-transformer model at finite scale: `wp` falls out of
//! the outcome by inspection, and all operators are defined pointwise.

use crate::action::{ActionError, ActionExpr};
use crate::pred::{Operand, StateSet};
use crate::space::{StateId, StateSpace};

/// The meaning of an action at one state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Outcome {
    Abort,
    Miracle,
    /// Demonic choice among a nonempty, sorted, duplicate-free successor list.
    Enabled(Vec<StateId>),
}

impl Outcome {
    /// Normalizing constructor; panics on an empty successor list (an empty
    /// demonic choice is `Miracle`, never representable as `Enabled`).
    pub fn enabled(mut succs: Vec<StateId>) -> Outcome {
        succs.sort_unstable();
        succs.dedup();
        assert!(!succs.is_empty(), "Enabled outcome needs at least one successor");
        Outcome::Enabled(succs)
    }

    pub fn is_enabled_here(&self) -> bool {
        !matches!(self, Outcome::Miracle)
    }

    /// Successor view used when this outcome is sequenced into another
    /// action: `Abort` has no continuation, `Miracle` none either, and
    /// `Enabled` continues from each successor.
    fn successors(&self) -> Option<&[StateId]> {
        match self {
            Outcome::Enabled(t) => Some(t),
            _ => None,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Abort => write!(f, "abort"),
            Outcome::Miracle => write!(f, "miracle"),
            Outcome::Enabled(t) => {
                write!(f, "{{")?;
                for (i, s) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", s)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Pointwise semantics of the operators. Each function computes the outcome
/// of a composite at one state from the operand outcomes (for `;`-like
/// operators the right operand is a lookup, since continuations run from
/// successor states). Both the whole-table denotation and the single-state
/// evaluator used by the execution engine are built from these.
pub mod pointwise {
    use super::*;

    pub fn choice(o1: &Outcome, o2: &Outcome) -> Outcome {
        match (o1, o2) {
            (Outcome::Abort, _) | (_, Outcome::Abort) => Outcome::Abort,
            (Outcome::Miracle, o) | (o, Outcome::Miracle) => o.clone(),
            (Outcome::Enabled(t1), Outcome::Enabled(t2)) => {
                Outcome::enabled(t1.iter().chain(t2).copied().collect())
            }
        }
    }

    pub fn priority(o1: &Outcome, o2: &Outcome) -> Outcome {
        if o1.is_enabled_here() {
            o1.clone()
        } else {
            o2.clone()
        }
    }

    /// Transformer-composition sequence: abort if the first step aborts or
    /// any successor aborts in the continuation; miraculous if the first step
    /// is, or every successor's continuation is; otherwise the union of the
    /// enabled continuations (a miraculous branch drops out of a demonic
    /// union).
    pub fn seq(o1: &Outcome, mut next: impl FnMut(StateId) -> Outcome) -> Outcome {
        let ts = match o1 {
            Outcome::Abort => return Outcome::Abort,
            Outcome::Miracle => return Outcome::Miracle,
            Outcome::Enabled(ts) => ts,
        };
        let mut succs = Vec::new();
        for &t in ts {
            match next(t) {
                Outcome::Abort => return Outcome::Abort,
                Outcome::Miracle => {}
                Outcome::Enabled(u) => succs.extend(u),
            }
        }
        if succs.is_empty() {
            Outcome::Miracle
        } else {
            Outcome::enabled(succs)
        }
    }

    pub fn guarded(holds: bool, o: &Outcome) -> Outcome {
        if holds {
            o.clone()
        } else {
            Outcome::Miracle
        }
    }

    pub fn assume(holds: bool, s: StateId) -> Outcome {
        if holds {
            Outcome::Enabled(vec![s])
        } else {
            Outcome::Abort
        }
    }

    /// Canonical body completion at one state: strip the guard by turning
    /// `Miracle` into skip.
    pub fn body(o: &Outcome, s: StateId) -> Outcome {
        match o {
            Outcome::Miracle => Outcome::Enabled(vec![s]),
            other => other.clone(),
        }
    }
}

/// Total map from states to outcomes: the exact meaning of an action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denotation {
    outcomes: Vec<Outcome>,
}

impl Denotation {
    pub fn from_fn(n: u64, f: impl Fn(StateId) -> Outcome) -> Denotation {
        Denotation { outcomes: (0..n).map(f).collect() }
    }

    pub fn state_count(&self) -> u64 {
        self.outcomes.len() as u64
    }

    pub fn outcome(&self, s: StateId) -> &Outcome {
        &self.outcomes[s as usize]
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (StateId, &Outcome)> {
        self.outcomes.iter().enumerate().map(|(i, o)| (i as StateId, o))
    }

    // ---- constructors mirroring the action grammar ----

    pub fn abort(n: u64) -> Denotation {
        Denotation::from_fn(n, |_| Outcome::Abort)
    }

    pub fn skip(n: u64) -> Denotation {
        Denotation::from_fn(n, |s| Outcome::Enabled(vec![s]))
    }

    /// `magic` = never-enabled action (`false -> skip`); handy in tests.
    pub fn magic(n: u64) -> Denotation {
        Denotation::from_fn(n, |_| Outcome::Miracle)
    }

    pub fn assume(p: &StateSet) -> Denotation {
        Denotation::from_fn(p.universe_len(), |s| pointwise::assume(p.contains(s), s))
    }

    /// The paper's `[p]` with wp `p => q` is a guarded skip, not `assume`.
    pub fn guard_skip(p: &StateSet) -> Denotation {
        Denotation::from_fn(p.universe_len(), |s| {
            pointwise::guarded(p.contains(s), &Outcome::Enabled(vec![s]))
        })
    }

    pub fn guarded(p: &StateSet, a: &Denotation) -> Denotation {
        Denotation::from_fn(a.state_count(), |s| pointwise::guarded(p.contains(s), a.outcome(s)))
    }

    pub fn choice(a: &Denotation, b: &Denotation) -> Denotation {
        Denotation::from_fn(a.state_count(), |s| pointwise::choice(a.outcome(s), b.outcome(s)))
    }

    pub fn priority(a: &Denotation, b: &Denotation) -> Denotation {
        Denotation::from_fn(a.state_count(), |s| pointwise::priority(a.outcome(s), b.outcome(s)))
    }

    pub fn seq(a: &Denotation, b: &Denotation) -> Denotation {
        Denotation::from_fn(a.state_count(), |s| {
            pointwise::seq(a.outcome(s), |t| b.outcome(t).clone())
        })
    }

    /// `;;` — the guard-extraction sequence `gA1 & wp(bA1, gA2) -> bA1 ; bA2`.
    pub fn guarded_seq(a: &Denotation, b: &Denotation) -> Denotation {
        let ba = a.body();
        let bb = b.body();
        let enabled = a.guard().intersect(&ba.wp(&b.guard()));
        Denotation::from_fn(a.state_count(), |s| {
            if enabled.contains(s) {
                pointwise::seq(ba.outcome(s), |t| bb.outcome(t).clone())
            } else {
                Outcome::Miracle
            }
        })
    }

    /// `\\` — sequence under both guards: `gA1 & gA2 -> A1 ; A2`.
    pub fn dep(a: &Denotation, b: &Denotation) -> Denotation {
        let both = a.guard().intersect(&b.guard());
        Denotation::from_fn(a.state_count(), |s| {
            if both.contains(s) {
                pointwise::seq(a.outcome(s), |t| b.outcome(t).clone())
            } else {
                Outcome::Miracle
            }
        })
    }

    // ---- transformer queries ----

    /// Weakest precondition: the states from which the action is guaranteed
    /// to establish `q`.
    pub fn wp(&self, q: &StateSet) -> StateSet {
        StateSet::from_fn(self.state_count(), |s| match self.outcome(s) {
            Outcome::Abort => false,
            Outcome::Miracle => true,
            Outcome::Enabled(ts) => ts.iter().all(|&t| q.contains(t)),
        })
    }

    /// `g(A) = not wp(A, false)`: the states where the action is enabled.
    pub fn guard(&self) -> StateSet {
        StateSet::from_fn(self.state_count(), |s| self.outcome(s).is_enabled_here())
    }

    /// Canonical body: the action with its guard stripped (skip where the
    /// guard fails), so `g(b(A)) = true` and `g(A) -> b(A)` rebuilds `A`.
    pub fn body(&self) -> Denotation {
        Denotation::from_fn(self.state_count(), |s| pointwise::body(self.outcome(s), s))
    }

    /// `wp(A, true) = true`: no state may abort.
    pub fn terminates(&self) -> bool {
        self.outcomes.iter().all(|o| !matches!(o, Outcome::Abort))
    }

    /// Is the body deterministic: exactly one successor wherever enabled and
    /// no aborts? (The skip completion at disabled states is deterministic.)
    /// This is the precondition under which the two sequence forms, and the
    /// guard-extraction formula for `;`, coincide.
    pub fn body_deterministic(&self) -> bool {
        self.outcomes.iter().all(|o| match o {
            Outcome::Abort => false,
            Outcome::Miracle => true,
            Outcome::Enabled(t) => t.len() == 1,
        })
    }
}

impl std::fmt::Display for Denotation {
    /// Outcome table in state order: `[abort, miracle, {0,2}]`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, o) in self.outcomes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", o)?;
        }
        write!(f, "]")
    }
}

/// `wp(A1, q) = wp(A2, q)` for all `q` — decided pointwise on outcomes.
pub fn equal(a: &Denotation, b: &Denotation) -> bool {
    a == b
}

/// `A1 ⊑ A2`: every postcondition guaranteed by `A1` is guaranteed by `A2`.
/// Pointwise: abort on the left passes; a miracle on the left needs one on
/// the right; an enabled left outcome needs a right outcome that is a miracle
/// or enabled with a subset of the successors.
pub fn refines(a: &Denotation, b: &Denotation) -> bool {
    refines_witness(a, b).is_none()
}

/// First state violating `refines(a, b)`, if any.
pub fn refines_witness(a: &Denotation, b: &Denotation) -> Option<StateId> {
    debug_assert_eq!(a.state_count(), b.state_count());
    (0..a.state_count()).find(|&s| !refines_at(a.outcome(s), b.outcome(s)))
}

fn refines_at(o1: &Outcome, o2: &Outcome) -> bool {
    match (o1, o2) {
        (Outcome::Abort, _) => true,
        (_, Outcome::Miracle) => true,
        (Outcome::Miracle, _) => false,
        (Outcome::Enabled(t1), Outcome::Enabled(t2)) => sorted_subset(t2, t1),
        (Outcome::Enabled(_), Outcome::Abort) => false,
    }
}

fn sorted_subset(small: &[StateId], big: &[StateId]) -> bool {
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

// ---- denotation of syntax ----

/// Denote a closed (no `Ref`) action expression; validates first.
pub fn denote(expr: &ActionExpr, space: &StateSpace) -> Result<Denotation, ActionError> {
    expr.validate(space, None)?;
    Ok(denote_unchecked(expr, space))
}

/// Denote an already-validated expression.
pub fn denote_unchecked(expr: &ActionExpr, space: &StateSpace) -> Denotation {
    let n = space.state_count();
    match expr {
        ActionExpr::Abort => Denotation::abort(n),
        ActionExpr::Skip => Denotation::skip(n),
        ActionExpr::Assign(targets) => {
            Denotation::from_fn(n, |s| Outcome::Enabled(vec![apply_assign(targets, space, s)]))
        }
        ActionExpr::Assume(p) => {
            Denotation::from_fn(n, |s| pointwise::assume(p.eval(space, s), s))
        }
        ActionExpr::Guarded(p, a) => {
            let da = denote_unchecked(a, space);
            Denotation::from_fn(n, |s| pointwise::guarded(p.eval(space, s), da.outcome(s)))
        }
        ActionExpr::Choice(a, b) => {
            Denotation::choice(&denote_unchecked(a, space), &denote_unchecked(b, space))
        }
        ActionExpr::Seq(a, b) => {
            Denotation::seq(&denote_unchecked(a, space), &denote_unchecked(b, space))
        }
        ActionExpr::GuardedSeq(a, b) => {
            Denotation::guarded_seq(&denote_unchecked(a, space), &denote_unchecked(b, space))
        }
        ActionExpr::Priority(a, b) => {
            Denotation::priority(&denote_unchecked(a, space), &denote_unchecked(b, space))
        }
        ActionExpr::Dep(a, b) => {
            Denotation::dep(&denote_unchecked(a, space), &denote_unchecked(b, space))
        }
        ActionExpr::Ref(name) => {
            unreachable!("unresolved label `{name}` survived validation")
        }
    }
}

/// Single-state evaluation of a validated expression. Agrees with
/// `denote_unchecked(expr, space).outcome(s)` everywhere; the execution
/// engine uses it to avoid materializing whole tables on larger spaces.
pub fn eval_at(expr: &ActionExpr, space: &StateSpace, s: StateId) -> Outcome {
    match expr {
        ActionExpr::Abort => Outcome::Abort,
        ActionExpr::Skip => Outcome::Enabled(vec![s]),
        ActionExpr::Assign(targets) => Outcome::Enabled(vec![apply_assign(targets, space, s)]),
        ActionExpr::Assume(p) => pointwise::assume(p.eval(space, s), s),
        ActionExpr::Guarded(p, a) => {
            if p.eval(space, s) {
                eval_at(a, space, s)
            } else {
                Outcome::Miracle
            }
        }
        ActionExpr::Choice(a, b) => {
            pointwise::choice(&eval_at(a, space, s), &eval_at(b, space, s))
        }
        ActionExpr::Seq(a, b) => {
            pointwise::seq(&eval_at(a, space, s), |t| eval_at(b, space, t))
        }
        ActionExpr::GuardedSeq(a, b) => {
            let oa = eval_at(a, space, s);
            if !oa.is_enabled_here() {
                return Outcome::Miracle;
            }
            let ba_s = pointwise::body(&oa, s);
            // wp(bA1, gA2) at s: every successor of the body enables A2.
            let continues = ba_s
                .successors()
                .map(|ts| ts.iter().all(|&t| eval_at(b, space, t).is_enabled_here()))
                .unwrap_or(false); // aborting body: wp(bA1, gA2) is false here
            if !continues {
                return Outcome::Miracle;
            }
            pointwise::seq(&ba_s, |t| pointwise::body(&eval_at(b, space, t), t))
        }
        ActionExpr::Priority(a, b) => {
            let oa = eval_at(a, space, s);
            if oa.is_enabled_here() {
                oa
            } else {
                eval_at(b, space, s)
            }
        }
        ActionExpr::Dep(a, b) => {
            let oa = eval_at(a, space, s);
            if !oa.is_enabled_here() || !eval_at(b, space, s).is_enabled_here() {
                return Outcome::Miracle;
            }
            pointwise::seq(&oa, |t| eval_at(b, space, t))
        }
        ActionExpr::Ref(name) => unreachable!("unresolved label `{name}` survived validation"),
    }
}

fn apply_assign(targets: &[(String, Operand)], space: &StateSpace, s: StateId) -> StateId {
    // Simultaneous assignment: all right-hand sides read the pre-state.
    let mut out = s;
    for (var, value) in targets {
        let vi = space.var_index(var).expect("validated");
        let val = match value {
            Operand::Lit(v) => space.value_index(vi, v).expect("validated"),
            Operand::Var(w) => {
                let wi = space.var_index(w).expect("validated");
                let name = &space.vars()[wi].domain[space.value_of(s, wi)];
                space.value_index(vi, name).expect("validated copy")
            }
        };
        out = space.with_value(out, vi, val);
    }
    out
}

// ---- enabledness relations between actions ----

/// `wp(A1, gA2)` as a predicate: from where does running `A1` guarantee
/// landing in a state where `A2` is enabled?
pub fn enables_pred(a1: &Denotation, a2: &Denotation) -> StateSet {
    a1.wp(&a2.guard())
}

/// The enabling implication holds at every state.
pub fn enables(a1: &Denotation, a2: &Denotation) -> bool {
    enables_pred(a1, a2).is_full()
}

/// `gA2 => wp(A1, gA2)` pointwise.
pub fn cannot_disable_pred(a1: &Denotation, a2: &Denotation) -> StateSet {
    a2.guard().implies(&a1.wp(&a2.guard()))
}

pub fn cannot_disable(a1: &Denotation, a2: &Denotation) -> bool {
    cannot_disable_pred(a1, a2).is_full()
}

/// Reduced form: `gA1 & gA2 => wp(bA1, gA2)`. Equivalent to
/// [`cannot_disable`]; exposed because guard-level reasoning states it this way.
pub fn cannot_disable_reduced(a1: &Denotation, a2: &Denotation) -> bool {
    a1.guard()
        .intersect(&a2.guard())
        .is_subset(&a1.body().wp(&a2.guard()))
}

/// `!gA2 => wp(A1, !gA2)` pointwise.
pub fn cannot_enable_pred(a1: &Denotation, a2: &Denotation) -> StateSet {
    let not_g2 = a2.guard().complement();
    not_g2.implies(&a1.wp(&not_g2))
}

pub fn cannot_enable(a1: &Denotation, a2: &Denotation) -> bool {
    cannot_enable_pred(a1, a2).is_full()
}

/// Reduced form: `gA1 & !gA2 => wp(bA1, !gA2)`.
pub fn cannot_enable_reduced(a1: &Denotation, a2: &Denotation) -> bool {
    let not_g2 = a2.guard().complement();
    a1.guard().intersect(&not_g2).is_subset(&a1.body().wp(&not_g2))
}

// ---- independent brute-force oracle ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    Refines,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Confirmed,
    /// First postcondition and state at which the relation fails, in
    /// enumeration order (postconditions as bitmasks ascending, states
    /// ascending).
    Violated { q: StateSet, s: StateId },
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("oracle limited to {cap} states, space has {states}")]
pub struct OracleTooLarge {
    pub states: u64,
    pub cap: u32,
}

pub const DEFAULT_ORACLE_CAP: u32 = 16;

/// Check `equal`/`refines` by enumerating all `2^|S|` postconditions and
/// comparing weakest preconditions, independently of the pointwise decision
/// procedures.
pub fn wp_oracle_compare(
    a1: &Denotation,
    a2: &Denotation,
    relation: Relation,
    cap: u32,
) -> Result<OracleVerdict, OracleTooLarge> {
    let n = a1.state_count();
    debug_assert_eq!(n, a2.state_count());
    if n > cap as u64 || n > 63 {
        return Err(OracleTooLarge { states: n, cap });
    }
    for mask in 0u64..(1u64 << n) {
        let q = StateSet::from_fn(n, |s| mask >> s & 1 == 1);
        let wp1 = a1.wp(&q);
        let wp2 = a2.wp(&q);
        let bad = match relation {
            Relation::Equal => {
                (0..n).find(|&s| wp1.contains(s) != wp2.contains(s))
            }
            Relation::Refines => {
                (0..n).find(|&s| wp1.contains(s) && !wp2.contains(s))
            }
        };
        if let Some(s) = bad {
            return Ok(OracleVerdict::Violated { q, s });
        }
    }
    Ok(OracleVerdict::Confirmed)
}
