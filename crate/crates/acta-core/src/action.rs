//! Abstract syntax of actions.
//!
//! The grammar covers guarded commands (`abort`, `skip`, multiple assignment,
//! guard prefix `p -> A`, demonic choice `[]`) plus the composition operators:
//! prioritised choice `//`, two sequence forms (`;` by transformer
//! composition, `;;` by guard extraction), the dependency operator `\\`, and
//! the assumption `[p]` which behaves as skip inside `p` and aborts outside.

use std::collections::HashSet;

use crate::pred::{EvalError, Operand, PredExpr};
use crate::space::StateSpace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionExpr {
    Abort,
    Skip,
    /// Simultaneous assignment; targets must be distinct variables.
    Assign(Vec<(String, Operand)>),
    /// `[p]` — skip where `p` holds, abort elsewhere.
    Assume(PredExpr),
    /// `p -> A` — behaves as `A` where `p` holds, disabled (miraculous) elsewhere.
    Guarded(PredExpr, Box<ActionExpr>),
    /// `A1 [] A2` — demonic choice.
    Choice(Box<ActionExpr>, Box<ActionExpr>),
    /// `A1 ; A2` — sequence by weakest-precondition composition.
    Seq(Box<ActionExpr>, Box<ActionExpr>),
    /// `A1 ;; A2` — sequence in guarded form: `gA1 & wp(bA1, gA2) -> bA1 ; bA2`.
    GuardedSeq(Box<ActionExpr>, Box<ActionExpr>),
    /// `A1 // A2` — A1 if enabled, otherwise A2.
    Priority(Box<ActionExpr>, Box<ActionExpr>),
    /// `A1 \\ A2` — sequence additionally guarded by both guards.
    Dep(Box<ActionExpr>, Box<ActionExpr>),
    /// A named action of the enclosing system; must be resolved before
    /// denotation.
    Ref(String),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ActionError {
    #[error(transparent)]
    Pred(#[from] EvalError),
    #[error("undeclared variable `{0}` in assignment")]
    UndeclaredVariable(String),
    #[error("value `{value}` is not in the domain of `{var}`")]
    OutOfDomain { var: String, value: String },
    #[error("variable `{0}` assigned twice in one assignment")]
    DuplicateTarget(String),
    #[error("assignment must have at least one target")]
    EmptyAssignment,
    #[error("copying `{from}` into `{to}` can leave `{to}` outside its domain (value `{value}`)")]
    IncompatibleCopy { from: String, to: String, value: String },
    #[error("unknown action label `{0}`")]
    UnknownLabel(String),
}

impl ActionExpr {
    pub fn guarded(p: PredExpr, a: ActionExpr) -> ActionExpr {
        ActionExpr::Guarded(p, Box::new(a))
    }

    pub fn choice(a: ActionExpr, b: ActionExpr) -> ActionExpr {
        ActionExpr::Choice(Box::new(a), Box::new(b))
    }

    pub fn seq(a: ActionExpr, b: ActionExpr) -> ActionExpr {
        ActionExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn guarded_seq(a: ActionExpr, b: ActionExpr) -> ActionExpr {
        ActionExpr::GuardedSeq(Box::new(a), Box::new(b))
    }

    pub fn priority(a: ActionExpr, b: ActionExpr) -> ActionExpr {
        ActionExpr::Priority(Box::new(a), Box::new(b))
    }

    pub fn dep(a: ActionExpr, b: ActionExpr) -> ActionExpr {
        ActionExpr::Dep(Box::new(a), Box::new(b))
    }

    pub fn assign(var: impl Into<String>, value: impl Into<String>) -> ActionExpr {
        ActionExpr::Assign(vec![(var.into(), Operand::Lit(value.into()))])
    }

    /// Well-formedness over a space. `labels`, when given, is the set of
    /// action names `Ref` may mention; without it any `Ref` is an error.
    pub fn validate(
        &self,
        space: &StateSpace,
        labels: Option<&HashSet<String>>,
    ) -> Result<(), ActionError> {
        match self {
            ActionExpr::Abort | ActionExpr::Skip => Ok(()),
            ActionExpr::Assign(targets) => {
                if targets.is_empty() {
                    return Err(ActionError::EmptyAssignment);
                }
                for (i, (var, value)) in targets.iter().enumerate() {
                    if targets[..i].iter().any(|(w, _)| w == var) {
                        return Err(ActionError::DuplicateTarget(var.clone()));
                    }
                    let vi = space
                        .var_index(var)
                        .ok_or_else(|| ActionError::UndeclaredVariable(var.clone()))?;
                    match value {
                        Operand::Lit(v) => {
                            space.value_index(vi, v).ok_or_else(|| ActionError::OutOfDomain {
                                var: var.clone(),
                                value: v.clone(),
                            })?;
                        }
                        Operand::Var(w) => {
                            let wi = space
                                .var_index(w)
                                .ok_or_else(|| ActionError::UndeclaredVariable(w.clone()))?;
                            // Every value the source can hold must fit the target.
                            for v in &space.vars()[wi].domain {
                                if space.value_index(vi, v).is_none() {
                                    return Err(ActionError::IncompatibleCopy {
                                        from: w.clone(),
                                        to: var.clone(),
                                        value: v.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
                Ok(())
            }
            ActionExpr::Assume(p) => Ok(p.validate(space)?),
            ActionExpr::Guarded(p, a) => {
                p.validate(space)?;
                a.validate(space, labels)
            }
            ActionExpr::Choice(a, b)
            | ActionExpr::Seq(a, b)
            | ActionExpr::GuardedSeq(a, b)
            | ActionExpr::Priority(a, b)
            | ActionExpr::Dep(a, b) => {
                a.validate(space, labels)?;
                b.validate(space, labels)
            }
            ActionExpr::Ref(name) => match labels {
                Some(ls) if ls.contains(name) => Ok(()),
                _ => Err(ActionError::UnknownLabel(name.clone())),
            },
        }
    }

    /// Substitute `Ref` nodes using `resolve`. Used to close an expression
    /// over the named actions of a system before denoting it.
    pub fn resolve_refs(
        &self,
        resolve: &impl Fn(&str) -> Option<ActionExpr>,
    ) -> Result<ActionExpr, ActionError> {
        Ok(match self {
            ActionExpr::Ref(name) => {
                resolve(name).ok_or_else(|| ActionError::UnknownLabel(name.clone()))?
            }
            ActionExpr::Abort => ActionExpr::Abort,
            ActionExpr::Skip => ActionExpr::Skip,
            ActionExpr::Assign(t) => ActionExpr::Assign(t.clone()),
            ActionExpr::Assume(p) => ActionExpr::Assume(p.clone()),
            ActionExpr::Guarded(p, a) => {
                ActionExpr::Guarded(p.clone(), Box::new(a.resolve_refs(resolve)?))
            }
            ActionExpr::Choice(a, b) => {
                ActionExpr::choice(a.resolve_refs(resolve)?, b.resolve_refs(resolve)?)
            }
            ActionExpr::Seq(a, b) => {
                ActionExpr::seq(a.resolve_refs(resolve)?, b.resolve_refs(resolve)?)
            }
            ActionExpr::GuardedSeq(a, b) => {
                ActionExpr::guarded_seq(a.resolve_refs(resolve)?, b.resolve_refs(resolve)?)
            }
            ActionExpr::Priority(a, b) => {
                ActionExpr::priority(a.resolve_refs(resolve)?, b.resolve_refs(resolve)?)
            }
            ActionExpr::Dep(a, b) => {
                ActionExpr::dep(a.resolve_refs(resolve)?, b.resolve_refs(resolve)?)
            }
        })
    }
}
