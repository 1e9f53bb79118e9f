//! The algebraic law catalog and its checker.
//!
//! Each law relates operator compositions of action metavariables `A1..Ak`
//! (and sometimes predicate metavariables `p1..pk`) by equality of meaning or
//! by refinement, written `[=` in the display strings (`X [= Y` means every
//! postcondition `X` guarantees, `Y` guarantees too). The checker instantiates
//! the metavariables from the denotation generator — exhaustively on small
//! spaces, or by seeded sampling — and evaluates each instance:
//!
//! * `applicable` — the law's hypothesis holds (true for unhypothesized laws);
//! * `condition`  — the side condition holds (true when there is none);
//! * `holds`      — the claimed relation holds.
//!
//! A **violation** is `applicable && condition && !holds`: the law is false as
//! stated. A **necessity witness** is `applicable && !condition && !holds`: it
//! shows the side condition cannot be dropped. A law with a side condition and
//! no instance meeting it is reported `vacuous`, distinct from `holds`.
//! Existential laws (`L19`) invert the search: the checker succeeds by finding
//! one instance where the relation holds, and that instance is the witness.
//!
//! Instance checks are independent of one another (safe to parallelize); this
//! implementation runs them sequentially, which is plenty at catalog scale.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{random_denotation, GenError};
use crate::pred::StateSet;
use crate::semantics::{
    cannot_disable, cannot_enable, equal, refines, Denotation,
};

/// Seed used when none is given: the bytes of "ACTA".
pub const DEFAULT_LAW_SEED: u64 = 0x4143_5441;

/// Sampled action tuples drawn under the default budget when exhaustive
/// checking is off the table.
pub const DEFAULT_SAMPLES: u64 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawRelation {
    Equal,
    Refines,
}

/// Kind of side condition, for reporting; the operand wiring lives in the
/// law's evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideCondition {
    None,
    /// `gA => wp(B, gA)` for the relevant pair.
    CannotDisable,
    /// `!gA => wp(B, !gA)` for the relevant pair.
    CannotEnable,
    /// Inclusion between two operand guards.
    GuardImplication,
    /// A guarded skip on one operand's guard commutes with another's body.
    CommutingAssumption,
    /// An operand's body is deterministic and never aborts.
    BodyDeterminism,
}

/// One instantiation of a law's metavariables, evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instance {
    pub applicable: bool,
    pub condition: bool,
    pub holds: bool,
}

pub struct Law {
    /// Stable identifier, `"L1"` .. `"L21"`.
    pub id: &'static str,
    pub name: &'static str,
    /// Human-readable statement; `[=` is refinement, `b(A)` the canonical
    /// body, `g(A)` the guard, `[p]` the assumption.
    pub statement: &'static str,
    /// Number of action metavariables.
    pub arity: usize,
    /// Number of predicate metavariables (always enumerated exhaustively).
    pub pred_arity: usize,
    pub relation: LawRelation,
    pub side_condition: SideCondition,
    /// Existential laws claim a witness exists rather than a universal fact.
    pub existential: bool,
    eval: fn(&[Denotation], &[StateSet]) -> Instance,
}

impl Law {
    pub fn eval_instance(&self, actions: &[Denotation], preds: &[StateSet]) -> Instance {
        debug_assert_eq!(actions.len(), self.arity);
        debug_assert_eq!(preds.len(), self.pred_arity);
        (self.eval)(actions, preds)
    }
}

impl std::fmt::Debug for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Law")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("statement", &self.statement)
            .finish()
    }
}

/// How many instances to try.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Exhaustive for action arity <= 2 on a space of <= 2 states, otherwise
    /// `DEFAULT_SAMPLES` random tuples from `DEFAULT_LAW_SEED`.
    Default,
    /// Every action tuple (requires <= 3 states; cost is `count^arity`).
    Exhaustive,
    Random { seed: u64, samples: u64 },
}

/// A concrete instantiation kept for reporting; re-verifiable via
/// [`Law::eval_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub actions: Vec<Denotation>,
    pub preds: Vec<StateSet>,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, a) in self.actions.iter().enumerate() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "A{}={}", i + 1, a)?;
        }
        for (i, p) in self.preds.iter().enumerate() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "p{}={:?}", i + 1, p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No violation among the checked instances (for existential laws: a
    /// witness was found).
    Holds,
    /// A violating instance exists (for existential laws: no witness found).
    Fails,
    /// The side condition filtered out every applicable instance.
    Vacuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Necessity {
    /// The law has no side condition (or is existential).
    NotApplicable,
    Found,
    /// No instance with a failed condition and failed relation was seen; for
    /// L17 this is inevitable, since its hypothesis entails its condition.
    NotFound,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub law_id: &'static str,
    pub law_name: &'static str,
    pub statement: &'static str,
    pub states: u64,
    /// Tuples evaluated: action tuples times predicate tuples.
    pub instances: u64,
    /// Instances whose hypothesis held.
    pub applicable: u64,
    /// Instances whose hypothesis and side condition both held.
    pub checked: u64,
    pub violations: u64,
    pub verdict: Verdict,
    /// Counterexample when the verdict is `Fails` (universal laws); the
    /// existence witness when an existential law `Holds`.
    pub witness: Option<Witness>,
    pub necessity: Necessity,
    pub necessity_witness: Option<Witness>,
}

impl CheckReport {
    /// A report is ok unless the law is outright false on this run.
    pub fn ok(&self) -> bool {
        self.verdict != Verdict::Fails
    }
}

/// Failure iff any law is false on its run: a non-conditional law with a
/// counterexample, a conditional law violated under its condition, or an
/// existential law with no witness.
pub fn all_ok(reports: &[CheckReport]) -> bool {
    reports.iter().all(CheckReport::ok)
}

pub fn check_all(states: u64, budget: Budget) -> Result<Vec<CheckReport>, GenError> {
    builtin_laws().iter().map(|law| check_law(law, states, budget)).collect()
}

pub fn check_law(law: &Law, states: u64, budget: Budget) -> Result<CheckReport, GenError> {
    if states == 0 {
        return Err(GenError::EmptySpace);
    }
    let n = states;
    let pred_tuples = all_pred_tuples(n, law.pred_arity);

    let mut report = CheckReport {
        law_id: law.id,
        law_name: law.name,
        statement: law.statement,
        states: n,
        instances: 0,
        applicable: 0,
        checked: 0,
        violations: 0,
        verdict: Verdict::Holds,
        witness: None,
        necessity: Necessity::NotApplicable,
        necessity_witness: None,
    };
    let mut counterexample: Option<Witness> = None;
    let mut necessity_witness: Option<Witness> = None;
    let mut existence: Option<Witness> = None;

    let mut visit = |actions: &[Denotation]| {
        for preds in &pred_tuples {
            report.instances += 1;
            let inst = (law.eval)(actions, preds);
            if !inst.applicable {
                continue;
            }
            report.applicable += 1;
            if law.existential {
                if inst.holds && existence.is_none() {
                    existence = Some(Witness {
                        actions: actions.to_vec(),
                        preds: preds.clone(),
                    });
                }
                continue;
            }
            if inst.condition {
                report.checked += 1;
                if !inst.holds {
                    report.violations += 1;
                    if counterexample.is_none() {
                        counterexample = Some(Witness {
                            actions: actions.to_vec(),
                            preds: preds.clone(),
                        });
                    }
                }
            } else if !inst.holds && necessity_witness.is_none() {
                necessity_witness = Some(Witness {
                    actions: actions.to_vec(),
                    preds: preds.clone(),
                });
            }
        }
    };

    // Laws without action metavariables have exactly one (empty) action
    // tuple; sampling would just repeat it.
    if law.arity == 0 {
        visit(&[]);
    } else {
        match resolve_budget(budget, law.arity, n) {
            ResolvedBudget::Exhaustive => {
                let pool: Vec<Denotation> =
                    crate::gen::generate_actions(n, crate::gen::GenMode::Exhaustive)?.collect();
                let count = pool.len();
                let mut indices = vec![0usize; law.arity];
                let mut tuple: Vec<Denotation> = Vec::with_capacity(law.arity);
                let mut done = false;
                while !done {
                    tuple.clear();
                    tuple.extend(indices.iter().map(|&i| pool[i].clone()));
                    visit(&tuple);
                    // Odometer increment, last position fastest.
                    let mut pos = law.arity;
                    loop {
                        if pos == 0 {
                            done = true;
                            break;
                        }
                        pos -= 1;
                        indices[pos] += 1;
                        if indices[pos] < count {
                            break;
                        }
                        indices[pos] = 0;
                    }
                }
            }
            ResolvedBudget::Random { seed, samples } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut tuple: Vec<Denotation> = Vec::with_capacity(law.arity);
                for _ in 0..samples {
                    tuple.clear();
                    tuple.extend((0..law.arity).map(|_| random_denotation(&mut rng, n)));
                    visit(&tuple);
                }
            }
        }
    }
    Ok(finish(report, law, counterexample, necessity_witness, existence))
}

enum ResolvedBudget {
    Exhaustive,
    Random { seed: u64, samples: u64 },
}

fn resolve_budget(budget: Budget, arity: usize, states: u64) -> ResolvedBudget {
    match budget {
        Budget::Exhaustive => ResolvedBudget::Exhaustive,
        Budget::Random { seed, samples } => ResolvedBudget::Random { seed, samples },
        Budget::Default => {
            if arity <= 2 && states <= 2 {
                ResolvedBudget::Exhaustive
            } else {
                ResolvedBudget::Random { seed: DEFAULT_LAW_SEED, samples: DEFAULT_SAMPLES }
            }
        }
    }
}

fn finish(
    mut report: CheckReport,
    law: &Law,
    counterexample: Option<Witness>,
    necessity_witness: Option<Witness>,
    existence: Option<Witness>,
) -> CheckReport {
    if law.existential {
        report.verdict = if existence.is_some() { Verdict::Holds } else { Verdict::Fails };
        report.witness = existence;
        report.necessity = Necessity::NotApplicable;
        return report;
    }
    report.verdict = if report.violations > 0 {
        Verdict::Fails
    } else if report.checked == 0 {
        Verdict::Vacuous
    } else {
        Verdict::Holds
    };
    report.witness = counterexample;
    if law.side_condition != SideCondition::None {
        report.necessity =
            if necessity_witness.is_some() { Necessity::Found } else { Necessity::NotFound };
        report.necessity_witness = necessity_witness;
    }
    report
}

/// All assignments of `k` predicate metavariables over an `n`-state space.
fn all_pred_tuples(n: u64, k: usize) -> Vec<Vec<StateSet>> {
    assert!(n <= 32, "predicate enumeration needs a small space");
    let all: Vec<StateSet> =
        (0..(1u64 << n)).map(|m| StateSet::from_fn(n, |s| m >> s & 1 == 1)).collect();
    let mut tuples = vec![Vec::new()];
    for _ in 0..k {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                all.iter().map(move |p| {
                    let mut t2 = t.clone();
                    t2.push(p.clone());
                    t2
                })
            })
            .collect();
    }
    tuples
}

fn all_postconditions(n: u64) -> impl Iterator<Item = StateSet> {
    debug_assert!(n <= 32);
    (0..(1u64 << n)).map(move |m| StateSet::from_fn(n, |s| m >> s & 1 == 1))
}

/// The Eq-free helper: the guard-extraction normal form L5 claims equals `\\`.
fn dep_normal_form(a: &Denotation, b: &Denotation) -> Denotation {
    let b1 = a.body();
    let b2 = b.body();
    let g = a.guard().intersect(&b.guard()).intersect(&b1.wp(&b.guard()));
    Denotation::guarded(&g, &Denotation::seq(&b1, &b2))
}

fn plain(holds: bool) -> Instance {
    Instance { applicable: true, condition: true, holds }
}

/// The full catalog, in presentation order L1..L21.
pub fn builtin_laws() -> Vec<Law> {
    vec![
        Law {
            id: "L1",
            name: "priority-guard",
            statement: "g(A1 // A2) = g(A1) | g(A2)",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let pr = Denotation::priority(&a[0], &a[1]);
                plain(pr.guard() == a[0].guard().union(&a[1].guard()))
            },
        },
        Law {
            id: "L2",
            name: "priority-wp",
            statement: "wp(A1 // A2, q) = wp(A1, q) & (g(A1) | wp(A2, q))  for all q",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let pr = Denotation::priority(&a[0], &a[1]);
                let g1 = a[0].guard();
                let ok = all_postconditions(a[0].state_count())
                    .all(|q| pr.wp(&q) == a[0].wp(&q).intersect(&g1.union(&a[1].wp(&q))));
                plain(ok)
            },
        },
        Law {
            id: "L3",
            name: "assumption-split",
            statement: "[p1 & p2] = [p1] ; [p2] = [p2] ; [p1]",
            arity: 0,
            pred_arity: 2,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |_, p| {
                let both = Denotation::assume(&p[0].intersect(&p[1]));
                let ab =
                    Denotation::seq(&Denotation::assume(&p[0]), &Denotation::assume(&p[1]));
                let ba =
                    Denotation::seq(&Denotation::assume(&p[1]), &Denotation::assume(&p[0]));
                plain(equal(&both, &ab) && equal(&both, &ba))
            },
        },
        Law {
            id: "L4",
            name: "assumption-shift",
            statement: "[wp(A1, p1)] ; [p2] ; A1 ; A2 = [p2] ; A1 ; [p1] ; A2",
            arity: 2,
            pred_arity: 2,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, p| {
                let g = &p[0];
                let r = &p[1];
                let lhs = Denotation::seq(
                    &Denotation::assume(&a[0].wp(g)),
                    &Denotation::seq(&Denotation::assume(r), &Denotation::seq(&a[0], &a[1])),
                );
                let rhs = Denotation::seq(
                    &Denotation::assume(r),
                    &Denotation::seq(
                        &a[0],
                        &Denotation::seq(&Denotation::assume(g), &a[1]),
                    ),
                );
                plain(equal(&lhs, &rhs))
            },
        },
        Law {
            id: "L5",
            name: "dep-normal-form",
            statement: "A1 \\\\ A2 = g(A1) & g(A2) & wp(b(A1), g(A2)) -> b(A1) ; b(A2)",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                plain(equal(&Denotation::dep(&a[0], &a[1]), &dep_normal_form(&a[0], &a[1])))
            },
        },
        Law {
            id: "L6",
            name: "dep-associativity",
            statement: "(A1 \\\\ A2) \\\\ A3 = A1 \\\\ (A2 \\\\ A3)  if A1 cannot disable A3",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::CannotDisable,
            existential: false,
            eval: |a, _| {
                let lhs = Denotation::dep(&Denotation::dep(&a[0], &a[1]), &a[2]);
                let rhs = Denotation::dep(&a[0], &Denotation::dep(&a[1], &a[2]));
                Instance {
                    applicable: true,
                    condition: cannot_disable(&a[0], &a[2]),
                    holds: equal(&lhs, &rhs),
                }
            },
        },
        Law {
            id: "L7",
            name: "dep-over-seq",
            statement: "A1 \\\\ (A2 ; A3) = (A1 \\\\ A2) ; A3",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let lhs = Denotation::dep(&a[0], &Denotation::seq(&a[1], &a[2]));
                let rhs = Denotation::seq(&Denotation::dep(&a[0], &a[1]), &a[2]);
                plain(equal(&lhs, &rhs))
            },
        },
        Law {
            id: "L8",
            name: "seq-over-dep",
            statement: "A1 ; (A2 \\\\ A3) = (A1 ; A2) \\\\ A3  if (g(A3) -> skip) ; b(A1) = b(A1) ; (g(A3) -> skip)",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::CommutingAssumption,
            existential: false,
            eval: |a, _| {
                let b1 = a[0].body();
                let g3 = Denotation::guard_skip(&a[2].guard());
                let cond = equal(&Denotation::seq(&g3, &b1), &Denotation::seq(&b1, &g3));
                let lhs = Denotation::seq(&a[0], &Denotation::dep(&a[1], &a[2]));
                let rhs = Denotation::dep(&Denotation::seq(&a[0], &a[1]), &a[2]);
                Instance { applicable: true, condition: cond, holds: equal(&lhs, &rhs) }
            },
        },
        Law {
            id: "L9",
            name: "dep-choice-left",
            statement: "A1 \\\\ (A2 [] A3) = (A1 \\\\ A2) [] (A1 \\\\ A3)",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let lhs = Denotation::dep(&a[0], &Denotation::choice(&a[1], &a[2]));
                let rhs = Denotation::choice(
                    &Denotation::dep(&a[0], &a[1]),
                    &Denotation::dep(&a[0], &a[2]),
                );
                plain(equal(&lhs, &rhs))
            },
        },
        Law {
            id: "L10",
            name: "dep-choice-right",
            statement: "(A1 [] A2) \\\\ A3 = (A1 \\\\ A3) [] (A2 \\\\ A3)",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let lhs = Denotation::dep(&Denotation::choice(&a[0], &a[1]), &a[2]);
                let rhs = Denotation::choice(
                    &Denotation::dep(&a[0], &a[2]),
                    &Denotation::dep(&a[1], &a[2]),
                );
                plain(equal(&lhs, &rhs))
            },
        },
        Law {
            id: "L11",
            name: "dep-priority-left",
            statement: "A1 \\\\ (A2 // A3) = (A1 \\\\ A2) // (A1 \\\\ A3)  if A1 cannot enable A2",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::CannotEnable,
            existential: false,
            eval: |a, _| {
                let lhs = Denotation::dep(&a[0], &Denotation::priority(&a[1], &a[2]));
                let rhs = Denotation::priority(
                    &Denotation::dep(&a[0], &a[1]),
                    &Denotation::dep(&a[0], &a[2]),
                );
                Instance {
                    applicable: true,
                    condition: cannot_enable(&a[0], &a[1]),
                    holds: equal(&lhs, &rhs),
                }
            },
        },
        Law {
            id: "L12",
            name: "dep-priority-right",
            statement: "(A1 // A2) \\\\ A3 = (A1 \\\\ A3) // (A2 \\\\ A3)",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let lhs = Denotation::dep(&Denotation::priority(&a[0], &a[1]), &a[2]);
                let rhs = Denotation::priority(
                    &Denotation::dep(&a[0], &a[2]),
                    &Denotation::dep(&a[1], &a[2]),
                );
                plain(equal(&lhs, &rhs))
            },
        },
        Law {
            id: "L13",
            name: "dep-refines-seq",
            statement: "A1 ; A2 [= A1 \\\\ A2",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Refines,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                plain(refines(&Denotation::seq(&a[0], &a[1]), &Denotation::dep(&a[0], &a[1])))
            },
        },
        Law {
            id: "L14",
            name: "seq-refines-dep",
            statement: "A1 \\\\ A2 [= A1 ; A2  if g(A1) => g(A2)",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Refines,
            side_condition: SideCondition::GuardImplication,
            existential: false,
            eval: |a, _| Instance {
                applicable: true,
                condition: a[0].guard().is_subset(&a[1].guard()),
                holds: refines(&Denotation::dep(&a[0], &a[1]), &Denotation::seq(&a[0], &a[1])),
            },
        },
        Law {
            id: "L15",
            name: "choice-seq-monotone",
            statement: "A1 [= A2, A3 [= A4  ==>  A1 [] A3 [= A2 [] A4  and  A1 ; A3 [= A2 ; A4",
            arity: 4,
            pred_arity: 0,
            relation: LawRelation::Refines,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let hyp = refines(&a[0], &a[1]) && refines(&a[2], &a[3]);
                let holds = hyp
                    && refines(
                        &Denotation::choice(&a[0], &a[2]),
                        &Denotation::choice(&a[1], &a[3]),
                    )
                    && refines(&Denotation::seq(&a[0], &a[2]), &Denotation::seq(&a[1], &a[3]));
                Instance { applicable: hyp, condition: true, holds }
            },
        },
        Law {
            id: "L16",
            name: "dep-monotone-left",
            statement: "A1 [= A2  ==>  A1 \\\\ A3 [= A2 \\\\ A3",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Refines,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let hyp = refines(&a[0], &a[1]);
                let holds = hyp
                    && refines(&Denotation::dep(&a[0], &a[2]), &Denotation::dep(&a[1], &a[2]));
                Instance { applicable: hyp, condition: true, holds }
            },
        },
        Law {
            id: "L17",
            name: "dep-monotone-right",
            statement: "A1 [= A2  ==>  A3 \\\\ A1 [= A3 \\\\ A2  if g(A2) => g(A1)",
            arity: 3,
            pred_arity: 0,
            relation: LawRelation::Refines,
            side_condition: SideCondition::GuardImplication,
            existential: false,
            eval: |a, _| {
                let hyp = refines(&a[0], &a[1]);
                Instance {
                    applicable: hyp,
                    condition: a[1].guard().is_subset(&a[0].guard()),
                    holds: hyp
                        && refines(
                            &Denotation::dep(&a[2], &a[0]),
                            &Denotation::dep(&a[2], &a[1]),
                        ),
                }
            },
        },
        Law {
            id: "L18",
            name: "priority-refines-choice",
            statement: "A1 [] A2 [= A1 // A2",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Refines,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                plain(refines(
                    &Denotation::choice(&a[0], &a[1]),
                    &Denotation::priority(&a[0], &a[1]),
                ))
            },
        },
        Law {
            id: "L19",
            name: "dep-noncommutative",
            statement: "exists A1, A2:  A1 \\\\ A2 != A2 \\\\ A1",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: true,
            eval: |a, _| {
                plain(!equal(&Denotation::dep(&a[0], &a[1]), &Denotation::dep(&a[1], &a[0])))
            },
        },
        Law {
            id: "L20",
            name: "seq-forms-agree",
            statement: "A1 ;; A2 = A1 ; A2  if b(A1) is deterministic",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::BodyDeterminism,
            existential: false,
            eval: |a, _| Instance {
                applicable: true,
                condition: a[0].body_deterministic(),
                holds: equal(
                    &Denotation::guarded_seq(&a[0], &a[1]),
                    &Denotation::seq(&a[0], &a[1]),
                ),
            },
        },
        Law {
            id: "L21",
            name: "dep-decomposition",
            statement: "A1 \\\\ A2 = (g(A1) -> skip) ; (g(A2) -> skip) ; b(A1) ; (g(A2) -> skip) ; b(A2)",
            arity: 2,
            pred_arity: 0,
            relation: LawRelation::Equal,
            side_condition: SideCondition::None,
            existential: false,
            eval: |a, _| {
                let g1 = Denotation::guard_skip(&a[0].guard());
                let g2 = Denotation::guard_skip(&a[1].guard());
                let chain = Denotation::seq(
                    &g1,
                    &Denotation::seq(
                        &g2,
                        &Denotation::seq(
                            &a[0].body(),
                            &Denotation::seq(&g2, &a[1].body()),
                        ),
                    ),
                );
                plain(equal(&Denotation::dep(&a[0], &a[1]), &chain))
            },
        },
    ]
}

pub fn law_by_id(id: &str) -> Option<Law> {
    builtin_laws().into_iter().find(|l| l.id.eq_ignore_ascii_case(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{denotation_count, denotation_from_index};

    fn report(id: &str) -> CheckReport {
        let law = law_by_id(id).unwrap();
        check_law(&law, 2, Budget::Exhaustive).unwrap()
    }

    #[test]
    fn catalog_shape() {
        let laws = builtin_laws();
        assert_eq!(laws.len(), 21);
        for (i, law) in laws.iter().enumerate() {
            assert_eq!(law.id, format!("L{}", i + 1));
        }
        let mut names: Vec<&str> = laws.iter().map(|l| l.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 21, "law names must be unique");
    }

    /// Frozen exhaustive verdicts over the 25-denotation 2-state space. The
    /// counts were produced by an independent enumeration before this module
    /// existed and act as its oracle.
    #[test]
    fn exhaustive_two_state_verdict_table() {
        let holds = ["L1", "L2", "L3", "L4", "L6", "L8", "L10", "L13", "L14", "L15", "L16",
                     "L17", "L18", "L19", "L20", "L21"];
        for id in holds {
            let r = report(id);
            assert_eq!(r.verdict, Verdict::Holds, "{id}: {:?}", r);
            assert_eq!(r.violations, 0, "{id}");
        }
        // The five legs that are false in the exact model, with frozen
        // violation counts.
        for (id, violations) in
            [("L5", 224), ("L7", 1073), ("L9", 1216), ("L11", 204), ("L12", 600)]
        {
            let r = report(id);
            assert_eq!(r.verdict, Verdict::Fails, "{id}");
            assert_eq!(r.violations, violations, "{id}");
            // The stored counterexample must re-verify.
            let w = r.witness.expect("counterexample recorded");
            let law = law_by_id(id).unwrap();
            let inst = law.eval_instance(&w.actions, &w.preds);
            assert!(inst.applicable && inst.condition && !inst.holds, "{id} witness re-check");
        }
    }

    /// Frozen instance/violation counts for the structured laws.
    #[test]
    fn exhaustive_two_state_counts() {
        let r = report("L3");
        assert_eq!(r.instances, 16);
        assert_eq!(r.checked, 16);

        let r = report("L4");
        assert_eq!(r.instances, 10_000);
        assert_eq!(r.violations, 0);

        let r = report("L15");
        assert_eq!(r.instances, 390_625);
        assert_eq!(r.applicable, 38_416); // 196 refinement pairs, squared
        assert_eq!(r.violations, 0);

        let r = report("L5");
        assert_eq!(r.instances, 625);
        assert_eq!(r.checked, 625);
    }

    /// Necessity witnesses: the conditional laws whose side conditions are
    /// genuinely load-bearing, with frozen witness counts from the oracle
    /// enumeration (count asserted indirectly by the first-witness identity).
    #[test]
    fn necessity_witnesses_found_and_reverified() {
        for id in ["L6", "L8", "L11", "L14", "L20"] {
            let r = report(id);
            assert_eq!(r.necessity, Necessity::Found, "{id}");
            let w = r.necessity_witness.expect("witness stored");
            let law = law_by_id(id).unwrap();
            let inst = law.eval_instance(&w.actions, &w.preds);
            assert!(inst.applicable && !inst.condition && !inst.holds, "{id} necessity re-check");
        }
    }

    /// A decoded necessity witness for L14, frozen: A1 = abort everywhere,
    /// A2 = miracle at state 0 and abort at state 1. The guards are not
    /// included (g(A1) is everything), and A1 \\ A2 is miraculous at state 0
    /// while A1 ; A2 aborts there.
    #[test]
    fn l14_decoded_necessity_witness() {
        let d1 = denotation_from_index(0, 2);
        let d2 = denotation_from_index(1, 2);
        assert_eq!(&d1, &Denotation::abort(2));
        let law = law_by_id("L14").unwrap();
        let inst = law.eval_instance(&[d1.clone(), d2.clone()], &[]);
        assert!(inst.applicable && !inst.condition && !inst.holds);
        assert!(!refines(&Denotation::dep(&d1, &d2), &Denotation::seq(&d1, &d2)));
    }

    /// L17's side condition is entailed by its hypothesis (take the empty
    /// postcondition in the refinement definition: guards can only grow), so
    /// a necessity witness cannot exist in any space. The checker must report
    /// that honestly rather than inventing one.
    #[test]
    fn l17_condition_is_entailed_by_hypothesis() {
        let r = report("L17");
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.necessity, Necessity::NotFound);
        // The entailment itself, exhaustively: refinement shrinks no guard.
        for i in 0..denotation_count(2) {
            for j in 0..denotation_count(2) {
                let d1 = denotation_from_index(i, 2);
                let d2 = denotation_from_index(j, 2);
                if refines(&d1, &d2) {
                    assert!(d2.guard().is_subset(&d1.guard()), "{i},{j}");
                }
            }
        }
    }

    /// A decoded L5 counterexample, frozen: both operands abort. The
    /// dependency aborts too, but the normal form's guard contains
    /// wp(b(A1), g(A2)) which is false under an aborting body, so the normal
    /// form is a miracle.
    #[test]
    fn l5_decoded_counterexample() {
        let abort = Denotation::abort(2);
        assert!(!equal(&Denotation::dep(&abort, &abort), &dep_normal_form(&abort, &abort)));
        assert_eq!(&Denotation::dep(&abort, &abort), &abort);
        assert!(equal(&dep_normal_form(&abort, &abort), &Denotation::magic(2)));
    }

    #[test]
    fn l19_witness_is_a_real_inequality() {
        let r = report("L19");
        assert_eq!(r.verdict, Verdict::Holds);
        let w = r.witness.expect("existence witness");
        assert!(!equal(
            &Denotation::dep(&w.actions[0], &w.actions[1]),
            &Denotation::dep(&w.actions[1], &w.actions[0]),
        ));
    }

    #[test]
    fn random_budget_is_reproducible() {
        let law = law_by_id("L6").unwrap();
        let b = Budget::Random { seed: 7, samples: 500 };
        let r1 = check_law(&law, 3, b).unwrap();
        let r2 = check_law(&law, 3, b).unwrap();
        assert_eq!(r1.instances, r2.instances);
        assert_eq!(r1.violations, r2.violations);
        assert_eq!(r1.checked, r2.checked);
        assert_eq!(format!("{:?}", r1.necessity_witness), format!("{:?}", r2.necessity_witness));
        assert_eq!(r1.instances, 500);
    }

    #[test]
    fn default_budget_resolution() {
        // Arity 2 on two states: exhaustive 625.
        let r = check_law(&law_by_id("L13").unwrap(), 2, Budget::Default).unwrap();
        assert_eq!(r.instances, 625);
        // Arity 3 on two states: sampled.
        let r = check_law(&law_by_id("L6").unwrap(), 2, Budget::Default).unwrap();
        assert_eq!(r.instances, DEFAULT_SAMPLES);
        // Three states: sampled even at arity 2.
        let r = check_law(&law_by_id("L13").unwrap(), 3, Budget::Default).unwrap();
        assert_eq!(r.instances, DEFAULT_SAMPLES);
    }

    #[test]
    fn one_state_space_collapses_dep_laws() {
        // Over a single state most of the genuinely false laws cannot bite
        // (they need demonic branching), but L5 and L7 already fail through
        // abort alone, and L19's noncommutativity witness does not exist yet
        // (`\\` is commutative on the three one-state denotations), so the
        // existential law honestly fails there.
        let mut fails = Vec::new();
        for law in builtin_laws() {
            let r = check_law(&law, 1, Budget::Exhaustive).unwrap();
            if r.verdict == Verdict::Fails {
                fails.push(law.id);
            }
        }
        assert_eq!(fails, vec!["L5", "L7", "L19"]);
    }

    #[test]
    fn vacuous_is_distinct_from_holds() {
        // A conditional law checked on a sample containing no condition-true
        // instance must come back vacuous. Easiest to synthesize: L20 with a
        // single sampled tuple whose first component has a nondeterministic
        // body. Seed hunting is fragile, so instead check the classifier
        // directly on a report with zero checked instances.
        let law = law_by_id("L20").unwrap();
        let r = check_law(&law, 2, Budget::Random { seed: 1, samples: 0 }).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous);
        assert_eq!(r.instances, 0);
    }
}
