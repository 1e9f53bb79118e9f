//! Randomized properties: the semantic identities the workbench rests on,
//! exercised over generated denotations, expressions, and raw input bytes.

use proptest::prelude::*;

use acta_core::action::ActionExpr;
use acta_core::gen::{outcome_from_code, outcomes_per_state};
use acta_core::pred::{Operand, PredExpr, StateSet};
use acta_core::semantics::{
    denote, equal, eval_at, refines, wp_oracle_compare, Denotation, OracleVerdict, Relation,
};
use acta_core::space::StateSpace;
use acta_core::{parse_action, parse_system, print_action};

fn arb_den(n: u64) -> impl Strategy<Value = Denotation> {
    proptest::collection::vec(0..outcomes_per_state(n), n as usize)
        .prop_map(move |codes| Denotation::from_fn(n, |s| outcome_from_code(codes[s as usize], n)))
}

fn arb_set(n: u64) -> impl Strategy<Value = StateSet> {
    (0u64..(1 << n)).prop_map(move |bits| StateSet::from_fn(n, |s| bits >> s & 1 == 1))
}

/// A denotation paired with the state count it lives over.
fn sized_dens(k: usize) -> impl Strategy<Value = (u64, Vec<Denotation>)> {
    (1u64..=4).prop_flat_map(move |n| {
        (Just(n), proptest::collection::vec(arb_den(n), k))
    })
}

fn sized_dens_and_sets(
    dens: usize,
    sets: usize,
) -> impl Strategy<Value = (u64, Vec<Denotation>, Vec<StateSet>)> {
    (1u64..=4).prop_flat_map(move |n| {
        (
            Just(n),
            proptest::collection::vec(arb_den(n), dens),
            proptest::collection::vec(arb_set(n), sets),
        )
    })
}

proptest! {
    /// wp distributes over conjunction of postconditions.
    #[test]
    fn wp_is_conjunctive((_, dens, sets) in sized_dens_and_sets(1, 2)) {
        let a = &dens[0];
        let (p, q) = (&sets[0], &sets[1]);
        prop_assert_eq!(a.wp(&p.intersect(q)), a.wp(p).intersect(&a.wp(q)));
    }

    /// wp is monotone in the postcondition.
    #[test]
    fn wp_is_monotone((_, dens, sets) in sized_dens_and_sets(1, 2)) {
        let a = &dens[0];
        let (p, q) = (&sets[0], &sets[1]);
        let (small, large) = (p.intersect(q), p.union(q));
        prop_assert!(a.wp(&small).is_subset(&a.wp(&large)));
    }

    /// The guard is the complement of wp(A, false).
    #[test]
    fn guard_complements_wp_of_false((n, dens) in sized_dens(1)) {
        let a = &dens[0];
        prop_assert_eq!(a.guard(), a.wp(&StateSet::empty(n)).complement());
    }

    /// Every action is its guard applied to its always-enabled body.
    #[test]
    fn guard_and_body_reconstruct_the_action((_, dens) in sized_dens(1)) {
        let a = &dens[0];
        let rebuilt = Denotation::guarded(&a.guard(), &a.body());
        prop_assert!(equal(&rebuilt, a));
    }

    /// Refinement is reflexive and transitive on random triples.
    #[test]
    fn refinement_is_a_preorder((_, dens) in sized_dens(3)) {
        let (a, b, c) = (&dens[0], &dens[1], &dens[2]);
        prop_assert!(refines(a, a));
        if refines(a, b) && refines(b, c) {
            prop_assert!(refines(a, c));
        }
    }

    /// Pointwise equality and refinement agree with the oracle that ranges
    /// over every postcondition.
    #[test]
    fn oracle_agrees_with_pointwise_verdicts((_, dens) in sized_dens(2)) {
        let (a, b) = (&dens[0], &dens[1]);
        for (rel, direct) in [
            (Relation::Equal, equal(a, b)),
            (Relation::Refines, refines(a, b)),
        ] {
            let verdict = wp_oracle_compare(a, b, rel, 16).unwrap();
            prop_assert_eq!(direct, matches!(verdict, OracleVerdict::Confirmed));
        }
    }

    /// Operational evaluation at a single state matches the denotation.
    #[test]
    fn eval_at_matches_denote(expr in gen::arb_action(), s in 0u64..6) {
        let space = gen::space();
        let den = denote(&expr, &space).unwrap();
        prop_assert_eq!(&eval_at(&expr, &space, s), den.outcome(s));
    }

    /// Printing an expression and parsing it back is the identity.
    #[test]
    fn printed_actions_reparse_to_the_same_ast(expr in gen::arb_action()) {
        let space = gen::space();
        let printed = print_action(&expr);
        let reparsed = parse_action(&printed, &space)
            .map_err(|e| TestCaseError::fail(format!("{e} in `{printed}`")))?;
        prop_assert_eq!(expr, reparsed, "printed form: {}", printed);
    }

    /// The system parser returns errors, never panics, on arbitrary input.
    #[test]
    fn parser_survives_arbitrary_strings(text in "\\PC*") {
        let _ = parse_system(&text);
    }

    /// ... including arbitrary bytes pushed through lossy UTF-8 decoding.
    #[test]
    fn parser_survives_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..120)) {
        let _ = parse_system(&String::from_utf8_lossy(&bytes));
    }
}

/// Expression generation over a fixed two-variable space. Variable names and
/// domain values are disjoint, so a printed name re-resolves the same way.
mod gen {
    use super::*;

    pub fn space() -> StateSpace {
        StateSpace::of(vec![("x", vec!["v0", "v1"]), ("y", vec!["w0", "w1", "w2"])]).unwrap()
    }

    const DOMS: [&[&str]; 2] = [&["v0", "v1"], &["w0", "w1", "w2"]];

    fn var_name(v: usize) -> String {
        ["x", "y"][v].to_string()
    }

    fn arb_operand(v: usize) -> impl Strategy<Value = Operand> {
        let lits: Vec<Operand> =
            DOMS[v].iter().map(|val| Operand::Lit(val.to_string())).collect();
        prop_oneof![
            4 => proptest::sample::select(lits),
            // Same-variable copy: comparing or assigning across domains is
            // rejected by validation, so stay within one variable.
            1 => Just(Operand::Var(var_name(v))),
        ]
    }

    pub fn arb_pred() -> impl Strategy<Value = PredExpr> {
        let leaf = prop_oneof![
            any::<bool>().prop_map(PredExpr::Lit),
            (0..2usize, any::<bool>()).prop_flat_map(|(v, negated)| {
                arb_operand(v).prop_map(move |rhs| PredExpr::Cmp {
                    var: var_name(v),
                    negated,
                    rhs,
                })
            }),
            (0..2usize).prop_flat_map(|v| {
                proptest::sample::subsequence(
                    DOMS[v].iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                    1..=DOMS[v].len(),
                )
                .prop_map(move |values| PredExpr::In { var: var_name(v), values })
            }),
        ];
        leaf.prop_recursive(3, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|p| PredExpr::Not(Box::new(p))),
                (inner.clone(), inner.clone()).prop_map(|(p, q)| PredExpr::and(p, q)),
                (inner.clone(), inner.clone()).prop_map(|(p, q)| PredExpr::or(p, q)),
                (inner.clone(), inner)
                    .prop_map(|(p, q)| PredExpr::Implies(Box::new(p), Box::new(q))),
            ]
        })
    }

    fn arb_assign() -> impl Strategy<Value = ActionExpr> {
        prop_oneof![
            (0..2usize).prop_flat_map(|v| {
                arb_operand(v).prop_map(move |rhs| ActionExpr::Assign(vec![(var_name(v), rhs)]))
            }),
            (arb_operand(0), arb_operand(1)).prop_map(|(rx, ry)| {
                ActionExpr::Assign(vec![(var_name(0), rx), (var_name(1), ry)])
            }),
        ]
    }

    pub fn arb_action() -> impl Strategy<Value = ActionExpr> {
        let leaf = prop_oneof![
            Just(ActionExpr::Abort),
            Just(ActionExpr::Skip),
            arb_assign(),
            arb_pred().prop_map(ActionExpr::Assume),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (arb_pred(), inner.clone())
                    .prop_map(|(p, a)| ActionExpr::Guarded(p, Box::new(a))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ActionExpr::Choice(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ActionExpr::Seq(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ActionExpr::GuardedSeq(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ActionExpr::Priority(Box::new(a), Box::new(b))),
                (inner.clone(), inner)
                    .prop_map(|(a, b)| ActionExpr::Dep(Box::new(a), Box::new(b))),
            ]
        })
    }
}
