//! Predicates over a finite state space.
//!
//! The canonical form of a predicate is a set of state ranks, stored as a
//! bitset. The surface syntax (comparisons combined with `&`, `|`, `!`, `=>`)
//! denotes eagerly into that form.

use std::fmt;

use crate::space::{StateId, StateSpace};

/// A set of states of some fixed space, indexed by rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    bits: Vec<u64>,
    len: u64,
}

impl StateSet {
    pub fn empty(len: u64) -> Self {
        StateSet { bits: vec![0; Self::blocks(len)], len }
    }

    pub fn full(len: u64) -> Self {
        let mut s = Self::empty(len);
        for b in &mut s.bits {
            *b = !0;
        }
        s.trim();
        s
    }

    pub fn singleton(len: u64, s: StateId) -> Self {
        let mut set = Self::empty(len);
        set.insert(s);
        set
    }

    pub fn from_fn(len: u64, mut f: impl FnMut(StateId) -> bool) -> Self {
        let mut set = Self::empty(len);
        for s in 0..len {
            if f(s) {
                set.insert(s);
            }
        }
        set
    }

    fn blocks(len: u64) -> usize {
        ((len + 63) / 64) as usize
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe_len(&self) -> u64 {
        self.len
    }

    pub fn contains(&self, s: StateId) -> bool {
        debug_assert!(s < self.len);
        self.bits[(s / 64) as usize] >> (s % 64) & 1 == 1
    }

    pub fn insert(&mut self, s: StateId) {
        debug_assert!(s < self.len);
        self.bits[(s / 64) as usize] |= 1 << (s % 64);
    }

    pub fn remove(&mut self, s: StateId) {
        debug_assert!(s < self.len);
        self.bits[(s / 64) as usize] &= !(1 << (s % 64));
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|b| b.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let mut s = self.clone();
        for b in &mut s.bits {
            *b = !*b;
        }
        s.trim();
        s
    }

    /// p => q as a set: complement of self union other.
    pub fn implies(&self, other: &Self) -> Self {
        self.zip(other, |a, b| !a | b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.len).filter(move |&s| self.contains(s))
    }

    pub fn first(&self) -> Option<StateId> {
        self.iter().next()
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = StateSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            len: self.len,
        };
        out.trim();
        out
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s)?;
        }
        write!(f, "}}/{}", self.len)
    }
}

/// Value position in a comparison or assignment: a literal domain value or
/// the current value of another variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Lit(String),
    Var(String),
}

/// Surface predicate expressions. Variables and values are kept as names and
/// resolved against a space when denoting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredExpr {
    Lit(bool),
    /// `var = operand` or `var != operand`.
    Cmp { var: String, negated: bool, rhs: Operand },
    /// `var in {v1, v2, ...}`.
    In { var: String, values: Vec<String> },
    Not(Box<PredExpr>),
    And(Box<PredExpr>, Box<PredExpr>),
    Or(Box<PredExpr>, Box<PredExpr>),
    Implies(Box<PredExpr>, Box<PredExpr>),
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("value `{value}` is not in the domain of `{var}`")]
    OutOfDomain { var: String, value: String },
}

impl PredExpr {
    pub fn and(a: PredExpr, b: PredExpr) -> PredExpr {
        PredExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PredExpr, b: PredExpr) -> PredExpr {
        PredExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn eq(var: impl Into<String>, value: impl Into<String>) -> PredExpr {
        PredExpr::Cmp { var: var.into(), negated: false, rhs: Operand::Lit(value.into()) }
    }

    /// Check well-formedness against a space without evaluating.
    pub fn validate(&self, space: &StateSpace) -> Result<(), EvalError> {
        match self {
            PredExpr::Lit(_) => Ok(()),
            PredExpr::Cmp { var, rhs, .. } => {
                let vi = space
                    .var_index(var)
                    .ok_or_else(|| EvalError::UndeclaredVariable(var.clone()))?;
                match rhs {
                    Operand::Var(w) => space
                        .var_index(w)
                        .map(|_| ())
                        .ok_or_else(|| EvalError::UndeclaredVariable(w.clone())),
                    Operand::Lit(v) => space
                        .value_index(vi, v)
                        .map(|_| ())
                        .ok_or_else(|| EvalError::OutOfDomain { var: var.clone(), value: v.clone() }),
                }
            }
            PredExpr::In { var, values } => {
                let vi = space
                    .var_index(var)
                    .ok_or_else(|| EvalError::UndeclaredVariable(var.clone()))?;
                for v in values {
                    space
                        .value_index(vi, v)
                        .ok_or_else(|| EvalError::OutOfDomain { var: var.clone(), value: v.clone() })?;
                }
                Ok(())
            }
            PredExpr::Not(p) => p.validate(space),
            PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
                a.validate(space)?;
                b.validate(space)
            }
        }
    }

    /// Truth value at one state. The expression must be valid for the space.
    pub fn eval(&self, space: &StateSpace, s: StateId) -> bool {
        match self {
            PredExpr::Lit(b) => *b,
            PredExpr::Cmp { var, negated, rhs } => {
                let vi = space.var_index(var).expect("validated");
                let actual = &space.vars()[vi].domain[space.value_of(s, vi)];
                let expected = match rhs {
                    Operand::Lit(v) => v.clone(),
                    Operand::Var(w) => {
                        let wi = space.var_index(w).expect("validated");
                        space.vars()[wi].domain[space.value_of(s, wi)].clone()
                    }
                };
                (actual == &expected) != *negated
            }
            PredExpr::In { var, values } => {
                let vi = space.var_index(var).expect("validated");
                let actual = &space.vars()[vi].domain[space.value_of(s, vi)];
                values.contains(actual)
            }
            PredExpr::Not(p) => !p.eval(space, s),
            PredExpr::And(a, b) => a.eval(space, s) && b.eval(space, s),
            PredExpr::Or(a, b) => a.eval(space, s) || b.eval(space, s),
            PredExpr::Implies(a, b) => !a.eval(space, s) || b.eval(space, s),
        }
    }

    /// Denote into the canonical state-set form.
    pub fn denote(&self, space: &StateSpace) -> Result<StateSet, EvalError> {
        self.validate(space)?;
        Ok(StateSet::from_fn(space.state_count(), |s| self.eval(space, s)))
    }
}

/// Render a state set as a minimized disjunction of variable constraints.
///
/// Greedy cube cover: each uncovered state seeds a cube (one value per
/// variable) that is widened value-by-value while it stays inside the set;
/// cubes are emitted in seed order. The result is deterministic and usually
/// close to minimal for the guard-like predicates this tool prints.
pub fn pretty_predicate(set: &StateSet, space: &StateSpace) -> String {
    const CUBE_LIMIT: usize = 64;

    if set.is_empty() {
        return "false".to_string();
    }
    if set.is_full() {
        return "true".to_string();
    }

    let nvars = space.var_count();
    let mut covered = StateSet::empty(set.universe_len());
    let mut cubes: Vec<Vec<Vec<usize>>> = Vec::new();

    for seed in set.iter() {
        if covered.contains(seed) {
            continue;
        }
        if cubes.len() == CUBE_LIMIT {
            let rest = set.minus(&covered).count();
            let mut out = render_cubes(&cubes, space);
            out.push_str(&format!(" | <{} more states>", rest));
            return out;
        }
        // Start from the fully specific cube for `seed` and widen greedily.
        let mut cube: Vec<Vec<usize>> =
            (0..nvars).map(|i| vec![space.value_of(seed, i)]).collect();
        for vi in 0..nvars {
            for val in 0..space.vars()[vi].domain.len() {
                if cube[vi].contains(&val) {
                    continue;
                }
                cube[vi].push(val);
                if !cube_inside(&cube, space, set) {
                    cube[vi].pop();
                }
            }
            cube[vi].sort_unstable();
        }
        mark_cube(&cube, space, &mut covered);
        cubes.push(cube);
    }

    render_cubes(&cubes, space)
}

/// Does every state of the cube lie inside `set`?
fn cube_inside(cube: &[Vec<usize>], space: &StateSpace, set: &StateSet) -> bool {
    let mut ok = true;
    for_each_cube_state(cube, space, &mut |s| {
        if !set.contains(s) {
            ok = false;
        }
        ok
    });
    ok
}

fn mark_cube(cube: &[Vec<usize>], space: &StateSpace, covered: &mut StateSet) {
    for_each_cube_state(cube, space, &mut |s| {
        covered.insert(s);
        true
    });
}

fn for_each_cube_state(
    cube: &[Vec<usize>],
    space: &StateSpace,
    f: &mut impl FnMut(StateId) -> bool,
) {
    let mut idx = vec![0usize; cube.len()];
    loop {
        let vals: Vec<usize> = idx.iter().zip(cube).map(|(&i, c)| c[i]).collect();
        if !f(space.encode(&vals)) {
            return;
        }
        let mut k = cube.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cube[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn render_cubes(cubes: &[Vec<Vec<usize>>], space: &StateSpace) -> String {
    let terms: Vec<String> = cubes
        .iter()
        .map(|cube| {
            let lits: Vec<String> = cube
                .iter()
                .enumerate()
                .filter(|(vi, vals)| vals.len() < space.vars()[*vi].domain.len())
                .map(|(vi, vals)| {
                    let var = &space.vars()[vi];
                    if vals.len() == 1 {
                        format!("{}={}", var.name, var.domain[vals[0]])
                    } else if vals.len() == var.domain.len() - 1 {
                        let missing = (0..var.domain.len())
                            .find(|v| !vals.contains(v))
                            .expect("one value missing");
                        format!("{}!={}", var.name, var.domain[missing])
                    } else {
                        let names: Vec<&str> =
                            vals.iter().map(|&v| var.domain[v].as_str()).collect();
                        format!("{} in {{{}}}", var.name, names.join(", "))
                    }
                })
                .collect();
            if lits.is_empty() {
                "true".to_string()
            } else {
                lits.join(" & ")
            }
        })
        .collect();
    terms.join(" | ")
}
