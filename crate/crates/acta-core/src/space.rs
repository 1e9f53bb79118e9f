//! Finite state spaces: ordered variable declarations with enumerated domains.
//!
//! A state is a total valuation of the declared variables. Since every domain
//! is finite, states are identified with their rank in the lexicographic order
//! induced by the declaration order (first variable most significant, values
//! in declared order). All set-valued semantics below index states by rank.

use std::fmt;

/// Rank of a state in the lexicographic enumeration of a [`StateSpace`].
pub type StateId = u64;

/// Hard limit on the number of states a space may have. Keeps ranks inside
/// `u64` arithmetic and bitset predicates affordable.
pub const MAX_STATES: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    /// Declared values, in order. Values are uninterpreted symbols.
    pub domain: Vec<String>,
    pub exported: bool,
    pub imported: bool,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("variable `{var}` repeats domain value `{value}`")]
    DuplicateValue { var: String, value: String },
    #[error("state space exceeds {MAX_STATES} states")]
    TooLarge,
    #[error("a state space needs at least one variable")]
    NoVariables,
}

/// An ordered collection of finite-domain variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    vars: Vec<VarDecl>,
    /// `strides[i]` = product of the domain sizes of all variables after `i`.
    strides: Vec<u64>,
    count: u64,
}

impl StateSpace {
    pub fn new(vars: Vec<VarDecl>) -> Result<Self, SpaceError> {
        if vars.is_empty() {
            return Err(SpaceError::NoVariables);
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(SpaceError::DuplicateVariable(v.name.clone()));
            }
            if v.domain.is_empty() {
                return Err(SpaceError::EmptyDomain(v.name.clone()));
            }
            for (j, val) in v.domain.iter().enumerate() {
                if v.domain[..j].contains(val) {
                    return Err(SpaceError::DuplicateValue {
                        var: v.name.clone(),
                        value: val.clone(),
                    });
                }
            }
        }
        let mut strides = vec![1u64; vars.len()];
        let mut count: u64 = 1;
        for i in (0..vars.len()).rev() {
            strides[i] = count;
            count = count
                .checked_mul(vars[i].domain.len() as u64)
                .filter(|&c| c <= MAX_STATES)
                .ok_or(SpaceError::TooLarge)?;
        }
        Ok(StateSpace { vars, strides, count })
    }

    /// Convenience constructor for plain (non-imported, non-exported) variables.
    pub fn of<N: Into<String>, V: Into<String>>(
        vars: Vec<(N, Vec<V>)>,
    ) -> Result<Self, SpaceError> {
        Self::new(
            vars.into_iter()
                .map(|(name, domain)| VarDecl {
                    name: name.into(),
                    domain: domain.into_iter().map(Into::into).collect(),
                    exported: false,
                    imported: false,
                })
                .collect(),
        )
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn value_index(&self, var: usize, value: &str) -> Option<usize> {
        self.vars[var].domain.iter().position(|v| v == value)
    }

    pub fn state_count(&self) -> u64 {
        self.count
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.count
    }

    /// Value index of variable `var` in state `s`.
    pub fn value_of(&self, s: StateId, var: usize) -> usize {
        debug_assert!(s < self.count);
        ((s / self.strides[var]) % self.vars[var].domain.len() as u64) as usize
    }

    /// The state equal to `s` except variable `var` is set to value `val`.
    pub fn with_value(&self, s: StateId, var: usize, val: usize) -> StateId {
        let old = self.value_of(s, var) as u64;
        s - old * self.strides[var] + val as u64 * self.strides[var]
    }

    /// Encode a full valuation (one value index per variable, in order).
    pub fn encode(&self, vals: &[usize]) -> StateId {
        debug_assert_eq!(vals.len(), self.vars.len());
        vals.iter()
            .zip(&self.strides)
            .map(|(&v, &st)| v as u64 * st)
            .sum()
    }

    /// Decode a state into one value index per variable, in order.
    pub fn decode(&self, s: StateId) -> Vec<usize> {
        (0..self.vars.len()).map(|i| self.value_of(s, i)).collect()
    }

    /// Human-readable valuation, e.g. `light=green, loc=B`.
    pub fn format_state(&self, s: StateId) -> String {
        DisplayState { space: self, state: s }.to_string()
    }

    pub fn display_state(&self, state: StateId) -> DisplayState<'_> {
        DisplayState { space: self, state }
    }
}

pub struct DisplayState<'a> {
    space: &'a StateSpace,
    state: StateId,
}

impl fmt::Display for DisplayState<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.space.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", v.name, v.domain[self.space.value_of(self.state, i)])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crossing() -> StateSpace {
        StateSpace::of(vec![
            ("light", vec!["green", "red"]),
            ("loc", vec!["A", "B", "C", "D"]),
        ])
        .unwrap()
    }

    #[test]
    fn counts_and_ranks_are_lexicographic() {
        let sp = crossing();
        assert_eq!(sp.state_count(), 8);
        // First declared variable is most significant.
        let green_a = sp.encode(&[0, 0]);
        let green_b = sp.encode(&[0, 1]);
        let red_a = sp.encode(&[1, 0]);
        assert_eq!(green_a, 0);
        assert_eq!(green_b, 1);
        assert_eq!(red_a, 4);
        assert!(green_b < red_a);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let sp = crossing();
        for s in sp.states() {
            assert_eq!(sp.encode(&sp.decode(s)), s);
        }
    }

    #[test]
    fn with_value_updates_one_variable() {
        let sp = crossing();
        let s = sp.encode(&[1, 1]); // red, B
        let t = sp.with_value(s, 0, 0); // light := green
        assert_eq!(sp.decode(t), vec![0, 1]);
        let u = sp.with_value(s, 1, 3); // loc := D
        assert_eq!(sp.decode(u), vec![1, 3]);
        assert_eq!(sp.with_value(s, 1, 1), s);
    }

    #[test]
    fn format_state_names_values() {
        let sp = crossing();
        assert_eq!(sp.format_state(sp.encode(&[1, 1])), "light=red, loc=B");
    }

    #[test]
    fn rejects_bad_declarations() {
        assert_eq!(
            StateSpace::of(vec![("x", vec!["0"]), ("x", vec!["1"])]),
            Err(SpaceError::DuplicateVariable("x".into()))
        );
        assert_eq!(
            StateSpace::of(vec![("x", Vec::<&str>::new())]),
            Err(SpaceError::EmptyDomain("x".into()))
        );
        assert_eq!(
            StateSpace::of(vec![("x", vec!["a", "a"])]),
            Err(SpaceError::DuplicateValue { var: "x".into(), value: "a".into() })
        );
        assert!(StateSpace::new(vec![]).is_err());
    }
}
