//! Enumeration and sampling of denotations.
//!
//! Over a space with `n` states each state has `2^n + 1` possible outcomes
//! (abort, miracle, or one of the `2^n - 1` nonempty successor sets), so
//! there are `(2^n + 1)^n` denotations in total: 3 for `n = 1`, 25 for
//! `n = 2`, 729 for `n = 3`. Exhaustive generation walks exactly that space;
//! random generation is reproducible from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::semantics::{Denotation, Outcome};
use crate::space::StateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    Exhaustive,
    Random { seed: u64, count: u64 },
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("exhaustive generation supports at most 3 states, space has {0}")]
    ExhaustiveTooLarge(u64),
    #[error("cannot generate actions over an empty space")]
    EmptySpace,
}

/// Number of distinct outcomes per state over `n` states.
pub fn outcomes_per_state(n: u64) -> u64 {
    (1u64 << n) + 1
}

/// Number of distinct denotations over `n` states.
pub fn denotation_count(n: u64) -> u64 {
    outcomes_per_state(n).pow(n as u32)
}

/// Outcome with the given code in `0..outcomes_per_state(n)`:
/// 0 is abort, 1 is miracle, `c >= 2` is the successor set with bitmask `c-1`.
pub fn outcome_from_code(code: u64, n: u64) -> Outcome {
    match code {
        0 => Outcome::Abort,
        1 => Outcome::Miracle,
        c => {
            let mask = c - 1;
            debug_assert!(mask >= 1 && mask < (1 << n));
            Outcome::Enabled((0..n as StateId).filter(|&s| mask >> s & 1 == 1).collect())
        }
    }
}

/// The denotation with the given index in the mixed-radix enumeration
/// (state 0's outcome varies fastest).
pub fn denotation_from_index(mut index: u64, n: u64) -> Denotation {
    let k = outcomes_per_state(n);
    let codes: Vec<u64> = (0..n)
        .map(|_| {
            let c = index % k;
            index /= k;
            c
        })
        .collect();
    Denotation::from_fn(n, |s| outcome_from_code(codes[s as usize], n))
}

/// Stream of denotations over an `n`-state space.
pub fn generate_actions(
    n: u64,
    mode: GenMode,
) -> Result<Box<dyn Iterator<Item = Denotation>>, GenError> {
    if n == 0 {
        return Err(GenError::EmptySpace);
    }
    match mode {
        GenMode::Exhaustive => {
            if n > 3 {
                return Err(GenError::ExhaustiveTooLarge(n));
            }
            Ok(Box::new((0..denotation_count(n)).map(move |i| denotation_from_index(i, n))))
        }
        GenMode::Random { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(Box::new((0..count).map(move |_| random_denotation(&mut rng, n))))
        }
    }
}

/// One random denotation: outcome kinds are drawn abort : miracle : enabled
/// at 1 : 1 : 3 so edge outcomes stay frequent on larger spaces, then a
/// nonempty successor set is drawn uniformly.
pub fn random_denotation(rng: &mut impl Rng, n: u64) -> Denotation {
    let outcomes: Vec<Outcome> = (0..n)
        .map(|_| match rng.gen_range(0..5u8) {
            0 => Outcome::Abort,
            1 => Outcome::Miracle,
            _ => {
                let mask = rng.gen_range(1..1u64 << n);
                Outcome::Enabled((0..n as StateId).filter(|&s| mask >> s & 1 == 1).collect())
            }
        })
        .collect();
    Denotation::from_fn(n, |s| outcomes[s as usize].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn exhaustive_counts() {
        assert_eq!(generate_actions(1, GenMode::Exhaustive).unwrap().count(), 3);
        assert_eq!(generate_actions(2, GenMode::Exhaustive).unwrap().count(), 25);
        assert_eq!(generate_actions(3, GenMode::Exhaustive).unwrap().count(), 729);
        assert!(matches!(
            generate_actions(4, GenMode::Exhaustive),
            Err(GenError::ExhaustiveTooLarge(4))
        ));
    }

    #[test]
    fn exhaustive_yields_each_exactly_once() {
        let mut seen = HashSet::new();
        for d in generate_actions(2, GenMode::Exhaustive).unwrap() {
            let key = format!("{:?}", d);
            assert!(seen.insert(key), "duplicate denotation");
        }
        assert_eq!(seen.len(), 25);
    }

    #[test]
    fn one_state_space_has_abort_miracle_skip() {
        let all: Vec<Denotation> = generate_actions(1, GenMode::Exhaustive).unwrap().collect();
        assert!(all.contains(&Denotation::abort(1)));
        assert!(all.contains(&Denotation::magic(1)));
        assert!(all.contains(&Denotation::skip(1)));
    }

    #[test]
    fn random_streams_reproduce() {
        let a: Vec<Denotation> =
            generate_actions(3, GenMode::Random { seed: 7, count: 100 }).unwrap().collect();
        let b: Vec<Denotation> =
            generate_actions(3, GenMode::Random { seed: 7, count: 100 }).unwrap().collect();
        assert_eq!(a, b);
        let c: Vec<Denotation> =
            generate_actions(3, GenMode::Random { seed: 8, count: 100 }).unwrap().collect();
        assert_ne!(a, c);
    }
}
