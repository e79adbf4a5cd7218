use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::label::LabelSet;
use crate::lasso::Lasso;

/// Largest AP list a [`Dra`] accepts; the alphabet is every subset of it.
pub const MAX_DRA_PROPOSITIONS: usize = 16;

/// One Rabin condition: visit `avoid` finitely often and `recur` infinitely
/// often.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RabinPair {
    pub avoid: BTreeSet<usize>,
    pub recur: BTreeSet<usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DraError {
    #[error("automaton has no states")]
    NoStates,
    #[error("initial state {0} out of range")]
    BadInitial(usize),
    #[error("transition table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("transition from state {from} targets unknown state {to}")]
    BadTarget { from: usize, to: usize },
    #[error("accepting pair {pair} references unknown state {state}")]
    BadPairState { pair: usize, state: usize },
    #[error("automaton needs at least one accepting pair")]
    NoPairs,
    #[error("{0} atomic propositions exceed the supported maximum of 16")]
    TooManyPropositions(usize),
}

/// Deterministic Rabin automaton over the alphabet `2^AP`.
///
/// Letters are [`LabelSet`] masks over this automaton's own `ap` ordering.
/// The transition function is stored densely: `delta[q * 2^|AP| + letter]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dra {
    ap: Vec<String>,
    num_states: usize,
    initial: usize,
    delta: Vec<usize>,
    pairs: Vec<RabinPair>,
}

impl Dra {
    pub fn new(
        ap: Vec<String>,
        num_states: usize,
        initial: usize,
        delta: Vec<usize>,
        pairs: Vec<RabinPair>,
    ) -> Result<Dra, DraError> {
        if ap.len() > MAX_DRA_PROPOSITIONS {
            return Err(DraError::TooManyPropositions(ap.len()));
        }
        if num_states == 0 {
            return Err(DraError::NoStates);
        }
        if initial >= num_states {
            return Err(DraError::BadInitial(initial));
        }
        let letters = 1usize << ap.len();
        if delta.len() != num_states * letters {
            return Err(DraError::TableSize { expected: num_states * letters, found: delta.len() });
        }
        if let Some((i, &to)) = delta.iter().enumerate().find(|(_, &to)| to >= num_states) {
            return Err(DraError::BadTarget { from: i / letters, to });
        }
        if pairs.is_empty() {
            return Err(DraError::NoPairs);
        }
        for (p, pair) in pairs.iter().enumerate() {
            if let Some(&state) = pair.avoid.iter().chain(&pair.recur).find(|&&s| s >= num_states) {
                return Err(DraError::BadPairState { pair: p, state });
            }
        }
        Ok(Dra { ap, num_states, initial, delta, pairs })
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_letters(&self) -> usize {
        1 << self.ap.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    /// Successor of `state` on `letter` (a mask over [`Dra::ap`]).
    pub fn step(&self, state: usize, letter: LabelSet) -> usize {
        debug_assert!((letter.0 as usize) < self.num_letters());
        self.delta[state * self.num_letters() + letter.0 as usize]
    }

    pub fn num_edges(&self) -> usize {
        self.delta.len()
    }

    /// Decides acceptance of the unique run on `prefix · cycle^ω`.
    ///
    /// The state reached at the start of each cycle iteration eventually
    /// repeats; the states visited between two occurrences of the same entry
    /// state are exactly the states visited infinitely often.
    ///
    /// Panics if the cycle is empty.
    pub fn accepts(&self, word: &Lasso<LabelSet>) -> bool {
        assert!(!word.cycle.is_empty(), "lasso cycle must be non-empty");
        let mut q = self.initial;
        for &letter in &word.prefix {
            q = self.step(q, letter);
        }
        let mut entry_index: HashMap<usize, usize> = HashMap::new();
        let mut visited_per_iteration: Vec<BTreeSet<usize>> = Vec::new();
        loop {
            if let Some(&first) = entry_index.get(&q) {
                let recurring: BTreeSet<usize> =
                    visited_per_iteration[first..].iter().flatten().copied().collect();
                return self.pairs.iter().any(|pair| {
                    recurring.is_disjoint(&pair.avoid) && !recurring.is_disjoint(&pair.recur)
                });
            }
            entry_index.insert(q, visited_per_iteration.len());
            let mut visited = BTreeSet::new();
            for &letter in &word.cycle {
                visited.insert(q);
                q = self.step(q, letter);
            }
            visited_per_iteration.push(visited);
        }
    }

    /// Maps a label over another AP list into a letter of this automaton.
    /// Propositions unknown to the automaton are ignored.
    pub fn letter_from(&self, label: LabelSet, ap: &[String]) -> LabelSet {
        label.project(ap, &self.ap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recurrence_b() -> Dra {
        // state 1 entered on reading `b`
        Dra::new(
            vec!["b".into()],
            2,
            0,
            vec![0, 1, 0, 1],
            vec![RabinPair { avoid: BTreeSet::new(), recur: [1].into() }],
        )
        .unwrap()
    }

    #[test]
    fn validates_invariants() {
        assert_eq!(
            Dra::new(vec!["b".into()], 2, 0, vec![0, 1, 0], vec![RabinPair::default()]),
            Err(DraError::TableSize { expected: 4, found: 3 })
        );
        assert_eq!(
            Dra::new(vec!["b".into()], 2, 0, vec![0, 1, 0, 1], vec![]),
            Err(DraError::NoPairs)
        );
        assert_eq!(
            Dra::new(vec!["b".into()], 2, 0, vec![0, 2, 0, 1], vec![RabinPair::default()]),
            Err(DraError::BadTarget { from: 0, to: 2 })
        );
        assert_eq!(
            Dra::new(
                vec![],
                1,
                0,
                vec![0],
                vec![RabinPair { avoid: [3].into(), recur: BTreeSet::new() }]
            ),
            Err(DraError::BadPairState { pair: 0, state: 3 })
        );
    }

    #[test]
    fn acceptance_on_lassos() {
        let dra = recurrence_b();
        assert!(dra.accepts(&Lasso::new(vec![], vec![LabelSet(1)])));
        assert!(!dra.accepts(&Lasso::new(vec![], vec![LabelSet(0)])));
        assert!(dra.accepts(&Lasso::new(vec![LabelSet(0)], vec![LabelSet(0), LabelSet(1)])));
    }

    #[test]
    fn entry_state_may_change_between_iterations() {
        // Counter modulo 3 that only reaches the accepting state every third
        // iteration of a one-letter cycle.
        let dra = Dra::new(
            vec![],
            3,
            0,
            vec![1, 2, 0],
            vec![RabinPair { avoid: BTreeSet::new(), recur: [2].into() }],
        )
        .unwrap();
        assert!(dra.accepts(&Lasso::new(vec![], vec![LabelSet(0)])));
        let avoid_two = Dra::new(
            vec![],
            3,
            0,
            vec![1, 2, 0],
            vec![RabinPair { avoid: [2].into(), recur: [0].into() }],
        )
        .unwrap();
        assert!(!avoid_two.accepts(&Lasso::new(vec![], vec![LabelSet(0)])));
    }
}
