//! The two-pebble Ehrenfeucht–Fraïssé game on a pair of words, with a round
//! budget, a budget on how often Spoiler switches words, and optional
//! per-round constraints on where pebbles may be placed.
//!
//! Each round Spoiler puts a pebble on a position of one word and Duplicator
//! answers on the other word. Only the pairs from the last two rounds stay on
//! the board. Spoiler wins as soon as the pebbled positions stop inducing a
//! partial isomorphism, or when Duplicator has no legal answer.

pub mod constrained;
pub mod rules;
pub mod session;
pub mod solver;
pub mod strategy;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::Word;
use crate::predicates::Signature;

pub use constrained::{constrained_spec, Variant};
pub use rules::{is_partial_iso, Outcome};
pub use session::{Session, SessionError};
pub use solver::{solve, Solution, SolverConfig};
pub use strategy::{verify_strategy, Strategy, StrategyViolation, Turn};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("the game needs at least one round")]
    NoRounds,
    #[error("solver work estimate {work} exceeds the budget {budget}")]
    BudgetExceeded { work: u128, budget: u128 },
    #[error("predicate `{0}` of arity {1} cannot be used in a game; only arities 1 and 2 are supported")]
    UnsupportedArity(String, usize),
    #[error("strategy has {0} states, more than the materialisation limit")]
    StrategyTooLarge(usize),
    #[error("the same state demands two different moves; the translated strategy is not positional")]
    NotPositional,
    #[error(transparent)]
    Locality(#[from] crate::locality::LocalityError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(alias = "u")]
    U,
    #[serde(alias = "v")]
    V,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::U => 0,
            Side::V => 1,
        }
    }

    pub const BOTH: [Side; 2] = [Side::U, Side::V];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::U => "u",
            Side::V => "v",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(alias = "spoiler")]
    Spoiler,
    #[serde(alias = "duplicator")]
    Duplicator,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Spoiler => "Spoiler",
            Player::Duplicator => "Duplicator",
        })
    }
}

/// How many times Spoiler may switch words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alternations {
    Bounded(usize),
    Unbounded,
}

impl Alternations {
    pub fn allows(self, used: usize) -> bool {
        match self {
            Alternations::Bounded(m) => used <= m,
            Alternations::Unbounded => true,
        }
    }
}

/// A finite set of positions stored as sorted, disjoint, non-adjacent
/// inclusive intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PositionSet {
    intervals: Vec<(usize, usize)>,
}

impl PositionSet {
    pub fn empty() -> Self {
        PositionSet::default()
    }

    /// `{lo, …, hi}`; empty when `lo > hi`.
    pub fn interval(lo: usize, hi: usize) -> Self {
        if lo > hi {
            PositionSet::empty()
        } else {
            PositionSet {
                intervals: vec![(lo, hi)],
            }
        }
    }

    /// `{0, …, n - 1}`.
    pub fn prefix(n: usize) -> Self {
        if n == 0 {
            PositionSet::empty()
        } else {
            PositionSet::interval(0, n - 1)
        }
    }

    pub fn from_intervals(items: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut items: Vec<(usize, usize)> = items.into_iter().filter(|(lo, hi)| lo <= hi).collect();
        items.sort_unstable();
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(items.len());
        for (lo, hi) in items {
            match out.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        PositionSet { intervals: out }
    }

    pub fn from_positions(items: impl IntoIterator<Item = usize>) -> Self {
        PositionSet::from_intervals(items.into_iter().map(|p| (p, p)))
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.iter().map(|(lo, hi)| hi - lo + 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn min(&self) -> Option<usize> {
        self.intervals.first().map(|i| i.0)
    }

    pub fn max(&self) -> Option<usize> {
        self.intervals.last().map(|i| i.1)
    }

    pub fn contains(&self, p: usize) -> bool {
        let k = self.intervals.partition_point(|&(_, hi)| hi < p);
        self.intervals.get(k).is_some_and(|&(lo, _)| lo <= p)
    }

    /// Intersection with `{0, …, n - 1}`.
    pub fn truncate(&self, n: usize) -> Self {
        PositionSet {
            intervals: self
                .intervals
                .iter()
                .filter(|&&(lo, _)| lo < n)
                .map(|&(lo, hi)| (lo, hi.min(n - 1)))
                .collect(),
        }
    }

    pub fn union(&self, other: &PositionSet) -> Self {
        PositionSet::from_intervals(self.intervals.iter().chain(&other.intervals).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    /// Index of `p` in increasing order, if present.
    pub fn rank(&self, p: usize) -> Option<usize> {
        let mut before = 0;
        for &(lo, hi) in &self.intervals {
            if p < lo {
                return None;
            }
            if p <= hi {
                return Some(before + p - lo);
            }
            before += hi - lo + 1;
        }
        None
    }

    /// Number of members strictly below `p`.
    pub fn count_below(&self, p: usize) -> usize {
        let mut before = 0;
        for &(lo, hi) in &self.intervals {
            if p <= lo {
                break;
            }
            before += hi.min(p - 1) - lo + 1;
        }
        before
    }
}

impl fmt::Display for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo.to_string() } else { format!("{lo}..{hi}") })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Where pebbles may go. Round numbers start at 1; a round without an entry
/// is unconstrained. `start`, when present, replaces the round-1 entry.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    pub start: Option<[PositionSet; 2]>,
    pub rounds: BTreeMap<usize, [PositionSet; 2]>,
}

impl Constraints {
    pub fn is_empty(&self) -> bool {
        self.start.is_none() && self.rounds.is_empty()
    }
}

/// A game instance.
#[derive(Clone, Debug)]
pub struct GameSpec {
    pub u: Word,
    pub v: Word,
    pub rounds: usize,
    pub alternations: Alternations,
    pub sig: Signature,
    pub constraints: Constraints,
}

impl GameSpec {
    pub fn new(u: Word, v: Word, rounds: usize, alternations: Alternations, sig: Signature) -> Self {
        GameSpec {
            u,
            v,
            rounds,
            alternations,
            sig,
            constraints: Constraints::default(),
        }
    }

    pub fn word(&self, side: Side) -> &Word {
        match side {
            Side::U => &self.u,
            Side::V => &self.v,
        }
    }

    /// Positions open on `side` in round `round` (counted from 1).
    pub fn allowed(&self, round: usize, side: Side) -> PositionSet {
        let n = self.word(side).len();
        let c = &self.constraints;
        let set = match (&c.start, round) {
            (Some(start), 1) => Some(&start[side.index()]),
            _ => c.rounds.get(&round).map(|r| &r[side.index()]),
        };
        match set {
            Some(s) => s.truncate(n),
            None => PositionSet::prefix(n),
        }
    }
}

/// A live configuration. `previous` and `current` are the pebble pairs of
/// the last two rounds as `(u-position, v-position)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GameState {
    pub previous: Option<(usize, usize)>,
    pub current: Option<(usize, usize)>,
    pub rounds_used: usize,
    pub alternations_used: usize,
    pub spoiler_last: Option<Side>,
}

impl GameState {
    pub fn initial() -> Self {
        GameState::default()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        self.previous.into_iter().chain(self.current)
    }
}

/// A pebble placement on one word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub side: Side,
    pub position: usize,
}

impl Move {
    pub fn new(side: Side, position: usize) -> Self {
        Move { side, position }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.side, self.position)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_sets() {
        let s = PositionSet::from_intervals([(5, 7), (1, 2), (3, 3), (10, 9)]);
        assert_eq!(s.intervals(), &[(1, 3), (5, 7)]);
        assert_eq!(s.len(), 6);
        assert!(s.contains(6) && !s.contains(4) && !s.contains(0) && !s.contains(8));
        assert_eq!(s.rank(5), Some(3));
        assert_eq!(s.rank(4), None);
        assert_eq!(s.count_below(6), 4);
        assert_eq!(s.count_below(0), 0);
        assert_eq!(s.truncate(6).intervals(), &[(1, 3), (5, 5)]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 2, 3, 5, 6, 7]);
        assert_eq!(s.to_string(), "{1..3, 5..7}");
    }
}
