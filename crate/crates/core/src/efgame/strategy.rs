//! Explicit strategies and their exhaustive verification.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::rules::{advance, check_duplicator_reply, check_spoiler_move, duplicator_domain, is_partial_iso, spoiler_moves};
use super::solver::Solution;
use super::{GameError, GameSpec, GameState, Move, Player};

/// Whose turn it is, and in what situation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Turn {
    Spoiler(GameState),
    /// Duplicator must answer the move.
    Duplicator(GameState, Move),
}

/// A positional strategy for one player: the move to make at each reachable
/// turn. Duplicator's entries name the word and position of her answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub role: Player,
    pub moves: BTreeMap<Turn, Move>,
}

impl Strategy {
    pub fn new(role: Player) -> Self {
        Strategy {
            role,
            moves: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn get(&self, turn: &Turn) -> Option<Move> {
        self.moves.get(turn).copied()
    }

    /// Records `mv` at `turn`; a different move already stored there makes
    /// the strategy non-positional.
    pub fn insert(&mut self, turn: Turn, mv: Move) -> Result<(), GameError> {
        match self.moves.insert(turn, mv) {
            Some(old) if old != mv => Err(GameError::NotPositional),
            _ => Ok(()),
        }
    }

    /// One line per entry: the turn, then the move.
    pub fn to_table(&self) -> String {
        let mut out = format!("# strategy for {}\n", self.role);
        for (turn, mv) in &self.moves {
            let (st, pending) = match turn {
                Turn::Spoiler(st) => (st, "-".to_string()),
                Turn::Duplicator(st, m) => (st, m.to_string()),
            };
            let pair = |p: Option<(usize, usize)>| p.map_or("-".to_string(), |(i, j)| format!("{i},{j}"));
            let last = st.spoiler_last.map_or("-".to_string(), |s| s.to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                pair(st.previous),
                pair(st.current),
                st.rounds_used,
                st.alternations_used,
                last,
                pending,
                mv
            ));
        }
        out
    }
}

/// Why a strategy fails to win.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyViolation {
    MissingMove(Turn),
    IllegalMove(Turn, Move),
    /// The strategy's owner loses in this state.
    Lost(GameState),
}

impl fmt::Display for StrategyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyViolation::MissingMove(t) => write!(f, "no move recorded for {t:?}"),
            StrategyViolation::IllegalMove(t, m) => write!(f, "illegal move {m} at {t:?}"),
            StrategyViolation::Lost(st) => write!(f, "the strategy loses at {st:?}"),
        }
    }
}

impl std::error::Error for StrategyViolation {}

/// Plays `strategy` against every sequence of opposing moves, using the
/// rules only.
pub fn verify_strategy(spec: &GameSpec, strategy: &Strategy) -> Result<(), StrategyViolation> {
    let mut seen = HashSet::new();
    match strategy.role {
        Player::Spoiler => verify_spoiler(spec, strategy, GameState::initial(), &mut seen),
        Player::Duplicator => verify_duplicator(spec, strategy, GameState::initial(), &mut seen),
    }
}

fn verify_spoiler(
    spec: &GameSpec,
    strategy: &Strategy,
    st: GameState,
    seen: &mut HashSet<GameState>,
) -> Result<(), StrategyViolation> {
    if !seen.insert(st) {
        return Ok(());
    }
    let turn = Turn::Spoiler(st);
    let Some(mv) = strategy.get(&turn) else {
        if spoiler_moves(spec, &st).is_empty() {
            return Err(StrategyViolation::Lost(st));
        }
        return Err(StrategyViolation::MissingMove(turn));
    };
    if check_spoiler_move(spec, &st, mv).is_err() {
        return Err(StrategyViolation::IllegalMove(turn, mv));
    }
    for reply in duplicator_domain(spec, &st, mv).iter() {
        let next = advance(&st, mv, reply);
        if !is_partial_iso(&next, spec) {
            continue;
        }
        if spoiler_moves(spec, &next).is_empty() {
            return Err(StrategyViolation::Lost(next));
        }
        verify_spoiler(spec, strategy, next, seen)?;
    }
    Ok(())
}

fn verify_duplicator(
    spec: &GameSpec,
    strategy: &Strategy,
    st: GameState,
    seen: &mut HashSet<GameState>,
) -> Result<(), StrategyViolation> {
    if !seen.insert(st) {
        return Ok(());
    }
    for mv in spoiler_moves(spec, &st) {
        let turn = Turn::Duplicator(st, mv);
        let reply = strategy.get(&turn).ok_or(StrategyViolation::MissingMove(turn))?;
        if reply.side != mv.side.other() || check_duplicator_reply(spec, &st, mv, reply.position).is_err() {
            return Err(StrategyViolation::IllegalMove(turn, reply));
        }
        let next = advance(&st, mv, reply.position);
        if !is_partial_iso(&next, spec) {
            return Err(StrategyViolation::Lost(next));
        }
        verify_duplicator(spec, strategy, next, seen)?;
    }
    Ok(())
}

impl Solution {
    /// The winner's strategy over every state reachable against arbitrary
    /// opposition, with at most `limit` entries.
    pub fn strategy(&mut self, limit: usize) -> Result<Strategy, GameError> {
        let role = self.winner();
        let mut out = Strategy::new(role);
        let mut seen = HashSet::new();
        match role {
            Player::Spoiler => self.spoiler_tree(GameState::initial(), &mut out, &mut seen, limit)?,
            Player::Duplicator => self.duplicator_tree(GameState::initial(), &mut out, &mut seen, limit)?,
        }
        Ok(out)
    }

    fn spoiler_tree(
        &mut self,
        st: GameState,
        out: &mut Strategy,
        seen: &mut HashSet<GameState>,
        limit: usize,
    ) -> Result<(), GameError> {
        if !seen.insert(st) {
            return Ok(());
        }
        let Some((mv, _)) = self.spoiler_move(&st) else { return Ok(()) };
        out.insert(Turn::Spoiler(st), mv)?;
        if out.len() > limit {
            return Err(GameError::StrategyTooLarge(out.len()));
        }
        let spec = self.spec().clone();
        for reply in duplicator_domain(&spec, &st, mv).iter() {
            let next = advance(&st, mv, reply);
            if is_partial_iso(&next, &spec) && next.rounds_used < spec.rounds {
                self.spoiler_tree(next, out, seen, limit)?;
            }
        }
        Ok(())
    }

    fn duplicator_tree(
        &mut self,
        st: GameState,
        out: &mut Strategy,
        seen: &mut HashSet<GameState>,
        limit: usize,
    ) -> Result<(), GameError> {
        if !seen.insert(st) {
            return Ok(());
        }
        let spec = self.spec().clone();
        for mv in spoiler_moves(&spec, &st) {
            let Some((reply, _)) = self.duplicator_reply(&st, mv) else { continue };
            out.insert(Turn::Duplicator(st, mv), Move::new(mv.side.other(), reply))?;
            if out.len() > limit {
                return Err(GameError::StrategyTooLarge(out.len()));
            }
            let next = advance(&st, mv, reply);
            if is_partial_iso(&next, &spec) {
                self.duplicator_tree(next, out, seen, limit)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efgame::{solve, Alternations, Side};
    use crate::predicates::Signature;

    fn spec(u: &str, v: &str, s: usize, m: usize) -> GameSpec {
        GameSpec::new(u.into(), v.into(), s, Alternations::Bounded(m), Signature::parse("less").unwrap())
    }

    #[test]
    fn both_roles_verify() {
        for (u, v, s, m) in [("ab", "ba", 2, 0), ("ab", "ab", 3, 1), ("aab", "ab", 2, 1), ("abab", "baba", 3, 2)] {
            let sp = spec(u, v, s, m);
            let mut sol = solve(&sp).unwrap();
            let strat = sol.strategy(1_000_000).unwrap();
            assert_eq!(verify_strategy(&sp, &strat), Ok(()), "{u} {v} {s} {m}");
        }
    }

    #[test]
    fn broken_strategies_are_caught() {
        let sp = spec("ab", "ba", 2, 0);
        let mut sol = solve(&sp).unwrap();
        let mut strat = sol.strategy(1000).unwrap();
        assert_eq!(strat.role, Player::Spoiler);
        let first = Turn::Spoiler(GameState::initial());
        strat.moves.insert(first, Move::new(Side::U, 1));
        assert!(verify_strategy(&sp, &strat).is_err());

        let empty = Strategy::new(Player::Duplicator);
        assert!(matches!(verify_strategy(&sp, &empty), Err(StrategyViolation::MissingMove(_))));
    }
}
