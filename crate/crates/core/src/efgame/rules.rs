//! Legality of moves and the end-of-round check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GameSpec, GameState, Move, Player, PositionSet, Side};
use crate::formula::EQ;
use crate::predicates::{builtin, Predicate};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IllegalMove {
    #[error("the game is over")]
    GameOver,
    #[error("position out of range")]
    OutOfRange,
    #[error("constraint violation")]
    ConstraintViolation,
    #[error("alternation budget exhausted")]
    AlternationBudget,
    #[error("not your turn")]
    NotYourTurn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Ongoing,
    Won(Player),
}

/// Alternation charge of Spoiler playing on `side` in `state`: his first
/// move is free, every later change of word costs one.
pub fn charge(state: &GameState, side: Side) -> usize {
    usize::from(state.spoiler_last.is_some_and(|last| last != side))
}

/// Whether Spoiler may play on `side` at all (rounds and alternations left).
pub fn side_open(spec: &GameSpec, state: &GameState, side: Side) -> bool {
    state.rounds_used < spec.rounds && spec.alternations.allows(state.alternations_used + charge(state, side))
}

pub fn spoiler_domain(spec: &GameSpec, state: &GameState, side: Side) -> PositionSet {
    if side_open(spec, state, side) {
        spec.allowed(state.rounds_used + 1, side)
    } else {
        PositionSet::empty()
    }
}

/// Every legal Spoiler move, `u` before `v`, positions increasing.
pub fn spoiler_moves(spec: &GameSpec, state: &GameState) -> Vec<Move> {
    Side::BOTH
        .iter()
        .flat_map(|&side| {
            spoiler_domain(spec, state, side)
                .iter()
                .map(move |p| Move::new(side, p))
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn check_spoiler_move(spec: &GameSpec, state: &GameState, mv: Move) -> Result<(), IllegalMove> {
    if state.rounds_used >= spec.rounds {
        return Err(IllegalMove::GameOver);
    }
    if mv.position >= spec.word(mv.side).len() {
        return Err(IllegalMove::OutOfRange);
    }
    if !spec.allowed(state.rounds_used + 1, mv.side).contains(mv.position) {
        return Err(IllegalMove::ConstraintViolation);
    }
    if !spec.alternations.allows(state.alternations_used + charge(state, mv.side)) {
        return Err(IllegalMove::AlternationBudget);
    }
    Ok(())
}

/// Positions Duplicator may answer `mv` with.
pub fn duplicator_domain(spec: &GameSpec, state: &GameState, mv: Move) -> PositionSet {
    spec.allowed(state.rounds_used + 1, mv.side.other())
}

pub fn check_duplicator_reply(spec: &GameSpec, state: &GameState, mv: Move, reply: usize) -> Result<(), IllegalMove> {
    let side = mv.side.other();
    if reply >= spec.word(side).len() {
        return Err(IllegalMove::OutOfRange);
    }
    if !duplicator_domain(spec, state, mv).contains(reply) {
        return Err(IllegalMove::ConstraintViolation);
    }
    Ok(())
}

/// The state after Spoiler's `mv` and Duplicator's `reply`. The oldest pair
/// leaves the board.
pub fn advance(state: &GameState, mv: Move, reply: usize) -> GameState {
    let pair = match mv.side {
        Side::U => (mv.position, reply),
        Side::V => (reply, mv.position),
    };
    GameState {
        previous: state.current,
        current: Some(pair),
        rounds_used: state.rounds_used + 1,
        alternations_used: state.alternations_used + charge(state, mv.side),
        spoiler_last: Some(mv.side),
    }
}

/// Predicates checked by the isomorphism test: the signature plus equality.
pub fn iso_predicates(spec: &GameSpec) -> Vec<Predicate> {
    let mut preds: Vec<Predicate> = spec.sig.iter().cloned().collect();
    if !spec.sig.contains(EQ) {
        preds.push(builtin(EQ).expect("equality is a catalogue predicate"));
    }
    preds
}

/// Whether the pebbled positions induce a partial isomorphism: letters agree
/// pairwise and every predicate agrees on every tuple of pebbles (repeats
/// allowed), each side evaluated at its own word length.
pub fn is_partial_iso(state: &GameState, spec: &GameSpec) -> bool {
    iso_with(&iso_predicates(spec), state, spec)
}

pub(crate) fn iso_with(preds: &[Predicate], state: &GameState, spec: &GameSpec) -> bool {
    let pairs: Vec<(usize, usize)> = state.pairs().collect();
    if pairs.iter().any(|&(i, j)| spec.u.at(i) != spec.v.at(j)) {
        return false;
    }
    let (nu, nv) = (spec.u.len(), spec.v.len());
    let mut us = Vec::new();
    let mut vs = Vec::new();
    for p in preds {
        let k = p.arity();
        let total = pairs.len().pow(k as u32);
        for code in 0..total {
            us.clear();
            vs.clear();
            let mut c = code;
            for _ in 0..k {
                let (i, j) = pairs[c % pairs.len()];
                us.push(i);
                vs.push(j);
                c /= pairs.len();
            }
            if p.holds(&us, nu) != p.holds(&vs, nv) {
                return false;
            }
        }
    }
    true
}

/// Outcome once a round has been completed and `state` reached.
pub fn outcome(spec: &GameSpec, state: &GameState) -> Outcome {
    if state.current.is_some() && !is_partial_iso(state, spec) {
        return Outcome::Won(Player::Spoiler);
    }
    if Side::BOTH.iter().all(|&s| spoiler_domain(spec, state, s).is_empty()) {
        return Outcome::Won(Player::Duplicator);
    }
    Outcome::Ongoing
}
