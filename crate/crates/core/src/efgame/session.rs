//! Interactive play: one game, moves applied one at a time, with the solver
//! available for engine moves and hints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rules::{self, advance, check_duplicator_reply, check_spoiler_move, IllegalMove};
use super::solver::{Solution, SolverConfig};
use super::{GameError, GameSpec, GameState, Move, Player, Side};
use crate::evaluator::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("the game is over")]
    GameOver,
    #[error("not your turn")]
    NotYourTurn,
    #[error("{0}")]
    Illegal(IllegalMove),
    #[error("Duplicator must answer on the other word")]
    WrongSide,
    #[error("no legal move is available")]
    NoMove,
}

impl From<IllegalMove> for SessionError {
    fn from(e: IllegalMove) -> Self {
        match e {
            IllegalMove::GameOver => SessionError::GameOver,
            IllegalMove::NotYourTurn => SessionError::NotYourTurn,
            other => SessionError::Illegal(other),
        }
    }
}

/// A suggested move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    pub side: Side,
    pub position: usize,
    /// Whether the solver certifies the move as winning for the mover.
    pub winning: bool,
}

/// A serialisable snapshot of a session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub u: String,
    pub v: String,
    pub rounds: usize,
    pub alternations: Option<usize>,
    pub previous: Option<(usize, usize)>,
    pub current: Option<(usize, usize)>,
    /// Spoiler's move awaiting an answer.
    pub pending: Option<Move>,
    pub rounds_used: usize,
    pub alternations_used: usize,
    pub turn: Option<Player>,
    pub winner: Option<Player>,
}

#[derive(Clone, Debug)]
pub struct Session {
    solution: Solution,
    state: GameState,
    pending: Option<Move>,
    winner: Option<Player>,
    history: Vec<(Move, usize)>,
}

impl Session {
    pub fn new(spec: &GameSpec) -> Result<Self, GameError> {
        Session::with_config(spec, SolverConfig::default())
    }

    pub fn with_config(spec: &GameSpec, config: SolverConfig) -> Result<Self, GameError> {
        let mut s = Session {
            solution: Solution::new(spec, config)?,
            state: GameState::initial(),
            pending: None,
            winner: None,
            history: Vec::new(),
        };
        s.settle();
        Ok(s)
    }

    pub fn spec(&self) -> &GameSpec {
        self.solution.spec()
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn pending(&self) -> Option<Move> {
        self.pending
    }

    pub fn winner(&self) -> Option<Player> {
        self.winner
    }

    pub fn history(&self) -> &[(Move, usize)] {
        &self.history
    }

    /// Whose move it is, or `None` once the game is decided.
    pub fn turn(&self) -> Option<Player> {
        match (self.winner, self.pending) {
            (Some(_), _) => None,
            (None, None) => Some(Player::Spoiler),
            (None, Some(_)) => Some(Player::Duplicator),
        }
    }

    fn settle(&mut self) {
        if let rules::Outcome::Won(p) = rules::outcome(self.spec(), &self.state) {
            self.winner = Some(p);
        }
    }

    /// Plays `mv` for `player`. Duplicator's move names the word she answers
    /// on and the position.
    pub fn apply_move(&mut self, player: Player, mv: Move) -> Result<(), SessionError> {
        let turn = self.turn().ok_or(SessionError::GameOver)?;
        if turn != player {
            return Err(SessionError::NotYourTurn);
        }
        match self.pending {
            None => {
                check_spoiler_move(self.spec(), &self.state, mv)?;
                self.pending = Some(mv);
                if rules::duplicator_domain(self.spec(), &self.state, mv).is_empty() {
                    self.winner = Some(Player::Spoiler);
                }
            }
            Some(attack) => {
                if mv.side != attack.side.other() {
                    return Err(SessionError::WrongSide);
                }
                check_duplicator_reply(self.spec(), &self.state, attack, mv.position)?;
                self.state = advance(&self.state, attack, mv.position);
                self.history.push((attack, mv.position));
                self.pending = None;
                self.settle();
            }
        }
        Ok(())
    }

    /// The solver's suggestion for whoever is to move.
    pub fn hint(&mut self) -> Result<Hint, SessionError> {
        match self.turn().ok_or(SessionError::GameOver)? {
            Player::Spoiler => {
                let (mv, winning) = self.solution.spoiler_move(&self.state).ok_or(SessionError::NoMove)?;
                Ok(Hint {
                    side: mv.side,
                    position: mv.position,
                    winning,
                })
            }
            Player::Duplicator => {
                let attack = self.pending.expect("Duplicator moves only after an attack");
                let (position, winning) = self
                    .solution
                    .duplicator_reply(&self.state, attack)
                    .ok_or(SessionError::NoMove)?;
                Ok(Hint {
                    side: attack.side.other(),
                    position,
                    winning,
                })
            }
        }
    }

    /// Lets the engine make the current player's move.
    pub fn engine_move(&mut self) -> Result<Move, SessionError> {
        let player = self.turn().ok_or(SessionError::GameOver)?;
        let h = self.hint()?;
        let mv = Move::new(h.side, h.position);
        self.apply_move(player, mv)?;
        Ok(mv)
    }

    /// Who wins from here with best play, once any pending attack is
    /// answered optimally.
    pub fn forecast(&mut self) -> Player {
        if let Some(w) = self.winner {
            return w;
        }
        self.solution.winner_from(&self.state)
    }

    pub fn view(&self) -> SessionView {
        let spec = self.spec();
        let word = |w: &Word| w.letters().iter().collect::<String>();
        SessionView {
            u: word(&spec.u),
            v: word(&spec.v),
            rounds: spec.rounds,
            alternations: match spec.alternations {
                super::Alternations::Bounded(m) => Some(m),
                super::Alternations::Unbounded => None,
            },
            previous: self.state.previous,
            current: self.state.current,
            pending: self.pending,
            rounds_used: self.state.rounds_used,
            alternations_used: self.state.alternations_used,
            turn: self.turn(),
            winner: self.winner,
        }
    }
}
