//! Errors carried to the process exit code.
//!
//! 0 ok, 1 property violated, 2 usage or parse error, 3 resource guard.

use std::fmt;

use fo2::collapse::CollapseError;
use fo2::efgame::GameError;
use fo2::evaluator::EvalError;
use fo2::formula::ParseError;
use fo2::locality::LocalityError;
use fo2::predicates::PredicateError;
use fo2::types::TypeError;

pub const VIOLATION: u8 = 1;
pub const USAGE: u8 = 2;
pub const GUARD: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE, message: message.into() }
    }

    pub fn violation(message: impl Into<String>) -> Self {
        Failure { code: VIOLATION, message: message.into() }
    }

    fn new(code: u8, e: &impl fmt::Display) -> Self {
        Failure { code, message: e.to_string() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(USAGE, &e)
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::new(USAGE, &e)
    }
}

impl From<PredicateError> for Failure {
    fn from(e: PredicateError) -> Self {
        Failure::new(USAGE, &e)
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match e {
            EvalError::TooManyWords { .. } => GUARD,
            _ => USAGE,
        };
        Failure::new(code, &e)
    }
}

impl From<LocalityError> for Failure {
    fn from(e: LocalityError) -> Self {
        let code = match e {
            LocalityError::BudgetExceeded { .. } | LocalityError::CeilingExceeded { .. } => GUARD,
            _ => USAGE,
        };
        Failure::new(code, &e)
    }
}

impl From<TypeError> for Failure {
    fn from(e: TypeError) -> Self {
        match e {
            TypeError::Locality(e) => e.into(),
            TypeError::BudgetExceeded { .. } | TypeError::Exhausted { .. } => Failure::new(GUARD, &e),
            _ => Failure::new(USAGE, &e),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Locality(e) => e.into(),
            GameError::BudgetExceeded { .. } | GameError::StrategyTooLarge(_) => Failure::new(GUARD, &e),
            GameError::NotPositional => Failure::new(VIOLATION, &e),
            _ => Failure::new(USAGE, &e),
        }
    }
}

impl From<CollapseError> for Failure {
    fn from(e: CollapseError) -> Self {
        match e {
            CollapseError::Eval(e) => e.into(),
            CollapseError::Predicate(e) => e.into(),
            CollapseError::Locality(e) => e.into(),
            CollapseError::Types(e) => e.into(),
            CollapseError::Game(e) => e.into(),
            CollapseError::ShortExtraction { .. } => Failure::new(GUARD, &e),
            _ => Failure::new(USAGE, &e),
        }
    }
}
