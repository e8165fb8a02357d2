//! The collapse constructions: rewriting a two-variable formula with a
//! neutral letter over arbitrary numerical predicates into one over the order,
//! the MSB predicates and finite-degree predicates; padding words with the
//! neutral letter; and translating a Spoiler strategy on a padded pair back to
//! the original pair over `{less, succ}`.

mod padding;
mod theorem3;
mod translate;

use thiserror::Error;

use crate::efgame::GameError;
use crate::evaluator::EvalError;
use crate::locality::LocalityError;
use crate::predicates::PredicateError;
use crate::types::TypeError;

pub use padding::{build_padded_pair, pad_prop2, place_on_extraction, PaddedPair};
pub use theorem3::{transform_theorem3, TransformResult};
pub use translate::{
    translate_strategy, translate_strategy_with, CaseKind, SpoilerOracle, TraceLine, Translation, Violation,
};

#[derive(Debug, Error)]
pub enum CollapseError {
    #[error("formula uses more than two variables: {0:?}")]
    NotTwoVariable(Vec<String>),
    #[error("formula has free variables: {0:?}")]
    Open(Vec<String>),
    #[error("predicate `{name}` has unsupported arity {arity}")]
    Arity { name: String, arity: usize },
    #[error("neutral letter `{0}` is not in the alphabet")]
    NeutralNotInAlphabet(char),
    #[error("padded pairs need nonempty words")]
    EmptyWord,
    #[error("cannot align first and last letters of words of lengths {0} and {1}")]
    Unalignable(usize, usize),
    #[error("extraction has {have} positions, {need} needed")]
    ShortExtraction { have: usize, need: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Locality(#[from] LocalityError),
    #[error(transparent)]
    Types(#[from] TypeError),
    #[error(transparent)]
    Game(#[from] GameError),
}
