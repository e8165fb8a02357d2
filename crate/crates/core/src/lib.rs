//! Two-variable first-order logic on finite words with numerical predicates.

pub mod collapse;
pub mod efgame;
pub mod evaluator;
pub mod experiments;
pub mod formula;
pub mod locality;
pub mod predicates;
pub mod symbolic;
pub mod types;

pub use evaluator::{evaluate, evaluate_open, Alphabet, Word};
pub use formula::{parse, Formula};
pub use predicates::{builtin, Predicate, Signature};
