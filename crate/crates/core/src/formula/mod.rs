//! First-order formulas over words: letter atoms, numerical predicate atoms,
//! Boolean connectives and quantifiers.
//!
//! Variables are plain identifiers. Nothing in the syntax limits a formula to
//! two variables; [`Metrics::is_two_variable`] reports whether it stays inside
//! that fragment.

mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use parser::{parse, ParseError};

/// Name under which the order atom `x < y` is stored.
pub const LESS: &str = "less";
/// Name under which the equality atom `x = y` is stored.
pub const EQ: &str = "eq";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// Abstract syntax tree of a formula.
///
/// Conjunction and disjunction are n-ary. The parser only builds them with at
/// least two children; smaller ones are legal and print as their neutral
/// element or sole child.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    /// `a(x)`: the letter at position `x` is `a`.
    Letter { letter: char, var: String },
    /// `P(x)` or `P(x, y)` for a numerical predicate `P`.
    Pred { name: String, args: Vec<String> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Quant(Quantifier, String, Box<Formula>),
}

impl Formula {
    pub fn letter(letter: char, var: impl Into<String>) -> Self {
        Formula::Letter {
            letter,
            var: var.into(),
        }
    }

    pub fn pred<S: Into<String>>(name: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Formula::Pred {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn less(x: impl Into<String>, y: impl Into<String>) -> Self {
        Formula::pred(LESS, [x.into(), y.into()])
    }

    pub fn equal(x: impl Into<String>, y: impl Into<String>) -> Self {
        Formula::pred(EQ, [x.into(), y.into()])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(children: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(children.into_iter().collect())
    }

    pub fn or(children: impl IntoIterator<Item = Formula>) -> Self {
        Formula::Or(children.into_iter().collect())
    }

    /// `a -> b`, desugared to `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Quant(Quantifier::Exists, var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::Quant(Quantifier::Forall, var.into(), Box::new(body))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Formula::True | Formula::False | Formula::Letter { .. } | Formula::Pred { .. }
        )
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Letter { .. } | Formula::Pred { .. } => 1,
            Formula::Not(c) | Formula::Quant(_, _, c) => 1 + c.size(),
            Formula::And(cs) | Formula::Or(cs) => 1 + cs.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Every variable name that occurs, bound or free.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Letter { var, .. } => {
                out.insert(var);
            }
            Formula::Pred { args, .. } => out.extend(args.iter().map(String::as_str)),
            Formula::Not(c) => c.collect_variables(out),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_variables(out)),
            Formula::Quant(_, v, c) => {
                out.insert(v);
                c.collect_variables(out);
            }
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Letter { var, .. } => BTreeSet::from([var.clone()]),
            Formula::Pred { args, .. } => args.iter().cloned().collect(),
            Formula::Not(c) => c.free_variables(),
            Formula::And(cs) | Formula::Or(cs) => {
                cs.iter().flat_map(Formula::free_variables).collect()
            }
            Formula::Quant(_, v, c) => {
                let mut free = c.free_variables();
                free.remove(v);
                free
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Names of all predicate atoms, with the arity they are used at.
    pub fn predicates(&self) -> BTreeSet<(&str, usize)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Pred { name, args } = f {
                out.insert((name.as_str(), args.len()));
            }
        });
        out
    }

    pub fn letters(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Letter { letter, .. } = f {
                out.insert(*letter);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(c) | Formula::Quant(_, _, c) => c.visit(f),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.visit(f)),
            _ => {}
        }
    }

    /// Negation normal form: negations only directly above atoms.
    pub fn to_nnf(&self) -> Formula {
        self.nnf(false)
    }

    fn nnf(&self, negate: bool) -> Formula {
        match self {
            Formula::True => {
                if negate {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::False => {
                if negate {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::Letter { .. } | Formula::Pred { .. } => {
                if negate {
                    Formula::not(self.clone())
                } else {
                    self.clone()
                }
            }
            Formula::Not(c) => c.nnf(!negate),
            Formula::And(cs) => {
                let cs = cs.iter().map(|c| c.nnf(negate)).collect();
                if negate {
                    Formula::Or(cs)
                } else {
                    Formula::And(cs)
                }
            }
            Formula::Or(cs) => {
                let cs = cs.iter().map(|c| c.nnf(negate)).collect();
                if negate {
                    Formula::And(cs)
                } else {
                    Formula::Or(cs)
                }
            }
            Formula::Quant(q, v, c) => {
                let q = if negate { q.dual() } else { *q };
                Formula::Quant(q, v.clone(), Box::new(c.nnf(negate)))
            }
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Not(c) => c.is_atomic(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().all(Formula::is_nnf),
            Formula::Quant(_, _, c) => c.is_nnf(),
            _ => true,
        }
    }

    pub fn metrics(&self) -> Metrics {
        let variable_count = self.variables().len();
        Metrics {
            variable_count,
            quantifier_depth: self.quantifier_depth(),
            alternation_depth: self.to_nnf().switches(None),
            is_two_variable: variable_count <= 2,
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Not(c) => c.quantifier_depth(),
            Formula::And(cs) | Formula::Or(cs) => {
                cs.iter().map(Formula::quantifier_depth).max().unwrap_or(0)
            }
            Formula::Quant(_, _, c) => 1 + c.quantifier_depth(),
            _ => 0,
        }
    }

    // Maximum number of kind switches between consecutive quantifiers on a
    // root-to-leaf path. Expects NNF.
    fn switches(&self, last: Option<Quantifier>) -> usize {
        match self {
            Formula::Not(c) => c.switches(last),
            Formula::And(cs) | Formula::Or(cs) => {
                cs.iter().map(|c| c.switches(last)).max().unwrap_or(0)
            }
            Formula::Quant(q, _, c) => {
                let here = usize::from(last.is_some_and(|l| l != *q));
                here + c.switches(Some(*q))
            }
            _ => 0,
        }
    }
}

/// Size measures of a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub variable_count: usize,
    pub quantifier_depth: usize,
    /// Kind switches along NNF paths; see [`Formula::metrics`].
    pub alternation_depth: usize,
    pub is_two_variable: bool,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Letter { letter, var } => write!(f, "{letter}({var})"),
            Formula::Pred { name, args } => match (name.as_str(), args.as_slice()) {
                (LESS, [x, y]) => write!(f, "{x} < {y}"),
                (EQ, [x, y]) => write!(f, "{x} = {y}"),
                _ => write!(f, "{name}({})", args.join(", ")),
            },
            Formula::Not(c) => {
                if c.is_atomic() || matches!(**c, Formula::Not(_)) {
                    write!(f, "!{c}")
                } else {
                    write!(f, "!({c})")
                }
            }
            Formula::And(cs) => write_chain(f, cs, " & ", "true"),
            Formula::Or(cs) => write_chain(f, cs, " | ", "false"),
            Formula::Quant(q, v, c) => {
                let sym = match q {
                    Quantifier::Exists => 'E',
                    Quantifier::Forall => 'A',
                };
                write!(f, "{sym} {v}. {c}")
            }
        }
    }
}

fn write_chain(f: &mut fmt::Formatter<'_>, cs: &[Formula], sep: &str, empty: &str) -> fmt::Result {
    match cs {
        [] => return write!(f, "{empty}"),
        [only] => return write!(f, "{only}"),
        _ => {}
    }
    for (k, c) in cs.iter().enumerate() {
        if k > 0 {
            f.write_str(sep)?;
        }
        if c.is_atomic() || matches!(c, Formula::Not(_)) {
            write!(f, "{c}")?;
        } else {
            write!(f, "({c})")?;
        }
    }
    Ok(())
}
