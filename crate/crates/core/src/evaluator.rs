//! Tarskian evaluation of formulas on finite words, bounded language
//! enumeration and bounded neutral-letter checks.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Quantifier, EQ};
use crate::predicates::{builtin, Predicate, Signature};

/// Largest `|Σ|^n` that enumeration is allowed to walk through.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{name}` has arity {expected} but is applied to {found} variable(s)")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("formula has free variables: {0:?}")]
    FreeVariables(Vec<String>),
    #[error("expected exactly one free variable, found {0:?}")]
    WrongFreeCount(Vec<String>),
    #[error("position {position} out of range for a word of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("letter `{0}` is not in the alphabet")]
    LetterNotInAlphabet(char),
    #[error("enumeration of {alphabet}^{n} words exceeds the limit of {ENUMERATION_LIMIT}")]
    TooManyWords { alphabet: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alphabet(Vec<char>);

impl Alphabet {
    /// Sorted, deduplicated.
    pub fn new(letters: impl IntoIterator<Item = char>) -> Self {
        let set: BTreeSet<char> = letters.into_iter().collect();
        Alphabet(set.into_iter().collect())
    }

    pub fn letters(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    fn guard(&self, n: usize) -> Result<(), EvalError> {
        let count = (self.len() as u128).checked_pow(n as u32);
        match count {
            Some(c) if c <= ENUMERATION_LIMIT => Ok(()),
            _ if self.len() <= 1 => Ok(()),
            _ => Err(EvalError::TooManyWords {
                alphabet: self.len(),
                n,
            }),
        }
    }

    /// All words of length exactly `n`, in lexicographic order.
    pub fn words(&self, n: usize) -> Result<Vec<Word>, EvalError> {
        self.guard(n)?;
        Ok(WordsOfLength::new(self, n).collect())
    }

    /// All words of length at most `n`, shortest first, then lexicographic.
    pub fn words_upto(&self, n: usize) -> Result<Vec<Word>, EvalError> {
        self.guard(n)?;
        Ok((0..=n).flat_map(|k| WordsOfLength::new(self, k)).collect())
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(char::to_string).collect::<Vec<_>>().join(","))
    }
}

/// Lazy lexicographic enumeration of the words of one length.
pub struct WordsOfLength {
    letters: Vec<char>,
    digits: Option<Vec<usize>>,
}

impl WordsOfLength {
    pub fn new(alphabet: &Alphabet, n: usize) -> Self {
        let digits = if alphabet.is_empty() && n > 0 {
            None
        } else {
            Some(vec![0; n])
        };
        WordsOfLength {
            letters: alphabet.0.clone(),
            digits,
        }
    }
}

impl Iterator for WordsOfLength {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let digits = self.digits.as_mut()?;
        let word = Word(digits.iter().map(|&d| self.letters[d]).collect());
        let mut k = digits.len();
        loop {
            if k == 0 {
                self.digits = None;
                break;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < self.letters.len() {
                break;
            }
            digits[k] = 0;
        }
        Some(word)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<char>);

impl Word {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Self {
        Word(letters.into_iter().collect())
    }

    pub fn checked(text: &str, alphabet: &Alphabet) -> Result<Self, EvalError> {
        let w = Word::from(text);
        match w.0.iter().find(|c| !alphabet.contains(**c)) {
            Some(&c) => Err(EvalError::LetterNotInAlphabet(c)),
            None => Ok(w),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[char] {
        &self.0
    }

    pub fn at(&self, i: usize) -> char {
        self.0[i]
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    /// `self[..k] · c · self[k..]`.
    pub fn insert(&self, k: usize, c: char) -> Word {
        let mut v = self.0.clone();
        v.insert(k, c);
        Word(v)
    }

    pub fn split(&self, k: usize) -> (Word, Word) {
        (Word(self.0[..k].to_vec()), Word(self.0[k..].to_vec()))
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Self {
        Word(s.chars().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Letter(char, usize),
    Pred(usize, Vec<usize>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Quant(Quantifier, usize, Box<Node>),
}

/// A formula with its predicates resolved and variables numbered, ready to
/// be evaluated on many words.
#[derive(Clone, Debug)]
pub struct Compiled {
    root: Node,
    preds: Vec<Predicate>,
    vars: Vec<String>,
}

/// Resolves a predicate name against `sig`; equality is always available.
pub fn resolve(sig: &Signature, name: &str) -> Option<Predicate> {
    match sig.get(name) {
        Some(p) => Some(p.clone()),
        None if name == EQ => builtin(EQ).ok(),
        None => None,
    }
}

impl Compiled {
    pub fn new(f: &Formula, sig: &Signature) -> Result<Self, EvalError> {
        let mut c = Compiled {
            root: Node::Const(false),
            preds: Vec::new(),
            vars: Vec::new(),
        };
        let mut names: HashMap<String, usize> = HashMap::new();
        c.root = c.compile(f, sig, &mut names)?;
        Ok(c)
    }

    fn var(&mut self, v: &str) -> usize {
        match self.vars.iter().position(|x| x == v) {
            Some(i) => i,
            None => {
                self.vars.push(v.to_string());
                self.vars.len() - 1
            }
        }
    }

    fn compile(&mut self, f: &Formula, sig: &Signature, preds: &mut HashMap<String, usize>) -> Result<Node, EvalError> {
        Ok(match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Letter { letter, var } => Node::Letter(*letter, self.var(var)),
            Formula::Pred { name, args } => {
                let idx = match preds.get(name) {
                    Some(&i) => i,
                    None => {
                        let p = resolve(sig, name).ok_or_else(|| EvalError::UnknownPredicate(name.clone()))?;
                        self.preds.push(p);
                        preds.insert(name.clone(), self.preds.len() - 1);
                        self.preds.len() - 1
                    }
                };
                let arity = self.preds[idx].arity();
                if arity != args.len() {
                    return Err(EvalError::ArityMismatch {
                        name: name.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                Node::Pred(idx, args.iter().map(|a| self.var(a)).collect())
            }
            Formula::Not(c) => Node::Not(Box::new(self.compile(c, sig, preds)?)),
            Formula::And(cs) => Node::And(cs.iter().map(|c| self.compile(c, sig, preds)).collect::<Result<_, _>>()?),
            Formula::Or(cs) => Node::Or(cs.iter().map(|c| self.compile(c, sig, preds)).collect::<Result<_, _>>()?),
            Formula::Quant(q, v, c) => {
                let v = self.var(v);
                Node::Quant(*q, v, Box::new(self.compile(c, sig, preds)?))
            }
        })
    }

    fn eval(&self, node: &Node, w: &Word, env: &mut [usize]) -> bool {
        match node {
            Node::Const(b) => *b,
            Node::Letter(a, v) => w.0[env[*v]] == *a,
            Node::Pred(p, args) => {
                let mut buf = [0usize; 2];
                for (slot, &v) in buf.iter_mut().zip(args) {
                    *slot = env[v];
                }
                self.preds[*p].holds(&buf[..args.len()], w.len())
            }
            Node::Not(c) => !self.eval(c, w, env),
            Node::And(cs) => cs.iter().all(|c| self.eval(c, w, env)),
            Node::Or(cs) => cs.iter().any(|c| self.eval(c, w, env)),
            Node::Quant(q, v, c) => {
                let saved = env[*v];
                let mut result = *q == Quantifier::Forall;
                for i in 0..w.len() {
                    env[*v] = i;
                    if self.eval(c, w, env) != result {
                        result = !result;
                        break;
                    }
                }
                env[*v] = saved;
                result
            }
        }
    }

    fn run(&self, w: &Word, assignment: &[(usize, usize)]) -> bool {
        let mut env = vec![0; self.vars.len()];
        for &(v, i) in assignment {
            env[v] = i;
        }
        self.eval(&self.root, w, &mut env)
    }

    /// Truth on `w`; the formula must have been checked closed.
    pub fn holds(&self, w: &Word) -> bool {
        self.run(w, &[])
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

/// `w ⊨ f` over the signature `sig`.
pub fn evaluate(f: &Formula, w: &Word, sig: &Signature) -> Result<bool, EvalError> {
    let free = f.free_variables();
    if !free.is_empty() {
        return Err(EvalError::FreeVariables(free.into_iter().collect()));
    }
    Ok(Compiled::new(f, sig)?.holds(w))
}

/// `w ⊨ f(i)` for a formula with exactly one free variable.
pub fn evaluate_open(f: &Formula, w: &Word, i: usize, sig: &Signature) -> Result<bool, EvalError> {
    let free: Vec<String> = f.free_variables().into_iter().collect();
    if free.len() != 1 {
        return Err(EvalError::WrongFreeCount(free));
    }
    if i >= w.len() {
        return Err(EvalError::PositionOutOfRange {
            position: i,
            len: w.len(),
        });
    }
    let c = Compiled::new(f, sig)?;
    let v = c.var_index(&free[0]).expect("free variable occurs in the formula");
    Ok(c.run(w, &[(v, i)]))
}

/// A decidable language over an alphabet.
#[derive(Clone)]
pub struct LanguageOracle {
    alphabet: Alphabet,
    member: Arc<dyn Fn(&Word) -> bool + Send + Sync>,
}

impl fmt::Debug for LanguageOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LanguageOracle over {}", self.alphabet)
    }
}

impl LanguageOracle {
    pub fn from_fn(alphabet: Alphabet, member: impl Fn(&Word) -> bool + Send + Sync + 'static) -> Self {
        LanguageOracle {
            alphabet,
            member: Arc::new(member),
        }
    }

    pub fn from_formula(f: &Formula, sig: &Signature, alphabet: Alphabet) -> Result<Self, EvalError> {
        let free = f.free_variables();
        if !free.is_empty() {
            return Err(EvalError::FreeVariables(free.into_iter().collect()));
        }
        let c = Compiled::new(f, sig)?;
        Ok(LanguageOracle::from_fn(alphabet, move |w| c.holds(w)))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn contains(&self, w: &Word) -> bool {
        (self.member)(w)
    }
}

/// Members of the language of length at most `n`, shortest first.
pub fn language_upto(o: &LanguageOracle, n: usize) -> Result<Vec<Word>, EvalError> {
    Ok(o.alphabet.words_upto(n)?.into_iter().filter(|w| o.contains(w)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeutralVerdict {
    /// No violation among words `ucv` of length at most the bound.
    NeutralUpTo(usize),
    /// `uv` and `ucv` are classified differently.
    Counterexample(Word, Word),
}

/// Searches for `(u, v)` with `|uv| < n` and `uv ∈ L ⇎ ucv ∈ L`, scanning by
/// increasing `|uv|`, then `uv` lexicographically, then the split point.
pub fn check_neutral(o: &LanguageOracle, c: char, n: usize) -> Result<NeutralVerdict, EvalError> {
    if !o.alphabet.contains(c) {
        return Err(EvalError::LetterNotInAlphabet(c));
    }
    o.alphabet.guard(n)?;
    for len in 0..n {
        for w in WordsOfLength::new(&o.alphabet, len) {
            let base = o.contains(&w);
            for k in 0..=len {
                if o.contains(&w.insert(k, c)) != base {
                    let (u, v) = w.split(k);
                    return Ok(NeutralVerdict::Counterexample(u, v));
                }
            }
        }
    }
    Ok(NeutralVerdict::NeutralUpTo(n))
}
