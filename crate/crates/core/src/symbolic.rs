//! Evaluation of a formula on every word of a fixed length at once.
//!
//! Each position carries `⌈log₂ |Σ|⌉` Boolean variables encoding its letter;
//! a formula then denotes a BDD over those variables. Two formulas agree on
//! all words of length `n` iff their BDDs coincide, which is how exhaustive
//! agreement up to lengths far beyond enumeration is decided.

use std::collections::HashMap;

use biodivine_lib_bdd::{Bdd, BddValuation, BddVariable, BddVariableSet};

use crate::evaluator::{resolve, Alphabet, EvalError, Word};
use crate::formula::{Formula, Quantifier};
use crate::predicates::{Predicate, Signature};

enum Node {
    Const(bool),
    Letter(char, usize),
    Pred(usize, Vec<usize>),
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Quant(Quantifier, usize, usize),
}

/// A formula flattened into an arena, each node knowing its free variables
/// so that memoisation keys only on what the node depends on.
struct Arena {
    nodes: Vec<(Node, Vec<usize>)>,
    preds: Vec<Predicate>,
    vars: Vec<String>,
}

impl Arena {
    fn build(f: &Formula, sig: &Signature) -> Result<(Self, usize), EvalError> {
        let mut a = Arena {
            nodes: Vec::new(),
            preds: Vec::new(),
            vars: Vec::new(),
        };
        let mut pred_ids = HashMap::new();
        let root = a.add(f, sig, &mut pred_ids)?;
        Ok((a, root))
    }

    fn var(&mut self, v: &str) -> usize {
        self.vars.iter().position(|x| x == v).unwrap_or_else(|| {
            self.vars.push(v.to_string());
            self.vars.len() - 1
        })
    }

    fn push(&mut self, node: Node, free: Vec<usize>) -> usize {
        self.nodes.push((node, free));
        self.nodes.len() - 1
    }

    fn union(&self, children: &[usize]) -> Vec<usize> {
        let mut free: Vec<usize> = children.iter().flat_map(|&c| self.nodes[c].1.iter().copied()).collect();
        free.sort_unstable();
        free.dedup();
        free
    }

    fn add(&mut self, f: &Formula, sig: &Signature, pred_ids: &mut HashMap<String, usize>) -> Result<usize, EvalError> {
        Ok(match f {
            Formula::True => self.push(Node::Const(true), vec![]),
            Formula::False => self.push(Node::Const(false), vec![]),
            Formula::Letter { letter, var } => {
                let v = self.var(var);
                self.push(Node::Letter(*letter, v), vec![v])
            }
            Formula::Pred { name, args } => {
                let idx = match pred_ids.get(name) {
                    Some(&i) => i,
                    None => {
                        let p = resolve(sig, name).ok_or_else(|| EvalError::UnknownPredicate(name.clone()))?;
                        self.preds.push(p);
                        pred_ids.insert(name.clone(), self.preds.len() - 1);
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
                let vs: Vec<usize> = args.iter().map(|a| self.var(a)).collect();
                let mut free = vs.clone();
                free.sort_unstable();
                free.dedup();
                self.push(Node::Pred(idx, vs), free)
            }
            Formula::Not(c) => {
                let c = self.add(c, sig, pred_ids)?;
                let free = self.nodes[c].1.clone();
                self.push(Node::Not(c), free)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let ids = cs.iter().map(|c| self.add(c, sig, pred_ids)).collect::<Result<Vec<_>, _>>()?;
                let free = self.union(&ids);
                let node = if matches!(f, Formula::And(_)) { Node::And(ids) } else { Node::Or(ids) };
                self.push(node, free)
            }
            Formula::Quant(q, v, c) => {
                let v = self.var(v);
                let c = self.add(c, sig, pred_ids)?;
                let free = self.nodes[c].1.iter().copied().filter(|&x| x != v).collect();
                self.push(Node::Quant(*q, v, c), free)
            }
        })
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Free(usize),
    Fixed(char),
}

/// All words of one length over an alphabet, as a BDD domain. A domain may
/// also pin one extra position to a fixed letter, so that the words `ucv`
/// share their variables with the words `uv`.
pub struct SymbolicWords {
    alphabet: Alphabet,
    n: usize,
    bits: usize,
    vars: BddVariableSet,
    valid: Bdd,
    slots: Vec<Slot>,
}

impl SymbolicWords {
    pub fn new(alphabet: &Alphabet, n: usize) -> Self {
        let k = alphabet.len().max(1);
        let bits = usize::BITS as usize - (k - 1).leading_zeros() as usize;
        let total = u16::try_from(n * bits).expect("too many BDD variables");
        let vars = BddVariableSet::new_anonymous(total);
        let mut me = SymbolicWords {
            alphabet: alphabet.clone(),
            n,
            bits,
            valid: vars.mk_true(),
            vars,
            slots: (0..n).map(Slot::Free).collect(),
        };
        let mut valid = me.vars.mk_true();
        if bits > 0 && k < (1 << bits) {
            for pos in 0..n {
                let any = (0..k).fold(me.vars.mk_false(), |acc, idx| acc.or(&me.code(pos, idx)));
                valid = valid.and(&any);
            }
        }
        me.valid = valid;
        me
    }

    /// The words of length `n + 1` with `c` at position `k`, over the
    /// variables of the words of length `n`.
    pub fn with_insertion(alphabet: &Alphabet, n: usize, k: usize, c: char) -> Self {
        let mut me = SymbolicWords::new(alphabet, n);
        me.slots.insert(k.min(n), Slot::Fixed(c));
        me
    }

    /// Length of the words, counting a pinned position.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    fn var(&self, pos: usize, bit: usize) -> BddVariable {
        BddVariable::from_index(pos * self.bits + bit)
    }

    fn code(&self, pos: usize, idx: usize) -> Bdd {
        (0..self.bits).fold(self.vars.mk_true(), |acc, b| {
            acc.and(&self.vars.mk_literal(self.var(pos, b), (idx >> b) & 1 == 1))
        })
    }

    /// Words whose letter at `pos` is `c`.
    pub fn letter_at(&self, pos: usize, c: char) -> Bdd {
        match self.slots[pos] {
            Slot::Fixed(d) if d == c => self.vars.mk_true(),
            Slot::Fixed(_) => self.vars.mk_false(),
            Slot::Free(pos) => match self.alphabet.letters().iter().position(|&x| x == c) {
                Some(idx) => self.code(pos, idx),
                None => self.vars.mk_false(),
            },
        }
    }

    /// The words of this length satisfying the closed formula `f`.
    pub fn language(&self, f: &Formula, sig: &Signature) -> Result<Bdd, EvalError> {
        let free = f.free_variables();
        if !free.is_empty() {
            return Err(EvalError::FreeVariables(free.into_iter().collect()));
        }
        let (arena, root) = Arena::build(f, sig)?;
        let mut run = Run {
            words: self,
            arena: &arena,
            env: vec![0; arena.vars.len()],
            memo: HashMap::new(),
        };
        Ok(run.eval(root).and(&self.valid))
    }

    pub fn decode(&self, valuation: &BddValuation) -> Word {
        Word::new((0..self.n).map(|pos| {
            let idx = (0..self.bits).fold(0, |acc, b| acc | (usize::from(valuation.value(self.var(pos, b))) << b));
            self.alphabet.letters()[idx]
        }))
    }

    /// Some word in `set`, if any.
    pub fn witness(&self, set: &Bdd) -> Option<Word> {
        set.and(&self.valid).sat_witness().map(|v| self.decode(&v))
    }

    /// Number of words in `set`.
    pub fn count(&self, set: &Bdd) -> f64 {
        set.and(&self.valid).cardinality()
    }

    /// Whether `w` (which must have this length) is in `set`.
    pub fn contains(&self, set: &Bdd, w: &Word) -> bool {
        let mut val = BddValuation::all_false(self.vars.num_vars());
        for (pos, c) in w.letters().iter().enumerate() {
            let idx = self.alphabet.letters().iter().position(|x| x == c).expect("letter in alphabet");
            for b in 0..self.bits {
                val.set_value(self.var(pos, b), (idx >> b) & 1 == 1);
            }
        }
        set.eval_in(&val)
    }
}

struct Run<'a> {
    words: &'a SymbolicWords,
    arena: &'a Arena,
    env: Vec<usize>,
    memo: HashMap<(usize, Vec<usize>), Bdd>,
}

impl Run<'_> {
    fn eval(&mut self, id: usize) -> Bdd {
        let (node, free) = &self.arena.nodes[id];
        let key = (id, free.iter().map(|&v| self.env[v]).collect::<Vec<_>>());
        if let Some(b) = self.memo.get(&key) {
            return b.clone();
        }
        let vars = &self.words.vars;
        let out = match node {
            Node::Const(b) => {
                if *b {
                    vars.mk_true()
                } else {
                    vars.mk_false()
                }
            }
            Node::Letter(c, v) => self.words.letter_at(self.env[*v], *c),
            Node::Pred(p, args) => {
                let vals: Vec<usize> = args.iter().map(|&v| self.env[v]).collect();
                if self.arena.preds[*p].holds(&vals, self.words.len()) {
                    vars.mk_true()
                } else {
                    vars.mk_false()
                }
            }
            Node::Not(c) => self.eval(*c).not(),
            Node::And(cs) => {
                let mut acc = vars.mk_true();
                for &c in cs {
                    acc = acc.and(&self.eval(c));
                    if acc.is_false() {
                        break;
                    }
                }
                acc
            }
            Node::Or(cs) => {
                let mut acc = vars.mk_false();
                for &c in cs {
                    acc = acc.or(&self.eval(c));
                    if acc.is_true() {
                        break;
                    }
                }
                acc
            }
            Node::Quant(q, v, c) => {
                let saved = self.env[*v];
                let exists = *q == Quantifier::Exists;
                let mut acc = if exists { vars.mk_false() } else { vars.mk_true() };
                for i in 0..self.words.len() {
                    self.env[*v] = i;
                    let b = self.eval(*c);
                    acc = if exists { acc.or(&b) } else { acc.and(&b) };
                    if (exists && acc.is_true()) || (!exists && acc.is_false()) {
                        break;
                    }
                }
                self.env[*v] = saved;
                acc
            }
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// The shortest word of length at most `n` on which `f` (over `sf`) and `g`
/// (over `sg`) disagree.
pub fn first_disagreement(
    f: &Formula,
    sf: &Signature,
    g: &Formula,
    sg: &Signature,
    alphabet: &Alphabet,
    n: usize,
) -> Result<Option<Word>, EvalError> {
    for len in 0..=n {
        let words = SymbolicWords::new(alphabet, len);
        let a = words.language(f, sf)?;
        let b = words.language(g, sg)?;
        if a != b {
            return Ok(words.witness(&a.xor(&b)));
        }
    }
    Ok(None)
}

/// The shortest `(uv, k)` with `|uv| < n` such that inserting `c` at
/// position `k` of `uv` changes membership in the language of `f`.
pub fn neutrality_violation(
    f: &Formula,
    sig: &Signature,
    alphabet: &Alphabet,
    c: char,
    n: usize,
) -> Result<Option<(Word, usize)>, EvalError> {
    for len in 0..n {
        let words = SymbolicWords::new(alphabet, len);
        let base = words.language(f, sig)?;
        for k in 0..=len {
            let inserted = SymbolicWords::with_insertion(alphabet, len, k, c).language(f, sig)?;
            if inserted != base {
                let w = words.witness(&base.xor(&inserted)).expect("the languages differ");
                return Ok(Some((w, k)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::evaluate;
    use crate::formula::parse;

    #[test]
    fn matches_concrete_evaluation() {
        let sig = Signature::parse("less+succ").unwrap();
        let abc = Alphabet::new(['a', 'b', 'c']);
        for src in [
            "E x. a(x) & (E y. x < y & b(y) & (E x. y < x & c(x)))",
            "A x. a(x) -> E y. succ(x, y) & b(y)",
            "E x. A y. !(x < y)",
            "true",
        ] {
            let f = parse(src).unwrap();
            for n in 0..=4 {
                let words = SymbolicWords::new(&abc, n);
                let lang = words.language(&f, &sig).unwrap();
                let mut count = 0;
                for w in abc.words(n).unwrap() {
                    let concrete = evaluate(&f, &w, &sig).unwrap();
                    assert_eq!(words.contains(&lang, &w), concrete, "{src} on {w}");
                    count += usize::from(concrete);
                }
                assert_eq!(words.count(&lang) as usize, count, "{src} at {n}");
            }
        }
    }

    #[test]
    fn neutrality_beyond_enumeration() {
        let ab = Alphabet::new(['a', 'c']);
        let sig = Signature::parse("less").unwrap();
        let f = parse("E x. a(x) & E y. x < y & a(y)").unwrap();
        assert_eq!(neutrality_violation(&f, &sig, &ab, 'c', 20).unwrap(), None);
        // only the length matters here, so inserting anything breaks it
        let g = parse("E x. E y. x < y").unwrap();
        let (w, k) = neutrality_violation(&g, &sig, &ab, 'c', 5).unwrap().unwrap();
        assert_eq!((w.len(), k), (1, 0));
    }

    #[test]
    fn finds_disagreements() {
        let sig = Signature::parse("less").unwrap();
        let ab = Alphabet::new(['a', 'b']);
        let f = parse("E x. a(x)").unwrap();
        let g = parse("E x. a(x) & E y. x < y & a(y)").unwrap();
        let w = first_disagreement(&f, &sig, &g, &sig, &ab, 5).unwrap().unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(first_disagreement(&f, &sig, &f, &sig, &ab, 20).unwrap(), None);
    }
}
