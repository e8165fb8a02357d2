//! Rewriting a neutral-letter formula over arbitrary numerical predicates.
//!
//! On a word `w` of length `n ≥ 3` let `j = ⌊log₂(n − 1)⌋` and `h = 2^{j−1}`.
//! Since the letter `c` is neutral, `w` and `w·c^{4h−n}` agree on the
//! formula, and the positions `0..4h` of the padded word split into four
//! blocks `E_k = [h + kh, 2h + kh)` for `k ∈ {−1, 0, 1, 2}`. Every position
//! is written `x_k = x + kh` with `x ∈ E₀`, so a variable ranges over `E₀`
//! and carries its block index in the rewriting environment:
//!
//! - `x_{−1}`, `x_1`, `x_2` are `msb0(x)`, `msb10(x)` and `msb11(x)`;
//! - order predicates compare block indices first;
//! - any other predicate `P` becomes `Q_{k,ℓ}(x, y)`, which holds when `x`
//!   and `y` lie in the same dyadic block `[h', 2h')` and
//!   `(x + kh', y + ℓh') ∈ P_{4h'}` — a finite-degree relation;
//! - a letter at `x_k` beyond the word is the neutral letter.
//!
//! Words of length at most two are handled by an explicit case split.

use std::collections::{BTreeMap, HashMap};

use crate::evaluator::{evaluate, resolve, Alphabet, Word};
use crate::formula::{Formula, Quantifier};
use crate::predicates::{builtin, Predicate, Signature};

use super::CollapseError;

const BLOCKS: [i8; 4] = [-1, 0, 1, 2];

/// The rewritten formula and the interpretation of every predicate it uses.
#[derive(Clone, Debug)]
pub struct TransformResult {
    pub formula: Formula,
    pub env: Signature,
}

/// Rewrites the closed two-variable formula `f` (over `sig`, with neutral
/// letter `c`) into an equivalent formula over `less`, `msb0`, `msb10`,
/// `msb11`, `pow2diag` and generated `Q` predicates.
pub fn transform_theorem3(
    f: &Formula,
    sig: &Signature,
    c: char,
    alphabet: &Alphabet,
) -> Result<TransformResult, CollapseError> {
    let vars: Vec<String> = f.variables().into_iter().map(str::to_string).collect();
    if vars.len() > 2 {
        return Err(CollapseError::NotTwoVariable(vars));
    }
    let free = f.free_variables();
    if !free.is_empty() {
        return Err(CollapseError::Open(free.into_iter().collect()));
    }
    if !alphabet.contains(c) {
        return Err(CollapseError::NeutralNotInAlphabet(c));
    }
    let (x, y) = match vars.as_slice() {
        [a, b] => (a.clone(), b.clone()),
        [a] => (a.clone(), if a == "y" { "x".to_string() } else { "y".to_string() }),
        _ => ("x".to_string(), "y".to_string()),
    };

    let mut rw = Rewriter {
        sig,
        c,
        pair: (x.clone(), y.clone()),
        generated: BTreeMap::new(),
    };
    let big = rw.formula(f, &mut HashMap::new())?;
    let small = small_words(f, sig, alphabet, &x, &y)?;
    let is_small = Formula::not(Formula::exists(
        &x,
        Formula::and([
            Formula::exists(&y, Formula::less(&y, &x)),
            Formula::exists(&y, Formula::less(&x, &y)),
        ]),
    ));
    let formula = Formula::or([
        Formula::and([is_small.clone(), small]),
        Formula::and([Formula::not(is_small), big]),
    ]);

    let mut env = Signature::empty();
    for id in ["less", "msb0", "msb10", "msb11", "pow2diag"] {
        env.push(builtin(id)?)?;
    }
    for p in rw.generated.into_values() {
        env.push(p)?;
    }
    Ok(TransformResult { formula, env })
}

struct Rewriter<'a> {
    sig: &'a Signature,
    c: char,
    pair: (String, String),
    generated: BTreeMap<String, Predicate>,
}

impl Rewriter<'_> {
    fn other(&self, v: &str) -> String {
        if v == self.pair.0 {
            self.pair.1.clone()
        } else {
            self.pair.0.clone()
        }
    }

    fn formula(&mut self, f: &Formula, env: &mut HashMap<String, i8>) -> Result<Formula, CollapseError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Letter { letter, var } => self.letter(*letter, var, env[var]),
            Formula::Pred { name, args } => self.atom(name, args, env)?,
            Formula::Not(g) => Formula::not(self.formula(g, env)?),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| self.formula(g, env)).collect::<Result<Vec<_>, _>>()?),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| self.formula(g, env)).collect::<Result<Vec<_>, _>>()?),
            Formula::Quant(q, v, body) => {
                let saved = env.get(v).copied();
                let mut parts = Vec::with_capacity(BLOCKS.len());
                for k in BLOCKS {
                    env.insert(v.clone(), k);
                    let inner = self.formula(body, env)?;
                    let guard = self.in_e0(v);
                    parts.push(match q {
                        Quantifier::Exists => Formula::exists(v, Formula::and([guard, inner])),
                        Quantifier::Forall => Formula::forall(v, Formula::implies(guard, inner)),
                    });
                }
                match saved {
                    Some(k) => env.insert(v.clone(), k),
                    None => env.remove(v),
                };
                match q {
                    Quantifier::Exists => Formula::or(parts),
                    Quantifier::Forall => Formula::and(parts),
                }
            }
        })
    }

    /// `v ∈ E₀`: exactly one power of two lies strictly after `v` in the word.
    fn in_e0(&self, v: &str) -> Formula {
        let w = self.other(v);
        let pow = |z: &str| Formula::pred("pow2diag", [z, z]);
        let after = Formula::and([Formula::less(v, &w), pow(&w)]);
        Formula::and([
            Formula::exists(&w, after.clone()),
            Formula::forall(
                &w,
                Formula::implies(after, Formula::forall(v, Formula::implies(Formula::less(&w, v), Formula::not(pow(v))))),
            ),
        ])
    }

    fn letter(&self, a: char, var: &str, k: i8) -> Formula {
        if k == 0 {
            return Formula::letter(a, var);
        }
        let msb = match k {
            -1 => "msb0",
            1 => "msb10",
            _ => "msb11",
        };
        let y = self.other(var);
        let shifted = Formula::exists(&y, Formula::and([Formula::pred(msb, [var, &y]), Formula::letter(a, &y)]));
        if a == self.c {
            // beyond the end of the word the padded letter is neutral
            Formula::or([shifted, Formula::forall(&y, Formula::not(Formula::pred(msb, [var, &y])))])
        } else {
            shifted
        }
    }

    fn atom(&mut self, name: &str, args: &[String], env: &HashMap<String, i8>) -> Result<Formula, CollapseError> {
        let p = resolve(self.sig, name).ok_or_else(|| crate::evaluator::EvalError::UnknownPredicate(name.to_string()))?;
        if p.arity() != args.len() {
            return Err(crate::evaluator::EvalError::ArityMismatch {
                name: name.to_string(),
                expected: p.arity(),
                found: args.len(),
            }
            .into());
        }
        match args {
            [a] => {
                let k = env[a];
                let q = self.generate(&p, &[k]);
                Ok(Formula::pred(q, [a]))
            }
            [a, b] => {
                let (k, l) = (env[a], env[b]);
                if let Some(rule) = p.order_rule() {
                    return Ok(order_atom(rule, a, b, k, l));
                }
                let q = self.generate(&p, &[k, l]);
                Ok(Formula::pred(q, [a, b]))
            }
            _ => Err(CollapseError::Arity {
                name: name.to_string(),
                arity: args.len(),
            }),
        }
    }

    /// Registers `Q_{k,ℓ}` (or `Q_k`) for `p` and returns its name.
    fn generate(&mut self, p: &Predicate, shifts: &[i8]) -> String {
        let label = |k: &i8| if *k < 0 { format!("m{}", -k) } else { k.to_string() };
        let base: String = p.name().chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
        let name = format!(
            "Q_{base}_{}",
            shifts.iter().map(label).collect::<Vec<_>>().join("_")
        );
        if !self.generated.contains_key(&name) {
            let q = shifted_predicate(&name, p.clone(), shifts);
            self.generated.insert(name.clone(), q);
        }
        name
    }
}

/// `cmp(x_k, y_ℓ)` is decided by the block indices unless they coincide.
fn order_atom(rule: [bool; 3], a: &str, b: &str, k: i8, l: i8) -> Formula {
    if k != l {
        return if rule[if k < l { 0 } else { 2 }] { Formula::True } else { Formula::False };
    }
    let cases = [Formula::less(a, b), Formula::equal(a, b), Formula::less(b, a)];
    let holding: Vec<Formula> = cases.into_iter().zip(rule).filter(|(_, r)| *r).map(|(f, _)| f).collect();
    match holding.len() {
        0 => Formula::False,
        3 => Formula::True,
        1 => holding.into_iter().next().unwrap(),
        _ => Formula::or(holding),
    }
}

fn block(x: usize) -> Option<usize> {
    (x > 0).then(|| 1usize << x.ilog2())
}

/// The uniform predicate `{ x̄ in one block [h, 2h) | (x_i + k_i h)_i ∈ P_{4h} }`.
fn shifted_predicate(name: &str, p: Predicate, shifts: &[i8]) -> Predicate {
    let arity = shifts.len();
    let shifts = shifts.to_vec();
    let holds = move |args: &[usize]| -> bool {
        let Some(h) = block(args[0]) else { return false };
        if args.iter().any(|&a| block(a) != Some(h)) {
            return false;
        }
        let shifted: Option<Vec<usize>> = args
            .iter()
            .zip(&shifts)
            .map(|(&a, &k)| a.checked_add_signed(isize::from(k) * h as isize))
            .collect();
        shifted.is_some_and(|s| p.holds(&s, 4 * h))
    };
    let q = Predicate::uniform(name, arity, holds.clone());
    if arity == 2 {
        q.with_neighbors(move |x| {
            let Some(h) = block(x) else { return Vec::new() };
            (h..2 * h).filter(|&y| holds(&[x, y]) || holds(&[y, x])).collect()
        })
    } else {
        q
    }
}

/// A formula accepting exactly the words of length at most two that `f`
/// accepts, valid on words of length at most two.
fn small_words(f: &Formula, sig: &Signature, alphabet: &Alphabet, x: &str, y: &str) -> Result<Formula, CollapseError> {
    let some = Formula::exists(x, Formula::True);
    let pair = Formula::exists(x, Formula::exists(y, Formula::less(x, y)));
    let mut accepted = Vec::new();
    for w in alphabet.words_upto(2)? {
        if !evaluate(f, &w, sig)? {
            continue;
        }
        accepted.push(describe(&w, &some, &pair, x, y));
    }
    Ok(Formula::or(accepted))
}

fn describe(w: &Word, some: &Formula, pair: &Formula, x: &str, y: &str) -> Formula {
    match w.letters() {
        [] => Formula::not(some.clone()),
        [a] => Formula::and([some.clone(), Formula::not(pair.clone()), Formula::exists(x, Formula::letter(*a, x))]),
        [a, b] => Formula::and([
            pair.clone(),
            Formula::exists(x, Formula::and([Formula::letter(*a, x), Formula::exists(y, Formula::less(x, y))])),
            Formula::exists(x, Formula::and([Formula::letter(*b, x), Formula::exists(y, Formula::less(y, x))])),
        ]),
        _ => unreachable!("only words of length at most two are described"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::predicates::random_relation;

    fn agrees(src: &str, sig: &Signature, n: usize) {
        let f = parse(src).unwrap();
        let alphabet = Alphabet::new(['a', 'c']);
        let t = transform_theorem3(&f, sig, 'c', &alphabet).unwrap();
        for w in alphabet.words_upto(n).unwrap() {
            assert_eq!(evaluate(&f, &w, sig).unwrap(), evaluate(&t.formula, &w, &t.env).unwrap(), "{src} on {w}");
        }
    }

    #[test]
    fn constants_and_letters() {
        let sig = Signature::parse("less").unwrap();
        agrees("true", &sig, 9);
        agrees("E x. a(x)", &sig, 9);
        agrees("E x. (a(x) & E y. (y < x & a(y)))", &sig, 9);
    }

    #[test]
    fn random_uniform_relation() {
        let sig = Signature::parse("less").unwrap().with(random_relation("rnd", 7, 0.4));
        agrees("E x. (a(x) & A y. (rnd(x, y) -> !a(y)))", &sig, 10);
    }

    #[test]
    fn generated_predicates_are_named_by_block() {
        let sig = Signature::parse("less").unwrap().with(random_relation("rnd", 1, 0.5));
        let f = parse("E x. E y. rnd(x, y)").unwrap();
        let t = transform_theorem3(&f, &sig, 'c', &Alphabet::new(['a', 'c'])).unwrap();
        assert!(t.env.contains("Q_rnd_m1_2"));
        assert!(t.env.contains("Q_rnd_0_0"));
        assert!(!t.env.contains("rnd"));
    }

    #[test]
    fn rejects_bad_input() {
        let sig = Signature::parse("less").unwrap();
        let ab = Alphabet::new(['a', 'c']);
        let three = parse("E x. E y. E z. (x < y & y < z)").unwrap();
        assert!(matches!(transform_theorem3(&three, &sig, 'c', &ab), Err(CollapseError::NotTwoVariable(_))));
        let open = parse("a(x)").unwrap();
        assert!(matches!(transform_theorem3(&open, &sig, 'c', &ab), Err(CollapseError::Open(_))));
        let closed = parse("E x. a(x)").unwrap();
        assert!(matches!(
            transform_theorem3(&closed, &sig, 'b', &ab),
            Err(CollapseError::NeutralNotInAlphabet('b'))
        ));
    }
}
