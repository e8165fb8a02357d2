//! Independent reference implementations used as oracles by the integration
//! tests. They share nothing with the library beyond its data types and the
//! raw membership test of predicates.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use fo2::efgame::rules::advance;
use fo2::efgame::{Alternations, GameSpec, GameState, Move, Player, Side, Strategy, Turn};
use fo2::formula::{Formula, Quantifier};
use fo2::predicates::{builtin, Predicate, Signature};
use fo2::Word;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod locality;
pub mod types;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// evaluation

/// Plain recursive evaluation with a name → position environment.
pub fn reference_eval(f: &Formula, w: &Word, sig: &Signature, env: &mut HashMap<String, usize>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Letter { letter, var } => w.letters()[env[var]] == *letter,
        Formula::Pred { name, args } => {
            let p = if name == "eq" && !sig.contains("eq") {
                builtin("eq").unwrap()
            } else {
                sig.get(name).expect("predicate in signature").clone()
            };
            let vals: Vec<usize> = args.iter().map(|a| env[a]).collect();
            p.holds(&vals, w.len())
        }
        Formula::Not(c) => !reference_eval(c, w, sig, env),
        Formula::And(cs) => cs.iter().all(|c| reference_eval(c, w, sig, env)),
        Formula::Or(cs) => cs.iter().any(|c| reference_eval(c, w, sig, env)),
        Formula::Quant(q, v, c) => {
            let saved = env.get(v).copied();
            let mut results = (0..w.len()).map(|i| {
                env.insert(v.clone(), i);
                reference_eval(c, w, sig, env)
            });
            let out = match q {
                Quantifier::Exists => results.any(|b| b),
                Quantifier::Forall => results.all(|b| b),
            };
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            out
        }
    }
}

pub fn reference_holds(f: &Formula, w: &Word, sig: &Signature) -> bool {
    reference_eval(f, w, sig, &mut HashMap::new())
}

/// Random two-variable formula over variables `x`, `y` with at most `depth`
/// nested quantifiers, letters from `letters` and binary predicates `preds`.
pub fn random_fo2(rng: &mut ChaCha8Rng, depth: usize, letters: &[char], preds: &[&str]) -> Formula {
    random_formula(rng, depth, letters, preds, &["x", "y"], &mut Vec::new())
}

fn random_formula(
    rng: &mut ChaCha8Rng,
    depth: usize,
    letters: &[char],
    preds: &[&str],
    vars: &[&str],
    bound: &mut Vec<String>,
) -> Formula {
    let atom = |rng: &mut ChaCha8Rng, bound: &Vec<String>| -> Formula {
        if bound.is_empty() {
            return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
        }
        let pick = |rng: &mut ChaCha8Rng| bound[rng.gen_range(0..bound.len())].clone();
        if preds.is_empty() || rng.gen_bool(0.45) {
            Formula::letter(letters[rng.gen_range(0..letters.len())], pick(rng))
        } else {
            let name = preds[rng.gen_range(0..preds.len())];
            Formula::pred(name, [pick(rng), pick(rng)])
        }
    };
    let choice = rng.gen_range(0..10);
    match choice {
        0..=3 if depth > 0 => {
            let v = vars[rng.gen_range(0..vars.len())].to_string();
            bound.push(v.clone());
            let body = random_formula(rng, depth - 1, letters, preds, vars, bound);
            bound.pop();
            if rng.gen_bool(0.5) {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
        4 | 5 => {
            let a = random_formula(rng, depth, letters, preds, vars, bound);
            let b = random_formula(rng, depth, letters, preds, vars, bound);
            if choice == 4 {
                Formula::and([a, b])
            } else {
                Formula::or([a, b])
            }
        }
        6 => Formula::not(random_formula(rng, depth, letters, preds, vars, bound)),
        _ => atom(rng, bound),
    }
}

/// Closes a formula by existentially quantifying its free variables.
pub fn close(f: Formula) -> Formula {
    f.free_variables().into_iter().fold(f, |acc, v| Formula::exists(v, acc))
}

// ---------------------------------------------------------------------------
// games

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct NaiveState {
    pairs: [Option<(usize, usize)>; 2],
    round: usize,
    alt: usize,
    last: Option<u8>,
}

fn allowed(spec: &GameSpec, round: usize, side: u8) -> Vec<usize> {
    let n = if side == 0 { spec.u.len() } else { spec.v.len() };
    let c = &spec.constraints;
    let set = match &c.start {
        Some(start) if round == 1 => Some(&start[side as usize]),
        _ => c.rounds.get(&round).map(|r| &r[side as usize]),
    };
    (0..n).filter(|&p| set.is_none_or(|s| s.contains(p))).collect()
}

fn naive_iso(spec: &GameSpec, preds: &[Predicate], pairs: &[(usize, usize)]) -> bool {
    for &(i, j) in pairs {
        if spec.u.letters()[i] != spec.v.letters()[j] {
            return false;
        }
    }
    for p in preds {
        match p.arity() {
            1 => {
                for &(i, j) in pairs {
                    if p.holds(&[i], spec.u.len()) != p.holds(&[j], spec.v.len()) {
                        return false;
                    }
                }
            }
            2 => {
                for &(i1, j1) in pairs {
                    for &(i2, j2) in pairs {
                        if p.holds(&[i1, i2], spec.u.len()) != p.holds(&[j1, j2], spec.v.len()) {
                            return false;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    true
}

/// Exhaustive minimax over full game states.
pub fn naive_winner(spec: &GameSpec) -> Player {
    let mut preds: Vec<Predicate> = spec.sig.iter().cloned().collect();
    if !spec.sig.contains("eq") {
        preds.push(builtin("eq").unwrap());
    }
    let mut memo = HashMap::new();
    let start = NaiveState {
        pairs: [None, None],
        round: 0,
        alt: 0,
        last: None,
    };
    if naive_dup(spec, &preds, start, &mut memo) {
        Player::Duplicator
    } else {
        Player::Spoiler
    }
}

fn naive_dup(spec: &GameSpec, preds: &[Predicate], st: NaiveState, memo: &mut HashMap<NaiveState, bool>) -> bool {
    if st.round == spec.rounds {
        return true;
    }
    if let Some(&v) = memo.get(&st) {
        return v;
    }
    let mut result = true;
    'outer: for side in 0u8..2 {
        let cost = usize::from(st.last.is_some_and(|l| l != side));
        let alt = st.alt + cost;
        if let Alternations::Bounded(m) = spec.alternations {
            if alt > m {
                continue;
            }
        }
        for p in allowed(spec, st.round + 1, side) {
            let mut saved = false;
            for q in allowed(spec, st.round + 1, 1 - side) {
                let pair = if side == 0 { (p, q) } else { (q, p) };
                let pairs: Vec<(usize, usize)> = st.pairs[1].into_iter().chain([pair]).collect();
                if !naive_iso(spec, preds, &pairs) {
                    continue;
                }
                let next = NaiveState {
                    pairs: [st.pairs[1], Some(pair)],
                    round: st.round + 1,
                    alt,
                    last: Some(side),
                };
                if naive_dup(spec, preds, next, memo) {
                    saved = true;
                    break;
                }
            }
            if !saved {
                result = false;
                break 'outer;
            }
        }
    }
    memo.insert(st, result);
    result
}

pub fn words_upto(letters: &[char], n: usize) -> Vec<Word> {
    let mut out = vec![Word::default()];
    let mut frontier = vec![Vec::<char>::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for &c in letters {
                let mut x = w.clone();
                x.push(c);
                next.push(x);
            }
        }
        out.extend(next.iter().map(|w| Word::new(w.iter().copied())));
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------------------
// neighbourhoods

/// `V(i, r)` straight from the recursive definition, with edges found by
/// scanning membership below `window`.
pub struct BruteNeighborhoods {
    preds: Vec<Predicate>,
    window: usize,
    memo: HashMap<(usize, usize), BTreeSet<usize>>,
}

impl BruteNeighborhoods {
    pub fn new(ids: &[&str], window: usize) -> Self {
        BruteNeighborhoods {
            preds: ids.iter().map(|id| builtin(id).unwrap()).collect(),
            window,
            memo: HashMap::new(),
        }
    }

    fn edge(&self, a: usize, b: usize) -> bool {
        self.preds.iter().any(|p| p.holds2(a, b, 0) || p.holds2(b, a, 0))
    }

    fn cl(set: &BTreeSet<usize>) -> BTreeSet<usize> {
        let lo = *set.iter().next().unwrap();
        let hi = *set.iter().next_back().unwrap();
        (lo..=hi).collect()
    }

    pub fn v(&mut self, i: usize, r: usize) -> BTreeSet<usize> {
        if let Some(s) = self.memo.get(&(i, r)) {
            return s.clone();
        }
        let out = if r == 0 {
            let mut s = BTreeSet::from([i]);
            for k1 in 0..=i {
                for k in i..self.window {
                    if self.edge(k1, k) {
                        s.insert(k1);
                        s.insert(k);
                    }
                }
            }
            Self::cl(&s)
        } else {
            let base = self.v(i, 0);
            let mut s = BTreeSet::new();
            for j in base {
                s.extend(self.v(j, r - 1));
            }
            Self::cl(&s)
        };
        self.memo.insert((i, r), out.clone());
        out
    }
}

pub fn gen_word(rng: &mut ChaCha8Rng, letters: &[char], max_len: usize) -> Word {
    let n = rng.gen_range(0..=max_len);
    Word::new((0..n).map(|_| letters[rng.gen_range(0..letters.len())]))
}

/// Replays `strategy` against every opposing move sequence using the naive
/// rules above; the library is used only to name states when looking moves
/// up. Returns the number of complete plays.
pub fn replay(spec: &GameSpec, strategy: &Strategy) -> Result<usize, String> {
    let mut preds: Vec<Predicate> = spec.sig.iter().cloned().collect();
    if !spec.sig.contains("eq") {
        preds.push(builtin("eq").unwrap());
    }
    let start = NaiveState {
        pairs: [None, None],
        round: 0,
        alt: 0,
        last: None,
    };
    replay_from(spec, &preds, strategy, start, GameState::initial())
}

fn replay_from(
    spec: &GameSpec,
    preds: &[Predicate],
    strategy: &Strategy,
    st: NaiveState,
    key: GameState,
) -> Result<usize, String> {
    let cost = |side: u8| usize::from(st.last.is_some_and(|l| l != side));
    let within = |alt: usize| match spec.alternations {
        Alternations::Bounded(m) => alt <= m,
        Alternations::Unbounded => true,
    };
    let side_of = |s: Side| if s == Side::U { 0u8 } else { 1 };
    let step = |side: u8, p: usize, q: usize| {
        let pair = if side == 0 { (p, q) } else { (q, p) };
        let pairs: Vec<(usize, usize)> = st.pairs[1].into_iter().chain([pair]).collect();
        let next = NaiveState {
            pairs: [st.pairs[1], Some(pair)],
            round: st.round + 1,
            alt: st.alt + cost(side),
            last: Some(side),
        };
        (naive_iso(spec, preds, &pairs), next)
    };
    let mut plays = 0;
    match strategy.role {
        Player::Spoiler => {
            if st.round == spec.rounds {
                return Err(format!("Duplicator survives all rounds at {key:?}"));
            }
            let mv = strategy.get(&Turn::Spoiler(key)).ok_or(format!("no Spoiler move at {key:?}"))?;
            let side = side_of(mv.side);
            if !within(st.alt + cost(side)) || !allowed(spec, st.round + 1, side).contains(&mv.position) {
                return Err(format!("illegal Spoiler move {mv:?} at {key:?}"));
            }
            for q in allowed(spec, st.round + 1, 1 - side) {
                let (iso, next) = step(side, mv.position, q);
                plays += if iso {
                    replay_from(spec, preds, strategy, next, advance(&key, mv, q))?
                } else {
                    1
                };
            }
            if plays == 0 {
                plays = 1;
            }
        }
        Player::Duplicator => {
            if st.round == spec.rounds {
                return Ok(1);
            }
            for side in 0u8..2 {
                if !within(st.alt + cost(side)) {
                    continue;
                }
                let s = if side == 0 { Side::U } else { Side::V };
                for p in allowed(spec, st.round + 1, side) {
                    let mv = Move::new(s, p);
                    let reply = strategy
                        .get(&Turn::Duplicator(key, mv))
                        .ok_or(format!("no Duplicator reply to {mv:?} at {key:?}"))?;
                    if !allowed(spec, st.round + 1, 1 - side).contains(&reply.position) {
                        return Err(format!("illegal reply {reply:?} to {mv:?} at {key:?}"));
                    }
                    let (iso, next) = step(side, p, reply.position);
                    if !iso {
                        return Err(format!("reply {reply:?} to {mv:?} at {key:?} loses"));
                    }
                    plays += replay_from(spec, preds, strategy, next, advance(&key, mv, reply.position))?;
                }
            }
            plays = plays.max(1);
        }
    }
    Ok(plays)
}
