//! Exact solver.
//!
//! After round `r` the future of a game depends only on the pair just
//! placed: the older pair is about to be removed, and everything the next
//! pebble is compared against is the current pair. Positions are therefore
//! grouped into classes, computed from the last round backwards:
//!
//! ```text
//! κ_s(x)   = atom(x)
//! κ_r(x)   = (atom(x), { (label(x, z), κ_{r+1}(z)) : z allowed in round r + 1 })
//! ```
//!
//! where `atom` is the letter together with every predicate on `(x, …, x)` and
//! `label` the comparison of `x` and `z` together with every binary predicate
//! in both directions. Two positions with the same class are interchangeable,
//! so the game is solved on pairs of classes and only turned back into
//! positions when a concrete move is requested.
//!
//! When every binary predicate is either determined by the order or backed
//! by a neighbour oracle, all `z` outside `{x} ∪ neighbours(x)` share one of
//! two labels (below or above `x`), and the successor set of `x` is assembled
//! from per-class counts instead of a scan over the whole next domain.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::rules::{self, charge, iso_predicates, side_open};
use super::{Alternations, GameError, GameSpec, GameState, Move, Player, PositionSet, Side};
use crate::predicates::Predicate;

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// Upper bound on the estimated number of elementary class-building
    /// steps.
    pub budget: u128,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { budget: 2_000_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Label {
    cmp: Ordering,
    bits: u64,
}

#[derive(Clone, Debug)]
struct ClassInfo {
    atom: u32,
    succ: Vec<(Label, u32)>,
}

#[derive(Clone, Debug, Default)]
struct Round {
    domain: [PositionSet; 2],
    class_of: [Vec<u32>; 2],
    /// Per side, class id → sorted member positions.
    members: [HashMap<u32, Vec<usize>>; 2],
    /// Per side, class ids sorted by smallest member.
    present: [Vec<u32>; 2],
    info: Vec<ClassInfo>,
}

type Key = (usize, u32, u32, usize, Option<Side>);

/// A solved game. Positions are classified eagerly; the game on classes is
/// evaluated lazily and memoised.
#[derive(Clone, Debug)]
pub struct Solution {
    spec: GameSpec,
    unary: Vec<Predicate>,
    binary: Vec<Predicate>,
    rounds: Vec<Round>,
    memo: HashMap<Key, bool>,
}

/// Solves `spec` with the default configuration.
pub fn solve(spec: &GameSpec) -> Result<Solution, GameError> {
    Solution::new(spec, SolverConfig::default())
}

impl Solution {
    pub fn new(spec: &GameSpec, config: SolverConfig) -> Result<Self, GameError> {
        if spec.rounds == 0 {
            return Err(GameError::NoRounds);
        }
        let preds = iso_predicates(spec);
        let mut unary = Vec::new();
        let mut binary = Vec::new();
        for p in preds {
            match p.arity() {
                1 => unary.push(p),
                2 => binary.push(p),
                k => return Err(GameError::UnsupportedArity(p.name().to_string(), k)),
            }
        }
        if binary.len() > 32 || unary.len() + binary.len() > 64 {
            return Err(GameError::UnsupportedArity("signature too large".into(), binary.len()));
        }
        let fast = binary
            .iter()
            .all(|p| p.order_rule().is_some() || (p.has_oracle() && p.is_uniform()));

        let s = spec.rounds;
        let domains: Vec<[PositionSet; 2]> =
            (1..=s).map(|r| [spec.allowed(r, Side::U), spec.allowed(r, Side::V)]).collect();
        let work: u128 = (0..s)
            .map(|k| {
                (0..2)
                    .map(|side| {
                        let here = domains[k][side].len() as u128;
                        let next = domains.get(k + 1).map_or(1, |d| d[side].len() as u128);
                        if fast {
                            here * 64
                        } else {
                            here * next * binary.len().max(1) as u128
                        }
                    })
                    .sum::<u128>()
            })
            .sum();
        if work > config.budget {
            return Err(GameError::BudgetExceeded {
                work,
                budget: config.budget,
            });
        }

        let mut sol = Solution {
            spec: spec.clone(),
            unary,
            binary,
            rounds: Vec::with_capacity(s),
            memo: HashMap::new(),
        };
        let mut atoms: HashMap<(char, u64), u32> = HashMap::new();
        let mut built: Vec<Round> = Vec::with_capacity(s);
        for r in (1..=s).rev() {
            let next = built.last();
            let mut round = Round {
                domain: domains[r - 1].clone(),
                ..Round::default()
            };
            let mut intern: HashMap<(u32, Vec<(Label, u32)>), u32> = HashMap::new();
            for side in Side::BOTH {
                let si = side.index();
                let mut classes = Vec::with_capacity(round.domain[si].len());
                for x in round.domain[si].iter() {
                    let atom = sol.atom(side, x, &mut atoms);
                    let succ = match next {
                        None => Vec::new(),
                        Some(nr) if fast => sol.successors_fast(side, x, nr),
                        Some(nr) => sol.successors_scan(side, x, nr),
                    };
                    let fresh = round.info.len() as u32;
                    let id = *intern.entry((atom, succ.clone())).or_insert(fresh);
                    if id == fresh {
                        round.info.push(ClassInfo { atom, succ });
                    }
                    classes.push(id);
                    round.members[si].entry(id).or_default().push(x);
                }
                round.class_of[si] = classes;
                let mut present: Vec<u32> = round.members[si].keys().copied().collect();
                present.sort_by_key(|c| round.members[si][c][0]);
                round.present[si] = present;
            }
            built.push(round);
        }
        built.reverse();
        sol.rounds = built;
        Ok(sol)
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn length(&self, side: Side) -> usize {
        self.spec.word(side).len()
    }

    fn atom(&self, side: Side, x: usize, atoms: &mut HashMap<(char, u64), u32>) -> u32 {
        let n = self.length(side);
        let mut bits = 0u64;
        for (k, p) in self.unary.iter().enumerate() {
            if p.holds(&[x], n) {
                bits |= 1 << k;
            }
        }
        let off = self.unary.len();
        for (k, p) in self.binary.iter().enumerate() {
            if p.holds2(x, x, n) {
                bits |= 1 << (off + k);
            }
        }
        let key = (self.spec.word(side).at(x), bits);
        let fresh = atoms.len() as u32;
        *atoms.entry(key).or_insert(fresh)
    }

    fn label(&self, side: Side, x: usize, z: usize) -> Label {
        let n = self.length(side);
        let mut bits = 0u64;
        for (k, p) in self.binary.iter().enumerate() {
            if p.holds2(x, z, n) {
                bits |= 1 << (2 * k);
            }
            if p.holds2(z, x, n) {
                bits |= 1 << (2 * k + 1);
            }
        }
        Label { cmp: x.cmp(&z), bits }
    }

    /// The label shared by every `z` that is not a neighbour of `x` and lies
    /// on the `cmp` side of it.
    fn generic_label(&self, cmp: Ordering) -> Label {
        let idx = |o: Ordering| match o {
            Ordering::Less => 0,
            Ordering::Equal => 1,
            Ordering::Greater => 2,
        };
        let mut bits = 0u64;
        for (k, p) in self.binary.iter().enumerate() {
            if let Some(rule) = p.order_rule() {
                if rule[idx(cmp)] {
                    bits |= 1 << (2 * k);
                }
                if rule[idx(cmp.reverse())] {
                    bits |= 1 << (2 * k + 1);
                }
            }
        }
        Label { cmp, bits }
    }

    fn successors_scan(&self, side: Side, x: usize, next: &Round) -> Vec<(Label, u32)> {
        let si = side.index();
        let mut out: Vec<(Label, u32)> = next.domain[si]
            .iter()
            .zip(&next.class_of[si])
            .map(|(z, &c)| (self.label(side, x, z), c))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn successors_fast(&self, side: Side, x: usize, next: &Round) -> Vec<(Label, u32)> {
        let si = side.index();
        let mut specials: Vec<usize> = vec![x];
        for p in &self.binary {
            if p.order_rule().is_none() {
                specials.extend(p.neighbors(x).expect("fast path requires oracles"));
            }
        }
        specials.sort_unstable();
        specials.dedup();
        specials.retain(|&z| next.domain[si].contains(z));

        let mut out = Vec::new();
        let mut special_counts: HashMap<u32, (usize, usize)> = HashMap::new();
        for &z in &specials {
            let c = next.class_of[si][next.domain[si].rank(z).unwrap()];
            out.push((self.label(side, x, z), c));
            let e = special_counts.entry(c).or_default();
            match z.cmp(&x) {
                Ordering::Less => e.0 += 1,
                Ordering::Greater => e.1 += 1,
                Ordering::Equal => {}
            }
        }
        // z < x means x > z
        let below = self.generic_label(Ordering::Greater);
        let above = self.generic_label(Ordering::Less);
        for &c in &next.present[si] {
            let list = &next.members[si][&c];
            let lt = list.partition_point(|&z| z < x);
            let le = list.partition_point(|&z| z <= x);
            let gt = list.len() - le;
            let (sl, sg) = special_counts.get(&c).copied().unwrap_or_default();
            if lt > sl {
                out.push((below, c));
            }
            if gt > sg {
                out.push((above, c));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn class_at(&self, round: usize, side: Side, pos: usize) -> Option<u32> {
        let rd = self.rounds.get(round.checked_sub(1)?)?;
        let rank = rd.domain[side.index()].rank(pos)?;
        Some(rd.class_of[side.index()][rank])
    }

    fn normalise(&self, alt: usize, last: Option<Side>) -> (usize, Option<Side>) {
        match self.spec.alternations {
            Alternations::Unbounded => (0, None),
            Alternations::Bounded(_) => (alt, last),
        }
    }

    fn next_alt(&self, alt: usize, last: Option<Side>, side: Side) -> Option<usize> {
        let st = GameState {
            alternations_used: alt,
            spoiler_last: last,
            ..GameState::default()
        };
        let a = alt + charge(&st, side);
        self.spec.alternations.allows(a).then_some(a)
    }

    /// Whether Duplicator wins from classes `(cu, cv)` placed in round `r`.
    fn dup_wins(&mut self, r: usize, cu: u32, cv: u32, alt: usize, last: Option<Side>) -> bool {
        if r == self.spec.rounds {
            return true;
        }
        let (alt, last) = self.normalise(alt, last);
        let key = (r, cu, cv, alt, last);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut result = true;
        'sides: for side in Side::BOTH {
            let Some(na) = self.next_alt(alt, last, side) else { continue };
            let (mine, theirs) = match side {
                Side::U => (cu, cv),
                Side::V => (cv, cu),
            };
            let info = &self.rounds[r - 1].info;
            let options = info[mine as usize].succ.clone();
            let replies = info[theirs as usize].succ.clone();
            for (label, c1) in options {
                if !self.has_reply(r + 1, side, c1, replies.iter().filter(|(l, _)| *l == label).map(|&(_, c)| c), na) {
                    result = false;
                    break 'sides;
                }
            }
        }
        self.memo.insert(key, result);
        result
    }

    /// Whether some candidate class answers Spoiler's class `c1` (placed in
    /// round `r` on `side`) with a Duplicator win.
    fn has_reply(&mut self, r: usize, side: Side, c1: u32, candidates: impl Iterator<Item = u32>, alt: usize) -> bool {
        let candidates: Vec<u32> = candidates.collect();
        let found = self.winning_replies(r, side, c1, &candidates, alt).next().is_some();
        found
    }

    fn winning_replies<'a>(
        &'a mut self,
        r: usize,
        side: Side,
        c1: u32,
        candidates: &'a [u32],
        alt: usize,
    ) -> impl Iterator<Item = u32> + 'a {
        let atom = self.rounds[r - 1].info[c1 as usize].atom;
        candidates.iter().copied().filter(move |&c2| {
            if self.rounds[r - 1].info[c2 as usize].atom != atom {
                return false;
            }
            let (cu, cv) = match side {
                Side::U => (c1, c2),
                Side::V => (c2, c1),
            };
            self.dup_wins(r, cu, cv, alt, Some(side))
        })
    }

    fn root_dup_wins(&mut self) -> bool {
        for side in Side::BOTH {
            let mine = self.rounds[0].present[side.index()].clone();
            let theirs = self.rounds[0].present[side.other().index()].clone();
            for c1 in mine {
                if !self.has_reply(1, side, c1, theirs.iter().copied(), 0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn winner(&mut self) -> Player {
        if self.root_dup_wins() {
            Player::Duplicator
        } else {
            Player::Spoiler
        }
    }

    /// Who wins from `state`, a position reached by legal play.
    pub fn winner_from(&mut self, state: &GameState) -> Player {
        let Some((x, y)) = state.current else {
            return self.winner();
        };
        if !rules::is_partial_iso(state, &self.spec) {
            return Player::Spoiler;
        }
        let r = state.rounds_used;
        match (self.class_at(r, Side::U, x), self.class_at(r, Side::V, y)) {
            (Some(cu), Some(cv)) => {
                if self.dup_wins(r, cu, cv, state.alternations_used, state.spoiler_last) {
                    Player::Duplicator
                } else {
                    Player::Spoiler
                }
            }
            // a pebble outside the round's domain cannot arise from legal play
            _ => Player::Spoiler,
        }
    }

    /// Spoiler's options from `state`: for each open side, the pairs
    /// (label against his previous pebble, class) he can realise.
    fn spoiler_options(&self, state: &GameState, side: Side) -> Vec<(Option<Label>, u32)> {
        let r = state.rounds_used;
        match state.current {
            None => self.rounds[0].present[side.index()].iter().map(|&c| (None, c)).collect(),
            Some((x, y)) => {
                let mine = match side {
                    Side::U => self.class_at(r, Side::U, x),
                    Side::V => self.class_at(r, Side::V, y),
                };
                match mine {
                    Some(c) => self.rounds[r - 1].info[c as usize]
                        .succ
                        .iter()
                        .map(|&(l, c)| (Some(l), c))
                        .collect(),
                    None => Vec::new(),
                }
            }
        }
    }

    fn candidates_for(&self, state: &GameState, side: Side, label: Option<Label>) -> Vec<u32> {
        let other = side.other();
        self.spoiler_options(state, other)
            .into_iter()
            .filter(|(l, _)| *l == label)
            .map(|(_, c)| c)
            .collect()
    }

    fn pebble(state: &GameState, side: Side) -> Option<usize> {
        state.current.map(|(x, y)| match side {
            Side::U => x,
            Side::V => y,
        })
    }

    /// Smallest position on `side` in round `round` with class `c` and the
    /// given label against the side's current pebble.
    fn realise(&self, state: &GameState, side: Side, round: usize, c: u32, label: Option<Label>) -> Option<usize> {
        let list = self.rounds[round - 1].members[side.index()].get(&c)?;
        match (label, Self::pebble(state, side)) {
            (Some(l), Some(prev)) => list.iter().copied().find(|&z| self.label(side, prev, z) == l),
            _ => list.first().copied(),
        }
    }

    /// Spoiler's move from `state`: the smallest winning move (`u` before
    /// `v`), flagged `true`, or the smallest legal move flagged `false` when
    /// he has no winning move. `None` when he cannot move.
    pub fn spoiler_move(&mut self, state: &GameState) -> Option<(Move, bool)> {
        let r = state.rounds_used;
        if r >= self.spec.rounds || self.spec.rounds == 0 {
            return None;
        }
        let mut fallback: Option<Move> = None;
        for side in Side::BOTH {
            if !side_open(&self.spec, state, side) {
                continue;
            }
            let Some(na) = self.next_alt(state.alternations_used, state.spoiler_last, side) else {
                continue;
            };
            let mut best: Option<usize> = None;
            for (label, c1) in self.spoiler_options(state, side) {
                let Some(pos) = self.realise(state, side, r + 1, c1, label) else { continue };
                if fallback.is_none() || (fallback.is_some_and(|f| f.side == side && pos < f.position)) {
                    fallback = Some(Move::new(side, pos));
                }
                if best.is_some_and(|b| b <= pos) {
                    continue;
                }
                let candidates = self.candidates_for(state, side, label);
                if !self.has_reply(r + 1, side, c1, candidates.into_iter(), na) {
                    best = Some(pos);
                }
            }
            if let Some(pos) = best {
                return Some((Move::new(side, pos), true));
            }
        }
        fallback.map(|m| (m, false))
    }

    /// Duplicator's answer to `mv` in `state`: the smallest winning reply
    /// flagged `true`; otherwise the smallest reply keeping the isomorphism,
    /// or failing that the smallest legal position, flagged `false`. `None`
    /// when no legal reply exists or `mv` is not legal.
    pub fn duplicator_reply(&mut self, state: &GameState, mv: Move) -> Option<(usize, bool)> {
        rules::check_spoiler_move(&self.spec, state, mv).ok()?;
        let r = state.rounds_used;
        let side = mv.side;
        let other = side.other();
        let c1 = self.class_at(r + 1, side, mv.position)?;
        let label = Self::pebble(state, side).map(|prev| self.label(side, prev, mv.position));
        let na = self.next_alt(state.alternations_used, state.spoiler_last, side)?;
        let candidates = self.candidates_for(state, side, label);
        let winners: Vec<u32> = self.winning_replies(r + 1, side, c1, &candidates, na).collect();
        let best = winners
            .iter()
            .filter_map(|&c2| self.realise(state, other, r + 1, c2, label))
            .min();
        if let Some(pos) = best {
            return Some((pos, true));
        }
        let atom = self.rounds[r].info[c1 as usize].atom;
        let keeps_iso = candidates
            .iter()
            .filter(|&&c2| self.rounds[r].info[c2 as usize].atom == atom)
            .filter_map(|&c2| self.realise(state, other, r + 1, c2, label))
            .min();
        keeps_iso
            .or_else(|| rules::duplicator_domain(&self.spec, state, mv).min())
            .map(|p| (p, false))
    }

    /// Number of classes per round, `u` and `v` sides merged.
    pub fn class_counts(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.info.len()).collect()
    }
}
