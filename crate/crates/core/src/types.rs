//! Types of positions and triples, and extractions whose triples all share
//! one type.
//!
//! For a triple `S = (i₋, i, i₊)` and radius `s`, the `0`-type of `x` records
//! `x < i`, `x > i` and `P(x, x)` for every non-order predicate `P`; the
//! `(r + 1)`-type of `x` is the set of pairs `(C(x, y), r-type(y))` for
//! `y ∈ I_(r,s)(i₋, i₊)`, where `C(x, y)` holds both orders and every
//! `P(x, y)`, `P(y, x)`. The `s'`-type of the triple pairs the `s'`-types
//! found on `J_{s'}(i, i₊)` with those found on `V(i, s)`.
//!
//! Types are interned in a [`TypeTable`], so equal handles mean equal types.
//! Only `x`, its neighbours, and two "generic" labels (everything else below
//! or above `x`) matter when building the set for `x`, which keeps the
//! computation linear in the interval size up to a logarithmic factor.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::efgame::constrained::Triple;
use crate::locality::{Extraction, LocalityError, NeighborGraph};
use crate::predicates::{Predicate, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error(transparent)]
    Locality(#[from] LocalityError),
    #[error("position {x} lies outside the level-{r} interval {lo}..={hi}")]
    OutsideInterval { x: usize, r: usize, lo: usize, hi: usize },
    #[error("level {r} exceeds the radius {s}")]
    LevelTooHigh { r: usize, s: usize },
    #[error("too many predicates for the type encoding ({0} > 31)")]
    TooManyPredicates(usize),
    #[error("interval of {size} positions exceeds the budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("no monochromatic subset of size {wanted} in a universe of {universe}")]
    Exhausted { universe: usize, wanted: usize },
}

/// Handle to an interned type. Handles from the same [`TypeTable`] are equal
/// exactly when the types are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionType(u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeValue {
    /// Level 0: bit `k` of the tuple `(x < i, x > i, P¹(x, x), …)`.
    Atom(u64),
    /// Level `r + 1`: sorted, deduplicated `(C(x, y), r-type(y))` pairs.
    Set(Vec<(u64, PositionType)>),
}

#[derive(Clone, Debug, Default)]
pub struct TypeTable {
    values: Vec<(usize, TypeValue)>,
    index: HashMap<(usize, TypeValue), PositionType>,
    width: usize,
}

impl TypeTable {
    fn intern(&mut self, level: usize, value: TypeValue) -> PositionType {
        let key = (level, value);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = PositionType(self.values.len() as u32);
        self.values.push(key.clone());
        self.index.insert(key, id);
        id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn level(&self, t: PositionType) -> usize {
        self.values[t.0 as usize].0
    }

    pub fn value(&self, t: PositionType) -> &TypeValue {
        &self.values[t.0 as usize].1
    }

    fn bits(out: &mut String, bits: u64, width: usize) {
        out.push('(');
        for k in 0..width {
            if k > 0 {
                out.push(',');
            }
            out.push(if bits >> k & 1 == 1 { '1' } else { '0' });
        }
        out.push(')');
    }

    fn render_into(&self, out: &mut String, t: PositionType) {
        match self.value(t) {
            TypeValue::Atom(b) => Self::bits(out, *b, self.width + 2),
            TypeValue::Set(items) => {
                // sort by rendered text so the form does not depend on
                // interning order
                let mut parts: Vec<String> = items
                    .iter()
                    .map(|&(c, child)| {
                        let mut s = String::from("[");
                        Self::bits(&mut s, c, 2 * self.width + 2);
                        s.push(',');
                        self.render_into(&mut s, child);
                        s.push(']');
                        s
                    })
                    .collect();
                parts.sort();
                out.push('[');
                out.push_str(&parts.join(","));
                out.push(']');
            }
        }
    }

    /// Canonical nested-list text of a type.
    pub fn render(&self, t: PositionType) -> String {
        let mut out = String::new();
        self.render_into(&mut out, t);
        out
    }

    fn render_set(&self, set: &[PositionType]) -> String {
        let mut parts: Vec<String> = set.iter().map(|&t| self.render(t)).collect();
        parts.sort();
        format!("[{}]", parts.join(","))
    }

    /// Canonical text of a triple type.
    pub fn render_triple(&self, t: &TripleType) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "[{},{}]",
            self.render_set(&t.interval),
            self.render_set(&t.neighborhood)
        );
        out
    }
}

/// The `s'`-type of a triple: the position types over `J_{s'}(i, i₊)` and
/// over `V(i, s)`, each sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleType {
    pub interval: Vec<PositionType>,
    pub neighborhood: Vec<PositionType>,
}

/// Types of every position of `I_(r,s)` at one level.
struct Level {
    lo: usize,
    types: Vec<PositionType>,
    members: HashMap<PositionType, Vec<usize>>,
    present: Vec<PositionType>,
}

impl Level {
    fn hi(&self) -> usize {
        self.lo + self.types.len() - 1
    }

    fn contains(&self, x: usize) -> bool {
        x >= self.lo && x <= self.hi()
    }

    fn get(&self, x: usize) -> PositionType {
        self.types[x - self.lo]
    }
}

/// Extra radius tried when looking for well-typed extractions.
const MAX_SPREAD: usize = 2;
const MAX_DOUBLINGS: usize = 4;
pub const DEFAULT_INTERVAL_BUDGET: usize = 1 << 24;

const LT: u64 = 0b01;
const GT: u64 = 0b10;

/// Computes and compares types for one signature and radius.
pub struct Typer {
    preds: Vec<Predicate>,
    graph: NeighborGraph,
    s: usize,
    budget: usize,
    table: TypeTable,
    vectors: HashMap<Triple, Vec<TripleType>>,
}

impl fmt::Debug for Typer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Typer")
            .field("graph", &self.graph)
            .field("s", &self.s)
            .field("types", &self.table.len())
            .finish()
    }
}

impl Typer {
    /// `sig` may contain the order; every other predicate must have a
    /// neighbour oracle.
    pub fn new(sig: &Signature, s: usize) -> Result<Self, TypeError> {
        let graph = NeighborGraph::from_signature(sig)?;
        Typer::with_graph(graph, s)
    }

    pub fn with_graph(graph: NeighborGraph, s: usize) -> Result<Self, TypeError> {
        let preds = graph.predicates().to_vec();
        if preds.len() > 31 {
            return Err(TypeError::TooManyPredicates(preds.len()));
        }
        Ok(Typer {
            preds,
            table: TypeTable {
                width: graph.predicates().len(),
                ..TypeTable::default()
            },
            graph,
            s,
            budget: DEFAULT_INTERVAL_BUDGET,
            vectors: HashMap::new(),
        })
    }

    /// Caps the number of positions of any interval whose types are
    /// materialised.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn radius(&self) -> usize {
        self.s
    }

    pub fn graph(&self) -> &NeighborGraph {
        &self.graph
    }

    pub fn table(&self) -> &TypeTable {
        &self.table
    }

    fn check(&self, t: Triple) -> Result<(), TypeError> {
        let ok = t.0 < t.1 && t.1 < t.2 && self.graph.is_extraction(&[t.0, t.1, t.2], self.s)?;
        if ok {
            Ok(())
        } else {
            Err(LocalityError::NotExtraction(vec![t.0, t.1, t.2], self.s).into())
        }
    }

    fn atom(&mut self, t: Triple, x: usize) -> PositionType {
        let mut bits = 0u64;
        if x < t.1 {
            bits |= LT;
        }
        if x > t.1 {
            bits |= GT;
        }
        for (k, p) in self.preds.iter().enumerate() {
            if p.holds2(x, x, 0) {
                bits |= 1 << (2 + k);
            }
        }
        self.table.intern(0, TypeValue::Atom(bits))
    }

    fn label(&self, x: usize, y: usize) -> u64 {
        let mut bits = 0u64;
        if x < y {
            bits |= LT;
        }
        if x > y {
            bits |= GT;
        }
        for (k, p) in self.preds.iter().enumerate() {
            if p.holds2(x, y, 0) {
                bits |= 1 << (2 + 2 * k);
            }
            if p.holds2(y, x, 0) {
                bits |= 1 << (3 + 2 * k);
            }
        }
        bits
    }

    /// The `(r + 1)`-type of `x` given the level-`r` types.
    fn lift(&mut self, level: usize, x: usize, below: &Level) -> PositionType {
        let mut specials = self.graph.adjacent(x);
        specials.push(x);
        specials.sort_unstable();
        specials.dedup();
        specials.retain(|&y| below.contains(y));

        let mut items = Vec::new();
        let mut taken: HashMap<PositionType, (usize, usize)> = HashMap::new();
        for &y in &specials {
            let c = below.get(y);
            items.push((self.label(x, y), c));
            let e = taken.entry(c).or_default();
            if y < x {
                e.0 += 1;
            } else if y > x {
                e.1 += 1;
            }
        }
        for &c in &below.present {
            let list = &below.members[&c];
            let lt = list.partition_point(|&y| y < x);
            let gt = list.len() - list.partition_point(|&y| y <= x);
            let (sl, sg) = taken.get(&c).copied().unwrap_or_default();
            if lt > sl {
                items.push((GT, c));
            }
            if gt > sg {
                items.push((LT, c));
            }
        }
        items.sort_unstable();
        items.dedup();
        self.table.intern(level, TypeValue::Set(items))
    }

    fn build_level(&mut self, t: Triple, r: usize, below: Option<&Level>) -> Result<Level, TypeError> {
        let dom = self.graph.interval_i(t.0, t.2, r, self.s)?;
        let (lo, hi) = (dom.min().unwrap(), dom.max().unwrap());
        if hi - lo + 1 > self.budget {
            return Err(TypeError::BudgetExceeded {
                size: hi - lo + 1,
                budget: self.budget,
            });
        }
        let mut types = Vec::with_capacity(hi - lo + 1);
        for x in lo..=hi {
            let ty = match below {
                None => self.atom(t, x),
                Some(b) => self.lift(r, x, b),
            };
            types.push(ty);
        }
        let mut members: HashMap<PositionType, Vec<usize>> = HashMap::new();
        for (k, &ty) in types.iter().enumerate() {
            members.entry(ty).or_default().push(lo + k);
        }
        let mut present: Vec<PositionType> = members.keys().copied().collect();
        present.sort_unstable();
        Ok(Level {
            lo,
            types,
            members,
            present,
        })
    }

    /// Levels `0..=top` over their intervals.
    fn levels(&mut self, t: Triple, top: usize) -> Result<Vec<Level>, TypeError> {
        let mut out: Vec<Level> = Vec::with_capacity(top + 1);
        for r in 0..=top {
            let lvl = self.build_level(t, r, out.last())?;
            out.push(lvl);
        }
        Ok(out)
    }

    /// The type of `x` at `level`, for any position `x` (not only those of
    /// the level's own interval).
    fn type_at(&mut self, t: Triple, x: usize, level: usize, levels: &[Level]) -> PositionType {
        if levels[level].contains(x) {
            return levels[level].get(x);
        }
        if level == 0 {
            self.atom(t, x)
        } else {
            self.lift(level, x, &levels[level - 1])
        }
    }

    /// `r-τ_S(x)`; `x` must lie in `I_(r,s)(i₋, i₊)`.
    pub fn position_type(&mut self, t: Triple, x: usize, r: usize) -> Result<PositionType, TypeError> {
        if r > self.s {
            return Err(TypeError::LevelTooHigh { r, s: self.s });
        }
        self.check(t)?;
        let levels = self.levels(t, r)?;
        let top = &levels[r];
        if !top.contains(x) {
            return Err(TypeError::OutsideInterval {
                x,
                r,
                lo: top.lo,
                hi: top.hi(),
            });
        }
        Ok(top.get(x))
    }

    /// The `s'`-types of `t` for `s' = 0, …, s`.
    pub fn type_vector(&mut self, t: Triple) -> Result<Vec<TripleType>, TypeError> {
        if let Some(v) = self.vectors.get(&t) {
            return Ok(v.clone());
        }
        self.check(t)?;
        let levels = self.levels(t, self.s)?;
        let v_set = self.graph.neighborhood_set(t.1, self.s)?;
        let mut out = Vec::with_capacity(self.s + 1);
        for sp in 0..=self.s {
            // J_{s'}(i, i₊) may reach past I_(s',s) when s' < s − s'; the
            // recursive definition still applies there.
            let j = self.graph.interval_j(t.1, t.2, sp)?;
            let mut interval: Vec<PositionType> = j.iter().map(|x| self.type_at(t, x, sp, &levels)).collect();
            let mut neighborhood: Vec<PositionType> = v_set.iter().map(|x| self.type_at(t, x, sp, &levels)).collect();
            for set in [&mut interval, &mut neighborhood] {
                set.sort_unstable();
                set.dedup();
            }
            out.push(TripleType { interval, neighborhood });
        }
        self.vectors.insert(t, out.clone());
        Ok(out)
    }

    pub fn triple_type(&mut self, t: Triple, s_prime: usize) -> Result<TripleType, TypeError> {
        if s_prime > self.s {
            return Err(TypeError::LevelTooHigh { r: s_prime, s: self.s });
        }
        Ok(self.type_vector(t)?.swap_remove(s_prime))
    }

    /// Whether `a` and `b` have the same `s'`-type for every `s' ≤ s`.
    pub fn equivalent(&mut self, a: Triple, b: Triple) -> Result<bool, TypeError> {
        Ok(self.type_vector(a)? == self.type_vector(b)?)
    }

    /// An `s`-extraction of size `p` whose triples all share one type
    /// vector, with every position at most `ceiling`.
    ///
    /// Candidate universes are greedy extractions at radius `s + d` for a few
    /// spreads `d` (any of them is also an `s`-extraction), doubling in size
    /// until the ceiling is hit. They are tried in order of their largest
    /// position, so the cheapest universe that admits a monochromatic subset
    /// wins. Wider spreads matter for predicates such as `linmul:k`, whose
    /// triple types depend on the ratio between consecutive positions.
    pub fn well_typed_extraction(&mut self, p: usize, ceiling: usize) -> Result<Extraction, TypeError> {
        let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut largest = 0;
        for d in 0..=MAX_SPREAD {
            let mut size = p.max(3);
            let mut prefix = Vec::new();
            for _ in 0..MAX_DOUBLINGS {
                match self.graph.extend_extraction(prefix.clone(), size, self.s + d, ceiling) {
                    Ok(x) => {
                        prefix = x.positions;
                        largest = largest.max(prefix.len());
                        candidates.push((*prefix.last().unwrap(), prefix.clone()));
                    }
                    Err(LocalityError::CeilingExceeded { found, .. }) => {
                        if found > prefix.len() {
                            let x = self.graph.extend_extraction(prefix, found, self.s + d, ceiling)?;
                            largest = largest.max(x.positions.len());
                            candidates.push((*x.positions.last().unwrap(), x.positions));
                        }
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
                size *= 2;
            }
        }
        candidates.sort();
        candidates.dedup();
        let mut over_budget = None;
        for (_, universe) in candidates {
            if universe.len() < p {
                continue;
            }
            if let Some(x) = self.finish(&universe, p, &mut over_budget)? {
                return Ok(x);
            }
        }
        if let Some(e) = over_budget {
            return Err(e);
        }
        Err(TypeError::Exhausted {
            universe: largest,
            wanted: p,
        })
    }

    /// Ramsey search over `universe`. A triple whose type cannot be computed
    /// within the budget gets a colour of its own, so it never ends up in the
    /// answer; the budget error is kept for reporting.
    fn finish(
        &mut self,
        universe: &[usize],
        p: usize,
        over_budget: &mut Option<TypeError>,
    ) -> Result<Option<Extraction>, TypeError> {
        let mut failure = None;
        let picked = ramsey_extract(universe, p, |a, b, c| match self.type_vector((a, b, c)) {
            Ok(v) => Ok(v),
            Err(e) => {
                if matches!(e, TypeError::BudgetExceeded { .. }) {
                    over_budget.get_or_insert(e);
                } else {
                    failure.get_or_insert(e);
                }
                Err((a, b, c))
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(picked.map(|positions| Extraction {
            positions,
            radius: self.s,
            well_typed: true,
        }))
    }
}

/// The lexicographically first `p`-subset of `universe` (taken in the given
/// order) on whose increasing triples `color` is constant, or `None` if there
/// is none. For `p < 3` this is the first `p` elements.
pub fn ramsey_extract<T, C>(universe: &[T], p: usize, mut color: impl FnMut(T, T, T) -> C) -> Option<Vec<T>>
where
    T: Copy + Eq + std::hash::Hash,
    C: Eq + Clone,
{
    if universe.len() < p {
        return None;
    }
    if p < 3 {
        return Some(universe[..p].to_vec());
    }
    let n = universe.len();
    let mut memo: HashMap<(usize, usize, usize), C> = HashMap::new();
    let mut colour = |a: usize, b: usize, c: usize| -> C {
        memo.entry((a, b, c))
            .or_insert_with(|| color(universe[a], universe[b], universe[c]))
            .clone()
    };

    // Each entry of the stack is an index into `universe`; `target` is fixed
    // by the first three chosen elements.
    fn extend<C: Eq + Clone>(
        chosen: &mut Vec<usize>,
        target: &mut Option<C>,
        n: usize,
        p: usize,
        colour: &mut impl FnMut(usize, usize, usize) -> C,
    ) -> bool {
        if chosen.len() == p {
            return true;
        }
        let start = chosen.last().map_or(0, |&l| l + 1);
        // leave room for the remaining elements
        for e in start..=n - (p - chosen.len()) {
            let mut ok = true;
            let mut fixed_here = false;
            'pairs: for bi in 1..chosen.len() {
                for ai in 0..bi {
                    let c = colour(chosen[ai], chosen[bi], e);
                    match target {
                        Some(t) if *t != c => {
                            ok = false;
                            break 'pairs;
                        }
                        Some(_) => {}
                        None => {
                            *target = Some(c);
                            fixed_here = true;
                        }
                    }
                }
            }
            if ok {
                chosen.push(e);
                if extend(chosen, target, n, p, colour) {
                    return true;
                }
                chosen.pop();
            }
            if fixed_here {
                *target = None;
            }
        }
        false
    }

    let mut chosen = Vec::with_capacity(p);
    let mut target = None;
    extend(&mut chosen, &mut target, n, p, &mut colour).then(|| chosen.iter().map(|&k| universe[k]).collect())
}

/// Convenience wrapper building a fresh [`Typer`].
pub fn well_typed_extraction(p: usize, s: usize, sig: &Signature, ceiling: usize) -> Result<Extraction, TypeError> {
    Typer::new(sig, s)?.well_typed_extraction(p, ceiling)
}
