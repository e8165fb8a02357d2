//! Neighbourhoods in the graph of finite-degree predicates.
//!
//! For a position `i`, `V(i, 0)` is the closure of `i` together with every
//! edge that straddles `i`, and `V(i, r + 1)` the closure of the union of the
//! `V(j, r)` for `j ∈ V(i, 0)`. Writing `R(k)` for the largest of `k` and its
//! neighbours and `R̂(k) = max_{k' ≤ k} R(k')`, one gets
//!
//! ```text
//! max V(i, 0) = R̂(i)        min V(i, 0) = min { k : R̂(k) ≥ i }
//! ```
//!
//! Both ends are non-decreasing in `i`, so the union in the recursive step is
//! attained at the ends of `V(i, 0)` and `V(i, r)` is the interval between
//! the `(r + 1)`-fold iterates of these two maps.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efgame::PositionSet;
use crate::predicates::{Predicate, Signature};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalityError {
    #[error("closure of the empty set")]
    EmptyClosure,
    #[error("predicate `{0}` has no neighbour oracle")]
    MissingOracle(String),
    #[error("neighbourhood of {position} at radius {radius} exceeds the position budget {budget}")]
    BudgetExceeded {
        position: usize,
        radius: usize,
        budget: usize,
    },
    #[error("no extraction of size {wanted} below the ceiling {ceiling} (found {found})")]
    CeilingExceeded {
        ceiling: usize,
        found: usize,
        wanted: usize,
    },
    #[error("inverted interval: lower end {lo} above upper end {hi}")]
    InvertedInterval { lo: i128, hi: i128 },
    #[error("radius {r} exceeds {s}")]
    RadiusTooLarge { r: usize, s: usize },
    #[error("positions {0:?} do not form an extraction at radius {1}")]
    NotExtraction(Vec<usize>, usize),
}

/// Largest prefix of `R̂` cached for graphs whose reach is not declared
/// monotone.
const PREFIX_CACHE_LIMIT: usize = 50_000_000;

/// The undirected graph joining `x` and `y` whenever some predicate relates
/// them in either direction.
pub struct NeighborGraph {
    preds: Vec<Predicate>,
    monotone: bool,
    budget: usize,
    prefix: Mutex<Vec<usize>>,
}

impl std::fmt::Debug for NeighborGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeighborGraph")
            .field("preds", &self.preds.iter().map(Predicate::name).collect::<Vec<_>>())
            .field("budget", &self.budget)
            .finish()
    }
}

impl Clone for NeighborGraph {
    fn clone(&self) -> Self {
        NeighborGraph {
            preds: self.preds.clone(),
            monotone: self.monotone,
            budget: self.budget,
            prefix: Mutex::new(Vec::new()),
        }
    }
}

/// Default bound on any position a neighbourhood computation may reach.
pub const DEFAULT_BUDGET: usize = 1 << 50;

impl NeighborGraph {
    pub fn new(preds: impl IntoIterator<Item = Predicate>) -> Result<Self, LocalityError> {
        let preds: Vec<Predicate> = preds.into_iter().collect();
        if let Some(p) = preds.iter().find(|p| !p.has_oracle() || p.arity() != 2) {
            return Err(LocalityError::MissingOracle(p.name().to_string()));
        }
        let monotone = preds.iter().all(Predicate::has_monotone_reach);
        Ok(NeighborGraph {
            preds,
            monotone,
            budget: DEFAULT_BUDGET,
            prefix: Mutex::new(Vec::new()),
        })
    }

    /// The graph of every predicate in `sig` except the order.
    pub fn from_signature(sig: &Signature) -> Result<Self, LocalityError> {
        NeighborGraph::new(sig.without(&["less"]).iter().cloned())
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.preds
    }

    /// Sorted neighbours of `k` over all predicates.
    pub fn adjacent(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .preds
            .iter()
            .flat_map(|p| p.neighbors(k).expect("checked at construction"))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn reach(&self, k: usize) -> usize {
        self.preds
            .iter()
            .map(|p| p.reach(k).expect("checked at construction"))
            .max()
            .unwrap_or(k)
            .max(k)
    }

    /// `R̂(k)`.
    fn reach_hat(&self, k: usize) -> Result<usize, LocalityError> {
        if self.monotone {
            return Ok(self.reach(k));
        }
        let mut cache = self.prefix.lock().unwrap_or_else(|e| e.into_inner());
        if k >= cache.len() {
            if k >= PREFIX_CACHE_LIMIT {
                return Err(LocalityError::BudgetExceeded {
                    position: k,
                    radius: 0,
                    budget: PREFIX_CACHE_LIMIT,
                });
            }
            let mut best = cache.last().copied().unwrap_or(0);
            for j in cache.len()..=k {
                best = best.max(self.reach(j));
                cache.push(best);
            }
        }
        Ok(cache[k])
    }

    fn max0(&self, i: usize) -> Result<usize, LocalityError> {
        self.reach_hat(i)
    }

    fn min0(&self, i: usize) -> Result<usize, LocalityError> {
        // R̂(i) ≥ i, so the answer lies in [0, i]
        let (mut lo, mut hi) = (0usize, i);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.reach_hat(mid)? >= i {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// `V(i, r)` as `(min, max)`.
    pub fn neighborhood(&self, i: usize, r: usize) -> Result<(usize, usize), LocalityError> {
        let mut lo = i;
        let mut hi = i;
        for _ in 0..=r {
            lo = self.min0(lo)?;
            hi = self.max0(hi)?;
            if hi > self.budget {
                return Err(LocalityError::BudgetExceeded {
                    position: i,
                    radius: r,
                    budget: self.budget,
                });
            }
        }
        Ok((lo, hi))
    }

    pub fn neighborhood_set(&self, i: usize, r: usize) -> Result<PositionSet, LocalityError> {
        let (lo, hi) = self.neighborhood(i, r)?;
        Ok(PositionSet::interval(lo, hi))
    }

    pub fn min_v(&self, i: usize, r: usize) -> Result<usize, LocalityError> {
        let mut lo = i;
        for _ in 0..=r {
            lo = self.min0(lo)?;
        }
        Ok(lo)
    }

    pub fn max_v(&self, i: usize, r: usize) -> Result<usize, LocalityError> {
        self.neighborhood(i, r).map(|v| v.1)
    }

    /// `g_s(i) = min V(i, s)`.
    pub fn g(&self, i: usize, s: usize) -> Result<usize, LocalityError> {
        self.min_v(i, s)
    }

    /// Whether the neighbourhoods of `i < j` at radius `s` are disjoint with
    /// at least one position between them.
    pub fn separated(&self, i: usize, j: usize, s: usize) -> Result<bool, LocalityError> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Ok(a != b && self.max_v(a, s)? + 1 < self.min_v(b, s)?)
    }

    /// Greedy left-to-right extraction of `p` positions at radius `s`, all
    /// below `ceiling`.
    pub fn find_extraction(&self, p: usize, s: usize, ceiling: usize) -> Result<Extraction, LocalityError> {
        self.extend_extraction(Vec::new(), p, s, ceiling)
    }

    /// Continues a greedy extraction from the given prefix.
    pub fn extend_extraction(
        &self,
        mut positions: Vec<usize>,
        p: usize,
        s: usize,
        ceiling: usize,
    ) -> Result<Extraction, LocalityError> {
        while positions.len() < p {
            let next = match positions.last() {
                None => 0,
                Some(&last) => {
                    let bound = self.max_v(last, s)? + 2;
                    // first i with min V(i, s) ≥ bound; min V is non-decreasing
                    let (mut lo, mut hi) = (last + 1, ceiling + 1);
                    while lo < hi {
                        let mid = lo + (hi - lo) / 2;
                        if self.min_v(mid, s)? >= bound {
                            hi = mid;
                        } else {
                            lo = mid + 1;
                        }
                    }
                    lo
                }
            };
            if next > ceiling {
                return Err(LocalityError::CeilingExceeded {
                    ceiling,
                    found: positions.len(),
                    wanted: p,
                });
            }
            // make sure the neighbourhood itself is within budget
            self.neighborhood(next, s)?;
            positions.push(next);
        }
        Ok(Extraction {
            positions,
            radius: s,
            well_typed: false,
        })
    }

    /// `J_s(i, i₊) = {min V(i, s), …, min V(i₊, s) − 1}`.
    pub fn interval_j(&self, i: usize, i_plus: usize, s: usize) -> Result<PositionSet, LocalityError> {
        let lo = self.min_v(i, s)? as i128;
        let hi = self.min_v(i_plus, s)? as i128 - 1;
        checked_interval(lo, hi)
    }

    /// `I_(r,s)(i₋, i₊) = {max V(i₋, s − r) + 1, …, min V(i₊, s − r) − 1}`.
    pub fn interval_i(&self, i_minus: usize, i_plus: usize, r: usize, s: usize) -> Result<PositionSet, LocalityError> {
        if r > s {
            return Err(LocalityError::RadiusTooLarge { r, s });
        }
        let lo = self.max_v(i_minus, s - r)? as i128 + 1;
        let hi = self.min_v(i_plus, s - r)? as i128 - 1;
        checked_interval(lo, hi)
    }

    /// Compares `J_{s−r}(i₋, i) ∪ J_{s−r}(i, i₊)` with
    /// `V(i₋, s − r) ∪ I_(r,s)(i₋, i₊)`.
    pub fn lemma9_check(&self, triple: (usize, usize, usize), r: usize, s: usize) -> Result<bool, LocalityError> {
        if r > s {
            return Err(LocalityError::RadiusTooLarge { r, s });
        }
        let (a, b, c) = triple;
        let left = self.interval_j(a, b, s - r)?.union(&self.interval_j(b, c, s - r)?);
        let right = self.neighborhood_set(a, s - r)?.union(&self.interval_i(a, c, r, s)?);
        Ok(left == right)
    }

    /// Checks every pair of the candidate extraction independently.
    pub fn is_extraction(&self, positions: &[usize], s: usize) -> Result<bool, LocalityError> {
        for (k, &i) in positions.iter().enumerate() {
            for &j in &positions[k + 1..] {
                if i >= j || !self.separated(i, j, s)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn checked_interval(lo: i128, hi: i128) -> Result<PositionSet, LocalityError> {
    if lo > hi || lo < 0 {
        return Err(LocalityError::InvertedInterval { lo, hi });
    }
    Ok(PositionSet::interval(lo as usize, hi as usize))
}

/// `Cl(F) = {min F, …, max F}`.
pub fn closure(f: &[usize]) -> Result<PositionSet, LocalityError> {
    match (f.iter().min(), f.iter().max()) {
        (Some(&lo), Some(&hi)) => Ok(PositionSet::interval(lo, hi)),
        _ => Err(LocalityError::EmptyClosure),
    }
}

/// Increasing positions whose neighbourhoods at `radius` are pairwise
/// disjoint and separated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub positions: Vec<usize>,
    pub radius: usize,
    pub well_typed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicates::builtin;

    fn graph(ids: &[&str]) -> NeighborGraph {
        NeighborGraph::new(ids.iter().map(|id| builtin(id).unwrap())).unwrap()
    }

    #[test]
    fn closures() {
        assert_eq!(closure(&[2, 5]).unwrap(), PositionSet::interval(2, 5));
        assert_eq!(closure(&[3]).unwrap(), PositionSet::interval(3, 3));
        assert_eq!(closure(&[]), Err(LocalityError::EmptyClosure));
    }

    #[test]
    fn linmul_neighborhoods() {
        let g = graph(&["linmul:2"]);
        assert_eq!(g.neighborhood(3, 0).unwrap(), (2, 6));
        assert_eq!(g.neighborhood(3, 1).unwrap(), (1, 12));
        assert_eq!(g.g(3, 0).unwrap(), 2);
        assert_eq!(g.g(3, 1).unwrap(), 1);
        let empty = graph(&[]);
        assert_eq!(empty.neighborhood(3, 0).unwrap(), (3, 3));
        assert_eq!(empty.g(7, 2).unwrap(), 7);
    }

    #[test]
    fn missing_oracle_is_rejected() {
        assert!(matches!(
            NeighborGraph::new([builtin("msb0").unwrap()]),
            Err(LocalityError::MissingOracle(_))
        ));
    }

    #[test]
    fn extractions_and_intervals() {
        let g = graph(&["eq"]);
        assert_eq!(g.find_extraction(3, 0, 1000).unwrap().positions, vec![0, 2, 4]);
        assert_eq!(g.find_extraction(1, 2, 1000).unwrap().positions, vec![0]);
        assert_eq!(g.interval_j(2, 4, 0).unwrap(), PositionSet::interval(2, 3));
        assert_eq!(g.interval_i(0, 4, 0, 0).unwrap(), PositionSet::interval(1, 3));
        assert!(g.lemma9_check((0, 2, 4), 0, 0).unwrap());
        assert!(g.interval_j(4, 2, 0).is_err());

        let lin = graph(&["linmul:2"]);
        let x = lin.find_extraction(2, 0, 1000).unwrap();
        assert!(lin.is_extraction(&x.positions, 0).unwrap());
        assert_eq!(lin.find_extraction(5, 0, 1000).unwrap().positions, vec![0, 3, 15, 63, 255]);
        assert!(matches!(
            lin.find_extraction(5, 2, 1000),
            Err(LocalityError::CeilingExceeded { .. })
        ));
    }
}
