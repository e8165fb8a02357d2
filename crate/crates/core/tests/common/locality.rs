//! Locality checks shared by the locality tests and the acceptance run.
//! Every check returns a description of the first problem it finds.

use fo2::efgame::PositionSet;
use fo2::locality::{LocalityError, NeighborGraph};
use fo2::predicates::builtin;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{rng, BruteNeighborhoods};

/// The finite-degree catalogue predicates.
pub const CATALOGUE: &[&str] = &[
    "eq", "succ", "plus3", "tbit", "msb10", "msb11", "linmul:2", "linmul:3", "power:2", "pow2diag",
];

pub fn graph(id: &str) -> NeighborGraph {
    NeighborGraph::new([builtin(id).unwrap()]).unwrap()
}

fn interval(v: &std::collections::BTreeSet<usize>) -> Option<(usize, usize)> {
    let lo = *v.iter().next()?;
    let hi = *v.iter().next_back()?;
    (v.len() == hi - lo + 1).then_some((lo, hi))
}

/// `V(i, 0)` against the brute definition for `i ≤ 64`; `V(i, r)` is an
/// interval containing `i`, grows with `r`, and satisfies the recursion
/// `V(i, r + 1) = Cl(⋃_{j ∈ V(i, 0)} V(j, r))` for `r < 3`.
pub fn neighborhood_laws() -> Result<usize, String> {
    let mut checked = 0;
    for id in CATALOGUE {
        let g = graph(id);
        // power:2 reaches i² ≤ 4096, tbit reaches i + 63
        let mut brute = BruteNeighborhoods::new(&[id], 4_200);
        for i in 0..=64 {
            let want = interval(&brute.v(i, 0)).ok_or(format!("{id}: brute V({i},0) not an interval"))?;
            let got = g.neighborhood(i, 0).map_err(|e| e.to_string())?;
            if want != got {
                return Err(format!("{id}: V({i},0) = {got:?}, brute {want:?}"));
            }
            let mut prev = got;
            for r in 0..3 {
                let next = match g.neighborhood(i, r + 1) {
                    Ok(v) => v,
                    Err(LocalityError::BudgetExceeded { .. }) => break,
                    Err(e) => return Err(e.to_string()),
                };
                if !(next.0 <= i && i <= next.1) || next.0 > prev.0 || next.1 < prev.1 {
                    return Err(format!("{id}: V({i},{}) = {next:?} not above V({i},{r}) = {prev:?}", r + 1));
                }
                let (lo0, hi0) = g.neighborhood(i, 0).unwrap();
                if hi0 - lo0 <= 5_000 {
                    let union = (lo0..=hi0).map(|j| g.neighborhood(j, r)).try_fold((usize::MAX, 0), |acc, v| {
                        v.map(|(a, b)| (acc.0.min(a), acc.1.max(b)))
                    });
                    let (lo, hi) = match union {
                        Ok(v) => v,
                        Err(LocalityError::BudgetExceeded { .. }) => break,
                        Err(e) => return Err(e.to_string()),
                    };
                    if (lo, hi) != next {
                        return Err(format!("{id}: V({i},{}) = {next:?}, recursion gives {:?}", r + 1, (lo, hi)));
                    }
                }
                prev = next;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// For every `M ≤ 50` and `s ≤ 2` some `i` has `g_s(i) > M`: candidates
/// `i = M + 1, 2(M + 1), 4(M + 1), …` are tried up to `2⁶⁰`.
pub fn unbounded_witnesses() -> Result<usize, String> {
    let mut found = 0;
    for id in CATALOGUE {
        let g = graph(id);
        for s in 0..=2 {
            for m in 0..=50usize {
                let mut i = m + 1;
                loop {
                    if g.g(i, s).map_err(|e| e.to_string())? > m {
                        break;
                    }
                    i = i.checked_mul(2).filter(|&i| i < 1 << 60).ok_or(format!("{id}: no i with g_{s}(i) > {m}"))?;
                }
                found += 1;
            }
        }
    }
    Ok(found)
}

/// Pairwise disjoint-and-separated, checked from raw neighbourhoods.
pub fn separated(g: &NeighborGraph, positions: &[usize], s: usize) -> Result<bool, LocalityError> {
    for (k, &i) in positions.iter().enumerate() {
        let (_, hi) = g.neighborhood(i, s)?;
        for &j in &positions[k + 1..] {
            let (lo, _) = g.neighborhood(j, s)?;
            if i >= j || hi + 1 >= lo {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Greedy extractions of sizes 1..=6 at radius ≤ 2 are re-validated; at
/// radius 0 also against brute neighbourhoods. Returns how many were found.
pub fn extraction_validity() -> Result<usize, String> {
    let mut found = 0;
    for id in CATALOGUE {
        let g = graph(id);
        let mut brute = BruteNeighborhoods::new(&[id], 4_200);
        for s in 0..=2 {
            for p in 1..=6 {
                let x = match g.find_extraction(p, s, 1_000_000) {
                    Ok(x) => x,
                    Err(LocalityError::CeilingExceeded { .. } | LocalityError::BudgetExceeded { .. }) => break,
                    Err(e) => return Err(e.to_string()),
                };
                if x.positions.len() != p || !separated(&g, &x.positions, s).map_err(|e| e.to_string())? {
                    return Err(format!("{id}: invalid extraction {:?} at radius {s}", x.positions));
                }
                if s == 0 && x.positions.iter().all(|&i| i <= 64) {
                    let vs: Vec<_> = x.positions.iter().map(|&i| interval(&brute.v(i, 0)).unwrap()).collect();
                    if vs.windows(2).any(|w| w[0].1 + 1 >= w[1].0) {
                        return Err(format!("{id}: {:?} fails against brute neighbourhoods", x.positions));
                    }
                }
                found += 1;
            }
            if s == 0 && found == 0 {
                return Err(format!("{id}: no extraction at radius 0"));
            }
        }
    }
    Ok(found)
}

/// Sorted, merged list of closed intervals.
fn merge(mut parts: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    parts.sort();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in parts {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Greedy chain `x₀ = 0 < x₁ < …` at radius `s` with `min V(x_{k+1}, s) ≥
/// max V(x_k, s) + 2`, found by bisection on `g_s`. Only the last member may
/// have a neighbourhood beyond the position budget, so the chain can end on
/// a position whose neighbourhood is not representable.
pub fn chain(g: &NeighborGraph, s: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0];
    while out.len() < len {
        let Ok(bound) = g.max_v(*out.last().unwrap(), s) else { break };
        let Some(bound) = bound.checked_add(2) else { break };
        let (mut lo, mut hi) = (out.last().unwrap() + 1, usize::MAX);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if g.g(mid, s).unwrap() >= bound {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if g.g(lo, s).unwrap() < bound {
            break;
        }
        out.push(lo);
    }
    out
}

/// Both sides of the interval identity on 100 random triples per predicate
/// and radius `s ≤ 2`, computed from raw neighbourhoods, and compared with
/// the library's `lemma9_check`. Returns the number of triples checked.
/// A radius at which no triple exists among 64-bit positions is reported as
/// a failure after everything else has been checked.
pub fn lemma9_sampled(seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let mut checked = 0;
    let mut missing = Vec::new();
    for id in CATALOGUE {
        let g = graph(id);
        for s in 0..=2 {
            let pool = chain(&g, s, 8);
            if pool.len() < 3 {
                missing.push(format!("{id} at s={s}"));
                continue;
            }
            for _ in 0..100 {
                let mut t: Vec<usize> = pool.choose_multiple(&mut rng, 3).copied().collect();
                t.sort();
                let (a, b, c) = (t[0], t[1], t[2]);
                let r = rng.gen_range(0..=s);
                let v = |i| g.neighborhood(i, s - r).unwrap();
                let min = |i| g.min_v(i, s - r).unwrap();
                if v(a).1 + 1 >= min(b) || v(b).1 + 1 >= min(c) {
                    return Err(format!("{id}: ({a},{b},{c}) is not an extraction at radius {s}"));
                }
                let left = merge(vec![(v(a).0, min(b) - 1), (min(b), min(c) - 1)]);
                let right = merge(vec![v(a), (v(a).1 + 1, min(c) - 1)]);
                if left != right {
                    return Err(format!("{id}: identity fails on ({a},{b},{c}), r={r}, s={s}"));
                }
                let lib = g.lemma9_check((a, b, c), r, s).map_err(|e| e.to_string())?;
                if !lib {
                    return Err(format!("{id}: lemma9_check rejects ({a},{b},{c}), r={r}, s={s}"));
                }
                let expect = PositionSet::from_intervals(left.iter().copied());
                let lib_left = g
                    .interval_j(a, b, s - r)
                    .unwrap()
                    .union(&g.interval_j(b, c, s - r).unwrap());
                if lib_left != expect {
                    return Err(format!("{id}: J intervals of ({a},{b},{c}) differ from raw neighbourhoods"));
                }
                checked += 1;
            }
        }
    }
    if missing.is_empty() {
        Ok(checked)
    } else {
        Err(format!("{checked} triples agree, but the greedy chain leaves the 64-bit positions before a third member for {}", missing.join(", ")))
    }
}
