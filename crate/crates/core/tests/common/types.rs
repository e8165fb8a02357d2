//! Type checks shared by the types tests and the acceptance run.

use std::collections::BTreeMap;

use fo2::efgame::constrained::Triple;
use fo2::efgame::{constrained_spec, solve, Player, Variant};
use fo2::locality::NeighborGraph;
use fo2::predicates::Signature;
use fo2::types::{TripleType, Typer};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::locality::separated;
use super::rng;

/// One-predicate signatures the type checks run over.
pub const SIGNATURES: &[&str] = &["eq", "succ", "plus3", "pow2diag", "msb10", "linmul:2"];

/// Random valid `s`-extraction triples with positions below `max`, drawn
/// log-uniformly so that widely spread triples are common.
pub fn random_triples(g: &NeighborGraph, s: usize, rng: &mut ChaCha8Rng, count: usize, max: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 200 * count {
        attempts += 1;
        let mut draw = || (rng.gen_range(0.0..(max as f64).ln())).exp() as usize;
        let mut t = [draw(), draw(), draw()];
        t.sort();
        if separated(g, &t, s).unwrap_or(false) {
            out.push((t[0], t[1], t[2]));
        }
    }
    out
}

fn search_bound(id: &str, s: usize) -> usize {
    match (id, s) {
        ("linmul:2" | "msb10", 1) => 5_000,
        _ => 300,
    }
}

/// Reflexivity, symmetry and transitivity of `equivalent` on 50 random
/// triplets of triples per signature and radius `s ≤ 1`, drawn from a
/// small pool so that classes collide. Returns the number of non-vacuous
/// transitivity instances.
pub fn equivalence_laws(seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let mut chains = 0;
    for id in SIGNATURES {
        let sig = Signature::parse(&format!("less+{id}")).unwrap();
        for s in 0..=1 {
            let mut typer = Typer::new(&sig, s).map_err(|e| e.to_string())?;
            let pool = random_triples(typer.graph(), s, &mut rng, 12, search_bound(id, s));
            if pool.len() < 3 {
                return Err(format!("{id}: too few valid triples at radius {s}"));
            }
            for _ in 0..50 {
                let pick: Vec<Triple> = (0..3).map(|_| *pool.choose(&mut rng).unwrap()).collect();
                let mut eq = |a: Triple, b: Triple| typer.equivalent(a, b).map_err(|e| e.to_string());
                let (x, y, z) = (pick[0], pick[1], pick[2]);
                if !eq(x, x)? {
                    return Err(format!("{id}: {x:?} not equivalent to itself"));
                }
                if eq(x, y)? != eq(y, x)? {
                    return Err(format!("{id}: asymmetric on {x:?}, {y:?}"));
                }
                if eq(x, y)? && eq(y, z)? {
                    chains += 1;
                    if !eq(x, z)? {
                        return Err(format!("{id}: not transitive on {x:?}, {y:?}, {z:?}"));
                    }
                }
            }
        }
    }
    Ok(chains)
}

/// Number of distinct type vectors over 200 random triples, per signature,
/// at radius 1.
pub fn observed_index(seed: u64) -> Result<BTreeMap<String, usize>, String> {
    let mut rng = rng(seed);
    let mut out = BTreeMap::new();
    for id in SIGNATURES {
        let sig = Signature::parse(&format!("less+{id}")).unwrap();
        let mut typer = Typer::new(&sig, 1).map_err(|e| e.to_string())?;
        let triples = random_triples(typer.graph(), 1, &mut rng, 200, search_bound(id, 1));
        let mut seen: Vec<Vec<TripleType>> = Vec::new();
        for t in triples {
            let v = typer.type_vector(t).map_err(|e| e.to_string())?;
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        out.insert(id.to_string(), seen.len());
    }
    Ok(out)
}

/// Pairs of distinct triples judged equivalent at radius 1, spread over the
/// signatures, each confirmed by solving both constrained games with one
/// round. Returns the number of games solved.
pub fn soundness(seed: u64, pairs: usize) -> Result<usize, String> {
    let mut rng = rng(seed);
    let s = 1;
    let mut queues = Vec::new();
    for id in SIGNATURES {
        let sig = Signature::parse(&format!("less+{id}")).unwrap();
        let mut typer = Typer::new(&sig, s).map_err(|e| e.to_string())?;
        let triples = random_triples(typer.graph(), s, &mut rng, 100, search_bound(id, s));
        let mut classes: BTreeMap<Vec<TripleType>, Vec<Triple>> = BTreeMap::new();
        for t in triples {
            classes.entry(typer.type_vector(t).map_err(|e| e.to_string())?).or_default().push(t);
        }
        let mut candidates: Vec<(Triple, Triple)> = classes
            .values()
            .flat_map(|ts| ts.iter().flat_map(move |&a| ts.iter().filter(move |&&b| b != a).map(move |&b| (a, b))))
            .collect();
        candidates.shuffle(&mut rng);
        candidates.truncate(pairs);
        queues.push((id, sig, typer, candidates.into_iter()));
    }
    // round-robin over the signatures
    let mut games = 0;
    let mut tested = 0;
    while tested < pairs {
        let mut progressed = false;
        for (id, sig, typer, queue) in queues.iter_mut() {
            let Some((a, b)) = queue.next() else { continue };
            if tested == pairs {
                break;
            }
            progressed = true;
            if !typer.equivalent(a, b).map_err(|e| e.to_string())? {
                return Err(format!("{id}: same type vector but not equivalent: {a:?}, {b:?}"));
            }
            // a zero-round game is trivially a Duplicator win
            for s_prime in 1..=s {
                for variant in Variant::BOTH {
                    let spec = constrained_spec(a, b, s_prime, variant, sig).map_err(|e| e.to_string())?;
                    let winner = solve(&spec).map_err(|e| e.to_string())?.winner();
                    if winner != Player::Duplicator {
                        return Err(format!("{id}: {a:?} ~ {b:?} but Spoiler wins the {variant:?} game with {s_prime} rounds"));
                    }
                    games += 1;
                }
            }
            tested += 1;
        }
        if !progressed {
            return Err(format!("only {tested} equivalent pairs found, wanted {pairs}"));
        }
    }
    Ok(games)
}
