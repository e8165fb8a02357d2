//! Games confined to the intervals around a pair of triples.
//!
//! Both words consist of `a` except for a single `b` at the middle position
//! of the triple. In round 1 the players use the start sets, `J_{s'}(i, i₊)`
//! or `V(i, s')` depending on the variant; in round `r ≥ 2` they use
//! `I_(r,s')(i₋, i₊)`. Spoiler may switch words freely.

use serde::{Deserialize, Serialize};

use super::{Alternations, Constraints, GameError, GameSpec, PositionSet};
use crate::evaluator::Word;
use crate::locality::{LocalityError, NeighborGraph};
use crate::predicates::Signature;

pub type Triple = (usize, usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// First pebble in `J_{s'}(i, i₊)`.
    Interval,
    /// First pebble in `V(i, s')`.
    Neighborhood,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::Interval, Variant::Neighborhood];
}

/// Allowed positions per round for one triple: index 0 is round 1.
pub fn round_sets(t: Triple, s_prime: usize, variant: Variant, g: &NeighborGraph) -> Result<Vec<PositionSet>, LocalityError> {
    let (lo, mid, hi) = t;
    let mut out = Vec::with_capacity(s_prime);
    out.push(match variant {
        Variant::Interval => g.interval_j(mid, hi, s_prime)?,
        Variant::Neighborhood => g.neighborhood_set(mid, s_prime)?,
    });
    for r in 2..=s_prime {
        out.push(g.interval_i(lo, hi, r, s_prime)?);
    }
    Ok(out)
}

fn marked_word(len: usize, mark: usize) -> Word {
    Word::new((0..len).map(|k| if k == mark { 'b' } else { 'a' }))
}

/// The constrained game on `tu` against `tv` with `s'` rounds. `sig` is the
/// game signature (order included); its other predicates define the
/// neighbourhoods.
pub fn constrained_spec(
    tu: Triple,
    tv: Triple,
    s_prime: usize,
    variant: Variant,
    sig: &Signature,
) -> Result<GameSpec, GameError> {
    if s_prime == 0 {
        return Err(GameError::NoRounds);
    }
    let g = NeighborGraph::from_signature(sig)?;
    for t in [tu, tv] {
        let ok = t.0 < t.1 && t.1 < t.2 && g.is_extraction(&[t.0, t.1, t.2], s_prime)?;
        if !ok {
            return Err(LocalityError::NotExtraction(vec![t.0, t.1, t.2], s_prime).into());
        }
    }
    let su = round_sets(tu, s_prime, variant, &g)?;
    let sv = round_sets(tv, s_prime, variant, &g)?;
    let len = |sets: &[PositionSet], mark: usize| sets.iter().filter_map(PositionSet::max).chain([mark]).max().unwrap() + 1;
    let u = marked_word(len(&su, tu.1), tu.1);
    let v = marked_word(len(&sv, tv.1), tv.1);
    let mut constraints = Constraints::default();
    for (k, (a, b)) in su.into_iter().zip(sv).enumerate() {
        if k == 0 {
            constraints.start = Some([a, b]);
        } else {
            constraints.rounds.insert(k + 1, [a, b]);
        }
    }
    Ok(GameSpec {
        u,
        v,
        rounds: s_prime,
        alternations: Alternations::Bounded(s_prime),
        sig: sig.clone(),
        constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efgame::{solve, Player};

    #[test]
    fn diagonal_triples_are_equivalent() {
        let sig = Signature::parse("less+eq").unwrap();
        let spec = constrained_spec((0, 2, 4), (10, 12, 14), 1, Variant::Interval, &sig).unwrap();
        assert_eq!(spec.u.len(), 4);
        assert_eq!(spec.v.len(), 14);
        assert_eq!(spec.u.at(2), 'b');
        assert_eq!(solve(&spec).unwrap().winner(), Player::Duplicator);
    }

    #[test]
    fn identical_triples() {
        let sig = Signature::parse("less+linmul:2").unwrap();
        let g = NeighborGraph::from_signature(&sig).unwrap();
        let x = g.find_extraction(3, 1, 1_000_000).unwrap().positions;
        let t = (x[0], x[1], x[2]);
        for variant in Variant::BOTH {
            let spec = constrained_spec(t, t, 1, variant, &sig).unwrap();
            assert_eq!(solve(&spec).unwrap().winner(), Player::Duplicator);
        }
    }

    #[test]
    fn rejects_non_extractions() {
        let sig = Signature::parse("less+eq").unwrap();
        assert!(constrained_spec((0, 1, 2), (0, 2, 4), 1, Variant::Interval, &sig).is_err());
        assert!(constrained_spec((0, 2, 4), (0, 2, 4), 0, Variant::Interval, &sig).is_err());
    }
}
