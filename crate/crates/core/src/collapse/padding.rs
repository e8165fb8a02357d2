//! Spreading the letters of a word apart with the neutral letter.

use crate::efgame::Side;
use crate::evaluator::Word;
use crate::locality::{Extraction, NeighborGraph};
use crate::predicates::Signature;
use crate::types::Typer;

use super::CollapseError;

/// Inserts `2s` copies of `c` before, between and after the letters of `u`.
pub fn pad_prop2(u: &Word, s: usize, c: char) -> Word {
    let gap = std::iter::repeat_n(c, 2 * s);
    let mut out: Vec<char> = gap.clone().collect();
    for &a in u.letters() {
        out.push(a);
        out.extend(gap.clone());
    }
    Word::new(out)
}

/// Two words `u`, `v` copied into neutral-letter words `u′`, `v′` of a common
/// length `n`, with their letters sitting on the positions of a well-typed
/// extraction `X = {i₀ < … < i_p}`, `p = max(|u|, |v|) + 1`.
#[derive(Clone, Debug)]
pub struct PaddedPair {
    pub u: Word,
    pub v: Word,
    pub u_padded: Word,
    pub v_padded: Word,
    /// `f_k`: where letter `k` of `u` sits in `u′`.
    pub placement_u: Vec<usize>,
    /// `g_k`: where letter `k` of `v` sits in `v′`.
    pub placement_v: Vec<usize>,
    pub extraction: Extraction,
    pub n: usize,
    pub s: usize,
    pub neutral: char,
    /// The numerical predicates other than the order.
    pub sig: Signature,
}

impl PaddedPair {
    pub fn padded(&self, side: Side) -> &Word {
        match side {
            Side::U => &self.u_padded,
            Side::V => &self.v_padded,
        }
    }

    pub fn placement(&self, side: Side) -> &[usize] {
        match side {
            Side::U => &self.placement_u,
            Side::V => &self.placement_v,
        }
    }

    pub fn original(&self, side: Side) -> &Word {
        match side {
            Side::U => &self.u,
            Side::V => &self.v,
        }
    }

    /// `f_k` extended by `f_{−1} = i₀` and `f_{|u|} = i_p`, indexed from −1.
    pub fn anchor(&self, side: Side, k: isize) -> usize {
        let x = &self.extraction.positions;
        let f = self.placement(side);
        if k < 0 {
            x[0]
        } else if k as usize >= f.len() {
            x[x.len() - 1]
        } else {
            f[k as usize]
        }
    }
}

/// Places `u` and `v` on a well-typed `s`-extraction for `sig` (`less` is
/// ignored). The first letters share `i₁`, the last letters share `i_{p−1}`
/// and the inner letters take the positions after `i₁` in order.
pub fn build_padded_pair(
    u: &Word,
    v: &Word,
    c: char,
    s: usize,
    sig: &Signature,
    ceiling: usize,
) -> Result<PaddedPair, CollapseError> {
    check_words(u, v)?;
    let sig = sig.without(&["less"]);
    let p = u.len().max(v.len()) + 1;
    let extraction = Typer::new(&sig, s)?.well_typed_extraction(p + 1, ceiling)?;
    place_on_extraction(u, v, c, s, &sig, &extraction)
}

fn check_words(u: &Word, v: &Word) -> Result<(), CollapseError> {
    if u.is_empty() || v.is_empty() {
        return Err(CollapseError::EmptyWord);
    }
    if (u.len() == 1) != (v.len() == 1) {
        return Err(CollapseError::Unalignable(u.len(), v.len()));
    }
    Ok(())
}

/// The placement step of [`build_padded_pair`] on a given well-typed
/// extraction, whose first `max(|u|, |v|) + 2` positions are used; lets
/// batteries share one extraction.
pub fn place_on_extraction(
    u: &Word,
    v: &Word,
    c: char,
    s: usize,
    sig: &Signature,
    extraction: &Extraction,
) -> Result<PaddedPair, CollapseError> {
    check_words(u, v)?;
    let sig = sig.without(&["less"]);
    let p = u.len().max(v.len()) + 1;
    if extraction.positions.len() < p + 1 {
        return Err(CollapseError::ShortExtraction {
            have: extraction.positions.len(),
            need: p + 1,
        });
    }
    let extraction = Extraction {
        positions: extraction.positions[..=p].to_vec(),
        ..extraction.clone()
    };
    let x = &extraction.positions;
    let place = |len: usize| -> Vec<usize> {
        let mut f: Vec<usize> = (0..len).map(|k| x[k + 1]).collect();
        f[len - 1] = x[p - 1];
        f
    };
    let (placement_u, placement_v) = (place(u.len()), place(v.len()));
    let n = NeighborGraph::from_signature(&sig)?.max_v(x[p], s)?;
    let fill = |w: &Word, f: &[usize]| {
        let mut out = vec![c; n];
        for (&pos, &a) in f.iter().zip(w.letters()) {
            out[pos] = a;
        }
        Word::new(out)
    };
    Ok(PaddedPair {
        u_padded: fill(u, &placement_u),
        v_padded: fill(v, &placement_v),
        u: u.clone(),
        v: v.clone(),
        placement_u,
        placement_v,
        n,
        s,
        neutral: c,
        sig,
        extraction,
    })
}
