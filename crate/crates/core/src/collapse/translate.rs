//! Turning a Spoiler win on a padded pair `(u′, v′)` into a Spoiler win on
//! `(u, v)` over `{less, succ}`.
//!
//! The translation simulates the padded game alongside the original one.
//! Spoiler's padded moves come from an oracle; Duplicator's answers in the
//! original game are enumerated exhaustively and each is mirrored by a
//! simulated padded answer. At padded round `r + 1` (after `r` rounds), with
//! radius `t = s − r` and the original pebble on letter `k₀`, a padded move
//! `x` on a word with anchors `f` falls into one of four cases:
//!
//! 1. `x ∈ J_t(f_k, f_{k+1})` for `k ∉ {k₀ − 1, k₀}`: Spoiler plays letter
//!    `k`; the padded answer comes from the interval-variant constrained game
//!    on the triples around the two new pebbles.
//! 2. `x ∈ V(f_{k₀−1}, t)`: Spoiler plays the letter just left of the pebble;
//!    the answer comes from the neighbourhood-variant constrained game.
//! 3. `x ∈ I_(r,s)(f_{k₀−1}, f_{k₀+1})`: the original game stands still and
//!    the running constrained game answers.
//! 4. anything else lies before the first or after the last letter region,
//!    where both padded words agree; the answer is the same position.
//!
//! Before the original game starts only cases 1 and 4 arise. `f_{−1}` is
//! `i₀` and `f_{|u|}` is `i_p`.

use std::collections::HashMap;
use std::fmt;

use crate::efgame::constrained::Triple;
use crate::efgame::rules::{self, advance, check_duplicator_reply, is_partial_iso, Outcome};
use crate::efgame::{
    constrained_spec, Alternations, GameSpec, GameState, Move, Player, Side, Solution, SolverConfig, Strategy,
    StrategyViolation, Turn, Variant,
};
use crate::locality::{LocalityError, NeighborGraph};
use crate::predicates::{builtin, Signature};

use super::{CollapseError, PaddedPair};

/// Supplies Spoiler's moves in the padded game.
pub trait SpoilerOracle {
    fn spoiler_move(&mut self, state: &GameState) -> Option<Move>;
}

impl SpoilerOracle for Strategy {
    fn spoiler_move(&mut self, state: &GameState) -> Option<Move> {
        self.get(&Turn::Spoiler(*state))
    }
}

impl SpoilerOracle for Solution {
    fn spoiler_move(&mut self, state: &GameState) -> Option<Move> {
        Solution::spoiler_move(self, state).map(|(mv, _)| mv)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    Fresh = 1,
    Left = 2,
    Local = 3,
    Extremal = 4,
}

impl CaseKind {
    pub fn number(self) -> u8 {
        self as u8
    }
}

/// One padded round of one branch of the simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub round: usize,
    pub case: CaseKind,
    pub side: Side,
    /// Padded pebbles `(i′, j′)` after the round; only Spoiler's side is
    /// set when the round ended the original game.
    pub padded: [Option<usize>; 2],
    /// Original pebbles `(i, j)` after the round, if the game has started.
    pub original: Option<(usize, usize)>,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: Option<usize>| p.map_or("-".to_string(), |p| p.to_string());
        let (i, j) = self.original.map_or((None, None), |(i, j)| (Some(i), Some(j)));
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.round,
            self.case.number(),
            self.side,
            show(self.padded[0]),
            show(self.padded[1]),
            show(i),
            show(j)
        )
    }
}

/// A point where the simulation could not keep its invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// The padded round being played.
    pub round: usize,
    pub case: Option<CaseKind>,
    pub reason: String,
    pub trace: Vec<TraceLine>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let case = self.case.map_or("-".to_string(), |c| c.number().to_string());
        write!(f, "round {}, case {}: {}", self.round, case, self.reason)
    }
}

/// The translated strategy with everything needed to audit it.
#[derive(Clone, Debug)]
pub struct Translation {
    /// Spoiler's strategy on `(u, v)` over `{less, succ}`.
    pub strategy: Strategy,
    /// The original game it was built for.
    pub spec: GameSpec,
    /// One trace per explored branch, ending where Spoiler wins on `(u, v)`.
    pub traces: Vec<Vec<TraceLine>>,
    pub violations: Vec<Violation>,
    /// Exhaustive replay of `strategy` in `spec`.
    pub verdict: Result<(), StrategyViolation>,
}

impl Translation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.verdict.is_ok()
    }

    /// Tab-separated trace: `round case side i′ j′ i j`, branches separated
    /// by comment lines.
    pub fn trace_tsv(&self) -> String {
        let mut out = String::from("# round\tcase\tside\ti'\tj'\ti\tj\n");
        for (k, branch) in self.traces.iter().enumerate() {
            out.push_str(&format!("# branch {k}\n"));
            for line in branch {
                out.push_str(&format!("{line}\n"));
            }
        }
        for v in &self.violations {
            out.push_str(&format!("# violation: {v}\n"));
        }
        out
    }
}

/// Translates the Spoiler strategy `oracle` for the `(s, m)` game on the
/// padded pair over `{less} ∪ sig`.
pub fn translate_strategy(
    pair: &PaddedPair,
    oracle: &mut dyn SpoilerOracle,
    s: usize,
    m: usize,
) -> Result<Translation, CollapseError> {
    translate_strategy_with(pair, oracle, s, m, SolverConfig::default())
}

pub fn translate_strategy_with(
    pair: &PaddedPair,
    oracle: &mut dyn SpoilerOracle,
    s: usize,
    m: usize,
    config: SolverConfig,
) -> Result<Translation, CollapseError> {
    let padded_sig = pair.sig.with(builtin("less")?);
    let padded = GameSpec::new(
        pair.u_padded.clone(),
        pair.v_padded.clone(),
        s,
        Alternations::Bounded(m),
        padded_sig.clone(),
    );
    let spec = GameSpec::new(
        pair.u.clone(),
        pair.v.clone(),
        s,
        Alternations::Bounded(m),
        Signature::parse("less+succ")?,
    );
    let mut sim = Simulator {
        pair,
        graph: NeighborGraph::from_signature(&pair.sig)?,
        padded,
        padded_sig,
        spec: spec.clone(),
        oracle,
        config,
        locals: HashMap::new(),
        strategy: Strategy::new(Player::Spoiler),
        traces: Vec::new(),
        violations: Vec::new(),
    };
    let start = Branch {
        padded: GameState::initial(),
        original: GameState::initial(),
        local: None,
        trace: Vec::new(),
    };
    sim.explore(start)?;
    let verdict = crate::efgame::verify_strategy(&spec, &sim.strategy);
    Ok(Translation {
        strategy: sim.strategy,
        spec,
        traces: sim.traces,
        violations: sim.violations,
        verdict,
    })
}

type LocalKey = (Triple, Triple, Variant, usize);

#[derive(Clone)]
struct Branch {
    padded: GameState,
    original: GameState,
    /// The running constrained game and its state.
    local: Option<(LocalKey, GameState)>,
    trace: Vec<TraceLine>,
}

struct Simulator<'a> {
    pair: &'a PaddedPair,
    graph: NeighborGraph,
    padded: GameSpec,
    padded_sig: Signature,
    spec: GameSpec,
    oracle: &'a mut dyn SpoilerOracle,
    config: SolverConfig,
    locals: HashMap<LocalKey, Solution>,
    strategy: Strategy,
    traces: Vec<Vec<TraceLine>>,
    violations: Vec<Violation>,
}

/// Membership in an interval that may be empty.
fn within(set: Result<crate::efgame::PositionSet, LocalityError>, x: usize) -> Result<bool, LocalityError> {
    match set {
        Ok(set) => Ok(set.contains(x)),
        Err(LocalityError::InvertedInterval { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

fn on(side: Side, pair: (usize, usize)) -> usize {
    match side {
        Side::U => pair.0,
        Side::V => pair.1,
    }
}

impl Simulator<'_> {
    fn violation(&mut self, b: &Branch, case: Option<CaseKind>, reason: impl Into<String>) {
        self.violations.push(Violation {
            round: b.padded.rounds_used + 1,
            case,
            reason: reason.into(),
            trace: b.trace.clone(),
        });
    }

    fn triple(&self, side: Side, k: usize) -> Triple {
        let k = k as isize;
        (self.pair.anchor(side, k - 1), self.pair.anchor(side, k), self.pair.anchor(side, k + 1))
    }

    fn classify(&self, b: &Branch, mv: Move) -> Result<(CaseKind, usize), CollapseError> {
        let side = mv.side;
        let x = mv.position;
        let r = b.padded.rounds_used;
        let t = self.padded.rounds - r;
        let a = |k: isize| self.pair.anchor(side, k);
        let g = &self.graph;
        let len = self.pair.original(side).len();
        let k0 = b.original.current.map(|p| on(side, p));
        for k in 0..len {
            if k0.is_some_and(|k0| k == k0 || k + 1 == k0) {
                continue;
            }
            let k = k as isize;
            if within(g.interval_j(a(k), a(k + 1), t), x)? {
                return Ok((CaseKind::Fresh, k as usize));
            }
        }
        if let Some(k0) = k0 {
            let k0i = k0 as isize;
            if k0 >= 1 && g.neighborhood_set(a(k0i - 1), t)?.contains(x) {
                return Ok((CaseKind::Left, k0 - 1));
            }
            if within(g.interval_i(a(k0i - 1), a(k0i + 1), r, self.padded.rounds), x)? {
                return Ok((CaseKind::Local, k0));
            }
        }
        Ok((CaseKind::Extremal, x))
    }

    fn local_reply(&mut self, key: LocalKey, state: &GameState, mv: Move) -> Result<Option<(usize, bool)>, CollapseError> {
        if !self.locals.contains_key(&key) {
            let (tu, tv, variant, s_prime) = key;
            let spec = constrained_spec(tu, tv, s_prime, variant, &self.padded_sig)?;
            self.locals.insert(key, Solution::new(&spec, self.config)?);
        }
        Ok(self.locals.get_mut(&key).unwrap().duplicator_reply(state, mv))
    }

    fn explore(&mut self, mut b: Branch) -> Result<(), CollapseError> {
        loop {
            let Some(mv) = self.oracle.spoiler_move(&b.padded) else {
                self.violation(&b, None, "the padded game ended without a Spoiler win on the original pair");
                return Ok(());
            };
            if rules::check_spoiler_move(&self.padded, &b.padded, mv).is_err() {
                self.violation(&b, None, format!("the oracle's move {mv} is illegal in the padded game"));
                return Ok(());
            }
            let (case, k) = self.classify(&b, mv)?;
            match case {
                CaseKind::Local => {
                    let Some((key, local)) = b.local else {
                        self.violation(&b, Some(case), "no constrained game is running");
                        return Ok(());
                    };
                    match self.local_reply(key, &local, mv)? {
                        Some((y, true)) => {
                            b.local = Some((key, advance(&local, mv, y)));
                            if !self.answer(&mut b, case, mv, y) {
                                return Ok(());
                            }
                        }
                        _ => {
                            self.violation(&b, Some(case), "the constrained game has no winning answer");
                            return Ok(());
                        }
                    }
                }
                CaseKind::Extremal => {
                    if !self.answer(&mut b, case, mv, mv.position) {
                        return Ok(());
                    }
                }
                CaseKind::Fresh | CaseKind::Left => return self.branch(b, case, mv, k),
            }
        }
    }

    /// Plays the simulated padded answer `y`; false when the branch died.
    fn answer(&mut self, b: &mut Branch, case: CaseKind, mv: Move, y: usize) -> bool {
        if check_duplicator_reply(&self.padded, &b.padded, mv, y).is_err() {
            self.violation(b, Some(case), format!("answer {y} to {mv} is illegal in the padded game"));
            return false;
        }
        let next = advance(&b.padded, mv, y);
        if !is_partial_iso(&next, &self.padded) {
            self.violation(b, Some(case), format!("answer {y} to {mv} loses the padded game"));
            return false;
        }
        b.padded = next;
        b.trace.push(TraceLine {
            round: next.rounds_used,
            case,
            side: mv.side,
            padded: next.current.map(|(i, j)| [Some(i), Some(j)]).expect("a round was played"),
            original: b.original.current,
        });
        true
    }

    /// Spoiler plays letter `k` on the original pair; every answer is tried.
    fn branch(&mut self, b: Branch, case: CaseKind, mv: Move, k: usize) -> Result<(), CollapseError> {
        let side = mv.side;
        let attack = Move::new(side, k);
        if let Err(e) = rules::check_spoiler_move(&self.spec, &b.original, attack) {
            self.violation(&b, Some(case), format!("translated move {attack} is illegal: {e}"));
            return Ok(());
        }
        if self.strategy.insert(Turn::Spoiler(b.original), attack).is_err() {
            self.violation(&b, Some(case), "the translated strategy is not positional");
            return Ok(());
        }
        let variant = if case == CaseKind::Fresh { Variant::Interval } else { Variant::Neighborhood };
        let s_prime = self.padded.rounds - b.padded.rounds_used;
        for reply in rules::duplicator_domain(&self.spec, &b.original, attack).iter() {
            let mut next = b.clone();
            next.original = advance(&b.original, attack, reply);
            if let Outcome::Won(Player::Spoiler) = rules::outcome(&self.spec, &next.original) {
                next.trace.push(TraceLine {
                    round: b.padded.rounds_used + 1,
                    case,
                    side,
                    padded: {
                        let mut p = [None, None];
                        p[side.index()] = Some(mv.position);
                        p
                    },
                    original: next.original.current,
                });
                self.traces.push(next.trace);
                continue;
            }
            let (i, j) = next.original.current.expect("a round was played");
            let key = (self.triple(Side::U, i), self.triple(Side::V, j), variant, s_prime);
            let local = GameState::initial();
            match self.local_reply(key, &local, mv)? {
                Some((y, true)) => {
                    next.local = Some((key, advance(&local, mv, y)));
                    if self.answer(&mut next, case, mv, y) {
                        self.explore(next)?;
                    }
                }
                _ => self.violation(&next, Some(case), "no locally equivalent answer exists"),
            }
        }
        Ok(())
    }
}
