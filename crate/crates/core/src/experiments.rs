//! Batteries that run the collapse constructions over whole corpora and
//! record one verdict per instance.

use std::time::Instant;

use serde::Serialize;

use crate::collapse::{pad_prop2, place_on_extraction, transform_theorem3, translate_strategy, CollapseError};
use crate::efgame::{solve, Alternations, GameSpec, Player};
use crate::evaluator::{check_neutral, Alphabet, LanguageOracle, NeutralVerdict, Word};
use crate::formula::{parse, Formula};
use crate::locality::Extraction;
use crate::predicates::{builtin, random_relation, Signature};
use crate::symbolic::{first_disagreement, neutrality_violation};
use crate::types::{TypeError, Typer};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// The property holds because its hypothesis does not.
    Vacuous,
    Fail(String),
    Skipped(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub descriptor: String,
    pub verdict: Verdict,
    pub millis: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub vacuous: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub suite: String,
    pub seed: u64,
    pub instances: Vec<Instance>,
    pub summary: Summary,
}

impl ExperimentReport {
    fn new(suite: &str, seed: u64) -> Self {
        ExperimentReport {
            suite: suite.to_string(),
            seed,
            instances: Vec::new(),
            summary: Summary::default(),
        }
    }

    fn record(&mut self, descriptor: String, started: Instant, verdict: Verdict) {
        let s = &mut self.summary;
        s.total += 1;
        match verdict {
            Verdict::Pass => s.passed += 1,
            Verdict::Vacuous => s.vacuous += 1,
            Verdict::Fail(_) => s.failed += 1,
            Verdict::Skipped(_) => s.skipped += 1,
        }
        self.instances.push(Instance {
            descriptor,
            verdict,
            millis: started.elapsed().as_millis() as u64,
        });
    }

    pub fn violations(&self) -> usize {
        self.summary.failed
    }

    pub fn failures(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| matches!(i.verdict, Verdict::Fail(_)))
    }
}

// ---------------------------------------------------------------------------
// formula rewriting

/// Predicates available to the rewriting corpus: the order, a diagonal
/// predicate, a length-indexed one and two seeded random relations.
pub fn theorem3_signature(seed: u64) -> Signature {
    let mut sig = Signature::parse("less+pow2diag+maxsum").expect("catalogue predicates");
    sig.push(random_relation("rnd", seed, 0.3)).expect("fresh name");
    sig.push(random_relation("rnd2", seed.wrapping_add(1), 0.6)).expect("fresh name");
    sig
}

const THEOREM3_FORMULAS: &[&str] = &[
    "true",
    "false",
    "E x. a(x)",
    "A x. a(x) | c(x)",
    "!(E x. a(x))",
    "E x. a(x) & E y. x < y & a(y)",
    "E x. a(x) & (E y. a(y) & !(x = y))",
    "E x. a(x) & A y. (a(y) -> !(y < x))",
    "A x. (a(x) -> E y. y < x & a(y)) | !(E y. y < x & a(y))",
    "E x. a(x) & A y. (rnd(x, y) | !rnd(x, y))",
    "E x. E y. a(x) & a(y) & (rnd(x, y) | !rnd(x, y)) & x < y",
    "E x. a(x) & (E y. x < y & a(y) & (rnd2(y, x) | !rnd2(y, x)))",
    "A x. (a(x) & (rnd(x, x) | !rnd(x, x))) -> E y. (a(y) & (y < x | x < y | x = y))",
    "E x. a(x) & A y. ((a(y) & x < y) -> (E x. y < x & a(x)) | (maxsum(x, y) | !maxsum(x, y)))",
    "(E x. a(x) & E y. y < x & a(y)) -> (E x. a(x) & E y. x < y & a(y) & E x. y < x & a(x))",
    "A x. A y. ((a(x) & a(y)) -> (x = y | x < y | y < x))",
    "E x. (a(x) & A y. (y < x -> c(y)))",
    "E x. (a(x) & A y. (x < y -> c(y))) & E y. (a(y) & A x. (x < y -> c(x)))",
    "E x. a(x) & (pow2diag(x, x) | !pow2diag(x, x)) & E y. (x < y & a(y) & (rnd(x, y) | !rnd(x, y)))",
    "E x. E y. x < y & a(x) & a(y) & E x. y < x & a(x)",
    "!(E x. E y. x < y & a(x) & a(y))",
];

/// Longest word the rewriting looks at when evaluating words of length at
/// most `max_len`: a word of length `n ≥ 3` is padded with the neutral
/// letter to length `2^(⌊log₂(n − 1)⌋ + 1)`.
fn padded_horizon(max_len: usize) -> usize {
    if max_len < 3 {
        return max_len;
    }
    let j = (max_len - 1).ilog2();
    max_len.max(1 << (j + 1))
}

/// The rewriting corpus: fixed formulas plus random two-variable formulas
/// over `{less, rnd}`, keeping those for which `c` is neutral up to the
/// padded length of words of length `max_len` (a random relation can make a
/// language depend on the length alone, which enumeration up to 8 does not
/// catch).
pub fn theorem3_corpus(seed: u64, random: usize, max_len: usize) -> Result<Vec<Formula>, CollapseError> {
    use rand::SeedableRng;
    let sig = theorem3_signature(seed);
    let ac = Alphabet::new(['a', 'c']);
    let mut out: Vec<Formula> = THEOREM3_FORMULAS.iter().map(|s| parse(s).expect("corpus formula parses")).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    let mut added = 0;
    while added < random && attempts < 200 * random.max(1) {
        attempts += 1;
        let f = random_formula(&mut rng, 3, &mut Vec::new());
        if f.quantifier_depth() == 0 || out.contains(&f) {
            continue;
        }
        let oracle = LanguageOracle::from_formula(&f, &sig, ac.clone())?;
        if let NeutralVerdict::NeutralUpTo(_) = check_neutral(&oracle, 'c', 8)? {
            if neutrality_violation(&f, &sig, &ac, 'c', padded_horizon(max_len))?.is_none() {
                out.push(f);
                added += 1;
            }
        }
    }
    Ok(out)
}

fn random_formula(rng: &mut rand_chacha::ChaCha8Rng, depth: usize, bound: &mut Vec<&'static str>) -> Formula {
    use rand::Rng;
    let vars = ["x", "y"];
    let choice = rng.gen_range(0..10);
    match choice {
        0..=3 if depth > 0 => {
            let v = vars[rng.gen_range(0..2)];
            bound.push(v);
            let body = random_formula(rng, depth - 1, bound);
            bound.pop();
            if rng.gen_bool(0.5) {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
        4 | 5 => {
            let a = random_formula(rng, depth, bound);
            let b = random_formula(rng, depth, bound);
            if choice == 4 {
                Formula::and([a, b])
            } else {
                Formula::or([a, b])
            }
        }
        6 => Formula::not(random_formula(rng, depth, bound)),
        _ if bound.is_empty() => Formula::True,
        _ => {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| bound[rng.gen_range(0..bound.len())];
            match rng.gen_range(0..3) {
                0 => Formula::letter('a', pick(rng)),
                1 => Formula::less(pick(rng), pick(rng)),
                _ => Formula::pred("rnd", [pick(rng), pick(rng)]),
            }
        }
    }
}

/// Transforms every corpus formula and compares it with the original on all
/// words over `{a, c}` of length at most `max_len`.
pub fn theorem3_suite(seed: u64, random: usize, max_len: usize) -> Result<ExperimentReport, CollapseError> {
    let sig = theorem3_signature(seed);
    let ac = Alphabet::new(['a', 'c']);
    let mut report = ExperimentReport::new("theorem3", seed);
    for f in theorem3_corpus(seed, random, max_len)? {
        let started = Instant::now();
        let oracle = LanguageOracle::from_formula(&f, &sig, ac.clone())?;
        if let NeutralVerdict::Counterexample(u, v) = check_neutral(&oracle, 'c', 8)? {
            report.record(f.to_string(), started, Verdict::Skipped(format!("c is not neutral: `{u}` / `{v}`")));
            continue;
        }
        if let Some((w, k)) = neutrality_violation(&f, &sig, &ac, 'c', padded_horizon(max_len))? {
            let why = format!("c is not neutral: inserting it at {k} in `{w}`");
            report.record(f.to_string(), started, Verdict::Skipped(why));
            continue;
        }
        let t = transform_theorem3(&f, &sig, 'c', &ac)?;
        let verdict = match first_disagreement(&f, &sig, &t.formula, &t.env, &ac, max_len)? {
            None => Verdict::Pass,
            Some(w) => Verdict::Fail(format!("disagreement on `{w}`")),
        };
        report.record(f.to_string(), started, verdict);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// padding with the neutral letter

/// Formulas over `{less, succ}` on `{a, b, c}` with `c` neutral.
const PROP2_FORMULAS: &[&str] = &[
    "E x. a(x)",
    "E x. a(x) & E y. x < y & b(y)",
    "A x. (a(x) -> E y. x < y & b(y))",
    "E x. a(x) & A y. (b(y) -> y < x)",
    "E x. (a(x) & A y. (x < y -> !a(y)) & E y. (y < x & b(y)))",
    "E x. a(x) & E y. ((succ(x, y) | !succ(x, y)) & x < y & b(y))",
    "A x. (a(x) -> E y. (y < x & b(y) & E x. (y < x & a(x))))",
    "E x. (a(x) & A y. (succ(y, x) -> (a(y) | b(y) | c(y))))",
    "A x. (b(x) -> E y. (x < y & a(y) & A x. (y < x -> !b(x))))",
    "E x. (a(x) & A y. (x < y -> (E x. (y < x & b(x)) | !a(y))))",
    "A x. A y. ((a(x) & b(y)) -> x < y)",
    "E x. (b(x) & E y. (x < y & a(y) & A x. (y < x -> !b(x))))",
    "(E x. a(x)) & !(E x. b(x))",
];

pub fn prop2_corpus() -> Vec<Formula> {
    PROP2_FORMULAS.iter().map(|s| parse(s).expect("corpus formula parses")).collect()
}

/// For every corpus formula of depth `s` and alternation depth `m`, and every
/// pair of words of length at most `max_len` it separates: Spoiler wins the
/// `(s, m)` game over `{less, succ}` on `(u, v)` (checked) and then also over
/// `{less}` on the `2s`-padded pair.
pub fn prop2_suite(max_len: usize) -> Result<ExperimentReport, CollapseError> {
    let abc = Alphabet::new(['a', 'b', 'c']);
    let sig = Signature::parse("less+succ")?;
    let less = Signature::parse("less")?;
    let words = abc.words_upto(max_len)?;
    let mut report = ExperimentReport::new("prop2", 0);
    for f in prop2_corpus() {
        let started = Instant::now();
        let metrics = f.metrics();
        let (s, m) = (metrics.quantifier_depth, metrics.alternation_depth);
        let oracle = LanguageOracle::from_formula(&f, &sig, abc.clone())?;
        if let NeutralVerdict::Counterexample(u, v) = check_neutral(&oracle, 'c', 6)? {
            report.record(f.to_string(), started, Verdict::Skipped(format!("c is not neutral: `{u}` / `{v}`")));
            continue;
        }
        let member: Vec<bool> = words.iter().map(|w| oracle.contains(w)).collect();
        let (mut pairs, mut problems) = (0usize, Vec::new());
        for (a, u) in words.iter().enumerate() {
            for (b, v) in words.iter().enumerate() {
                if member[a] == member[b] {
                    continue;
                }
                pairs += 1;
                let original = GameSpec::new(u.clone(), v.clone(), s, Alternations::Bounded(m), sig.clone());
                if solve(&original)?.winner() != Player::Spoiler {
                    problems.push(format!("Duplicator wins on `{u}` / `{v}` over less+succ"));
                    continue;
                }
                let padded = GameSpec::new(pad_prop2(u, s, 'c'), pad_prop2(v, s, 'c'), s, Alternations::Bounded(m), less.clone());
                if solve(&padded)?.winner() != Player::Spoiler {
                    problems.push(format!("Duplicator wins on padded `{u}` / `{v}`"));
                }
            }
        }
        let descriptor = format!("{f} [s={s}, m={m}, {pairs} separated pairs]");
        let verdict = if problems.is_empty() {
            if pairs == 0 {
                Verdict::Vacuous
            } else {
                Verdict::Pass
            }
        } else {
            Verdict::Fail(problems.join("; "))
        };
        report.record(descriptor, started, verdict);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// strategy translation

/// The largest well-typed extraction with between 3 and `wanted` positions
/// that can be found within the interval budget.
pub fn largest_extraction(sig: &Signature, s: usize, wanted: usize, ceiling: usize) -> Result<Option<Extraction>, CollapseError> {
    for size in (3..=wanted).rev() {
        match Typer::new(sig, s)?.well_typed_extraction(size, ceiling) {
            Ok(x) => return Ok(Some(x)),
            Err(TypeError::BudgetExceeded { .. } | TypeError::Exhausted { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

/// Runs padding and strategy translation for every pair of nonempty words
/// over `{a, b}` of length at most `max_len` and every `m ≤ s`.
pub fn pipeline_suite(sig_spec: &str, s: usize, max_len: usize, ceiling: usize) -> Result<ExperimentReport, CollapseError> {
    let sig = Signature::parse(sig_spec)?;
    let with_less = sig.with(builtin("less")?);
    let ab = Alphabet::new(['a', 'b']);
    let words: Vec<Word> = ab.words_upto(max_len)?.into_iter().filter(|w| !w.is_empty()).collect();
    let mut report = ExperimentReport::new(&format!("pipeline {sig_spec} s={s}"), 0);
    let extraction = largest_extraction(&sig, s, max_len + 2, ceiling)?;
    let available = extraction.as_ref().map_or(0, |x| x.positions.len());
    for u in &words {
        for v in &words {
            for m in 0..=s {
                let started = Instant::now();
                let descriptor = format!("{sig_spec} s={s} m={m} u={u} v={v}");
                let need = u.len().max(v.len()) + 2;
                let verdict = if need > available {
                    Verdict::Fail(format!(
                        "no well-typed extraction of {need} positions within the budget (largest found: {available})"
                    ))
                } else {
                    let x = extraction.as_ref().expect("available > 0");
                    match place_on_extraction(u, v, 'c', s, &sig, x) {
                        Err(CollapseError::Unalignable(..)) => {
                            Verdict::Skipped("first and last letters cannot both be aligned".into())
                        }
                        Err(e) => return Err(e),
                        Ok(pair) => {
                            let spec = GameSpec::new(
                                pair.u_padded.clone(),
                                pair.v_padded.clone(),
                                s,
                                Alternations::Bounded(m),
                                with_less.clone(),
                            );
                            let mut solution = solve(&spec)?;
                            if solution.winner() != Player::Spoiler {
                                Verdict::Vacuous
                            } else {
                                let t = translate_strategy(&pair, &mut solution, s, m)?;
                                if t.is_valid() {
                                    Verdict::Pass
                                } else {
                                    let mut why: Vec<String> = t.violations.iter().map(|v| v.to_string()).collect();
                                    if let Err(e) = &t.verdict {
                                        why.push(format!("replay: {e}"));
                                    }
                                    Verdict::Fail(why.join("; "))
                                }
                            }
                        }
                    }
                };
                report.record(descriptor, started, verdict);
            }
        }
    }
    Ok(report)
}
