//! The batch commands. Each writes its result to `out` and reports problems
//! as a [`Failure`] carrying the exit code.

use std::fs;
use std::io::Write;
use std::path::Path;

use fo2::collapse::transform_theorem3;
use fo2::efgame::{Alternations, GameSpec, Player, Solution, SolverConfig};
use fo2::experiments::{pipeline_suite, prop2_suite, theorem3_suite, ExperimentReport};
use fo2::locality::NeighborGraph;
use fo2::predicates::{builtin, from_relation_file, from_set_file};
use fo2::types::{well_typed_extraction, Typer};
use fo2::{evaluate, parse, Alphabet, Formula, Signature, Word};

use crate::failure::Failure;

/// Reads a formula from a file, or takes `source` as the formula itself
/// when `inline` is set.
pub fn load_formula(source: &str, inline: bool) -> Result<Formula, Failure> {
    let text = if inline {
        source.to_string()
    } else {
        fs::read_to_string(source).map_err(|e| Failure::usage(format!("cannot read {source}: {e}")))?
    };
    Ok(parse(&text)?)
}

/// `m` as a number, or `inf` for no alternation bound.
pub fn parse_alternations(m: &str) -> Result<Alternations, Failure> {
    match m {
        "inf" | "unbounded" => Ok(Alternations::Unbounded),
        _ => m
            .parse()
            .map(Alternations::Bounded)
            .map_err(|_| Failure::usage(format!("alternation bound `{m}` is neither a number nor `inf`"))),
    }
}

/// A catalogue signature extended with predicates read from files, each
/// given as `name=path`.
pub fn build_signature(spec: &str, relations: &[String], sets: &[String]) -> Result<Signature, Failure> {
    let mut sig = Signature::parse(spec)?;
    let split = |item: &str| {
        item.split_once('=')
            .ok_or_else(|| Failure::usage(format!("`{item}` should be `name=path`")))
            .map(|(n, p)| (n.to_string(), p.to_string()))
    };
    for item in relations {
        let (name, path) = split(item)?;
        sig.push(from_relation_file(name, &path)?)?;
    }
    for item in sets {
        let (name, path) = split(item)?;
        sig.push(from_set_file(name, &path)?)?;
    }
    Ok(sig)
}

pub fn eval(f: &Formula, word: &str, sig: &Signature, out: &mut dyn Write) -> Result<(), Failure> {
    let value = evaluate(f, &Word::new(word.chars()), sig)?;
    writeln!(out, "{value}")?;
    Ok(())
}

/// Solves the game, prints the winner and, if `strategy_file` is given,
/// writes the winner's strategy as a state → move table.
pub fn game_solve(
    spec: &GameSpec,
    solver: SolverConfig,
    strategy_file: Option<&Path>,
    strategy_limit: usize,
    out: &mut dyn Write,
) -> Result<Player, Failure> {
    let mut solution = Solution::new(spec, solver)?;
    let winner = solution.winner();
    writeln!(out, "{winner}")?;
    if let Some(path) = strategy_file {
        let strategy = solution.strategy(strategy_limit)?;
        let mut text = format!("# u={} v={} s={} m={:?} sig={}\n", spec.u, spec.v, spec.rounds, spec.alternations, spec.sig);
        text.push_str("# previous\tcurrent\trounds\talternations\tlast side\tpending attack\tmove\n");
        text.push_str(&strategy.to_table());
        fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(winner)
}

pub struct TransformOptions<'a> {
    pub neutral: char,
    pub alphabet: &'a str,
    pub out_dir: &'a Path,
    /// Positions below this bound are tabulated for generated predicates.
    pub table_size: usize,
    /// Compare the two formulas on all words up to this length.
    pub verify: Option<usize>,
}

/// Writes `formula.fo2` and a `predicates/` directory: `catalogue.txt` lists
/// catalogue predicates by identifier, and every other predicate is
/// tabulated on positions below `table_size` as a relation (`NAME.rel`) or
/// set (`NAME.set`) file.
pub fn transform(f: &Formula, sig: &Signature, opts: &TransformOptions, out: &mut dyn Write) -> Result<(), Failure> {
    let alphabet = Alphabet::new(opts.alphabet.chars());
    let t = transform_theorem3(f, sig, opts.neutral, &alphabet)?;
    let pred_dir = opts.out_dir.join("predicates");
    fs::create_dir_all(&pred_dir)?;
    fs::write(opts.out_dir.join("formula.fo2"), format!("{}\n", t.formula))?;
    let n = opts.table_size;
    let mut catalogue = String::new();
    let mut tables = 0;
    for p in t.env.iter() {
        if builtin(p.name()).is_ok() {
            catalogue.push_str(p.name());
            catalogue.push('\n');
            continue;
        }
        let mut text = format!("# {} on positions below {n}\n", p.name());
        let ext = match p.arity() {
            1 => {
                for x in (0..n).filter(|&x| p.holds(&[x], n)) {
                    text.push_str(&format!("{x}\n"));
                }
                "set"
            }
            2 => {
                for x in 0..n {
                    for y in (0..n).filter(|&y| p.holds2(x, y, n)) {
                        text.push_str(&format!("{x} {y}\n"));
                    }
                }
                "rel"
            }
            a => return Err(Failure::usage(format!("cannot tabulate `{}` of arity {a}", p.name()))),
        };
        fs::write(pred_dir.join(format!("{}.{ext}", p.name())), text)?;
        tables += 1;
    }
    fs::write(pred_dir.join("catalogue.txt"), catalogue)?;
    writeln!(out, "{}", t.formula)?;
    writeln!(
        out,
        "wrote {} with {} catalogue predicates and {tables} tables",
        opts.out_dir.display(),
        t.env.len() - tables
    )?;
    if let Some(max) = opts.verify {
        let words = alphabet.words_upto(max)?;
        for w in &words {
            if evaluate(f, w, sig)? != evaluate(&t.formula, w, &t.env)? {
                return Err(Failure::violation(format!("the rewritten formula disagrees on `{w}`")));
            }
        }
        writeln!(out, "agrees on all {} words up to length {max}", words.len())?;
    }
    Ok(())
}

/// Prints a `p`-position `s`-extraction, found greedily or, with
/// `well_typed`, with all triples of one type.
pub fn extract(p: usize, s: usize, sig: &Signature, ceiling: usize, well_typed: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let x = if well_typed {
        well_typed_extraction(p, s, sig, ceiling)?
    } else {
        NeighborGraph::from_signature(sig)?.find_extraction(p, s, ceiling)?
    };
    let text: Vec<String> = x.positions.iter().map(usize::to_string).collect();
    writeln!(out, "{}", text.join(" "))?;
    Ok(())
}

/// Prints the type vector of each triple; with two triples, also whether
/// they are equivalent.
pub fn types(sig: &Signature, s: usize, triples: &[(usize, usize, usize)], out: &mut dyn Write) -> Result<(), Failure> {
    let mut typer = Typer::new(sig, s)?;
    let mut vectors = Vec::new();
    for &t in triples {
        let v = typer.type_vector(t)?;
        writeln!(out, "{t:?}")?;
        for (level, ty) in v.iter().enumerate() {
            writeln!(out, "  s'={level}: {}", typer.table().render_triple(ty))?;
        }
        vectors.push(v);
    }
    if let [a, b] = vectors.as_slice() {
        writeln!(out, "{}", if a == b { "equivalent" } else { "not equivalent" })?;
    }
    Ok(())
}

pub enum Suite {
    Theorem3 { seed: u64, random: usize, max_len: usize },
    Prop2 { max_len: usize },
    Pipeline { sig: String, s: usize, max_len: usize, ceiling: usize },
}

/// Runs one experiment battery. The summary goes to `out`, the full report
/// as JSON to `report_file` if given. Any failed instance is a violation.
pub fn check_collapse(suite: &Suite, report_file: Option<&Path>, out: &mut dyn Write) -> Result<ExperimentReport, Failure> {
    let report = match suite {
        Suite::Theorem3 { seed, random, max_len } => theorem3_suite(*seed, *random, *max_len)?,
        Suite::Prop2 { max_len } => prop2_suite(*max_len)?,
        Suite::Pipeline { sig, s, max_len, ceiling } => pipeline_suite(sig, *s, *max_len, *ceiling)?,
    };
    if let Some(path) = report_file {
        let json = serde_json::to_string_pretty(&report).expect("reports serialise");
        fs::write(path, json + "\n").map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let s = report.summary;
    writeln!(
        out,
        "{}: {} instances, {} passed, {} vacuous, {} skipped, {} violations",
        report.suite, s.total, s.passed, s.vacuous, s.skipped, s.failed
    )?;
    for i in report.failures() {
        writeln!(out, "violation: {}: {:?}", i.descriptor, i.verdict)?;
    }
    if s.failed > 0 {
        return Err(Failure::violation(format!("{} violations", s.failed)));
    }
    Ok(report)
}
