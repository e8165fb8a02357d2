//! Line-oriented play against the solver.
//!
//! The human types `u 3` or `v 0` to place a pebble (a Duplicator answer may
//! give just the position), `hint` for the solver's suggestion, `board` to
//! redraw and `quit` to stop. Unreadable or illegal input is reported and
//! the prompt repeats with the game unchanged.

use std::io::{BufRead, Write};

use fo2::efgame::{GameSpec, Move, Player, Session, Side, SolverConfig};

use crate::failure::Failure;

enum Command {
    Place(Option<Side>, usize),
    Hint,
    Board,
    Quit,
}

fn parse_command(line: &str) -> Result<Command, String> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let position = |s: &str| s.parse::<usize>().map_err(|_| format!("`{s}` is not a position"));
    match words.as_slice() {
        ["hint"] => Ok(Command::Hint),
        ["board"] => Ok(Command::Board),
        ["quit" | "q"] => Ok(Command::Quit),
        ["u" | "U", p] => Ok(Command::Place(Some(Side::U), position(p)?)),
        ["v" | "V", p] => Ok(Command::Place(Some(Side::V), position(p)?)),
        [p] => Ok(Command::Place(None, position(p)?)),
        _ => Err("expected `u <position>`, `v <position>`, `hint`, `board` or `quit`".into()),
    }
}

fn board(session: &Session, out: &mut dyn Write) -> std::io::Result<()> {
    let view = session.view();
    for (name, word) in [("u", &view.u), ("v", &view.v)] {
        let letters: Vec<String> = word.chars().map(|c| format!("{c:>3}")).collect();
        let indices: Vec<String> = (0..word.chars().count()).map(|i| format!("{i:>3}")).collect();
        writeln!(out, "{name}: {}", letters.concat())?;
        writeln!(out, "   {}", indices.concat())?;
    }
    let pair = |p: Option<(usize, usize)>| p.map_or("-".to_string(), |(i, j)| format!("({i},{j})"));
    let budget = view.alternations.map_or("∞".to_string(), |m| m.to_string());
    writeln!(
        out,
        "round {}/{}, alternations {}/{}, pebbles {} {}",
        view.rounds_used, view.rounds, view.alternations_used, budget, pair(view.previous), pair(view.current)
    )?;
    if let Some(mv) = view.pending {
        writeln!(out, "Spoiler played {} {}", mv.side, mv.position)?;
    }
    Ok(())
}

/// Plays one game with the human as `human`; returns the winner, or `None`
/// if the input ends or the human quits first.
pub fn play(
    spec: &GameSpec,
    human: Player,
    solver: SolverConfig,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<Option<Player>, Failure> {
    let mut session = Session::with_config(spec, solver)?;
    board(&session, out)?;
    let mut line = String::new();
    loop {
        if let Some(w) = session.winner() {
            writeln!(out, "winner: {w}")?;
            return Ok(Some(w));
        }
        let turn = session.turn().expect("an undecided game has a player to move");
        if turn != human {
            let mv = session.engine_move().map_err(|e| Failure::violation(e.to_string()))?;
            writeln!(out, "{turn} plays {} {}", mv.side, mv.position)?;
            board(&session, out)?;
            continue;
        }
        write!(out, "{turn}> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(None);
        }
        let command = match parse_command(&line) {
            Ok(c) => c,
            Err(e) => {
                writeln!(out, "? {e}")?;
                continue;
            }
        };
        match command {
            Command::Quit => return Ok(None),
            Command::Board => board(&session, out)?,
            Command::Hint => match session.hint() {
                Ok(h) => writeln!(
                    out,
                    "hint: {} {}{}",
                    h.side,
                    h.position,
                    if h.winning { " (winning)" } else { "" }
                )?,
                Err(e) => writeln!(out, "? {e}")?,
            },
            Command::Place(side, position) => {
                let side = match (side, session.pending()) {
                    (Some(s), _) => s,
                    (None, Some(attack)) => attack.side.other(),
                    (None, None) => {
                        writeln!(out, "? Spoiler must name a word: `u <position>` or `v <position>`")?;
                        continue;
                    }
                };
                match session.apply_move(human, Move::new(side, position)) {
                    Ok(()) => board(&session, out)?,
                    Err(e) => writeln!(out, "? {e}")?,
                }
            }
        }
    }
}
