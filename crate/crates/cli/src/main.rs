use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use fo2::efgame::{GameSpec, Player, SolverConfig};
use fo2::{Signature, Word};
use fo2_cli::commands::{self, Suite, TransformOptions};
use fo2_cli::failure::Failure;
use fo2_cli::play::play;
use fo2_cli::service::{serve, Service};

/// Two-variable logic on words: evaluation, Ehrenfeucht–Fraïssé games,
/// locality and collapse experiments.
#[derive(Parser)]
#[command(name = "fo2", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed formula on a word; prints `true` or `false`.
    Eval {
        /// File holding the formula (or the formula itself with --inline).
        formula: String,
        word: String,
        /// Signature: catalogue identifiers joined by `+`.
        #[arg(default_value = "less")]
        sig: String,
        #[arg(long)]
        inline: bool,
    },
    /// Play or solve the two-pebble game on a pair of words.
    Game {
        u: String,
        v: String,
        /// Rounds.
        s: usize,
        /// Alternation bound, or `inf`.
        m: String,
        sig: String,
        mode: Mode,
        /// Write the winner's strategy to this file (solve mode).
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Largest strategy table to materialise.
        #[arg(long, default_value_t = 1_000_000)]
        strategy_limit: usize,
        /// Your role in play mode.
        #[arg(long, value_enum, default_value = "spoiler")]
        human: Role,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Rewrite a neutral-letter formula over the fixed predicate set.
    Transform {
        formula: String,
        #[arg(long)]
        inline: bool,
        #[arg(long, default_value = "less")]
        sig: String,
        /// Extra binary predicate from a relation file, as `name=path`.
        #[arg(long = "relation")]
        relations: Vec<String>,
        /// Extra monadic predicate from a set file, as `name=path`.
        #[arg(long = "set")]
        sets: Vec<String>,
        #[arg(long, default_value_t = 'c')]
        neutral: char,
        #[arg(long, default_value = "ac")]
        alphabet: String,
        /// Output directory.
        #[arg(long, default_value = "transformed")]
        out: PathBuf,
        /// Tabulate generated predicates on positions below this bound.
        #[arg(long, default_value_t = 64)]
        table_size: usize,
        /// Check agreement on every word up to this length.
        #[arg(long)]
        verify: Option<usize>,
    },
    /// Find an extraction of `p` positions at radius `s`.
    Extract {
        p: usize,
        s: usize,
        sig: String,
        #[arg(long, default_value_t = 1 << 40)]
        ceiling: usize,
        /// Require all triples to share one type.
        #[arg(long)]
        well_typed: bool,
    },
    /// Print type vectors of one triple, or compare two.
    Types {
        sig: String,
        s: usize,
        /// Three or six positions.
        #[arg(required = true, num_args = 3..=6)]
        positions: Vec<usize>,
    },
    /// Run an experiment battery; exits 1 on any violation.
    CheckCollapse {
        #[arg(long, value_enum)]
        suite: SuiteName,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random formulas in the rewriting corpus.
        #[arg(long, default_value_t = 10)]
        random: usize,
        /// Longest word checked (default: 32 for theorem3, 3 otherwise).
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value = "eq")]
        sig: String,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1 << 40)]
        ceiling: usize,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Host interactive games over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Drop sessions idle for this many seconds.
        #[arg(long, default_value_t = 1800)]
        idle_secs: u64,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Solve,
    Play,
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    Spoiler,
    Duplicator,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Theorem3,
    Prop2,
    Pipeline,
}

#[derive(clap::Args)]
struct SolverArgs {
    /// Solver work budget.
    #[arg(long, default_value_t = SolverConfig::default().budget)]
    budget: u128,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { budget: self.budget }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Eval { formula, word, sig, inline } => {
            let f = commands::load_formula(&formula, inline)?;
            commands::eval(&f, &word, &Signature::parse(&sig)?, &mut out)
        }
        Command::Game { u, v, s, m, sig, mode, strategy, strategy_limit, human, solver } => {
            let spec = GameSpec::new(
                Word::new(u.chars()),
                Word::new(v.chars()),
                s,
                commands::parse_alternations(&m)?,
                Signature::parse(&sig)?,
            );
            match mode {
                Mode::Solve => {
                    commands::game_solve(&spec, solver.config(), strategy.as_deref(), strategy_limit, &mut out)?;
                }
                Mode::Play => {
                    let human = match human {
                        Role::Spoiler => Player::Spoiler,
                        Role::Duplicator => Player::Duplicator,
                    };
                    play(&spec, human, solver.config(), &mut io::stdin().lock(), &mut out)?;
                }
            }
            Ok(())
        }
        Command::Transform { formula, inline, sig, relations, sets, neutral, alphabet, out: dir, table_size, verify } => {
            let f = commands::load_formula(&formula, inline)?;
            let sig = commands::build_signature(&sig, &relations, &sets)?;
            let opts = TransformOptions {
                neutral,
                alphabet: &alphabet,
                out_dir: &dir,
                table_size,
                verify,
            };
            commands::transform(&f, &sig, &opts, &mut out)
        }
        Command::Extract { p, s, sig, ceiling, well_typed } => {
            commands::extract(p, s, &Signature::parse(&sig)?, ceiling, well_typed, &mut out)
        }
        Command::Types { sig, s, positions } => {
            let triples: Vec<_> = match positions.as_slice() {
                [a, b, c] => vec![(*a, *b, *c)],
                [a, b, c, d, e, f] => vec![(*a, *b, *c), (*d, *e, *f)],
                _ => return Err(Failure::usage("give three or six positions")),
            };
            commands::types(&Signature::parse(&sig)?, s, &triples, &mut out)
        }
        Command::CheckCollapse { suite, seed, random, max_len, sig, s, ceiling, report } => {
            let suite = match suite {
                SuiteName::Theorem3 => Suite::Theorem3 { seed, random, max_len: max_len.unwrap_or(32) },
                SuiteName::Prop2 => Suite::Prop2 { max_len: max_len.unwrap_or(3) },
                SuiteName::Pipeline => Suite::Pipeline { sig, s, max_len: max_len.unwrap_or(3), ceiling },
            };
            commands::check_collapse(&suite, report.as_deref(), &mut out).map(|_| ())
        }
        Command::Serve { port, host, idle_secs, solver } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| Failure::usage(format!("cannot listen on {host}:{port}: {e}")))?;
                writeln!(out, "listening on http://{}", listener.local_addr()?)?;
                out.flush()?;
                let service = Service::new(Duration::from_secs(idle_secs), solver.config());
                serve(listener, service).await?;
                Ok(())
            })
        }
    }
}
