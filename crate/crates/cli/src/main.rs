use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qgo_core::experiment::{to_csv, ExperimentConfig};
use qgo_core::record::{replay_prefix, GameRecord};
use qgo_core::scoring::result_string;
use qgo_core::{parse_record, render_ascii, run_experiment, state_expression, CollapseEvent, GameStatus, Ruleset};
use qgo_server::{Hub, JournalStore, DEFAULT_CHOICE_TIMEOUT};

mod play;

#[derive(Parser)]
#[command(name = "qgo", version, about = "Quantum Go rules engine tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a .qgr record and report divergences.
    Replay {
        file: PathBuf,
        /// Score the final position and print the result.
        #[arg(long)]
        verify: bool,
        /// Print the board after every move that collapsed something.
        #[arg(long)]
        diagrams: bool,
    },
    /// Play a game in the terminal or between bots.
    Play(play::PlayArgs),
    /// Show the position after a number of moves.
    State {
        file: PathBuf,
        /// Moves to replay; defaults to the whole record.
        #[arg(long)]
        at: Option<usize>,
        /// Print the quantum-state expression instead of a diagram.
        #[arg(long)]
        quantum: bool,
    },
    /// Run a self-play experiment from a TOML config and print CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the session server. QGO_LISTEN overrides --addr.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        /// Directory for session journals and finished records.
        #[arg(long)]
        journal: Option<PathBuf>,
        /// Seconds a collapse choice may stay unanswered.
        #[arg(long, default_value_t = DEFAULT_CHOICE_TIMEOUT.as_secs())]
        choice_timeout: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Standard,
    Weak,
    Symmetric,
    SemiQuantum,
    SemiQuantumWhite,
}

impl From<Variant> for Ruleset {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Standard => Ruleset::Standard,
            Variant::Weak => Ruleset::Weak,
            Variant::Symmetric => Ruleset::Symmetric,
            Variant::SemiQuantum => Ruleset::SemiQuantum(qgo_core::Color::Black),
            Variant::SemiQuantumWhite => Ruleset::SemiQuantum(qgo_core::Color::White),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Replay { file, verify, diagrams } => replay(&file, verify, diagrams),
        Command::Play(args) => {
            let stdin = io::stdin();
            play::run(&args, &mut stdin.lock(), &mut io::stdout().lock())
        }
        Command::State { file, at, quantum } => state(&file, at, quantum),
        Command::Experiment { config, out } => experiment(&config, out.as_ref()),
        Command::Serve {
            addr,
            journal,
            choice_timeout,
        } => serve(addr, journal, Duration::from_secs(choice_timeout)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(file: &PathBuf) -> Result<GameRecord> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    parse_record(&text).with_context(|| format!("parsing {}", file.display()))
}

pub fn describe_event(e: &CollapseEvent) -> String {
    format!(
        "step {} pair {} keeps {} removes {}{}",
        e.step.number(),
        e.pair_id.0,
        e.kept,
        e.removed,
        if e.forced.is_some() { " (forced)" } else { "" }
    )
}

fn replay(file: &PathBuf, verify: bool, diagrams: bool) -> Result<()> {
    let record = load(file)?;
    let out = replay_prefix(&record, record.entries.len(), verify)?;
    let mut stdout = io::stdout().lock();
    if diagrams {
        for (entry, outcome) in record.entries.iter().zip(&out.outcomes) {
            if outcome.events.is_empty() && outcome.captured.is_empty() {
                continue;
            }
            writeln!(stdout, "{entry}")?;
            for e in &outcome.events {
                writeln!(stdout, "  {}", describe_event(e))?;
            }
            if !outcome.captured.is_empty() {
                let caps: Vec<String> = outcome.captured.iter().map(|c| c.to_string()).collect();
                writeln!(stdout, "  captured {}", caps.join(" "))?;
            }
            let board = replay_prefix(&record, outcome.number as usize, false)?;
            writeln!(stdout, "{}", render_ascii(board.game.board()))?;
        }
    }
    writeln!(stdout, "{}: {} moves replayed", file.display(), out.outcomes.len())?;
    if verify {
        let result = match out.game.status() {
            GameStatus::Finished(end) => {
                let score = qgo_core::score(&out.game).ok();
                result_string(end, score.as_ref())
            }
            GameStatus::Ongoing => "unfinished".to_string(),
        };
        writeln!(stdout, "{result}")?;
    }
    if !diagrams {
        write!(stdout, "{}", render_ascii(out.game.board()))?;
    }
    Ok(())
}

fn state(file: &PathBuf, at: Option<usize>, quantum: bool) -> Result<()> {
    let record = load(file)?;
    let n = at.unwrap_or(record.entries.len());
    if n > record.entries.len() {
        bail!("--at {n} is past the end of the record ({} moves)", record.entries.len());
    }
    let out = replay_prefix(&record, n, false)?;
    if quantum {
        println!("{}", state_expression(out.game.board()));
    } else {
        print!("{}", render_ascii(out.game.board()));
    }
    Ok(())
}

fn experiment(config: &PathBuf, out: Option<&PathBuf>) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg: ExperimentConfig = toml::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    let summary = run_experiment(&cfg)?;
    let csv = to_csv(&summary);
    match out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    eprintln!(
        "{} games: black {} white {} draws {}; mean margin {:.3} ± {:.3}",
        summary.games.len(),
        summary.black_wins,
        summary.white_wins,
        summary.draws,
        summary.mean_margin,
        summary.stderr_margin
    );
    Ok(())
}

fn serve(addr: String, journal: Option<PathBuf>, choice_timeout: Duration) -> Result<()> {
    let addr = std::env::var("QGO_LISTEN").ok().filter(|a| !a.is_empty()).unwrap_or(addr);
    let hub = match journal {
        Some(dir) => Hub::recover(JournalStore::open(&dir)?, choice_timeout, Instant::now())?,
        None => Hub::new(choice_timeout),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        println!("listening on {}", listener.local_addr()?);
        io::stdout().flush()?;
        qgo_server::net::serve(listener, hub).await?;
        Ok(())
    })
}

/// Reads one trimmed line; `None` at end of input.
pub fn read_line(input: &mut dyn BufRead) -> io::Result<Option<String>> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line.trim().to_string()))
}
