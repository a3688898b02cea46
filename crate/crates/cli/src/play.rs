use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use qgo_core::{
    finalize_pairs, score, serialize_record, Bot, ChoiceRequest, Color, Coord, GameConfig, GameEnd, GameRecord,
    GameState, GameStatus, Move, MoveError, MoveOutcome, Policy,
};

use crate::{describe_event, read_line, Variant};

/// Fresh proposals a bot gets when its answers and its opponent's make a
/// move illegal; after that it passes.
const BOT_RETRIES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Seat {
    Human,
    Random,
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    #[arg(long, default_value_t = 9)]
    size: usize,
    #[arg(long, default_value_t = 7.5, allow_negative_numbers = true)]
    komi: f64,
    #[arg(long, value_enum, default_value_t = Variant::Standard)]
    variant: Variant,
    #[arg(long, value_enum, default_value_t = Seat::Human)]
    seat_black: Seat,
    #[arg(long, value_enum, default_value_t = Seat::Random)]
    seat_white: Seat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bots pass once this many moves have been played; defaults to three
    /// times the number of points.
    #[arg(long)]
    max_moves: Option<u32>,
    /// Where to write the finished record; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Table<'a> {
    seats: [Seat; 2],
    bots: [Bot; 2],
    input: &'a mut dyn BufRead,
    output: &'a mut dyn Write,
}

fn parse_move(line: &str, size: usize) -> Result<Move> {
    let words: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).collect();
    match words.as_slice() {
        [w] if w.eq_ignore_ascii_case("pass") => Ok(Move::Pass),
        [w] if w.eq_ignore_ascii_case("resign") => Ok(Move::Resign),
        [a] => Ok(Move::PlaceSingle(Coord::parse_on(a, size)?)),
        [a, b] => Ok(Move::PlacePair(Coord::parse_on(a, size)?, Coord::parse_on(b, size)?)),
        _ => bail!("enter two points, one point, pass or resign"),
    }
}

impl Table<'_> {
    fn seat(&self, color: Color) -> Seat {
        self.seats[color.index()]
    }

    fn ask_keep(&mut self, req: &ChoiceRequest) -> Result<Coord> {
        let [a, b] = req.options;
        loop {
            write!(
                self.output,
                "{} keeps which stone of pair {}, {a} or {b}{}? ",
                req.chooser.letter(),
                req.pair_id.0,
                match &req.forced {
                    Some(f) if f.len() == 1 => format!(" (must keep {}, next to a kept stone)", f[0]),
                    _ => String::new(),
                }
            )?;
            self.output.flush()?;
            let Some(line) = read_line(self.input)? else {
                bail!("input closed");
            };
            match line.parse::<Coord>() {
                Ok(c) if req.permits(c) => return Ok(c),
                _ => writeln!(self.output, "choose one of: {}", fmt_coords(req.allowed()))?,
            }
        }
    }

    fn keep(&mut self, req: &ChoiceRequest) -> Result<Coord> {
        match self.seat(req.chooser) {
            Seat::Human => self.ask_keep(req),
            Seat::Random => Ok(self.bots[req.chooser.index()].keep(req)),
        }
    }

    /// Plays `mv` with every collapse choice put to its chooser.
    fn attempt(&mut self, game: &mut GameState, mv: Move) -> Result<Result<MoveOutcome, MoveError>> {
        let mut pending = match game.begin_move(mv) {
            Ok(p) => p,
            Err(e) => return Ok(Err(e)),
        };
        while let Some(req) = pending.request().cloned() {
            let keep = self.keep(&req)?;
            pending.answer(keep).expect("answers are checked against the request");
        }
        Ok(game.finish(&pending).and_then(|r| game.commit(r)))
    }

    fn human_turn(&mut self, game: &mut GameState) -> Result<MoveOutcome> {
        let mover = game.to_move();
        write!(self.output, "{}", qgo_core::render_ascii(game.board()))?;
        loop {
            write!(self.output, "{} to play, move {}: ", mover.letter(), game.next_move_number())?;
            self.output.flush()?;
            let Some(line) = read_line(self.input)? else {
                bail!("input closed");
            };
            let mv = match parse_move(&line, game.board().size()) {
                Ok(mv) => mv,
                Err(e) => {
                    writeln!(self.output, "{e}")?;
                    continue;
                }
            };
            match self.attempt(game, mv)? {
                Ok(outcome) => return Ok(outcome),
                Err(e) => writeln!(self.output, "{e}; try again")?,
            }
        }
    }

    fn bot_turn(&mut self, game: &mut GameState, cap: u32) -> Result<MoveOutcome> {
        let mover = game.to_move();
        if game.next_move_number() <= cap {
            for _ in 0..BOT_RETRIES {
                let mv = self.bots[mover.index()].propose(game);
                if mv == Move::Pass {
                    break;
                }
                if let Ok(outcome) = self.attempt(game, mv)? {
                    return Ok(outcome);
                }
            }
        }
        Ok(self.attempt(game, Move::Pass)?.expect("passing is always legal"))
    }
}

fn fmt_coords(cs: &[Coord]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn run(args: &PlayArgs, input: &mut dyn BufRead, output: &mut dyn Write) -> Result<()> {
    let mut game = GameState::new(GameConfig::new(args.size, args.komi, args.variant.into()))?;
    let cap = args.max_moves.unwrap_or(3 * (args.size * args.size) as u32);
    let mut table = Table {
        seats: [args.seat_black, args.seat_white],
        bots: [
            Bot::new(Policy::Random, Color::Black, args.seed),
            Bot::new(Policy::Random, Color::White, args.seed),
        ],
        input,
        output,
    };
    while !game.is_over() {
        let outcome = match table.seat(game.to_move()) {
            Seat::Human => table.human_turn(&mut game)?,
            Seat::Random => table.bot_turn(&mut game, cap)?,
        };
        writeln!(table.output, "{} {}: {}", outcome.color.letter(), outcome.number, outcome.mv)?;
        for e in &outcome.events {
            writeln!(table.output, "  {}", describe_event(e))?;
        }
    }
    let mut result = String::new();
    if let GameStatus::Finished(end) = game.status() {
        let mut score_result = None;
        if end == GameEnd::TwoPasses {
            let pairs: Vec<ChoiceRequest> = game
                .board()
                .pairs()
                .map(|p| ChoiceRequest {
                    chooser: p.color,
                    pair_id: p.id,
                    step: qgo_core::CollapseStep::Endgame,
                    options: p.stones,
                    forced: None,
                })
                .collect();
            let mut kept = BTreeMap::new();
            for req in &pairs {
                kept.insert(req.pair_id, table.keep(req)?);
            }
            let mut black = |r: &ChoiceRequest| kept[&r.pair_id];
            let mut white = |r: &ChoiceRequest| kept[&r.pair_id];
            finalize_pairs(&mut game, &mut black, &mut white)?;
            score_result = Some(score(&game)?);
        }
        result = qgo_core::scoring::result_string(end, score_result.as_ref());
    }
    write!(table.output, "{}", qgo_core::render_ascii(game.board()))?;
    writeln!(table.output, "result {result}")?;
    let text = serialize_record(&GameRecord::from_game(&game));
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => write!(table.output, "{text}")?,
    }
    Ok(())
}
