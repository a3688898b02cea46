//! Batch self-play between simple policies.
//!
//! Each game owns two random streams, one per seat (first and second
//! mover), derived from the experiment seed and the game index. Results do
//! not depend on thread count or scheduling.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::BoardState;
use crate::coord::{Color, Coord};
use crate::rules::{
    ChoiceRequest, GameConfig, GameEnd, GameState, GameStatus, Move, PendingMove, ResolvedMove, RuleFlags, SetupError,
};
use crate::scoring::{self, ScoreResult};
use crate::variants::{point_symmetric, Ruleset};
use crate::zobrist::splitmix64;

const SAMPLE_ATTEMPTS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Uniform over legal placements that do not fill an own eye.
    #[default]
    Random,
    /// The first legal placement in board order; keeps the first allowed
    /// stone.
    FirstLegal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown policy `{0}` (expected random or first-legal)")]
pub struct UnknownPolicy(String);

impl FromStr for Policy {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Policy::Random),
            "first-legal" => Ok(Policy::FirstLegal),
            _ => Err(UnknownPolicy(s.to_string())),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Random => "random",
            Policy::FirstLegal => "first-legal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ruleset: Ruleset,
    pub size: usize,
    pub komi: f64,
    pub black: Policy,
    pub white: Policy,
    pub games: usize,
    pub seed: u64,
    pub first_player: Color,
    /// Both players pass once this many moves have been played. Defaults to
    /// three times the number of points.
    pub max_moves: Option<u32>,
    pub flags: RuleFlags,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ruleset: Ruleset::Standard,
            size: 9,
            komi: 7.5,
            black: Policy::Random,
            white: Policy::Random,
            games: 100,
            seed: 0,
            first_player: Color::Black,
            max_moves: None,
            flags: RuleFlags::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn move_cap(&self) -> u32 {
        self.max_moves.unwrap_or(3 * (self.size * self.size) as u32)
    }

    pub fn game_config(&self) -> GameConfig {
        GameConfig {
            size: self.size,
            komi: self.komi,
            ruleset: self.ruleset,
            flags: self.flags,
            handicap: Vec::new(),
            first_player: self.first_player,
        }
    }

    /// Same games with the colours exchanged: the other colour starts, the
    /// variant's colour roles flip and each seat keeps its policy.
    pub fn color_swapped(&self) -> ExperimentConfig {
        ExperimentConfig {
            ruleset: self.ruleset.color_swapped(),
            black: self.white,
            white: self.black,
            first_player: self.first_player.opponent(),
            komi: 0.0 - self.komi,
            ..self.clone()
        }
    }
}

/// Per-seat random streams of one game.
#[derive(Debug, Clone)]
pub struct SeatRngs {
    first: Color,
    streams: [ChaCha8Rng; 2],
}

impl SeatRngs {
    pub fn new(seed: u64, game_index: u64, first: Color) -> SeatRngs {
        let base = splitmix64(seed ^ splitmix64(game_index));
        SeatRngs {
            first,
            streams: [
                ChaCha8Rng::seed_from_u64(splitmix64(base ^ 1)),
                ChaCha8Rng::seed_from_u64(splitmix64(base ^ 2)),
            ],
        }
    }

    pub fn for_color(&mut self, color: Color) -> &mut ChaCha8Rng {
        let seat = usize::from(color != self.first);
        &mut self.streams[seat]
    }
}

/// A point whose orthogonal neighbours are all stones of `color`.
pub fn is_own_eye(board: &BoardState, p: Coord, color: Color) -> bool {
    board.is_empty_at(p)
        && board
            .neighbors(p)
            .iter()
            .all(|&n| board.get(n).is_some_and(|o| o.color == color))
}

/// Resolves `pending` by depth-first search over the choosers' options, each
/// chooser shuffling its options with its own stream. Returns the first
/// resolution that is legal.
fn resolve_with(
    game: &GameState,
    pending: PendingMove,
    pick: &mut dyn FnMut(&ChoiceRequest) -> Vec<Coord>,
) -> Option<ResolvedMove> {
    let Some(req) = pending.request().cloned() else {
        return game.finish(&pending).ok();
    };
    for keep in pick(&req) {
        let mut next = pending.clone();
        if next.answer(keep).is_ok() {
            if let Some(done) = resolve_with(game, next, pick) {
                return Some(done);
            }
        }
    }
    None
}

struct Player {
    policies: [Policy; 2],
    rngs: SeatRngs,
}

impl Player {
    fn policy(&self, color: Color) -> Policy {
        self.policies[color.index()]
    }

    fn pick(&mut self, req: &ChoiceRequest) -> Coord {
        let opts = req.allowed();
        match self.policy(req.chooser) {
            Policy::FirstLegal => opts[0],
            Policy::Random => opts[self.rngs.for_color(req.chooser).random_range(0..opts.len())],
        }
    }

    fn options(&mut self, req: &ChoiceRequest) -> Vec<Coord> {
        let mut opts = req.allowed().to_vec();
        if self.policy(req.chooser) == Policy::Random {
            opts.shuffle(self.rngs.for_color(req.chooser));
        }
        opts
    }

    fn try_play(&mut self, game: &GameState, mv: Move) -> Option<ResolvedMove> {
        let pending = game.begin_move(mv).ok()?;
        resolve_with(game, pending, &mut |req| self.options(req))
    }

    /// Picks and resolves the next placement, or `None` to pass.
    fn choose(&mut self, game: &GameState) -> Option<ResolvedMove> {
        let mover = game.to_move();
        match self.policy(mover) {
            Policy::FirstLegal => game
                .placement_candidates()
                .into_iter()
                .find_map(|mv| self.try_play(game, mv)),
            Policy::Random => self.choose_random(game),
        }
    }

    fn choose_random(&mut self, game: &GameState) -> Option<ResolvedMove> {
        let mover = game.to_move();
        let board = game.board();
        let open: Vec<Coord> = board.empty_points().filter(|&p| !is_own_eye(board, p, mover)).collect();
        if open.is_empty() {
            return None;
        }
        for _ in 0..SAMPLE_ATTEMPTS {
            let Some(mv) = self.sample(game, &open) else { break };
            if let Some(done) = self.try_play(game, mv) {
                return Some(done);
            }
        }
        let mut all: Vec<Move> = game
            .placement_candidates()
            .into_iter()
            .filter(|mv| mv.placed().iter().all(|p| !is_own_eye(board, *p, mover)))
            .collect();
        all.shuffle(self.rngs.for_color(mover));
        all.into_iter().find_map(|mv| self.try_play(game, mv))
    }

    fn sample(&mut self, game: &GameState, open: &[Coord]) -> Option<Move> {
        let mover = game.to_move();
        let size = game.board().size();
        let rng = self.rngs.for_color(mover);
        let a = open[rng.random_range(0..open.len())];
        match game.ruleset() {
            Ruleset::SemiQuantum(c) if c != mover => Some(Move::PlaceSingle(a)),
            Ruleset::Symmetric => {
                let sym = point_symmetric(a, size).ok()?;
                if sym == a || !game.board().is_empty_at(sym) {
                    Some(Move::PlaceSingle(a))
                } else {
                    Some(Move::PlacePair(a, sym))
                }
            }
            _ => {
                if open.len() < 2 {
                    return None;
                }
                let mut b = a;
                while b == a {
                    b = open[rng.random_range(0..open.len())];
                }
                Some(Move::PlacePair(a, b))
            }
        }
    }
}

/// A stand-alone automatic player for one seat. Bots of opposite colours
/// built from one seed draw from different streams.
pub struct Bot {
    color: Color,
    player: Player,
}

impl Bot {
    pub fn new(policy: Policy, color: Color, seed: u64) -> Bot {
        Bot {
            color,
            player: Player {
                policies: [policy; 2],
                rngs: SeatRngs::new(seed, 0, Color::Black),
            },
        }
    }

    pub fn color(&self) -> Color {
        self.color
    }

    /// A placement that resolves legally for some answers to its collapse
    /// choices, or a pass when there is none.
    pub fn propose(&mut self, game: &GameState) -> Move {
        self.player.choose(game).map_or(Move::Pass, |r| r.mv())
    }

    /// Which stone to keep.
    pub fn keep(&mut self, req: &ChoiceRequest) -> Coord {
        self.player.pick(req)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub index: usize,
    pub end: GameEnd,
    pub score: Option<ScoreResult>,
    /// Black's area minus White's area minus komi.
    pub margin: f64,
    pub moves: u32,
    pub pairs_placed: u32,
    /// Pairs collapsed during play, not counting the end-of-game collapse.
    pub pairs_collapsed: u32,
    /// Move numbers at which collapses happened, one per collapsed pair.
    pub collapse_moves: Vec<u32>,
    /// Moves each collapsed pair stayed entangled.
    pub lifetimes: Vec<u32>,
}

impl GameSummary {
    pub fn winner(&self) -> Option<Color> {
        self.score.and_then(|s| s.winner)
    }

    pub fn result(&self) -> String {
        scoring::result_string(self.end, self.score.as_ref())
    }
}

/// Plays game `index` of the experiment to the end.
pub fn play_game(config: &ExperimentConfig, index: usize) -> Result<(GameState, GameSummary), SetupError> {
    let mut game = GameState::new(config.game_config())?;
    let mut player = Player {
        policies: [config.black, config.white],
        rngs: SeatRngs::new(config.seed, index as u64, game.to_move()),
    };
    let cap = config.move_cap();
    let mut summary = GameSummary {
        index,
        end: GameEnd::TwoPasses,
        score: None,
        margin: 0.0,
        moves: 0,
        pairs_placed: 0,
        pairs_collapsed: 0,
        collapse_moves: Vec::new(),
        lifetimes: Vec::new(),
    };
    while game.status() == GameStatus::Ongoing {
        let choice = if game.next_move_number() > cap {
            None
        } else {
            player.choose(&game)
        };
        let outcome = match choice {
            Some(resolved) => game.commit(resolved),
            None => game.apply_move(Move::Pass, &mut |r: &ChoiceRequest| r.allowed()[0]),
        }
        .expect("policy moves are resolved against the current position");
        summary.moves += 1;
        if matches!(outcome.mv, Move::PlacePair(..)) {
            summary.pairs_placed += 1;
        }
        for e in &outcome.events {
            summary.pairs_collapsed += 1;
            summary.collapse_moves.push(e.move_number);
            summary.lifetimes.push(e.move_number - e.pair_id.0);
        }
    }
    if let GameStatus::Finished(end) = game.status() {
        summary.end = end;
    }
    if summary.end == GameEnd::TwoPasses {
        let player = RefCell::new(player);
        let mut black = |r: &ChoiceRequest| player.borrow_mut().pick(r);
        let mut white = |r: &ChoiceRequest| player.borrow_mut().pick(r);
        scoring::finalize_pairs(&mut game, &mut black, &mut white).expect("owners answer from the options");
        let score = scoring::score(&game).expect("all pairs collapsed");
        summary.margin = score.signed_margin();
        summary.score = Some(score);
    }
    Ok((game, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub black_wins: u32,
    pub white_wins: u32,
    pub draws: u32,
    pub resignations: u32,
    pub mean_margin: f64,
    pub stderr_margin: f64,
    /// Collapsed pairs by the move number that collapsed them.
    pub collapse_histogram: BTreeMap<u32, u32>,
    pub mean_lifetime: Option<f64>,
    pub games: Vec<GameSummary>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary, SetupError> {
    // surface setup errors once rather than per game
    GameState::new(config.game_config())?;
    let mut games: Vec<GameSummary> = (0..config.games)
        .into_par_iter()
        .map(|i| play_game(config, i).map(|(_, s)| s))
        .collect::<Result<_, _>>()?;
    games.sort_by_key(|g| g.index);
    Ok(summarize(config.clone(), games))
}

pub fn summarize(config: ExperimentConfig, games: Vec<GameSummary>) -> ExperimentSummary {
    let mut s = ExperimentSummary {
        config,
        black_wins: 0,
        white_wins: 0,
        draws: 0,
        resignations: 0,
        mean_margin: 0.0,
        stderr_margin: 0.0,
        collapse_histogram: BTreeMap::new(),
        mean_lifetime: None,
        games: Vec::new(),
    };
    let margins: Vec<f64> = games.iter().filter(|g| g.score.is_some()).map(|g| g.margin).collect();
    for g in &games {
        match g.end {
            GameEnd::Resignation { winner } => {
                s.resignations += 1;
                match winner {
                    Color::Black => s.black_wins += 1,
                    Color::White => s.white_wins += 1,
                }
            }
            _ => match g.winner() {
                Some(Color::Black) => s.black_wins += 1,
                Some(Color::White) => s.white_wins += 1,
                None if g.score.is_some() => s.draws += 1,
                None => {}
            },
        }
        for &m in &g.collapse_moves {
            *s.collapse_histogram.entry(m).or_default() += 1;
        }
    }
    if !margins.is_empty() {
        let n = margins.len() as f64;
        s.mean_margin = margins.iter().sum::<f64>() / n;
        if margins.len() > 1 {
            let var = margins.iter().map(|m| (m - s.mean_margin).powi(2)).sum::<f64>() / (n - 1.0);
            s.stderr_margin = (var / n).sqrt();
        }
    }
    let lifetimes: Vec<u32> = games.iter().flat_map(|g| g.lifetimes.iter().copied()).collect();
    if !lifetimes.is_empty() {
        s.mean_lifetime = Some(lifetimes.iter().map(|&l| l as f64).sum::<f64>() / lifetimes.len() as f64);
    }
    s.games = games;
    s
}

/// Per-game rows followed by a `#`-prefixed summary block.
pub fn to_csv(summary: &ExperimentSummary) -> String {
    let mut out = String::from("index,winner,margin,moves,pairs_placed,pairs_collapsed\n");
    for g in &summary.games {
        let winner = match (g.end, g.winner()) {
            (GameEnd::Resignation { winner }, _) => winner.letter().to_string(),
            (_, Some(c)) => c.letter().to_string(),
            (_, None) => "draw".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            g.index, winner, g.margin, g.moves, g.pairs_placed, g.pairs_collapsed
        );
    }
    let _ = writeln!(
        out,
        "# games={} black_wins={} white_wins={} draws={}",
        summary.games.len(),
        summary.black_wins,
        summary.white_wins,
        summary.draws
    );
    let _ = writeln!(
        out,
        "# mean_margin={:.4} stderr={:.4}",
        summary.mean_margin, summary.stderr_margin
    );
    if let Some(l) = summary.mean_lifetime {
        let _ = writeln!(out, "# mean_entanglement_lifetime={l:.4}");
    }
    let hist: Vec<String> = summary
        .collapse_histogram
        .iter()
        .map(|(m, n)| format!("{m}:{n}"))
        .collect();
    let _ = writeln!(out, "# collapses_by_move={}", hist.join(" "));
    out
}
