//! Move legality, the collapse procedure, superko and the game lifecycle.
//!
//! A placement that touches any stone starts a collapse:
//!
//! 1. the mover collapses each of their own earlier pairs touching a placed stone,
//! 2. the opponent does the same for their pairs,
//! 3. the mover collapses the pair just placed, and must keep a placed stone
//!    that touches a stone kept in step 1 or 2 when there is one.
//!
//! Pairs within a step are resolved in placement order and collapses never
//! cascade. Captures are resolved once, after the last collapse.
//!
//! Moves are resolved through [`PendingMove`], which asks one
//! [`ChoiceRequest`] at a time, so a caller may wait arbitrarily long (for a
//! human, a network peer) between steps. [`GameState::apply_move`] drives the
//! same machinery from a [`ChoiceProvider`].

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardError, BoardState, PairId};
use crate::coord::{neighbors, Color, Coord, CoordError};
use crate::variants::{self, trigger_neighborhood, Ruleset, VariantError};
use crate::zobrist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    PlacePair(Coord, Coord),
    PlaceSingle(Coord),
    Pass,
    Resign,
}

impl Move {
    /// Pair placement with the smaller point first.
    pub fn pair(a: Coord, b: Coord) -> Move {
        if a <= b {
            Move::PlacePair(a, b)
        } else {
            Move::PlacePair(b, a)
        }
    }

    pub fn normalized(self) -> Move {
        match self {
            Move::PlacePair(a, b) => Move::pair(a, b),
            other => other,
        }
    }

    pub fn placed(&self) -> Vec<Coord> {
        match *self {
            Move::PlacePair(a, b) => vec![a, b],
            Move::PlaceSingle(at) => vec![at],
            Move::Pass | Move::Resign => Vec::new(),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::PlacePair(a, b) => write!(f, "{{{a},{b}}}"),
            Move::PlaceSingle(at) => write!(f, "{at}"),
            Move::Pass => f.write_str("pass"),
            Move::Resign => f.write_str("resign"),
        }
    }
}

/// Which phase of a collapse a choice belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseStep {
    /// Step 1: the mover's earlier pairs.
    Mover,
    /// Step 2: the opponent's pairs.
    Opponent,
    /// Step 3: the pair just placed.
    Placed,
    /// Pairs still entangled when the game ends.
    Endgame,
}

impl CollapseStep {
    pub fn number(self) -> u8 {
        match self {
            CollapseStep::Mover => 1,
            CollapseStep::Opponent => 2,
            CollapseStep::Placed => 3,
            CollapseStep::Endgame => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseEvent {
    pub move_number: u32,
    pub step: CollapseStep,
    pub pair_id: PairId,
    pub kept: Coord,
    pub removed: Coord,
    pub chooser: Color,
    /// Options the chooser was restricted to, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced: Option<Vec<Coord>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRequest {
    pub chooser: Color,
    pub pair_id: PairId,
    pub step: CollapseStep,
    pub options: [Coord; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced: Option<Vec<Coord>>,
}

impl ChoiceRequest {
    /// The points the chooser may keep.
    pub fn allowed(&self) -> &[Coord] {
        self.forced.as_deref().unwrap_or(&self.options)
    }

    pub fn permits(&self, c: Coord) -> bool {
        self.allowed().contains(&c)
    }
}

/// Answers collapse choices: replayed records, humans, seeded bots.
pub trait ChoiceProvider {
    /// Must return a point from `req.allowed()`.
    fn answer(&mut self, req: &ChoiceRequest) -> Coord;
}

impl<F: FnMut(&ChoiceRequest) -> Coord> ChoiceProvider for F {
    fn answer(&mut self, req: &ChoiceRequest) -> Coord {
        self(req)
    }
}

/// Always keeps the first allowed point.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstOption;

impl ChoiceProvider for FirstOption {
    fn answer(&mut self, req: &ChoiceRequest) -> Coord {
        req.allowed()[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum GameEnd {
    TwoPasses,
    Resignation { winner: Color },
    Abandoned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GameStatus {
    Ongoing,
    Finished(GameEnd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Superko {
    /// Board position only.
    #[default]
    Positional,
    /// Board position plus side to move.
    Situational,
}

/// Switches for the rule points the game leaves open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleFlags {
    pub superko: Superko,
    /// Whether the pairing of entangled stones is part of a position.
    pub pairing_in_position: bool,
    /// In Weak play, measure the step-3 keep rule over diagonals too.
    pub weak_diagonal_forcing: bool,
}

impl Default for RuleFlags {
    fn default() -> Self {
        RuleFlags {
            superko: Superko::Positional,
            pairing_in_position: true,
            weak_diagonal_forcing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub size: usize,
    pub komi: f64,
    pub ruleset: Ruleset,
    pub flags: RuleFlags,
    /// Black singletons placed before the first move; White then starts.
    pub handicap: Vec<Coord>,
    pub first_player: Color,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            size: 19,
            komi: 7.5,
            ruleset: Ruleset::Standard,
            flags: RuleFlags::default(),
            handicap: Vec::new(),
            first_player: Color::Black,
        }
    }
}

impl GameConfig {
    pub fn new(size: usize, komi: f64, ruleset: Ruleset) -> GameConfig {
        GameConfig {
            size,
            komi,
            ruleset,
            ..GameConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IllegalReason {
    #[error("the game is over")]
    GameOver,
    #[error("{0} is off the board")]
    OffBoard(Coord),
    #[error("{0} is occupied")]
    Occupied(Coord),
    #[error("a pair needs two distinct points")]
    SamePoint,
    #[error("the move would leave its own group without liberties")]
    Suicide,
    #[error("the move would recreate an earlier position")]
    PositionRepeat,
    #[error("this player may not place entangled pairs")]
    PairsNotAllowed,
    #[error("single stones are not allowed here")]
    SinglesNotAllowed,
    #[error("pair points must be symmetric about the centre")]
    NotSymmetric,
    #[error("a single stone is only allowed where the symmetric point is taken")]
    SymmetricPointFree,
}

impl IllegalReason {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            IllegalReason::GameOver => "game_over",
            IllegalReason::OffBoard(_) => "off_board",
            IllegalReason::Occupied(_) => "occupied",
            IllegalReason::SamePoint => "same_point",
            IllegalReason::Suicide => "suicide",
            IllegalReason::PositionRepeat => "position_repeat",
            IllegalReason::PairsNotAllowed => "pairs_not_allowed",
            IllegalReason::SinglesNotAllowed => "singles_not_allowed",
            IllegalReason::NotSymmetric => "not_symmetric",
            IllegalReason::SymmetricPointFree => "symmetric_point_free",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("illegal move: {0}")]
    Illegal(IllegalReason),
    #[error("choice {answer} is not allowed for pair {} (allowed: {})", request.pair_id, fmt_coords(request.allowed()))]
    ProtocolViolation { request: ChoiceRequest, answer: Coord },
    #[error("collapse choices are still outstanding")]
    ChoicesOutstanding,
    #[error("the pending move was started from a different position")]
    StalePending,
}

impl From<IllegalReason> for MoveError {
    fn from(r: IllegalReason) -> Self {
        MoveError::Illegal(r)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetupError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Variant(#[from] VariantError),
    #[error(transparent)]
    Coord(#[from] CoordError),
    #[error("handicap games start with White")]
    HandicapFirstPlayer,
    #[error("komi must be finite, got {0}")]
    BadKomi(f64),
}

fn fmt_coords(cs: &[Coord]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// Every post-move position of a game, hash-indexed with full keys kept for
/// collision checks.
#[derive(Debug, Clone, Default)]
pub struct PositionHistory {
    order: Vec<u64>,
    by_hash: HashMap<u64, Vec<Box<[u16]>>>,
}

impl PositionHistory {
    pub fn hashes(&self) -> &[u64] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, hash: u64, key: &[u16]) -> bool {
        self.by_hash
            .get(&hash)
            .is_some_and(|keys| keys.iter().any(|k| &k[..] == key))
    }

    fn push(&mut self, hash: u64, key: Box<[u16]>) {
        self.order.push(hash);
        self.by_hash.entry(hash).or_default().push(key);
    }
}

/// Hash of a position under `flags`. With the default flags this covers
/// occupancy and the pairing of entangled stones, but not the side to move.
pub fn position_hash(board: &BoardState, to_move: Color, flags: &RuleFlags) -> u64 {
    let mut h = if flags.pairing_in_position {
        board.zobrist()
    } else {
        board
            .stones()
            .fold(0, |h, (c, o)| h ^ zobrist::cell_key(c.index(board.size()), o.color))
    };
    if flags.superko == Superko::Situational {
        h ^= zobrist::side_key(to_move);
    }
    h
}

fn position_key(board: &BoardState, to_move: Color, flags: &RuleFlags) -> Box<[u16]> {
    let mut key = board.position_key().into_vec();
    if !flags.pairing_in_position {
        for k in key.iter_mut() {
            if *k >= 3 {
                *k = 1 + (*k - 3) % 2;
            }
        }
    }
    if flags.superko == Superko::Situational {
        key.push(to_move.index() as u16);
    }
    key.into_boxed_slice()
}

/// One move as it was played, for records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlayedMove {
    pub number: u32,
    pub color: Color,
    pub mv: Move,
}

/// What a committed move did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveOutcome {
    pub number: u32,
    pub color: Color,
    pub mv: Move,
    pub events: Vec<CollapseEvent>,
    pub captured: Vec<Coord>,
    /// Position hash after the move, when the move changed the board.
    pub hash: Option<u64>,
    /// Whether the placed pair is still entangled after the move.
    pub pair_survived: bool,
}

#[derive(Debug, Clone)]
pub struct GameState {
    pub(crate) board: BoardState,
    pub(crate) to_move: Color,
    pub(crate) komi: f64,
    pub(crate) consecutive_passes: u8,
    pub(crate) status: GameStatus,
    pub(crate) ruleset: Ruleset,
    pub(crate) flags: RuleFlags,
    pub(crate) history: PositionHistory,
    pub(crate) next_number: u32,
    pub(crate) log: Vec<PlayedMove>,
    pub(crate) pair_fates: BTreeMap<PairId, Coord>,
    pub(crate) config: GameConfig,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<GameState, SetupError> {
        if !config.komi.is_finite() {
            return Err(SetupError::BadKomi(config.komi));
        }
        let mut board = BoardState::new(config.size)?;
        config.ruleset.validate_size(config.size)?;
        for &c in &config.handicap {
            board.place_singleton(c, Color::Black)?;
        }
        if !config.handicap.is_empty() && config.first_player != Color::White {
            return Err(SetupError::HandicapFirstPlayer);
        }
        let mut history = PositionHistory::default();
        let to_move = config.first_player;
        history.push(
            position_hash(&board, to_move, &config.flags),
            position_key(&board, to_move, &config.flags),
        );
        Ok(GameState {
            board,
            to_move,
            komi: config.komi,
            consecutive_passes: 0,
            status: GameStatus::Ongoing,
            ruleset: config.ruleset,
            flags: config.flags,
            history,
            next_number: 1,
            log: Vec::new(),
            pair_fates: BTreeMap::new(),
            config,
        })
    }

    /// Standard ruleset, no handicap.
    pub fn standard(size: usize, komi: f64) -> Result<GameState, SetupError> {
        GameState::new(GameConfig::new(size, komi, Ruleset::Standard))
    }

    /// Starts a game from an arbitrary board, e.g. a diagram. Pair ids on the
    /// board must be below the first move number that will be played.
    pub fn from_position(board: BoardState, to_move: Color, config: GameConfig) -> Result<GameState, SetupError> {
        let mut game = GameState::new(GameConfig {
            size: board.size(),
            handicap: Vec::new(),
            first_player: to_move,
            ..config
        })?;
        game.next_number = board.pairs().map(|p| p.id.0 + 1).max().unwrap_or(1);
        game.history = PositionHistory::default();
        game.history.push(
            position_hash(&board, to_move, &game.flags),
            position_key(&board, to_move, &game.flags),
        );
        game.board = board;
        Ok(game)
    }

    pub fn board(&self) -> &BoardState {
        &self.board
    }

    pub fn to_move(&self) -> Color {
        self.to_move
    }

    pub fn komi(&self) -> f64 {
        self.komi
    }

    pub fn status(&self) -> GameStatus {
        self.status
    }

    pub fn is_over(&self) -> bool {
        matches!(self.status, GameStatus::Finished(_))
    }

    pub fn ruleset(&self) -> Ruleset {
        self.ruleset
    }

    pub fn flags(&self) -> &RuleFlags {
        &self.flags
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn consecutive_passes(&self) -> u8 {
        self.consecutive_passes
    }

    pub fn history(&self) -> &PositionHistory {
        &self.history
    }

    /// Number the next move will carry.
    pub fn next_move_number(&self) -> u32 {
        self.next_number
    }

    pub fn moves(&self) -> &[PlayedMove] {
        &self.log
    }

    /// Kept point of every pair that has collapsed (or survived a capture of
    /// its partner).
    pub fn pair_fates(&self) -> &BTreeMap<PairId, Coord> {
        &self.pair_fates
    }

    pub fn position_hash(&self) -> u64 {
        position_hash(&self.board, self.to_move, &self.flags)
    }

    /// Marks the game abandoned, e.g. after a choice timeout.
    pub fn abandon(&mut self) {
        if !self.is_over() {
            self.status = GameStatus::Finished(GameEnd::Abandoned);
        }
    }

    /// Starts resolving `mv` for the side to move.
    pub fn begin_move(&self, mv: Move) -> Result<PendingMove, MoveError> {
        if self.is_over() {
            return Err(IllegalReason::GameOver.into());
        }
        let mover = self.to_move;
        let number = self.next_number;
        let mut pending = PendingMove {
            mover,
            mv,
            number,
            generation: self.log.len(),
            board: self.board.clone(),
            placed: mv.placed(),
            new_pair: None,
            queue: VecDeque::new(),
            kept: Vec::new(),
            events: Vec::new(),
            current: None,
            ruleset: self.ruleset,
            forcing_diagonal: self.ruleset == Ruleset::Weak && self.flags.weak_diagonal_forcing,
        };
        if pending.placed.is_empty() {
            return Ok(pending);
        }
        let size = self.board.size();
        for &p in &pending.placed {
            if !p.in_bounds(size) {
                return Err(IllegalReason::OffBoard(p).into());
            }
        }
        if let Move::PlacePair(a, b) = mv {
            if a == b {
                return Err(IllegalReason::SamePoint.into());
            }
        }
        variants::check_shape(self.ruleset, &self.board, mover, &mv)?;
        for &p in &pending.placed {
            if !self.board.is_empty_at(p) {
                return Err(IllegalReason::Occupied(p).into());
            }
        }
        match mv {
            Move::PlacePair(a, b) => {
                let id = PairId(number);
                pending
                    .board
                    .place_pair(id, mover, a, b, number)
                    .expect("points checked empty");
                pending.new_pair = Some(id);
            }
            Move::PlaceSingle(at) => {
                pending
                    .board
                    .place_singleton(at, mover)
                    .expect("point checked empty");
            }
            Move::Pass | Move::Resign => unreachable!(),
        }
        if collapse_trigger(self.ruleset, &pending.board, &pending.placed) {
            for p in affected_pairs(self.ruleset, &pending.board, &pending.placed, mover, pending.new_pair) {
                pending.queue.push_back((CollapseStep::Mover, p));
            }
            for p in affected_pairs(self.ruleset, &pending.board, &pending.placed, mover.opponent(), None) {
                pending.queue.push_back((CollapseStep::Opponent, p));
            }
            if let Some(id) = pending.new_pair {
                pending.queue.push_back((CollapseStep::Placed, id));
            }
        }
        pending.advance();
        Ok(pending)
    }

    /// Captures, suicide and superko for a fully answered move. Does not
    /// change the game.
    pub fn finish(&self, pending: &PendingMove) -> Result<ResolvedMove, MoveError> {
        if pending.generation != self.log.len() || pending.number != self.next_number {
            return Err(MoveError::StalePending);
        }
        if pending.current.is_some() {
            return Err(MoveError::ChoicesOutstanding);
        }
        let mut board = pending.board.clone();
        let (captured, position) = match pending.mv {
            Move::Pass | Move::Resign => (Vec::new(), None),
            _ => {
                let report = board.resolve_captures(pending.mover);
                if report.suicide {
                    return Err(IllegalReason::Suicide.into());
                }
                let next = pending.mover.opponent();
                let hash = position_hash(&board, next, &self.flags);
                let key = position_key(&board, next, &self.flags);
                if self.history.contains(hash, &key) {
                    return Err(IllegalReason::PositionRepeat.into());
                }
                (report.removed, Some((hash, key)))
            }
        };
        Ok(ResolvedMove {
            generation: pending.generation,
            mover: pending.mover,
            mv: pending.mv,
            number: pending.number,
            board,
            events: pending.events.clone(),
            captured,
            position,
            new_pair: pending.new_pair,
        })
    }

    pub fn commit(&mut self, resolved: ResolvedMove) -> Result<MoveOutcome, MoveError> {
        if resolved.generation != self.log.len() || resolved.number != self.next_number {
            return Err(MoveError::StalePending);
        }
        let ResolvedMove {
            mover,
            mv,
            number,
            board,
            events,
            captured,
            position,
            new_pair,
            ..
        } = resolved;
        for e in &events {
            self.pair_fates.insert(e.pair_id, e.kept);
        }
        // a pair that lost one half to a capture keeps the other half
        for pair in self.board.pairs() {
            if board.pair(pair.id).is_none() && !self.pair_fates.contains_key(&pair.id) {
                if let Some(&s) = pair.stones.iter().find(|&&s| board.get(s).is_some()) {
                    self.pair_fates.insert(pair.id, s);
                }
            }
        }
        let pair_survived = new_pair.is_some_and(|id| board.pair(id).is_some());
        match mv {
            Move::Pass => {
                self.consecutive_passes += 1;
                if self.consecutive_passes >= 2 {
                    self.status = GameStatus::Finished(GameEnd::TwoPasses);
                }
            }
            Move::Resign => {
                self.status = GameStatus::Finished(GameEnd::Resignation {
                    winner: mover.opponent(),
                });
            }
            _ => {
                self.consecutive_passes = 0;
            }
        }
        let hash = position.as_ref().map(|(h, _)| *h);
        if let Some((h, key)) = position {
            self.history.push(h, key);
        }
        self.board = board;
        self.log.push(PlayedMove { number, color: mover, mv });
        self.next_number += 1;
        self.to_move = mover.opponent();
        Ok(MoveOutcome {
            number,
            color: mover,
            mv,
            events,
            captured,
            hash,
            pair_survived,
        })
    }

    /// Plays `mv`, asking `chooser` for every collapse choice. On error the
    /// game is unchanged.
    pub fn apply_move(&mut self, mv: Move, chooser: &mut dyn ChoiceProvider) -> Result<MoveOutcome, MoveError> {
        let mut pending = self.begin_move(mv)?;
        while let Some(req) = pending.request().cloned() {
            let answer = chooser.answer(&req);
            pending.answer(answer)?;
        }
        let resolved = self.finish(&pending)?;
        self.commit(resolved)
    }

    /// True when `mv` can be started and at least one sequence of collapse
    /// choices resolves to a legal position.
    pub fn is_legal(&self, mv: Move) -> bool {
        match self.begin_move(mv) {
            Ok(pending) => self.any_resolution_legal(&pending),
            Err(_) => false,
        }
    }

    fn any_resolution_legal(&self, pending: &PendingMove) -> bool {
        match pending.request() {
            None => self.finish(pending).is_ok(),
            Some(req) => req.allowed().iter().any(|&c| {
                let mut next = pending.clone();
                next.answer(c).is_ok() && self.any_resolution_legal(&next)
            }),
        }
    }

    /// Every legal placement (pairs normalised smaller point first), then
    /// `Pass` and `Resign`. Empty once the game is over.
    pub fn legal_moves(&self) -> Vec<Move> {
        if self.is_over() {
            return Vec::new();
        }
        let mut out: Vec<Move> = self
            .placement_candidates()
            .into_iter()
            .filter(|&m| self.is_legal(m))
            .collect();
        out.push(Move::Pass);
        out.push(Move::Resign);
        out
    }

    /// Placements of a legal shape on empty points, not yet checked for
    /// suicide or repetition.
    pub fn placement_candidates(&self) -> Vec<Move> {
        variants::candidate_placements(self.ruleset, &self.board, self.to_move)
    }

    /// Collapses every pair still on the board, in placement order, asking
    /// the owner of each. Captures are not re-evaluated.
    pub(crate) fn collapse_remaining(
        &mut self,
        black: &mut dyn ChoiceProvider,
        white: &mut dyn ChoiceProvider,
    ) -> Result<Vec<CollapseEvent>, MoveError> {
        let mut board = self.board.clone();
        let mut events = Vec::new();
        let pairs: Vec<_> = board.pairs().copied().collect();
        for pair in pairs {
            let req = ChoiceRequest {
                chooser: pair.color,
                pair_id: pair.id,
                step: CollapseStep::Endgame,
                options: pair.stones,
                forced: None,
            };
            let answer = match pair.color {
                Color::Black => black.answer(&req),
                Color::White => white.answer(&req),
            };
            if !req.permits(answer) {
                return Err(MoveError::ProtocolViolation { request: req, answer });
            }
            let removed = board.collapse_pair(pair.id, answer).expect("pair is active");
            events.push(CollapseEvent {
                move_number: self.next_number,
                step: CollapseStep::Endgame,
                pair_id: pair.id,
                kept: answer,
                removed,
                chooser: pair.color,
                forced: None,
            });
        }
        for e in &events {
            self.pair_fates.insert(e.pair_id, e.kept);
        }
        self.board = board;
        Ok(events)
    }
}

/// True when any point in the trigger neighbourhood of a placed stone holds a
/// stone, including the other half of the placed pair.
pub fn collapse_trigger(ruleset: Ruleset, board: &BoardState, placed: &[Coord]) -> bool {
    placed.iter().any(|&p| {
        trigger_neighborhood(ruleset, p, board.size())
            .unwrap_or_default()
            .into_iter()
            .any(|n| board.get(n).is_some())
    })
}

/// Active pairs of `owner` (other than `exclude`) with a stone next to a
/// placed point, in placement order.
pub fn affected_pairs(
    ruleset: Ruleset,
    board: &BoardState,
    placed: &[Coord],
    owner: Color,
    exclude: Option<PairId>,
) -> Vec<PairId> {
    let mut ids: Vec<PairId> = placed
        .iter()
        .flat_map(|&p| trigger_neighborhood(ruleset, p, board.size()).unwrap_or_default())
        .filter_map(|n| board.get(n))
        .filter(|o| o.color == owner)
        .filter_map(|o| o.pair)
        .filter(|&id| Some(id) != exclude)
        .collect();
    ids.sort_unstable_by_key(|id| (board.pair(*id).map(|p| p.move_number), *id));
    ids.dedup();
    ids
}

/// A move being resolved one collapse choice at a time.
#[derive(Debug, Clone)]
pub struct PendingMove {
    mover: Color,
    mv: Move,
    number: u32,
    generation: usize,
    board: BoardState,
    placed: Vec<Coord>,
    new_pair: Option<PairId>,
    queue: VecDeque<(CollapseStep, PairId)>,
    kept: Vec<Coord>,
    events: Vec<CollapseEvent>,
    current: Option<ChoiceRequest>,
    ruleset: Ruleset,
    forcing_diagonal: bool,
}

impl PendingMove {
    pub fn mover(&self) -> Color {
        self.mover
    }

    pub fn mv(&self) -> Move {
        self.mv
    }

    pub fn number(&self) -> u32 {
        self.number
    }

    /// The working board: stones placed, collapses so far applied, captures
    /// not yet resolved.
    pub fn board(&self) -> &BoardState {
        &self.board
    }

    pub fn events(&self) -> &[CollapseEvent] {
        &self.events
    }

    /// The choice that must be answered next, if any.
    pub fn request(&self) -> Option<&ChoiceRequest> {
        self.current.as_ref()
    }

    pub fn is_resolved(&self) -> bool {
        self.current.is_none()
    }

    /// Answers the current request. A disallowed answer leaves the pending
    /// move untouched.
    pub fn answer(&mut self, keep: Coord) -> Result<&CollapseEvent, MoveError> {
        let req = self.current.take().ok_or(MoveError::ChoicesOutstanding)?;
        if !req.permits(keep) {
            let err = MoveError::ProtocolViolation {
                request: req.clone(),
                answer: keep,
            };
            self.current = Some(req);
            return Err(err);
        }
        let removed = self
            .board
            .collapse_pair(req.pair_id, keep)
            .expect("request refers to an active pair");
        if req.step != CollapseStep::Placed {
            self.kept.push(keep);
        }
        self.events.push(CollapseEvent {
            move_number: self.number,
            step: req.step,
            pair_id: req.pair_id,
            kept: keep,
            removed,
            chooser: req.chooser,
            forced: req.forced.clone(),
        });
        self.queue.pop_front();
        self.advance();
        Ok(self.events.last().expect("just pushed"))
    }

    fn advance(&mut self) {
        self.current = self.queue.front().map(|&(step, id)| {
            let pair = self.board.pair(id).expect("queued pairs are active");
            let chooser = match step {
                CollapseStep::Opponent => self.mover.opponent(),
                _ => pair.color,
            };
            let forced = (step == CollapseStep::Placed)
                .then(|| self.forced_options(pair.stones))
                .flatten();
            ChoiceRequest {
                chooser,
                pair_id: id,
                step,
                options: pair.stones,
                forced,
            }
        });
    }

    fn forced_options(&self, stones: [Coord; 2]) -> Option<Vec<Coord>> {
        let size = self.board.size();
        let forced: Vec<Coord> = stones
            .into_iter()
            .filter(|&s| {
                let around = if self.forcing_diagonal {
                    trigger_neighborhood(self.ruleset, s, size).unwrap_or_default()
                } else {
                    neighbors(s, size).unwrap_or_default()
                };
                around.iter().any(|n| self.kept.contains(n))
            })
            .collect();
        (!forced.is_empty()).then_some(forced)
    }
}

/// A fully answered move that passed capture, suicide and superko checks.
#[derive(Debug, Clone)]
pub struct ResolvedMove {
    generation: usize,
    mover: Color,
    mv: Move,
    number: u32,
    board: BoardState,
    events: Vec<CollapseEvent>,
    captured: Vec<Coord>,
    position: Option<(u64, Box<[u16]>)>,
    new_pair: Option<PairId>,
}

impl ResolvedMove {
    pub fn mv(&self) -> Move {
        self.mv
    }

    pub fn board(&self) -> &BoardState {
        &self.board
    }

    pub fn captured(&self) -> &[Coord] {
        &self.captured
    }
}
