//! `.qgr` game records.
//!
//! ```text
//! # comments start with '#'
//! size=6
//! komi=0
//! variant=standard
//! B 1: D3* C2
//! W 2: C4* D5
//! B 29: PASS
//! W 30: R
//! ```
//!
//! Each pair entry marks the stone that survives its collapse with `*`.
//! Every pair collapses at most once, so these markers answer every collapse
//! choice during replay. Single-stone entries (`W 3: C4*`) are used by the
//! variants. A trailing `!` on an entry is accepted and ignored; it is a
//! reader's note that the pair caused other pairs to collapse.
//!
//! Header keys: `size`, `komi`, `variant`, `handicap` (comma-separated black
//! points; White then moves first) and `first` (`B` or `W`).

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::board::{BoardState, PairId};
use crate::coord::{Color, Coord, CoordError};
use crate::rules::{
    ChoiceRequest, CollapseEvent, GameConfig, GameEnd, GameState, GameStatus, IllegalReason, Move, MoveError,
    MoveOutcome, SetupError,
};
use crate::scoring::{self, ScoreError};
use crate::variants::Ruleset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryBody {
    /// `kept` is 1 or 2.
    Pair { p1: Coord, p2: Coord, kept: u8 },
    Single(Coord),
    Pass,
    Resign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveRecordEntry {
    pub color: Color,
    pub number: u32,
    pub body: EntryBody,
}

impl MoveRecordEntry {
    pub fn to_move(&self) -> Move {
        match self.body {
            EntryBody::Pair { p1, p2, .. } => Move::PlacePair(p1, p2),
            EntryBody::Single(p) => Move::PlaceSingle(p),
            EntryBody::Pass => Move::Pass,
            EntryBody::Resign => Move::Resign,
        }
    }

    pub fn kept_point(&self) -> Option<Coord> {
        match self.body {
            EntryBody::Pair { p1, kept: 1, .. } => Some(p1),
            EntryBody::Pair { p2, .. } => Some(p2),
            _ => None,
        }
    }
}

impl fmt::Display for MoveRecordEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: ", self.color.letter(), self.number)?;
        match self.body {
            EntryBody::Pair { p1, p2, kept: 1 } => write!(f, "{p1}* {p2}"),
            EntryBody::Pair { p1, p2, .. } => write!(f, "{p1} {p2}*"),
            EntryBody::Single(p) => write!(f, "{p}*"),
            EntryBody::Pass => f.write_str("PASS"),
            EntryBody::Resign => f.write_str("R"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub size: usize,
    pub komi: f64,
    pub ruleset: Ruleset,
    pub handicap: Vec<Coord>,
    pub first_player: Color,
}

impl Default for RecordHeader {
    fn default() -> Self {
        RecordHeader {
            size: 19,
            komi: 7.5,
            ruleset: Ruleset::Standard,
            handicap: Vec::new(),
            first_player: Color::Black,
        }
    }
}

impl RecordHeader {
    pub fn game_config(&self) -> GameConfig {
        GameConfig {
            size: self.size,
            komi: self.komi,
            ruleset: self.ruleset,
            handicap: self.handicap.clone(),
            first_player: self.first_player,
            ..GameConfig::default()
        }
    }

    pub fn from_config(config: &GameConfig) -> RecordHeader {
        RecordHeader {
            size: config.size,
            komi: config.komi,
            ruleset: config.ruleset,
            handicap: config.handicap.clone(),
            first_player: config.first_player,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GameRecord {
    pub header: RecordHeader,
    pub entries: Vec<MoveRecordEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed coordinate: {0}")]
    MalformedCoordinate(#[from] CoordError),
    #[error("pair entry has more than one kept marker")]
    DuplicateKeptMarker,
    #[error("pair entry has no kept marker")]
    MissingKeptMarker,
    #[error("expected move number {expected}, found {found}")]
    NumberGap { expected: u32, found: u32 },
    #[error("expected {expected} to move, found {found}")]
    WrongColor { expected: Color, found: Color },
    #[error("{0} appears twice in one entry")]
    PointReuse(Coord),
    #[error("bad header line: {0}")]
    BadHeader(String),
    #[error("header line after the first move")]
    HeaderAfterEntries,
    #[error("cannot read entry: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn parse_komi(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|k| k.is_finite())
}

pub fn parse_record(text: &str) -> Result<GameRecord, ParseError> {
    let mut header = RecordHeader::default();
    let mut entries: Vec<MoveRecordEntry> = Vec::new();
    let mut first_explicit = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if !entries.is_empty() {
                return Err(err(line_no, ParseErrorKind::HeaderAfterEntries));
            }
            let (key, value) = (key.trim(), value.trim());
            let bad = || err(line_no, ParseErrorKind::BadHeader(line.to_string()));
            match key {
                "size" => header.size = value.parse().map_err(|_| bad())?,
                "komi" => header.komi = parse_komi(value).ok_or_else(bad)?,
                "variant" => header.ruleset = value.parse().map_err(|_| bad())?,
                "handicap" => {
                    header.handicap = value
                        .split(',')
                        .map(|s| s.trim())
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<Coord>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(line_no, e.into()))?;
                    if !header.handicap.is_empty() && !first_explicit {
                        header.first_player = Color::White;
                    }
                }
                "first" => {
                    let mut chars = value.chars();
                    header.first_player = match (chars.next().and_then(Color::from_letter), chars.next()) {
                        (Some(c), None) => c,
                        _ => return Err(bad()),
                    };
                    first_explicit = true;
                }
                _ => return Err(bad()),
            }
            continue;
        }
        let entry = parse_entry(line, line_no, header.size)?;
        let expected_number = entries.last().map_or(1, |e| e.number + 1);
        if entry.number != expected_number {
            return Err(err(
                line_no,
                ParseErrorKind::NumberGap {
                    expected: expected_number,
                    found: entry.number,
                },
            ));
        }
        let expected_color = entries
            .last()
            .map_or(header.first_player, |e| e.color.opponent());
        if entry.color != expected_color {
            return Err(err(
                line_no,
                ParseErrorKind::WrongColor {
                    expected: expected_color,
                    found: entry.color,
                },
            ));
        }
        entries.push(entry);
    }
    Ok(GameRecord { header, entries })
}

fn parse_entry(line: &str, line_no: usize, size: usize) -> Result<MoveRecordEntry, ParseError> {
    let malformed = || err(line_no, ParseErrorKind::Malformed(line.to_string()));
    let (head, body) = line.split_once(':').ok_or_else(malformed)?;
    let head = head.trim();
    let mut chars = head.chars();
    let color = chars.next().and_then(Color::from_letter).ok_or_else(malformed)?;
    let number: u32 = chars.as_str().trim().parse().map_err(|_| malformed())?;

    // glue stray '*' onto the preceding point, drop the '!' annotation
    let mut tokens: Vec<String> = Vec::new();
    for tok in body.split_whitespace() {
        if tok == "!" {
            continue;
        }
        let tok = tok.trim_end_matches('!');
        if tok == "*" {
            match tokens.last_mut() {
                Some(prev) => prev.push('*'),
                None => return Err(malformed()),
            }
        } else {
            tokens.push(tok.to_string());
        }
    }

    let body = match tokens.as_slice() {
        [t] if t.eq_ignore_ascii_case("PASS") => EntryBody::Pass,
        [t] if t.eq_ignore_ascii_case("R") || t.eq_ignore_ascii_case("RESIGN") => EntryBody::Resign,
        [t] => {
            let (p, marks) = split_marker(t);
            if marks > 1 {
                return Err(err(line_no, ParseErrorKind::DuplicateKeptMarker));
            }
            EntryBody::Single(point(p, size, line_no)?)
        }
        [t1, t2] => {
            let (s1, m1) = split_marker(t1);
            let (s2, m2) = split_marker(t2);
            let p1 = point(s1, size, line_no)?;
            let p2 = point(s2, size, line_no)?;
            if p1 == p2 {
                return Err(err(line_no, ParseErrorKind::PointReuse(p1)));
            }
            let kept = match (m1, m2) {
                (1, 0) => 1,
                (0, 1) => 2,
                (0, 0) => return Err(err(line_no, ParseErrorKind::MissingKeptMarker)),
                _ => return Err(err(line_no, ParseErrorKind::DuplicateKeptMarker)),
            };
            EntryBody::Pair { p1, p2, kept }
        }
        _ => return Err(malformed()),
    };
    Ok(MoveRecordEntry { color, number, body })
}

fn split_marker(tok: &str) -> (&str, usize) {
    let trimmed = tok.trim_end_matches('*');
    (trimmed, tok.len() - trimmed.len())
}

fn point(s: &str, size: usize, line_no: usize) -> Result<Coord, ParseError> {
    Coord::parse_on(s, size).map_err(|e| err(line_no, e.into()))
}

fn fmt_komi(k: f64) -> String {
    format!("{k}")
}

/// Canonical text form.
pub fn serialize_record(record: &GameRecord) -> String {
    let h = &record.header;
    let mut out = String::new();
    let _ = writeln!(out, "size={}", h.size);
    let _ = writeln!(out, "komi={}", fmt_komi(h.komi));
    let _ = writeln!(out, "variant={}", h.ruleset);
    if !h.handicap.is_empty() {
        let pts: Vec<String> = h.handicap.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "handicap={}", pts.join(","));
    }
    let implied_first = if h.handicap.is_empty() {
        Color::Black
    } else {
        Color::White
    };
    if h.first_player != implied_first {
        let _ = writeln!(out, "first={}", h.first_player.letter());
    }
    for e in &record.entries {
        let _ = writeln!(out, "{e}");
    }
    out
}

impl GameRecord {
    /// Record of a game so far. Pairs that never collapsed are marked on
    /// their first point; replay never consults those markers.
    pub fn from_game(game: &GameState) -> GameRecord {
        let fates = game.pair_fates();
        let entries = game
            .moves()
            .iter()
            .map(|m| MoveRecordEntry {
                color: m.color,
                number: m.number,
                body: match m.mv {
                    Move::PlacePair(p1, p2) => EntryBody::Pair {
                        p1,
                        p2,
                        kept: if fates.get(&PairId(m.number)) == Some(&p2) { 2 } else { 1 },
                    },
                    Move::PlaceSingle(p) => EntryBody::Single(p),
                    Move::Pass => EntryBody::Pass,
                    Move::Resign => EntryBody::Resign,
                },
            })
            .collect();
        GameRecord {
            header: RecordHeader::from_config(game.config()),
            entries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Divergence {
    #[error(transparent)]
    Illegal(#[from] IllegalReason),
    #[error("pair {pair} keeps {kept} but the keep rule allows only {allowed}")]
    ForcedViolation { pair: u32, kept: Coord, allowed: String },
    #[error("pair {pair} keeps {kept}, which is not one of its stones {options}")]
    MarkerUnavailable { pair: u32, kept: Coord, options: String },
    #[error("pair {0} has no entry in the record")]
    UnknownPair(u32),
    #[error("{0}")]
    Engine(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("cannot set up the game: {0}")]
    Setup(#[from] SetupError),
    #[error("move {move_number}: {reason}")]
    Diverged { move_number: u32, reason: Divergence },
    #[error("end of game: {0}")]
    Finalize(#[from] ScoreError),
}

/// Final state of a replay plus everything that happened on the way.
#[derive(Debug, Clone)]
pub struct Replay {
    pub game: GameState,
    pub outcomes: Vec<MoveOutcome>,
    /// Collapses of pairs left after two passes.
    pub finalized: Vec<CollapseEvent>,
}

impl Replay {
    /// All collapse events in order, end-of-game collapses last.
    pub fn events(&self) -> Vec<CollapseEvent> {
        self.outcomes
            .iter()
            .flat_map(|o| o.events.iter().cloned())
            .chain(self.finalized.iter().cloned())
            .collect()
    }
}

/// Kept points by pair id, taken from the record's markers.
struct MarkerChooser {
    kept: HashMap<u32, Coord>,
}

impl MarkerChooser {
    fn new(record: &GameRecord) -> MarkerChooser {
        MarkerChooser {
            kept: record
                .entries
                .iter()
                .filter_map(|e| e.kept_point().map(|k| (e.number, k)))
                .collect(),
        }
    }

    fn choose(&self, req: &ChoiceRequest) -> Result<Coord, Divergence> {
        let pair = req.pair_id.0;
        let kept = *self.kept.get(&pair).ok_or(Divergence::UnknownPair(pair))?;
        let list = |cs: &[Coord]| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        if !req.options.contains(&kept) {
            return Err(Divergence::MarkerUnavailable {
                pair,
                kept,
                options: list(&req.options),
            });
        }
        if !req.permits(kept) {
            return Err(Divergence::ForcedViolation {
                pair,
                kept,
                allowed: list(req.allowed()),
            });
        }
        Ok(kept)
    }
}

/// Replays the whole record. A game ended by two passes has its remaining
/// pairs collapsed from the markers.
pub fn replay(record: &GameRecord) -> Result<Replay, ReplayError> {
    replay_prefix(record, record.entries.len(), true)
}

/// Replays the first `count` entries; `finalize` collapses leftover pairs if
/// those entries end the game by passing.
pub fn replay_prefix(record: &GameRecord, count: usize, finalize: bool) -> Result<Replay, ReplayError> {
    let mut game = GameState::new(record.header.game_config())?;
    let chooser = MarkerChooser::new(record);
    let mut outcomes = Vec::new();
    for entry in record.entries.iter().take(count) {
        let diverged = |reason: Divergence| ReplayError::Diverged {
            move_number: entry.number,
            reason,
        };
        if entry.number != game.next_move_number() || entry.color != game.to_move() {
            return Err(diverged(Divergence::Engine(format!(
                "record expects {} {} but the game is at {} {}",
                entry.color,
                entry.number,
                game.to_move(),
                game.next_move_number()
            ))));
        }
        let mut pending = game.begin_move(entry.to_move()).map_err(|e| diverged(move_divergence(e)))?;
        while let Some(req) = pending.request().cloned() {
            let keep = chooser.choose(&req).map_err(diverged)?;
            pending.answer(keep).map_err(|e| diverged(move_divergence(e)))?;
        }
        let resolved = game.finish(&pending).map_err(|e| diverged(move_divergence(e)))?;
        outcomes.push(game.commit(resolved).map_err(|e| diverged(move_divergence(e)))?);
    }
    let mut finalized = Vec::new();
    if finalize && game.status() == GameStatus::Finished(GameEnd::TwoPasses) {
        if let Some(p) = game.board().pairs().find(|p| !chooser.kept.contains_key(&p.id.0)) {
            return Err(ReplayError::Diverged {
                move_number: game.next_move_number(),
                reason: Divergence::UnknownPair(p.id.0),
            });
        }
        let mut black = |req: &ChoiceRequest| chooser.choose(req).unwrap_or(req.options[0]);
        let mut white = |req: &ChoiceRequest| chooser.choose(req).unwrap_or(req.options[0]);
        finalized = scoring::finalize_pairs(&mut game, &mut black, &mut white)?;
    }
    Ok(Replay {
        game,
        outcomes,
        finalized,
    })
}

fn move_divergence(e: MoveError) -> Divergence {
    match e {
        MoveError::Illegal(r) => Divergence::Illegal(r),
        other => Divergence::Engine(other.to_string()),
    }
}

/// Fixed-width diagram: `X`/`O` singletons, `x`/`o` entangled halves, `.`
/// empty, with column letters and row numbers around the grid and a list of
/// active pairs underneath.
pub fn render_ascii(board: &BoardState) -> String {
    let size = board.size();
    let letters: String = (0..size)
        .map(|col| Coord::new(col as u8, 0).to_string().chars().next().unwrap_or('?').to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let mut out = String::new();
    let _ = writeln!(out, "   {letters}");
    for row in (0..size).rev() {
        let cells: Vec<&str> = (0..size)
            .map(|col| match board.get(Coord::new(col as u8, row as u8)) {
                None => ".",
                Some(o) => match (o.color, o.pair.is_some()) {
                    (Color::Black, false) => "X",
                    (Color::White, false) => "O",
                    (Color::Black, true) => "x",
                    (Color::White, true) => "o",
                },
            })
            .collect();
        let _ = writeln!(out, "{:>2} {} {}", row + 1, cells.join(" "), row + 1);
    }
    let _ = writeln!(out, "   {letters}");
    if board.pair_count() > 0 {
        let pairs: Vec<String> = board
            .pairs()
            .map(|p| format!("{}{}={}-{}", p.color.letter(), p.id.0, p.stones[0], p.stones[1]))
            .collect();
        let _ = writeln!(out, "pairs: {}", pairs.join(" "));
    }
    out
}
