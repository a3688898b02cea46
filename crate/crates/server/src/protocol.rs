//! Wire messages. Each is a JSON object whose `type` field names the
//! variant, e.g. `{"type":"choice_made","keep":"D3"}`.

use std::fmt;

use qgo_core::scoring::ScoreResult;
use qgo_core::{
    BoardError, BoardState, ChoiceRequest, CollapseEvent, Color, Coord, GameConfig, GameEnd, Move, PairId,
};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Secret handed to a seat holder; presenting it again reattaches the seat.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeatToken(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WireMove {
    Pair { points: [Coord; 2] },
    Single { at: Coord },
    Pass,
    Resign,
}

impl From<Move> for WireMove {
    fn from(mv: Move) -> Self {
        match mv {
            Move::PlacePair(a, b) => WireMove::Pair { points: [a, b] },
            Move::PlaceSingle(at) => WireMove::Single { at },
            Move::Pass => WireMove::Pass,
            Move::Resign => WireMove::Resign,
        }
    }
}

impl From<WireMove> for Move {
    fn from(mv: WireMove) -> Self {
        match mv {
            WireMove::Pair { points: [a, b] } => Move::PlacePair(a, b),
            WireMove::Single { at } => Move::PlaceSingle(at),
            WireMove::Pass => Move::Pass,
            WireMove::Resign => Move::Resign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        #[serde(default)]
        name: Option<String>,
    },
    /// Opens a session and seats the sender.
    CreateGame {
        #[serde(default)]
        config: GameConfig,
        #[serde(default = "default_seat")]
        seat: Color,
    },
    /// Takes a seat, reattaches to one with its token, or watches when no
    /// seat is given.
    Join {
        session: SessionId,
        #[serde(default)]
        seat: Option<Color>,
        #[serde(default)]
        token: Option<SeatToken>,
    },
    MovePlaced {
        #[serde(rename = "move")]
        mv: WireMove,
    },
    ChoiceMade {
        keep: Coord,
    },
}

fn default_seat() -> Color {
    Color::Black
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    NotJoined,
    NoSuchSession,
    SeatTaken,
    BadToken,
    BadConfig,
    NotYourTurn,
    IllegalMove,
    ChoicePending,
    NotYourChoice,
    NoPendingChoice,
    ProtocolViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Waiting for the side to move.
    Play,
    /// A move is being collapsed; choices are outstanding.
    Collapse,
    /// Both players passed; leftover pairs are being collapsed.
    Endgame,
    Over,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoneView {
    pub at: Coord,
    pub color: Color,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardSnapshot {
    pub size: usize,
    pub stones: Vec<StoneView>,
    pub captures_black: u32,
    pub captures_white: u32,
}

impl BoardSnapshot {
    pub fn of(board: &BoardState) -> BoardSnapshot {
        BoardSnapshot {
            size: board.size(),
            stones: board
                .stones()
                .map(|(at, o)| StoneView {
                    at,
                    color: o.color,
                    pair: o.pair,
                })
                .collect(),
            captures_black: board.captures(Color::Black),
            captures_white: board.captures(Color::White),
        }
    }

    /// Rebuilds the stones and pairs. Capture counts are not restored.
    pub fn to_board(&self) -> Result<BoardState, BoardError> {
        let mut board = BoardState::new(self.size)?;
        let mut halves: Vec<(PairId, Color, Coord)> = Vec::new();
        for s in &self.stones {
            match s.pair {
                None => board.place_singleton(s.at, s.color)?,
                Some(id) => match halves.iter().position(|h| h.0 == id) {
                    Some(i) => {
                        let (_, color, first) = halves.swap_remove(i);
                        board.place_pair(id, color, first, s.at, id.0)?;
                    }
                    None => halves.push((id, s.color, s.at)),
                },
            }
        }
        match halves.first() {
            Some(&(id, ..)) => Err(BoardError::NoSuchPair(id)),
            None => Ok(board),
        }
    }
}

/// The position as seen by one participant. While a move is being collapsed
/// the board is the working board and `hash` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSync {
    pub session: SessionId,
    pub phase: Phase,
    /// The recipient's seat, if any.
    pub seat: Option<Color>,
    /// Only sent to the seat holder, in reply to creating or joining.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<SeatToken>,
    pub move_number: u32,
    pub to_move: Color,
    /// Whose input the session is waiting for.
    pub awaiting: Option<Color>,
    pub board: BoardSnapshot,
    /// The move being collapsed, or the last move played.
    pub last_move: Option<WireMove>,
    pub events: Vec<CollapseEvent>,
    pub captured: Vec<Coord>,
    /// Position hash in hex, once a move is complete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome {
        protocol: u32,
    },
    StateSync(StateSync),
    ChoicePrompt {
        session: SessionId,
        request: ChoiceRequest,
        /// Seconds left before the game is abandoned.
        timeout_secs: u64,
    },
    GameOver {
        session: SessionId,
        end: GameEnd,
        result: String,
        score: Option<ScoreResult>,
    },
    Error {
        code: ErrorCode,
        detail: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, detail: impl Into<String>) -> ServerMessage {
        ServerMessage::Error {
            code,
            detail: detail.into(),
            reason: None,
        }
    }

    pub fn error_code(&self) -> Option<ErrorCode> {
        match self {
            ServerMessage::Error { code, .. } => Some(*code),
            _ => None,
        }
    }
}

pub fn format_hash(hash: u64) -> String {
    format!("{hash:016x}")
}
