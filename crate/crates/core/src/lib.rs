//! Rules engine for Quantum Go, a Go variant in which every move places an
//! entangled pair of stones that collapses to a single stone on contact.

pub mod board;
pub mod coord;
pub mod experiment;
pub mod qstate;
pub mod record;
pub mod rules;
pub mod scoring;
pub mod variants;
pub mod zobrist;

pub use board::{BoardError, BoardState, EntangledPair, Occupant, PairId};
pub use coord::{Color, Coord, CoordError};
pub use experiment::{run_experiment, Bot, ExperimentConfig, ExperimentSummary, Policy};
pub use qstate::{state_expression, QStateExpression};
pub use record::{parse_record, render_ascii, replay, serialize_record, GameRecord, ParseError, ReplayError};
pub use rules::{
    ChoiceProvider, ChoiceRequest, CollapseEvent, CollapseStep, FirstOption, GameConfig, GameEnd, GameState,
    GameStatus, IllegalReason, Move, MoveError, MoveOutcome, PendingMove, RuleFlags, Superko,
};
pub use scoring::{finalize_pairs, score, ScoreResult};
pub use variants::Ruleset;
