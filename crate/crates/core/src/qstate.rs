//! Quantum-state notation for boards.
//!
//! A board is written as a tensor product of an empty block, one ket per
//! singleton and one singlet-style term per entangled pair:
//!
//! ```text
//! (|0>_{A1,A3,B2,B3,C1,C3}) (|1>_{C2})_W (a1|0>_{A2}|1>_{B1} - b1|1>_{A2}|0>_{B1})_B
//! ```
//!
//! The coefficients `ak`, `bk` are symbolic. Nothing in play assigns them
//! values, so marginals always use the even split.

use std::fmt;

use thiserror::Error;

use crate::board::{BoardState, PairId};
use crate::coord::{Color, Coord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QStateError {
    #[error("{0} is off the board")]
    OffBoard(Coord),
    #[error("{0} is not an entangled stone")]
    NotEntangled(Coord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    EmptyBlock(Vec<Coord>),
    SingletonKet { at: Coord, color: Color },
    /// `x` is the smaller coordinate; `ordinal` numbers the coefficients.
    PairTerm {
        ordinal: usize,
        pair: PairId,
        x: Coord,
        y: Coord,
        color: Color,
    },
}

impl Factor {
    pub fn coords(&self) -> Vec<Coord> {
        match self {
            Factor::EmptyBlock(cs) => cs.clone(),
            Factor::SingletonKet { at, .. } => vec![*at],
            Factor::PairTerm { x, y, .. } => vec![*x, *y],
        }
    }
}

fn join(cs: &[Coord]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::EmptyBlock(cs) => write!(f, "(|0>_{{{}}})", join(cs)),
            Factor::SingletonKet { at, color } => write!(f, "(|1>_{{{at}}})_{}", color.letter()),
            Factor::PairTerm {
                ordinal, x, y, color, ..
            } => write!(
                f,
                "(a{ordinal}|0>_{{{x}}}|1>_{{{y}}} - b{ordinal}|1>_{{{x}}}|0>_{{{y}}})_{}",
                color.letter()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QStateExpression {
    pub factors: Vec<Factor>,
}

impl fmt::Display for QStateExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// Empty block, then singletons, then pairs in placement order.
pub fn state_expression(board: &BoardState) -> QStateExpression {
    let mut factors = Vec::new();
    let empty: Vec<Coord> = board.empty_points().collect();
    if !empty.is_empty() {
        factors.push(Factor::EmptyBlock(empty));
    }
    for (at, o) in board.stones() {
        if o.pair.is_none() {
            factors.push(Factor::SingletonKet { at, color: o.color });
        }
    }
    for (i, pair) in board.pairs().enumerate() {
        let [a, b] = pair.stones;
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        factors.push(Factor::PairTerm {
            ordinal: i + 1,
            pair: pair.id,
            x,
            y,
            color: pair.color,
        });
    }
    QStateExpression { factors }
}

/// Single-intersection state of an entangled half: `p_empty|0><0| + p_stone(|1><1|)_C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    pub at: Coord,
    pub p_empty: f64,
    pub p_stone: f64,
    pub color: Color,
}

impl Marginal {
    pub fn even(at: Coord, color: Color) -> Marginal {
        Marginal {
            at,
            p_empty: 0.5,
            p_stone: 0.5,
            color,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalState {
    Empty,
    Stone(Color),
    Mixed(Marginal),
}

impl LocalState {
    pub fn render(&self, at: Coord) -> String {
        match self {
            LocalState::Empty => format!("|0>_{{{at}}}"),
            LocalState::Stone(c) => format!("(|1>_{{{at}}})_{}", c.letter()),
            LocalState::Mixed(m) => format!(
                "{}|0>_{{{at}}}<0|_{{{at}}} + {}(|1>_{{{at}}}<1|_{{{at}}})_{}",
                m.p_empty,
                m.p_stone,
                m.color.letter()
            ),
        }
    }
}

pub fn marginal(board: &BoardState, at: Coord) -> Result<LocalState, QStateError> {
    if !at.in_bounds(board.size()) {
        return Err(QStateError::OffBoard(at));
    }
    Ok(match board.get(at) {
        None => LocalState::Empty,
        Some(o) if o.pair.is_none() => LocalState::Stone(o.color),
        Some(o) => LocalState::Mixed(Marginal::even(at, o.color)),
    })
}

/// The projective measurement made by touching the entangled stone at `at`.
pub fn measurement_description(board: &BoardState, at: Coord) -> Result<String, QStateError> {
    match marginal(board, at)? {
        LocalState::Mixed(m) => Ok(format!(
            "{{|0>_{{{at}}}<0|_{{{at}}}, (|1>_{{{at}}}<1|_{{{at}}})_{}}}",
            m.color.letter()
        )),
        _ => Err(QStateError::NotEntangled(at)),
    }
}
