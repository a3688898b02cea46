//! Area scoring: own stones plus empty regions bordered only by own stones.
//! Every stone on the board is taken to be alive.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::BoardState;
use crate::coord::Color;
use crate::rules::{ChoiceProvider, CollapseEvent, GameEnd, GameState, GameStatus, MoveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("{0} entangled pairs are still on the board")]
    NotFinalized(usize),
    #[error("pairs are only finalized after two passes")]
    NotPassedOut,
    #[error(transparent)]
    Choice(#[from] MoveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub black_area: u32,
    pub white_area: u32,
    pub dame: u32,
    pub komi: f64,
    /// `None` on a draw.
    pub winner: Option<Color>,
    pub margin: f64,
}

impl ScoreResult {
    /// Black area minus white area minus komi.
    pub fn signed_margin(&self) -> f64 {
        self.black_area as f64 - self.white_area as f64 - self.komi
    }
}

impl fmt::Display for ScoreResult {
    /// `B+4`, `W+7.5` or `Draw`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.winner {
            None => f.write_str("Draw"),
            Some(c) => write!(f, "{}+{}", c.letter(), self.margin),
        }
    }
}

/// Result string for a finished game given its score (if scored).
pub fn result_string(end: GameEnd, score: Option<&ScoreResult>) -> String {
    match (end, score) {
        (GameEnd::Resignation { winner }, _) => format!("{}+R", winner.letter()),
        (GameEnd::Abandoned, _) => "Void".to_string(),
        (GameEnd::TwoPasses, Some(s)) => s.to_string(),
        (GameEnd::TwoPasses, None) => "?".to_string(),
    }
}

/// Collapses the pairs left after two passes, each by its owner, in
/// placement order. Captures are not looked at again.
pub fn finalize_pairs(
    game: &mut GameState,
    black: &mut dyn ChoiceProvider,
    white: &mut dyn ChoiceProvider,
) -> Result<Vec<CollapseEvent>, ScoreError> {
    if game.status() != GameStatus::Finished(GameEnd::TwoPasses) {
        return Err(ScoreError::NotPassedOut);
    }
    Ok(game.collapse_remaining(black, white)?)
}

pub fn score(game: &GameState) -> Result<ScoreResult, ScoreError> {
    score_board(game.board(), game.komi())
}

pub fn score_board(board: &BoardState, komi: f64) -> Result<ScoreResult, ScoreError> {
    if board.pair_count() > 0 {
        return Err(ScoreError::NotFinalized(board.pair_count()));
    }
    let (black_area, white_area, dame) = area_counts(board);
    let diff = black_area as f64 - (white_area as f64 + komi);
    let winner = if diff > 0.0 {
        Some(Color::Black)
    } else if diff < 0.0 {
        Some(Color::White)
    } else {
        None
    };
    Ok(ScoreResult {
        black_area,
        white_area,
        dame,
        komi,
        winner,
        margin: diff.abs(),
    })
}

/// (black, white, neutral) point counts. Entangled stones count as stones.
pub fn area_counts(board: &BoardState) -> (u32, u32, u32) {
    let size = board.size();
    let mut area = [0u32; 2];
    let mut dame = 0;
    let mut seen = vec![false; size * size];
    for c in board.coords() {
        if let Some(o) = board.get(c) {
            area[o.color.index()] += 1;
            continue;
        }
        if seen[c.index(size)] {
            continue;
        }
        let mut region = 0u32;
        let mut borders = [false; 2];
        let mut stack = vec![c];
        seen[c.index(size)] = true;
        while let Some(p) = stack.pop() {
            region += 1;
            for n in board.neighbors(p) {
                match board.get(n) {
                    Some(o) => borders[o.color.index()] = true,
                    None if !seen[n.index(size)] => {
                        seen[n.index(size)] = true;
                        stack.push(n);
                    }
                    None => {}
                }
            }
        }
        match borders {
            [true, false] => area[0] += region,
            [false, true] => area[1] += region,
            _ => dame += region,
        }
    }
    (area[0], area[1], dame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::Coord;
    use crate::rules::{FirstOption, Move};

    fn c(s: &str) -> Coord {
        s.parse().unwrap()
    }

    #[test]
    fn empty_board_goes_to_komi() {
        let b = BoardState::new(6).unwrap();
        let s = score_board(&b, 7.5).unwrap();
        assert_eq!((s.black_area, s.white_area, s.dame), (0, 0, 36));
        assert_eq!(s.winner, Some(Color::White));
        assert_eq!(s.to_string(), "W+7.5");
    }

    #[test]
    fn draw_and_integer_margins() {
        let mut b = BoardState::new(3).unwrap();
        b.place_singleton(c("A1"), Color::Black).unwrap();
        assert_eq!(score_board(&b, 0.0).unwrap().to_string(), "B+9");
        assert_eq!(score_board(&b, 9.0).unwrap().to_string(), "Draw");
    }

    #[test]
    fn entangled_board_is_not_scored() {
        let mut g = GameState::standard(5, 0.0).unwrap();
        g.apply_move(Move::PlacePair(c("A1"), c("C3")), &mut FirstOption).unwrap();
        assert!(matches!(score(&g), Err(ScoreError::NotFinalized(1))));
    }

    #[test]
    fn finalize_requires_two_passes() {
        let mut g = GameState::standard(5, 0.0).unwrap();
        assert!(matches!(
            finalize_pairs(&mut g, &mut FirstOption, &mut FirstOption),
            Err(ScoreError::NotPassedOut)
        ));
    }

    #[test]
    fn finalize_keeps_one_stone_per_pair() {
        let mut g = GameState::standard(5, 0.0).unwrap();
        g.apply_move(Move::PlacePair(c("A1"), c("C3")), &mut FirstOption).unwrap();
        g.apply_move(Move::Pass, &mut FirstOption).unwrap();
        g.apply_move(Move::Pass, &mut FirstOption).unwrap();
        let events = finalize_pairs(&mut g, &mut |_: &crate::rules::ChoiceRequest| c("C3"), &mut FirstOption).unwrap();
        assert_eq!(events.len(), 1);
        assert!(g.board().get(c("A1")).is_none());
        assert!(g.board().get(c("C3")).is_some());
        // no pairs: identity
        let before = g.board().clone();
        assert!(finalize_pairs(&mut g, &mut FirstOption, &mut FirstOption).unwrap().is_empty());
        assert_eq!(g.board(), &before);
        let s = score(&g).unwrap();
        assert_eq!(s.black_area, 25);
    }

    #[test]
    fn resignation_string() {
        assert_eq!(result_string(GameEnd::Resignation { winner: Color::White }, None), "W+R");
    }
}
