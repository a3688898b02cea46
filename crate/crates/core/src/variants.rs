//! Rule variants: Weak (diagonal contact also collapses), Symmetric (pairs are
//! point-symmetric about the centre) and Semi-Quantum (only one colour may
//! entangle).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::BoardState;
use crate::coord::{diagonal_neighbors, neighbors, Color, Coord, CoordError};
use crate::rules::{IllegalReason, Move};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Ruleset {
    #[default]
    Standard,
    Weak,
    Symmetric,
    SemiQuantum(Color),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VariantError {
    #[error("unknown variant `{0}`")]
    Unknown(String),
    #[error("symmetric play needs an odd board size, got {0}")]
    EvenBoard(usize),
    #[error(transparent)]
    Coord(#[from] CoordError),
}

impl Ruleset {
    pub fn tag(&self) -> &'static str {
        match self {
            Ruleset::Standard => "standard",
            Ruleset::Weak => "weak",
            Ruleset::Symmetric => "symmetric",
            Ruleset::SemiQuantum(Color::Black) => "semi-quantum-black",
            Ruleset::SemiQuantum(Color::White) => "semi-quantum-white",
        }
    }

    /// Whether `color` places pairs under this ruleset.
    pub fn entangles(&self, color: Color) -> bool {
        match self {
            Ruleset::SemiQuantum(c) => *c == color,
            _ => true,
        }
    }

    /// The same ruleset with the roles of the colours exchanged.
    pub fn color_swapped(&self) -> Ruleset {
        match self {
            Ruleset::SemiQuantum(c) => Ruleset::SemiQuantum(c.opponent()),
            other => *other,
        }
    }

    pub fn validate_size(&self, size: usize) -> Result<(), VariantError> {
        if *self == Ruleset::Symmetric && size.is_multiple_of(2) {
            return Err(VariantError::EvenBoard(size));
        }
        Ok(())
    }
}

impl fmt::Display for Ruleset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Ruleset {
    type Err = VariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Ruleset::Standard),
            "weak" => Ok(Ruleset::Weak),
            "symmetric" => Ok(Ruleset::Symmetric),
            "semi-quantum-black" | "semi-quantum" => Ok(Ruleset::SemiQuantum(Color::Black)),
            "semi-quantum-white" => Ok(Ruleset::SemiQuantum(Color::White)),
            _ => Err(VariantError::Unknown(s.to_string())),
        }
    }
}

impl Serialize for Ruleset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Ruleset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Points whose occupation makes a stone placed at `c` collapse.
pub fn trigger_neighborhood(ruleset: Ruleset, c: Coord, size: usize) -> Result<Vec<Coord>, CoordError> {
    let mut out = neighbors(c, size)?;
    if ruleset == Ruleset::Weak {
        out.extend(diagonal_neighbors(c, size)?);
        out.sort_unstable();
    }
    Ok(out)
}

/// Reflection through the centre point.
pub fn point_symmetric(c: Coord, size: usize) -> Result<Coord, VariantError> {
    if size.is_multiple_of(2) {
        return Err(VariantError::EvenBoard(size));
    }
    c.validate(size)?;
    let last = (size - 1) as u8;
    Ok(Coord::new(last - c.col, last - c.row))
}

fn center(size: usize) -> Coord {
    Coord::new((size / 2) as u8, (size / 2) as u8)
}

/// Checks that `mv` has a shape the ruleset allows for `mover`. Occupancy of
/// the target points is checked separately by the engine.
pub(crate) fn check_shape(
    ruleset: Ruleset,
    board: &BoardState,
    mover: Color,
    mv: &Move,
) -> Result<(), IllegalReason> {
    let size = board.size();
    match (ruleset, mv) {
        (_, Move::Pass | Move::Resign) => Ok(()),
        (Ruleset::SemiQuantum(c), Move::PlacePair(..)) if c != mover => {
            Err(IllegalReason::PairsNotAllowed)
        }
        (Ruleset::SemiQuantum(c), Move::PlaceSingle(_)) if c == mover => {
            Err(IllegalReason::SinglesNotAllowed)
        }
        (Ruleset::SemiQuantum(_), _) => Ok(()),
        (Ruleset::Symmetric, Move::PlacePair(a, b)) => {
            let sym = point_symmetric(*a, size).map_err(|_| IllegalReason::NotSymmetric)?;
            if sym != *b {
                return Err(IllegalReason::NotSymmetric);
            }
            Ok(())
        }
        (Ruleset::Symmetric, Move::PlaceSingle(p)) => {
            let sym = point_symmetric(*p, size).map_err(|_| IllegalReason::NotSymmetric)?;
            if sym == *p || !board.is_empty_at(sym) {
                Ok(())
            } else {
                Err(IllegalReason::SymmetricPointFree)
            }
        }
        (Ruleset::Standard | Ruleset::Weak, Move::PlaceSingle(_)) => {
            Err(IllegalReason::SinglesNotAllowed)
        }
        (Ruleset::Standard | Ruleset::Weak, Move::PlacePair(..)) => Ok(()),
    }
}

/// Placements of the right shape on empty points, before any collapse or
/// capture consideration. Pairs are normalised with the smaller point first.
pub(crate) fn candidate_placements(ruleset: Ruleset, board: &BoardState, mover: Color) -> Vec<Move> {
    let empty: Vec<Coord> = board.empty_points().collect();
    let size = board.size();
    let mut out = Vec::new();
    let all_pairs = |out: &mut Vec<Move>| {
        for (i, &a) in empty.iter().enumerate() {
            for &b in &empty[i + 1..] {
                out.push(Move::PlacePair(a, b));
            }
        }
    };
    match ruleset {
        Ruleset::Standard | Ruleset::Weak => all_pairs(&mut out),
        Ruleset::SemiQuantum(c) if c == mover => all_pairs(&mut out),
        Ruleset::SemiQuantum(_) => out.extend(empty.iter().map(|&p| Move::PlaceSingle(p))),
        Ruleset::Symmetric => {
            let mid = center(size);
            for &p in &empty {
                let sym = point_symmetric(p, size).expect("odd board checked at setup");
                if p == mid || !board.is_empty_at(sym) {
                    out.push(Move::PlaceSingle(p));
                } else if p < sym {
                    out.push(Move::PlacePair(p, sym));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Coord {
        s.parse().unwrap()
    }

    #[test]
    fn weak_neighborhood_includes_diagonals() {
        assert_eq!(trigger_neighborhood(Ruleset::Weak, c("K10"), 19).unwrap().len(), 8);
        assert_eq!(trigger_neighborhood(Ruleset::Standard, c("K10"), 19).unwrap().len(), 4);
        assert_eq!(
            trigger_neighborhood(Ruleset::Weak, c("A1"), 19).unwrap(),
            vec![c("A2"), c("B1"), c("B2")]
        );
    }

    #[test]
    fn reflection_through_center() {
        assert_eq!(point_symmetric(c("C6"), 19).unwrap(), c("R14"));
        assert_eq!(point_symmetric(c("K10"), 19).unwrap(), c("K10"));
        assert_eq!(point_symmetric(c("A1"), 19).unwrap(), c("T19"));
        assert!(matches!(point_symmetric(c("A1"), 8), Err(VariantError::EvenBoard(8))));
    }

    #[test]
    fn ruleset_tags_round_trip() {
        for r in [
            Ruleset::Standard,
            Ruleset::Weak,
            Ruleset::Symmetric,
            Ruleset::SemiQuantum(Color::Black),
            Ruleset::SemiQuantum(Color::White),
        ] {
            assert_eq!(r.tag().parse::<Ruleset>().unwrap(), r);
        }
        assert!("quantum".parse::<Ruleset>().is_err());
    }

    #[test]
    fn symmetric_shapes() {
        let mut b = BoardState::new(19).unwrap();
        let r = Ruleset::Symmetric;
        assert!(check_shape(r, &b, Color::Black, &Move::PlacePair(c("C6"), c("R14"))).is_ok());
        assert_eq!(
            check_shape(r, &b, Color::Black, &Move::PlaceSingle(c("C6"))),
            Err(IllegalReason::SymmetricPointFree)
        );
        assert!(check_shape(r, &b, Color::Black, &Move::PlaceSingle(c("K10"))).is_ok());
        b.place_singleton(c("R14"), Color::White).unwrap();
        assert!(check_shape(r, &b, Color::Black, &Move::PlaceSingle(c("C6"))).is_ok());
    }
}
