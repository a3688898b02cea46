use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column labels: A..Z without I. Sizes above 19 use U..Z.
pub const COLUMN_LETTERS: &[u8; 25] = b"ABCDEFGHJKLMNOPQRSTUVWXYZ";

pub const MIN_BOARD_SIZE: usize = 2;
pub const MAX_BOARD_SIZE: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoordError {
    #[error("malformed coordinate `{0}`")]
    Malformed(String),
    #[error("coordinate {coord} is off a {size}x{size} board")]
    OutOfRange { coord: String, size: usize },
    #[error("unsupported board size {0}")]
    UnsupportedSize(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn opponent(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Color::Black => 0,
            Color::White => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::Black => 'B',
            Color::White => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c {
            'B' | 'b' => Some(Color::Black),
            'W' | 'w' => Some(Color::White),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Black => "Black",
            Color::White => "White",
        })
    }
}

/// A board intersection. Ordering is by column, then row, which is the
/// iteration order used throughout the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub col: u8,
    pub row: u8,
}

impl Coord {
    pub const fn new(col: u8, row: u8) -> Coord {
        Coord { col, row }
    }

    pub fn checked(col: usize, row: usize, size: usize) -> Result<Coord, CoordError> {
        if col >= size || row >= size {
            return Err(CoordError::OutOfRange {
                coord: format!("({col},{row})"),
                size,
            });
        }
        Ok(Coord::new(col as u8, row as u8))
    }

    pub fn in_bounds(self, size: usize) -> bool {
        (self.col as usize) < size && (self.row as usize) < size
    }

    pub fn validate(self, size: usize) -> Result<Coord, CoordError> {
        if self.in_bounds(size) {
            Ok(self)
        } else {
            Err(CoordError::OutOfRange {
                coord: self.to_string(),
                size,
            })
        }
    }

    /// Parses `D3`-style notation and checks it against `size`.
    pub fn parse_on(s: &str, size: usize) -> Result<Coord, CoordError> {
        s.parse::<Coord>()?.validate(size)
    }

    /// Dense index, column-major so that index order matches `Ord`.
    pub fn index(self, size: usize) -> usize {
        self.col as usize * size + self.row as usize
    }

    pub fn from_index(index: usize, size: usize) -> Coord {
        Coord::new((index / size) as u8, (index % size) as u8)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = COLUMN_LETTERS
            .get(self.col as usize)
            .map(|&b| b as char)
            .unwrap_or('?');
        write!(f, "{}{}", letter, self.row as u32 + 1)
    }
}

impl FromStr for Coord {
    type Err = CoordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || CoordError::Malformed(s.to_string());
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(malformed)?.to_ascii_uppercase();
        let col = COLUMN_LETTERS
            .iter()
            .position(|&b| b as char == letter)
            .ok_or_else(malformed)?;
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return Err(malformed());
        }
        let row: usize = digits.parse().map_err(|_| malformed())?;
        if row == 0 || row > MAX_BOARD_SIZE {
            return Err(malformed());
        }
        Ok(Coord::new(col as u8, (row - 1) as u8))
    }
}

impl Serialize for Coord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn check_size(size: usize) -> Result<usize, CoordError> {
    if (MIN_BOARD_SIZE..=MAX_BOARD_SIZE).contains(&size) {
        Ok(size)
    } else {
        Err(CoordError::UnsupportedSize(size))
    }
}

/// Orthogonal neighbours, ascending by column then row.
pub fn neighbors(c: Coord, size: usize) -> Result<Vec<Coord>, CoordError> {
    c.validate(size)?;
    Ok(offsets(c, size, &[(-1, 0), (0, -1), (0, 1), (1, 0)]))
}

/// Diagonal neighbours, ascending by column then row.
pub fn diagonal_neighbors(c: Coord, size: usize) -> Result<Vec<Coord>, CoordError> {
    c.validate(size)?;
    Ok(offsets(c, size, &[(-1, -1), (-1, 1), (1, -1), (1, 1)]))
}

pub(crate) fn offsets(c: Coord, size: usize, deltas: &[(i32, i32)]) -> Vec<Coord> {
    let mut out = Vec::with_capacity(deltas.len());
    for &(dc, dr) in deltas {
        let col = c.col as i32 + dc;
        let row = c.row as i32 + dr;
        if col >= 0 && row >= 0 && (col as usize) < size && (row as usize) < size {
            out.push(Coord::new(col as u8, row as u8));
        }
    }
    out
}
