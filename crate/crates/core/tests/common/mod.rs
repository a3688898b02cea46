#![allow(dead_code)]

pub mod naive;
pub mod selfplay;

use std::collections::BTreeMap;
use std::path::PathBuf;

use qgo_core::{parse_record, BoardState, Color, Coord, GameRecord};

pub fn c(s: &str) -> Coord {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> GameRecord {
    let path = fixture_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_record(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Reads a diagram written top row first, `X`/`O` stones and `.` empty.
pub fn diagram(rows: &[&str]) -> BTreeMap<Coord, Color> {
    let size = rows.len();
    let mut out = BTreeMap::new();
    for (i, line) in rows.iter().enumerate() {
        let row = size - 1 - i;
        let cells: Vec<char> = line.chars().filter(|ch| !ch.is_whitespace()).collect();
        assert_eq!(cells.len(), size, "row {line:?}");
        for (col, ch) in cells.into_iter().enumerate() {
            let color = match ch {
                'X' => Color::Black,
                'O' => Color::White,
                '.' => continue,
                other => panic!("unexpected {other:?}"),
            };
            out.insert(Coord::new(col as u8, row as u8), color);
        }
    }
    out
}

pub fn stones_of(board: &BoardState) -> BTreeMap<Coord, Color> {
    board.stones().map(|(p, o)| (p, o.color)).collect()
}

/// Point-by-point comparison, listing every mismatching intersection.
pub fn board_mismatches(board: &BoardState, expected: &BTreeMap<Coord, Color>) -> Vec<String> {
    board
        .coords()
        .filter_map(|p| {
            let got = board.get(p).map(|o| o.color);
            let want = expected.get(&p).copied();
            (got != want).then(|| format!("{p}: expected {want:?}, found {got:?}"))
        })
        .collect()
}
