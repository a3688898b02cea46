//! Board geometry, occupancy, connectivity and captures.
//!
//! Entangled stones are physically present: they block placement, join
//! groups and take liberties exactly like singletons. When a capture removes
//! one half of a pair the pair dissolves and the partner stays behind as a
//! singleton.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coord::{check_size, neighbors, Color, Coord, CoordError};
use crate::zobrist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId(pub u32);

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occupant {
    pub color: Color,
    /// `None` for a singleton.
    pub pair: Option<PairId>,
}

impl Occupant {
    pub fn singleton(color: Color) -> Occupant {
        Occupant { color, pair: None }
    }

    pub fn is_entangled(&self) -> bool {
        self.pair.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntangledPair {
    pub id: PairId,
    pub color: Color,
    pub stones: [Coord; 2],
    /// Move number on which the pair was placed.
    pub move_number: u32,
}

impl EntangledPair {
    pub fn partner_of(&self, c: Coord) -> Option<Coord> {
        match self.stones {
            [a, b] if a == c => Some(b),
            [a, b] if b == c => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error(transparent)]
    Coord(#[from] CoordError),
    #[error("{0} is occupied")]
    Occupied(Coord),
    #[error("{0} is empty")]
    EmptyPoint(Coord),
    #[error("a pair needs two distinct points, got {0} twice")]
    SamePoint(Coord),
    #[error("no active pair {0}")]
    NoSuchPair(PairId),
    #[error("{coord} is not a stone of pair {pair}")]
    NotInPair { pair: PairId, coord: Coord },
}

/// Result of a capture sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaptureReport {
    /// Opponent stones removed, ascending.
    pub removed: Vec<Coord>,
    /// Set when a group of the mover has no liberties after the sweep.
    pub suicide: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardState {
    size: usize,
    cells: Vec<Option<Occupant>>,
    pairs: BTreeMap<PairId, EntangledPair>,
    captures: [u32; 2],
    hash: u64,
}

impl BoardState {
    pub fn new(size: usize) -> Result<BoardState, BoardError> {
        check_size(size)?;
        Ok(BoardState {
            size,
            cells: vec![None; size * size],
            pairs: BTreeMap::new(),
            captures: [0; 2],
            hash: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, c: Coord) -> Option<Occupant> {
        if !c.in_bounds(self.size) {
            return None;
        }
        self.cells[c.index(self.size)]
    }

    pub fn is_empty_at(&self, c: Coord) -> bool {
        c.in_bounds(self.size) && self.cells[c.index(self.size)].is_none()
    }

    /// Stones captured by `color`.
    pub fn captures(&self, color: Color) -> u32 {
        self.captures[color.index()]
    }

    /// Incrementally maintained hash of occupancy plus pairing partition.
    pub fn zobrist(&self) -> u64 {
        self.hash
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.cells.len()).map(move |i| Coord::from_index(i, self.size))
    }

    pub fn stones(&self) -> impl Iterator<Item = (Coord, Occupant)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(i, o)| o.map(|o| (Coord::from_index(i, self.size), o)))
    }

    pub fn empty_points(&self) -> impl Iterator<Item = Coord> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(move |(i, _)| Coord::from_index(i, self.size))
    }

    pub fn stone_count(&self) -> usize {
        self.cells.iter().filter(|o| o.is_some()).count()
    }

    /// Active pairs in ascending id (= placement) order.
    pub fn pairs(&self) -> impl Iterator<Item = &EntangledPair> + '_ {
        self.pairs.values()
    }

    pub fn pair(&self, id: PairId) -> Option<&EntangledPair> {
        self.pairs.get(&id)
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn place_singleton(&mut self, c: Coord, color: Color) -> Result<(), BoardError> {
        self.check_empty(c)?;
        self.put(c, Occupant::singleton(color));
        Ok(())
    }

    pub fn place_pair(
        &mut self,
        id: PairId,
        color: Color,
        a: Coord,
        b: Coord,
        move_number: u32,
    ) -> Result<(), BoardError> {
        if a == b {
            return Err(BoardError::SamePoint(a));
        }
        self.check_empty(a)?;
        self.check_empty(b)?;
        let occupant = Occupant { color, pair: Some(id) };
        self.put(a, occupant);
        self.put(b, occupant);
        self.pairs.insert(
            id,
            EntangledPair {
                id,
                color,
                stones: [a, b],
                move_number,
            },
        );
        self.hash ^= zobrist::pair_key(a.index(self.size), b.index(self.size));
        Ok(())
    }

    /// Collapses pair `id`, keeping `kept` as a singleton. Returns the removed point.
    pub fn collapse_pair(&mut self, id: PairId, kept: Coord) -> Result<Coord, BoardError> {
        let pair = *self.pairs.get(&id).ok_or(BoardError::NoSuchPair(id))?;
        let removed = pair
            .partner_of(kept)
            .ok_or(BoardError::NotInPair { pair: id, coord: kept })?;
        self.dissolve(id);
        self.take(removed);
        Ok(removed)
    }

    /// Removes whatever stands on `c`. Removing half of a pair dissolves it.
    pub fn remove(&mut self, c: Coord) -> Option<Occupant> {
        let occupant = self.get(c)?;
        if let Some(id) = occupant.pair {
            self.dissolve(id);
        }
        self.take(c)
    }

    fn dissolve(&mut self, id: PairId) {
        if let Some(pair) = self.pairs.remove(&id) {
            let [a, b] = pair.stones;
            self.hash ^= zobrist::pair_key(a.index(self.size), b.index(self.size));
            for c in pair.stones {
                let i = c.index(self.size);
                if let Some(o) = self.cells[i].as_mut() {
                    o.pair = None;
                }
            }
        }
    }

    fn put(&mut self, c: Coord, o: Occupant) {
        let i = c.index(self.size);
        self.cells[i] = Some(o);
        self.hash ^= zobrist::cell_key(i, o.color);
    }

    fn take(&mut self, c: Coord) -> Option<Occupant> {
        let i = c.index(self.size);
        let o = self.cells[i].take()?;
        self.hash ^= zobrist::cell_key(i, o.color);
        Some(o)
    }

    fn check_empty(&self, c: Coord) -> Result<(), BoardError> {
        c.validate(self.size)?;
        if self.cells[c.index(self.size)].is_some() {
            return Err(BoardError::Occupied(c));
        }
        Ok(())
    }

    pub fn neighbors(&self, c: Coord) -> Vec<Coord> {
        neighbors(c, self.size).unwrap_or_default()
    }

    /// Maximal orthogonally connected same-colour set containing `c`, ascending.
    pub fn group_of(&self, c: Coord) -> Result<Vec<Coord>, BoardError> {
        c.validate(self.size)?;
        let color = self.get(c).ok_or(BoardError::EmptyPoint(c))?.color;
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![c];
        seen[c.index(self.size)] = true;
        let mut group = Vec::new();
        while let Some(p) = stack.pop() {
            group.push(p);
            for n in self.neighbors(p) {
                let i = n.index(self.size);
                if !seen[i] && self.cells[i].map(|o| o.color) == Some(color) {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
        group.sort_unstable();
        Ok(group)
    }

    /// Empty points adjacent to `group`.
    pub fn liberties(&self, group: &[Coord]) -> BTreeSet<Coord> {
        group
            .iter()
            .flat_map(|&p| self.neighbors(p))
            .filter(|&n| self.is_empty_at(n))
            .collect()
    }

    fn has_liberty(&self, group: &[Coord]) -> bool {
        group
            .iter()
            .any(|&p| self.neighbors(p).into_iter().any(|n| self.is_empty_at(n)))
    }

    /// Removes every opponent group without liberties, then reports whether any
    /// group of `mover` is left without liberties.
    pub fn resolve_captures(&mut self, mover: Color) -> CaptureReport {
        let victim = mover.opponent();
        let mut doomed = Vec::new();
        let mut seen = vec![false; self.cells.len()];
        for i in 0..self.cells.len() {
            if seen[i] || self.cells[i].map(|o| o.color) != Some(victim) {
                continue;
            }
            let group = self
                .group_of(Coord::from_index(i, self.size))
                .expect("occupied point");
            for p in &group {
                seen[p.index(self.size)] = true;
            }
            if !self.has_liberty(&group) {
                doomed.extend(group);
            }
        }
        doomed.sort_unstable();
        for &c in &doomed {
            self.remove(c);
        }
        self.captures[mover.index()] += doomed.len() as u32;

        let mut suicide = false;
        let mut seen = vec![false; self.cells.len()];
        for i in 0..self.cells.len() {
            if seen[i] || self.cells[i].map(|o| o.color) != Some(mover) {
                continue;
            }
            let group = self
                .group_of(Coord::from_index(i, self.size))
                .expect("occupied point");
            for p in &group {
                seen[p.index(self.size)] = true;
            }
            if !self.has_liberty(&group) {
                suicide = true;
                break;
            }
        }
        CaptureReport {
            removed: doomed,
            suicide,
        }
    }

    /// Canonical per-point encoding of occupancy and pairing, independent of
    /// pair ids. Used to confirm hash matches.
    pub fn position_key(&self) -> Box<[u16]> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, cell)| match cell {
                None => 0,
                Some(Occupant { color, pair: None }) => 1 + color.index() as u16,
                Some(Occupant {
                    color,
                    pair: Some(id),
                }) => {
                    let [a, b] = self.pairs[id].stones;
                    let partner = if a.index(self.size) == i { b } else { a };
                    3 + 2 * partner.index(self.size) as u16 + color.index() as u16
                }
            })
            .collect()
    }

    /// Recomputes the hash from scratch.
    pub fn recompute_zobrist(&self) -> u64 {
        let mut h = 0;
        for (c, o) in self.stones() {
            h ^= zobrist::cell_key(c.index(self.size), o.color);
        }
        for p in self.pairs.values() {
            h ^= zobrist::pair_key(p.stones[0].index(self.size), p.stones[1].index(self.size));
        }
        h
    }

    /// Checks pair integrity and hash consistency.
    pub fn check_integrity(&self) -> Result<(), String> {
        for (id, pair) in &self.pairs {
            let [a, b] = pair.stones;
            if a == b {
                return Err(format!("pair {id} covers {a} twice"));
            }
            for c in pair.stones {
                match self.get(c) {
                    Some(Occupant {
                        color,
                        pair: Some(pid),
                    }) if pid == *id && color == pair.color => {}
                    other => return Err(format!("pair {id} expects a stone at {c}, found {other:?}")),
                }
            }
        }
        for (c, o) in self.stones() {
            if let Some(id) = o.pair {
                match self.pairs.get(&id) {
                    Some(p) if p.stones.contains(&c) => {}
                    _ => return Err(format!("{c} refers to missing pair {id}")),
                }
            }
        }
        if self.hash != self.recompute_zobrist() {
            return Err("incremental hash drifted".to_string());
        }
        Ok(())
    }

    /// Same stones with colours swapped; pair ids and move numbers kept.
    pub fn color_swapped(&self) -> BoardState {
        let mut out = BoardState::new(self.size).expect("size already checked");
        for (c, o) in self.stones() {
            if o.pair.is_none() {
                out.place_singleton(c, o.color.opponent()).expect("empty");
            }
        }
        for p in self.pairs.values() {
            out.place_pair(p.id, p.color.opponent(), p.stones[0], p.stones[1], p.move_number)
                .expect("empty");
        }
        out.captures = [self.captures[1], self.captures[0]];
        out
    }
}
