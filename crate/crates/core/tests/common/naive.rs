//! A deliberately simple, independent model of standard play, used as an
//! oracle for the engine on tiny boards. Row-major indexing, vectors instead
//! of maps, every collapse choice enumerated.

use std::collections::BTreeSet;

use qgo_core::{Color, Coord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stone {
    pub black: bool,
    /// Pair number, 0 for a singleton.
    pub pair: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Snapshot {
    pub colors: Vec<u8>,
    pub pairing: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct NaiveGame {
    pub n: usize,
    pub cells: Vec<Option<Stone>>,
    pub black_to_move: bool,
    pub passes: u8,
    pub over: bool,
    pub move_no: u32,
    pub seen: Vec<Snapshot>,
}

/// A fully resolved placement: the kept point of each collapse in the order
/// the choices were asked, and the game afterwards.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub choices: Vec<usize>,
    pub game: NaiveGame,
}

impl NaiveGame {
    pub fn new(n: usize) -> NaiveGame {
        let mut g = NaiveGame {
            n,
            cells: vec![None; n * n],
            black_to_move: true,
            passes: 0,
            over: false,
            move_no: 1,
            seen: Vec::new(),
        };
        g.seen.push(g.snapshot());
        g
    }

    pub fn idx(&self, p: Coord) -> usize {
        p.row as usize * self.n + p.col as usize
    }

    pub fn coord(&self, i: usize) -> Coord {
        Coord::new((i % self.n) as u8, (i / self.n) as u8)
    }

    fn adj(&self, i: usize) -> Vec<usize> {
        let (x, y) = ((i % self.n) as i32, (i / self.n) as i32);
        let mut out = Vec::new();
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && nx < self.n as i32 && ny < self.n as i32 {
                out.push(ny as usize * self.n + nx as usize);
            }
        }
        out
    }

    pub fn snapshot(&self) -> Snapshot {
        let colors = self
            .cells
            .iter()
            .map(|s| match s {
                None => 0,
                Some(s) if s.black => 1,
                Some(_) => 2,
            })
            .collect();
        let mut pairing = Vec::new();
        for i in 0..self.cells.len() {
            for j in i + 1..self.cells.len() {
                if let (Some(a), Some(b)) = (self.cells[i], self.cells[j]) {
                    if a.pair != 0 && a.pair == b.pair {
                        pairing.push((i, j));
                    }
                }
            }
        }
        Snapshot { colors, pairing }
    }

    fn stones_of_pair(&self, id: u32) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].is_some_and(|s| s.pair == id))
            .collect()
    }

    fn group(&self, start: usize) -> (Vec<usize>, bool) {
        let black = self.cells[start].unwrap().black;
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![start];
        let mut members = Vec::new();
        let mut has_liberty = false;
        seen[start] = true;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in self.adj(i) {
                match self.cells[j] {
                    None => has_liberty = true,
                    Some(s) if s.black == black && !seen[j] => {
                        seen[j] = true;
                        stack.push(j);
                    }
                    _ => {}
                }
            }
        }
        (members, has_liberty)
    }

    /// Removes dead opponent groups, then reports whether the mover has a
    /// dead group.
    fn captures_leave_suicide(&mut self, mover_black: bool) -> bool {
        let mut dead = Vec::new();
        for i in 0..self.cells.len() {
            if self.cells[i].is_some_and(|s| s.black != mover_black) {
                let (members, alive) = self.group(i);
                if !alive {
                    dead.extend(members);
                }
            }
        }
        for i in dead {
            if let Some(s) = self.cells[i].take() {
                if s.pair != 0 {
                    for j in self.stones_of_pair(s.pair) {
                        self.cells[j] = Some(Stone { black: s.black, pair: 0 });
                    }
                }
            }
        }
        (0..self.cells.len()).any(|i| self.cells[i].is_some_and(|s| s.black == mover_black) && !self.group(i).1)
    }

    fn touching_pairs(&self, placed: &[usize], black: bool, skip: u32) -> Vec<u32> {
        let mut ids = BTreeSet::new();
        for &p in placed {
            for j in self.adj(p) {
                if let Some(s) = self.cells[j] {
                    if s.black == black && s.pair != 0 && s.pair != skip {
                        ids.insert(s.pair);
                    }
                }
            }
        }
        ids.into_iter().collect()
    }

    fn pass_or_resign(&self, resign: bool) -> NaiveGame {
        let mut g = self.clone();
        g.move_no += 1;
        g.black_to_move = !g.black_to_move;
        if resign {
            g.over = true;
        } else {
            g.passes += 1;
            g.over = g.passes == 2;
        }
        g
    }

    /// Every legal resolution of placing a pair on `a` and `b`.
    pub fn place_pair(&self, a: usize, b: usize) -> Vec<Outcome> {
        if self.over || a == b || self.cells[a].is_some() || self.cells[b].is_some() {
            return Vec::new();
        }
        let black = self.black_to_move;
        let id = self.move_no;
        let mut g = self.clone();
        g.cells[a] = Some(Stone { black, pair: id });
        g.cells[b] = Some(Stone { black, pair: id });
        let touched = [a, b].iter().any(|&p| g.adj(p).iter().any(|&j| g.cells[j].is_some()));
        let mut finals: Vec<(Vec<usize>, NaiveGame)> = Vec::new();
        if !touched {
            finals.push((Vec::new(), g));
        } else {
            let mut queue = g.touching_pairs(&[a, b], black, id);
            queue.extend(g.touching_pairs(&[a, b], !black, id));
            let mut partial = vec![(Vec::new(), Vec::new(), g)];
            for pid in queue {
                let mut next = Vec::new();
                for (choices, kept, st) in partial {
                    for keep in st.stones_of_pair(pid) {
                        let mut s2: NaiveGame = st.clone();
                        for other in s2.stones_of_pair(pid) {
                            if other == keep {
                                s2.cells[other].as_mut().unwrap().pair = 0;
                            } else {
                                s2.cells[other] = None;
                            }
                        }
                        let mut ch: Vec<usize> = choices.clone();
                        ch.push(keep);
                        let mut k: Vec<usize> = kept.clone();
                        k.push(keep);
                        next.push((ch, k, s2));
                    }
                }
                partial = next;
            }
            for (choices, kept, st) in partial {
                let near_kept: Vec<usize> = [a, b]
                    .into_iter()
                    .filter(|&p| st.adj(p).iter().any(|j| kept.contains(j)))
                    .collect();
                let options = if near_kept.is_empty() { vec![a, b] } else { near_kept };
                for keep in options {
                    let mut s2 = st.clone();
                    let drop = if keep == a { b } else { a };
                    s2.cells[drop] = None;
                    s2.cells[keep] = Some(Stone { black, pair: 0 });
                    let mut ch = choices.clone();
                    ch.push(keep);
                    finals.push((ch, s2));
                }
            }
        }
        let mut out = Vec::new();
        for (choices, mut st) in finals {
            if st.captures_leave_suicide(black) {
                continue;
            }
            let snap = st.snapshot();
            if st.seen.contains(&snap) {
                continue;
            }
            st.seen.push(snap);
            st.black_to_move = !black;
            st.passes = 0;
            st.move_no += 1;
            out.push(Outcome { choices, game: st });
        }
        out
    }

    pub fn pass(&self) -> Option<NaiveGame> {
        (!self.over).then(|| self.pass_or_resign(false))
    }

    /// Unordered empty-point pairs (as coordinates, smaller first) with at
    /// least one legal resolution.
    pub fn legal_pairs(&self) -> BTreeSet<(Coord, Coord)> {
        let mut out = BTreeSet::new();
        if self.over {
            return out;
        }
        for a in 0..self.cells.len() {
            for b in a + 1..self.cells.len() {
                if !self.place_pair(a, b).is_empty() {
                    let (x, y) = (self.coord(a), self.coord(b));
                    out.insert(if x < y { (x, y) } else { (y, x) });
                }
            }
        }
        out
    }

    pub fn color_to_move(&self) -> Color {
        if self.black_to_move {
            Color::Black
        } else {
            Color::White
        }
    }

    /// Identity of the state as far as future legality is concerned.
    pub fn key(&self) -> (Snapshot, bool, u8, bool, BTreeSet<Snapshot>) {
        (
            self.snapshot(),
            self.black_to_move,
            self.passes,
            self.over,
            self.seen.iter().cloned().collect(),
        )
    }
}
