//! Python bindings: `import quantum_go`.
//!
//! Points are strings such as `"D3"`, colours are `"black"`/`"white"`.
//! Collapse choices are answered by an optional callable that receives the
//! request as a dict and returns the point to keep; without one the first
//! allowed stone is kept.

use std::cell::RefCell;

use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use qgo_core::experiment::{to_csv, ExperimentConfig};
use qgo_core::record::replay_prefix;
use qgo_core::scoring::{result_string, ScoreResult};
use qgo_core::{
    finalize_pairs, parse_record, render_ascii, score, serialize_record, state_expression, ChoiceRequest,
    CollapseEvent, Color, Coord, GameConfig, GameRecord, GameState, GameStatus, Move, MoveError, MoveOutcome,
    PendingMove, Policy, Ruleset,
};

create_exception!(quantum_go, IllegalMoveError, PyValueError);
create_exception!(quantum_go, RecordError, PyValueError);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn move_err(e: MoveError) -> PyErr {
    match e {
        MoveError::Illegal(r) => IllegalMoveError::new_err((r.to_string(), r.code())),
        other => value_err(other),
    }
}

fn color_name(c: Color) -> &'static str {
    match c {
        Color::Black => "black",
        Color::White => "white",
    }
}

fn coord(s: &str, size: usize) -> PyResult<Coord> {
    Coord::parse_on(s, size).map_err(value_err)
}

fn coords(cs: &[Coord]) -> Vec<String> {
    cs.iter().map(|c| c.to_string()).collect()
}

fn event_dict<'py>(py: Python<'py>, e: &CollapseEvent) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("move", e.move_number)?;
    d.set_item("step", e.step.number())?;
    d.set_item("pair", e.pair_id.0)?;
    d.set_item("kept", e.kept.to_string())?;
    d.set_item("removed", e.removed.to_string())?;
    d.set_item("chooser", color_name(e.chooser))?;
    d.set_item("forced", e.forced.as_deref().map(coords))?;
    Ok(d)
}

fn request_dict<'py>(py: Python<'py>, r: &ChoiceRequest) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("chooser", color_name(r.chooser))?;
    d.set_item("pair", r.pair_id.0)?;
    d.set_item("step", r.step.number())?;
    d.set_item("options", coords(&r.options))?;
    d.set_item("forced", r.forced.as_deref().map(coords))?;
    d.set_item("allowed", coords(r.allowed()))?;
    Ok(d)
}

fn outcome_dict<'py>(py: Python<'py>, o: &MoveOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("number", o.number)?;
    d.set_item("color", color_name(o.color))?;
    d.set_item("move", o.mv.to_string())?;
    let events = o.events.iter().map(|e| event_dict(py, e)).collect::<PyResult<Vec<_>>>()?;
    d.set_item("events", PyList::new(py, events)?)?;
    d.set_item("captured", coords(&o.captured))?;
    d.set_item("pair_survived", o.pair_survived)?;
    Ok(d)
}

fn score_dict<'py>(py: Python<'py>, s: &ScoreResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("black_area", s.black_area)?;
    d.set_item("white_area", s.white_area)?;
    d.set_item("dame", s.dame)?;
    d.set_item("komi", s.komi)?;
    d.set_item("winner", s.winner.map(color_name))?;
    d.set_item("margin", s.margin)?;
    d.set_item("result", s.to_string())?;
    Ok(d)
}

/// Asks `choose` (or takes the first allowed stone).
fn answer(py: Python<'_>, choose: Option<&Bound<'_, PyAny>>, req: &ChoiceRequest, size: usize) -> PyResult<Coord> {
    match choose {
        None => Ok(req.allowed()[0]),
        Some(f) => {
            let picked: String = f.call1((request_dict(py, req)?,))?.extract()?;
            coord(&picked, size)
        }
    }
}

fn parse_variant(name: &str) -> PyResult<Ruleset> {
    name.parse().map_err(value_err)
}

/// A move waiting on collapse choices.
#[pyclass(name = "PendingMove", module = "quantum_go")]
pub struct PyPendingMove {
    inner: PendingMove,
}

#[pymethods]
impl PyPendingMove {
    /// The choice to make next, or None once every choice is made.
    #[getter]
    fn request<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        self.inner.request().map(|r| request_dict(py, r)).transpose()
    }

    fn answer<'py>(&mut self, py: Python<'py>, keep: &str) -> PyResult<Bound<'py, PyDict>> {
        let size = self.inner.board().size();
        let e = self.inner.answer(coord(keep, size)?).map_err(move_err)?;
        event_dict(py, e)
    }

    /// The working board with the choices so far applied.
    fn render(&self) -> String {
        render_ascii(self.inner.board())
    }
}

#[pyclass(name = "Game", module = "quantum_go")]
pub struct PyGame {
    inner: GameState,
}

impl PyGame {
    fn size(&self) -> usize {
        self.inner.board().size()
    }

    fn to_move_arg(&self, a: &str, b: Option<&str>) -> PyResult<Move> {
        let size = self.size();
        Ok(match (a.to_ascii_lowercase().as_str(), b) {
            ("pass", None) => Move::Pass,
            ("resign", None) => Move::Resign,
            (_, None) => Move::PlaceSingle(coord(a, size)?),
            (_, Some(b)) => Move::PlacePair(coord(a, size)?, coord(b, size)?),
        })
    }
}

#[pymethods]
impl PyGame {
    #[new]
    #[pyo3(signature = (size=19, komi=7.5, variant="standard"))]
    fn new(size: usize, komi: f64, variant: &str) -> PyResult<Self> {
        let config = GameConfig::new(size, komi, parse_variant(variant)?);
        Ok(PyGame {
            inner: GameState::new(config).map_err(value_err)?,
        })
    }

    #[getter(size)]
    fn board_size(&self) -> usize {
        self.size()
    }

    #[getter]
    fn komi(&self) -> f64 {
        self.inner.komi()
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.ruleset().tag()
    }

    #[getter]
    fn to_move(&self) -> &'static str {
        color_name(self.inner.to_move())
    }

    #[getter]
    fn move_number(&self) -> u32 {
        self.inner.next_move_number()
    }

    #[getter]
    fn is_over(&self) -> bool {
        self.inner.is_over()
    }

    #[getter]
    fn position_hash(&self) -> u64 {
        self.inner.position_hash()
    }

    /// Plays a pair (two points), a single stone (one point), "pass" or
    /// "resign". Raises IllegalMoveError and leaves the game unchanged when
    /// the move is not allowed.
    #[pyo3(signature = (a, b=None, choose=None))]
    fn play<'py>(
        &mut self,
        py: Python<'py>,
        a: &str,
        b: Option<&str>,
        choose: Option<&Bound<'py, PyAny>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mv = self.to_move_arg(a, b)?;
        let size = self.size();
        let mut pending = self.inner.begin_move(mv).map_err(move_err)?;
        while let Some(req) = pending.request().cloned() {
            let keep = answer(py, choose, &req, size)?;
            pending.answer(keep).map_err(move_err)?;
        }
        let resolved = self.inner.finish(&pending).map_err(move_err)?;
        let outcome = self.inner.commit(resolved).map_err(move_err)?;
        outcome_dict(py, &outcome)
    }

    /// Starts a move whose collapse choices are made one at a time.
    #[pyo3(signature = (a, b=None))]
    fn begin_move(&self, a: &str, b: Option<&str>) -> PyResult<PyPendingMove> {
        let mv = self.to_move_arg(a, b)?;
        Ok(PyPendingMove {
            inner: self.inner.begin_move(mv).map_err(move_err)?,
        })
    }

    /// Completes a fully answered pending move.
    fn commit<'py>(&mut self, py: Python<'py>, pending: &PyPendingMove) -> PyResult<Bound<'py, PyDict>> {
        let resolved = self.inner.finish(&pending.inner).map_err(move_err)?;
        let outcome = self.inner.commit(resolved).map_err(move_err)?;
        outcome_dict(py, &outcome)
    }

    #[pyo3(signature = (a, b=None))]
    fn is_legal(&self, a: &str, b: Option<&str>) -> PyResult<bool> {
        Ok(self.inner.is_legal(self.to_move_arg(a, b)?))
    }

    /// Legal placements as tuples of points, plus "pass" and "resign".
    fn legal_moves(&self) -> Vec<Vec<String>> {
        self.inner
            .legal_moves()
            .into_iter()
            .map(|m| match m {
                Move::PlacePair(a, b) => vec![a.to_string(), b.to_string()],
                Move::PlaceSingle(a) => vec![a.to_string()],
                Move::Pass => vec!["pass".to_string()],
                Move::Resign => vec!["resign".to_string()],
            })
            .collect()
    }

    /// Occupied points and their colours.
    fn stones(&self) -> Vec<(String, &'static str)> {
        self.inner
            .board()
            .stones()
            .map(|(p, o)| (p.to_string(), color_name(o.color)))
            .collect()
    }

    /// Entangled pairs as (id, colour, point, point).
    fn pairs(&self) -> Vec<(u32, &'static str, String, String)> {
        self.inner
            .board()
            .pairs()
            .map(|p| (p.id.0, color_name(p.color), p.stones[0].to_string(), p.stones[1].to_string()))
            .collect()
    }

    fn render(&self) -> String {
        render_ascii(self.inner.board())
    }

    fn state_expression(&self) -> String {
        state_expression(self.inner.board()).to_string()
    }

    /// After two passes, collapses the remaining pairs by their owners.
    #[pyo3(signature = (choose=None))]
    fn finalize<'py>(&mut self, py: Python<'py>, choose: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyList>> {
        let size = self.size();
        let failure: RefCell<Option<PyErr>> = RefCell::new(None);
        let pick = |r: &ChoiceRequest| match answer(py, choose, r, size) {
            Ok(c) => c,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                r.options[0]
            }
        };
        let (mut black, mut white) = (pick, pick);
        let mut probe = self.inner.clone();
        let events = finalize_pairs(&mut probe, &mut black, &mut white).map_err(value_err)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        self.inner = probe;
        PyList::new(py, events.iter().map(|e| event_dict(py, e)).collect::<PyResult<Vec<_>>>()?)
    }

    fn score<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        score_dict(py, &score(&self.inner).map_err(value_err)?)
    }

    /// "B+4", "W+R", "Draw", or None while the game is on.
    fn result(&self) -> Option<String> {
        match self.inner.status() {
            GameStatus::Ongoing => None,
            GameStatus::Finished(end) => Some(result_string(end, score(&self.inner).ok().as_ref())),
        }
    }

    /// The game as `.qgr` text.
    fn record(&self) -> String {
        serialize_record(&GameRecord::from_game(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Game(size={}, variant={:?}, move_number={}, to_move={:?})",
            self.size(),
            self.variant(),
            self.move_number(),
            self.to_move()
        )
    }
}

/// Parses `.qgr` text and writes it back in canonical form.
#[pyfunction]
fn normalize_record(text: &str) -> PyResult<String> {
    let record = parse_record(text).map_err(|e| RecordError::new_err(e.to_string()))?;
    Ok(serialize_record(&record))
}

/// Replays `.qgr` text, optionally only the first `moves` entries. With
/// `finalize`, a record ending in two passes is collapsed and scored from
/// its kept markers.
#[pyfunction]
#[pyo3(signature = (text, moves=None, finalize=true))]
fn replay(text: &str, moves: Option<usize>, finalize: bool) -> PyResult<PyGame> {
    let record = parse_record(text).map_err(|e| RecordError::new_err(e.to_string()))?;
    let n = moves.unwrap_or(record.entries.len());
    if n > record.entries.len() {
        return Err(PyIndexError::new_err(format!(
            "record has {} moves, asked for {n}",
            record.entries.len()
        )));
    }
    let out = replay_prefix(&record, n, finalize).map_err(|e| RecordError::new_err(e.to_string()))?;
    Ok(PyGame { inner: out.game })
}

/// Self-play experiment; returns the CSV report and a summary dict.
#[pyfunction]
#[pyo3(signature = (variant="standard", size=9, komi=7.5, games=100, seed=0, black="random", white="random", max_moves=None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    variant: &str,
    size: usize,
    komi: f64,
    games: usize,
    seed: u64,
    black: &str,
    white: &str,
    max_moves: Option<u32>,
) -> PyResult<(String, Bound<'py, PyDict>)> {
    let config = ExperimentConfig {
        ruleset: parse_variant(variant)?,
        size,
        komi,
        games,
        seed,
        black: black.parse::<Policy>().map_err(value_err)?,
        white: white.parse::<Policy>().map_err(value_err)?,
        max_moves,
        ..ExperimentConfig::default()
    };
    let summary = py
        .detach(|| qgo_core::run_experiment(&config))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("games", summary.games.len())?;
    d.set_item("black_wins", summary.black_wins)?;
    d.set_item("white_wins", summary.white_wins)?;
    d.set_item("draws", summary.draws)?;
    d.set_item("mean_margin", summary.mean_margin)?;
    d.set_item("stderr_margin", summary.stderr_margin)?;
    d.set_item("mean_lifetime", summary.mean_lifetime)?;
    Ok((to_csv(&summary), d))
}

#[pymodule]
pub fn quantum_go(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGame>()?;
    m.add_class::<PyPendingMove>()?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_record, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("IllegalMoveError", m.py().get_type::<IllegalMoveError>())?;
    m.add("RecordError", m.py().get_type::<RecordError>())?;
    Ok(())
}
