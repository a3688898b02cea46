//! One game, its seats and its watchers, driven one message at a time.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use qgo_core::rules::SetupError;
use qgo_core::scoring::{result_string, ScoreResult};
use qgo_core::{
    finalize_pairs, score, serialize_record, BoardState, ChoiceRequest, CollapseEvent, CollapseStep, Color, Coord,
    GameConfig, GameEnd, GameRecord, GameState, GameStatus, IllegalReason, Move, MoveError, MoveOutcome, PairId,
    PendingMove,
};
use thiserror::Error;

use crate::journal::JournalEntry;
use crate::protocol::{
    format_hash, BoardSnapshot, ErrorCode, Phase, SeatToken, ServerMessage, SessionId, StateSync, WireMove,
};

/// A connection, as known to the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticipantId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub to: ParticipantId,
    pub msg: ServerMessage,
}

#[derive(Debug, Error)]
pub enum RestoreError {
    #[error("journal is empty or does not start with a created entry")]
    MissingHeader,
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error("move {number}: {detail}")]
    Diverged { number: u32, detail: String },
}

#[derive(Debug, Clone)]
struct Seat {
    token: SeatToken,
    holder: Option<ParticipantId>,
}

#[derive(Debug, Clone)]
struct Endgame {
    board: BoardState,
    queue: VecDeque<ChoiceRequest>,
    answers: BTreeMap<PairId, Coord>,
    events: Vec<CollapseEvent>,
}

#[derive(Debug, Clone)]
enum Stage {
    Play,
    Collapse(PendingMove),
    Endgame(Endgame),
    Over,
}

#[derive(Debug, Clone, Default)]
struct LastMove {
    mv: Option<Move>,
    events: Vec<CollapseEvent>,
    captured: Vec<Coord>,
}

impl LastMove {
    fn of(outcome: &MoveOutcome) -> LastMove {
        LastMove {
            mv: Some(outcome.mv),
            events: outcome.events.clone(),
            captured: outcome.captured.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    id: SessionId,
    game: GameState,
    seats: [Option<Seat>; 2],
    spectators: BTreeSet<ParticipantId>,
    stage: Stage,
    last: LastMove,
    score: Option<ScoreResult>,
    prompt_since: Option<Instant>,
    choice_timeout: Duration,
    journal: Vec<JournalEntry>,
}

fn reply(to: ParticipantId, code: ErrorCode, detail: impl Into<String>) -> Vec<Outbound> {
    vec![Outbound {
        to,
        msg: ServerMessage::error(code, detail),
    }]
}

fn illegal(to: ParticipantId, reason: IllegalReason) -> Vec<Outbound> {
    vec![Outbound {
        to,
        msg: ServerMessage::Error {
            code: ErrorCode::IllegalMove,
            detail: reason.to_string(),
            reason: Some(reason.code().to_string()),
        },
    }]
}

fn new_token() -> SeatToken {
    SeatToken(format!("{:032x}", rand::random::<u128>()))
}

/// The reason the first-option resolution of `pending` fails, if it does.
fn failure_reason(game: &GameState, pending: &PendingMove) -> Option<IllegalReason> {
    let mut p = pending.clone();
    while let Some(req) = p.request().cloned() {
        p.answer(req.allowed()[0]).ok()?;
    }
    match game.finish(&p) {
        Err(MoveError::Illegal(r)) => Some(r),
        _ => None,
    }
}

impl Session {
    pub fn new(id: SessionId, config: GameConfig, choice_timeout: Duration) -> Result<Session, SetupError> {
        let game = GameState::new(config.clone())?;
        Ok(Session {
            id,
            game,
            seats: [None, None],
            spectators: BTreeSet::new(),
            stage: Stage::Play,
            last: LastMove::default(),
            score: None,
            prompt_since: None,
            choice_timeout,
            journal: vec![JournalEntry::Created { session: id, config }],
        })
    }

    pub fn id(&self) -> SessionId {
        self.id
    }

    pub fn game(&self) -> &GameState {
        &self.game
    }

    pub fn phase(&self) -> Phase {
        match self.stage {
            Stage::Play => Phase::Play,
            Stage::Collapse(_) => Phase::Collapse,
            Stage::Endgame(_) => Phase::Endgame,
            Stage::Over => Phase::Over,
        }
    }

    pub fn score(&self) -> Option<&ScoreResult> {
        self.score.as_ref()
    }

    /// The outstanding collapse choice.
    pub fn pending_request(&self) -> Option<&ChoiceRequest> {
        match &self.stage {
            Stage::Collapse(p) => p.request(),
            Stage::Endgame(e) => e.queue.front(),
            _ => None,
        }
    }

    pub fn take_journal(&mut self) -> Vec<JournalEntry> {
        std::mem::take(&mut self.journal)
    }

    /// The game so far as a record.
    pub fn record_text(&self) -> String {
        serialize_record(&GameRecord::from_game(&self.game))
    }

    fn holds(&self, pid: ParticipantId, color: Color) -> bool {
        self.seats[color.index()]
            .as_ref()
            .is_some_and(|s| s.holder == Some(pid))
    }

    fn seat_of(&self, pid: ParticipantId) -> Option<Color> {
        [Color::Black, Color::White].into_iter().find(|&c| self.holds(pid, c))
    }

    fn holder(&self, color: Color) -> Option<ParticipantId> {
        self.seats[color.index()].as_ref().and_then(|s| s.holder)
    }

    fn participants(&self) -> BTreeSet<ParticipantId> {
        let mut all = self.spectators.clone();
        all.extend(self.seats.iter().flatten().filter_map(|s| s.holder));
        all
    }

    pub fn has_participant(&self, pid: ParticipantId) -> bool {
        self.participants().contains(&pid)
    }

    fn awaiting(&self) -> Option<Color> {
        match self.stage {
            Stage::Play => Some(self.game.to_move()),
            Stage::Over => None,
            _ => self.pending_request().map(|r| r.chooser),
        }
    }

    fn sync_for(&self, pid: ParticipantId, token: Option<SeatToken>) -> ServerMessage {
        let (board, last_move, events, captured, hash) = match &self.stage {
            Stage::Collapse(p) => (p.board(), Some(p.mv()), p.events().to_vec(), Vec::new(), None),
            Stage::Endgame(e) => (&e.board, self.last.mv, e.events.clone(), Vec::new(), None),
            Stage::Play | Stage::Over => (
                self.game.board(),
                self.last.mv,
                self.last.events.clone(),
                self.last.captured.clone(),
                Some(format_hash(self.game.position_hash())),
            ),
        };
        ServerMessage::StateSync(StateSync {
            session: self.id,
            phase: self.phase(),
            seat: self.seat_of(pid),
            token,
            move_number: self.game.next_move_number(),
            to_move: self.game.to_move(),
            awaiting: self.awaiting(),
            board: BoardSnapshot::of(board),
            last_move: last_move.map(WireMove::from),
            events,
            captured,
            hash,
        })
    }

    fn broadcast(&self) -> Vec<Outbound> {
        self.participants()
            .into_iter()
            .map(|to| Outbound {
                to,
                msg: self.sync_for(to, None),
            })
            .collect()
    }

    fn prompt(&self, now: Instant) -> Vec<Outbound> {
        let Some(req) = self.pending_request() else {
            return Vec::new();
        };
        let Some(to) = self.holder(req.chooser) else {
            return Vec::new();
        };
        let waited = self.prompt_since.map_or(Duration::ZERO, |t| now.saturating_duration_since(t));
        vec![Outbound {
            to,
            msg: ServerMessage::ChoicePrompt {
                session: self.id,
                request: req.clone(),
                timeout_secs: self.choice_timeout.saturating_sub(waited).as_secs(),
            },
        }]
    }

    fn game_over(&self) -> Vec<Outbound> {
        let GameStatus::Finished(end) = self.game.status() else {
            return Vec::new();
        };
        let msg = ServerMessage::GameOver {
            session: self.id,
            end,
            result: result_string(end, self.score.as_ref()),
            score: self.score,
        };
        self.participants()
            .into_iter()
            .map(|to| Outbound { to, msg: msg.clone() })
            .collect()
    }

    /// Seats `pid` as `seat`, reattaches it when `token` matches, or adds a
    /// watcher when no seat is asked for.
    pub fn join(
        &mut self,
        pid: ParticipantId,
        seat: Option<Color>,
        token: Option<SeatToken>,
        now: Instant,
    ) -> Vec<Outbound> {
        let Some(color) = seat else {
            self.spectators.insert(pid);
            return vec![Outbound {
                to: pid,
                msg: self.sync_for(pid, None),
            }];
        };
        let granted = match (&mut self.seats[color.index()], token) {
            (Some(s), Some(t)) if s.token == t => {
                s.holder = Some(pid);
                s.token.clone()
            }
            (Some(_), Some(_)) => return reply(pid, ErrorCode::BadToken, format!("wrong token for {color:?}")),
            (Some(_), None) => return reply(pid, ErrorCode::SeatTaken, format!("{color:?} is taken")),
            (slot @ None, _) => {
                let token = new_token();
                *slot = Some(Seat {
                    token: token.clone(),
                    holder: Some(pid),
                });
                self.journal.push(JournalEntry::Seat {
                    seat: color,
                    token: token.clone(),
                });
                token
            }
        };
        self.spectators.remove(&pid);
        let mut out = vec![Outbound {
            to: pid,
            msg: self.sync_for(pid, Some(granted)),
        }];
        if self.pending_request().is_some_and(|r| r.chooser == color) {
            out.extend(self.prompt(now));
        }
        out
    }

    /// Detaches `pid`; its seats stay reserved for their tokens.
    pub fn leave(&mut self, pid: ParticipantId) {
        self.spectators.remove(&pid);
        for seat in self.seats.iter_mut().flatten() {
            if seat.holder == Some(pid) {
                seat.holder = None;
            }
        }
    }

    pub fn play(&mut self, pid: ParticipantId, mv: Move, now: Instant) -> Vec<Outbound> {
        if self.seat_of(pid).is_none() {
            return reply(pid, ErrorCode::NotYourTurn, "watchers cannot move");
        }
        match self.stage {
            Stage::Play => {}
            Stage::Collapse(_) | Stage::Endgame(_) => {
                return reply(pid, ErrorCode::ChoicePending, "a collapse choice is outstanding")
            }
            Stage::Over => return illegal(pid, IllegalReason::GameOver),
        }
        let mover = self.game.to_move();
        if !self.holds(pid, mover) {
            return reply(pid, ErrorCode::NotYourTurn, format!("{mover:?} to move"));
        }
        let pending = match self.game.begin_move(mv) {
            Ok(p) => p,
            Err(MoveError::Illegal(r)) => return illegal(pid, r),
            Err(e) => return reply(pid, ErrorCode::IllegalMove, e.to_string()),
        };
        if pending.request().is_none() {
            return self.complete(pending, now);
        }
        if !self.game.is_legal(mv) {
            let reason = failure_reason(&self.game, &pending).unwrap_or(IllegalReason::Suicide);
            return illegal(pid, reason);
        }
        self.stage = Stage::Collapse(pending);
        self.prompt_since = Some(now);
        let mut out = self.broadcast();
        out.extend(self.prompt(now));
        out
    }

    pub fn choose(&mut self, pid: ParticipantId, keep: Coord, now: Instant) -> Vec<Outbound> {
        let Some(req) = self.pending_request().cloned() else {
            return reply(pid, ErrorCode::NoPendingChoice, "nothing to choose");
        };
        if !self.holds(pid, req.chooser) {
            return reply(
                pid,
                ErrorCode::NotYourChoice,
                format!("{:?} chooses for pair {}", req.chooser, req.pair_id),
            );
        }
        if !req.permits(keep) {
            let err = MoveError::ProtocolViolation { request: req, answer: keep };
            return reply(pid, ErrorCode::ProtocolViolation, err.to_string());
        }
        match std::mem::replace(&mut self.stage, Stage::Play) {
            Stage::Collapse(mut pending) => {
                pending.answer(keep).expect("answer checked against the request");
                if pending.request().is_none() {
                    return self.complete(pending, now);
                }
                self.stage = Stage::Collapse(pending);
            }
            Stage::Endgame(mut end) => {
                let removed = end.board.collapse_pair(req.pair_id, keep).expect("pair is active");
                end.events.push(CollapseEvent {
                    move_number: self.game.next_move_number(),
                    step: CollapseStep::Endgame,
                    pair_id: req.pair_id,
                    kept: keep,
                    removed,
                    chooser: req.chooser,
                    forced: None,
                });
                end.answers.insert(req.pair_id, keep);
                end.queue.pop_front();
                if end.queue.is_empty() {
                    return self.finalize(&end.answers);
                }
                self.stage = Stage::Endgame(end);
            }
            other => unreachable!("a request exists only while collapsing: {other:?}"),
        }
        self.prompt_since = Some(now);
        let mut out = self.broadcast();
        out.extend(self.prompt(now));
        out
    }

    fn complete(&mut self, pending: PendingMove, now: Instant) -> Vec<Outbound> {
        let mover = pending.mover();
        let was_collapsing = !pending.events().is_empty();
        self.prompt_since = None;
        let resolved = match self.game.finish(&pending) {
            Ok(r) => r,
            Err(err) => {
                self.stage = Stage::Play;
                let mut out = if was_collapsing { self.broadcast() } else { Vec::new() };
                if let Some(to) = self.holder(mover) {
                    out.extend(match err {
                        MoveError::Illegal(r) => illegal(to, r),
                        e => reply(to, ErrorCode::IllegalMove, e.to_string()),
                    });
                }
                return out;
            }
        };
        let outcome = self.game.commit(resolved).expect("resolved against the current position");
        self.journal.push(JournalEntry::Move {
            number: outcome.number,
            mv: outcome.mv.into(),
            events: outcome.events.clone(),
        });
        self.last = LastMove::of(&outcome);
        match self.game.status() {
            GameStatus::Ongoing => {
                self.stage = Stage::Play;
                self.broadcast()
            }
            GameStatus::Finished(GameEnd::TwoPasses) => self.start_endgame(now),
            GameStatus::Finished(_) => {
                self.stage = Stage::Over;
                let mut out = self.broadcast();
                out.extend(self.game_over());
                out
            }
        }
    }

    fn start_endgame(&mut self, now: Instant) -> Vec<Outbound> {
        let board = self.game.board().clone();
        let queue: VecDeque<ChoiceRequest> = board
            .pairs()
            .map(|p| ChoiceRequest {
                chooser: p.color,
                pair_id: p.id,
                step: CollapseStep::Endgame,
                options: p.stones,
                forced: None,
            })
            .collect();
        if queue.is_empty() {
            return self.finalize(&BTreeMap::new());
        }
        self.stage = Stage::Endgame(Endgame {
            board,
            queue,
            answers: BTreeMap::new(),
            events: Vec::new(),
        });
        self.prompt_since = Some(now);
        let mut out = self.broadcast();
        out.extend(self.prompt(now));
        out
    }

    fn finalize(&mut self, answers: &BTreeMap<PairId, Coord>) -> Vec<Outbound> {
        let mut pick = |r: &ChoiceRequest| answers.get(&r.pair_id).copied().unwrap_or(r.options[0]);
        let mut pick_white = |r: &ChoiceRequest| answers.get(&r.pair_id).copied().unwrap_or(r.options[0]);
        let events = finalize_pairs(&mut self.game, &mut pick, &mut pick_white).expect("game ended by two passes");
        self.journal.push(JournalEntry::Finalized { events: events.clone() });
        self.score = Some(score(&self.game).expect("no pairs remain"));
        self.last = LastMove {
            mv: Some(Move::Pass),
            events,
            captured: Vec::new(),
        };
        self.stage = Stage::Over;
        self.prompt_since = None;
        let mut out = self.broadcast();
        out.extend(self.game_over());
        out
    }

    /// Abandons the game when a choice has been outstanding too long.
    pub fn expire(&mut self, now: Instant) -> Vec<Outbound> {
        let Some(since) = self.prompt_since else {
            return Vec::new();
        };
        if now.saturating_duration_since(since) < self.choice_timeout {
            return Vec::new();
        }
        self.game.abandon();
        self.stage = Stage::Over;
        self.prompt_since = None;
        self.journal.push(JournalEntry::Abandoned);
        let mut out = self.broadcast();
        out.extend(self.game_over());
        out
    }

    /// Rebuilds a session from its journal. Seats come back unattached and an
    /// unanswered collapse is dropped; the mover plays again.
    pub fn restore(entries: &[JournalEntry], choice_timeout: Duration, now: Instant) -> Result<Session, RestoreError> {
        let Some(JournalEntry::Created { session, config }) = entries.first() else {
            return Err(RestoreError::MissingHeader);
        };
        let mut s = Session::new(*session, config.clone(), choice_timeout)?;
        for entry in &entries[1..] {
            match entry {
                JournalEntry::Created { .. } => return Err(RestoreError::MissingHeader),
                JournalEntry::Seat { seat, token } => {
                    s.seats[seat.index()] = Some(Seat {
                        token: token.clone(),
                        holder: None,
                    });
                }
                JournalEntry::Move { number, mv, events } => {
                    let kept: BTreeMap<PairId, Coord> = events.iter().map(|e| (e.pair_id, e.kept)).collect();
                    let mut pick = |r: &ChoiceRequest| kept.get(&r.pair_id).copied().unwrap_or(r.options[0]);
                    let outcome = s
                        .game
                        .apply_move((*mv).into(), &mut pick)
                        .map_err(|e| RestoreError::Diverged {
                            number: *number,
                            detail: e.to_string(),
                        })?;
                    if outcome.number != *number || outcome.events != *events {
                        return Err(RestoreError::Diverged {
                            number: *number,
                            detail: "collapse events differ".to_string(),
                        });
                    }
                    s.last = LastMove::of(&outcome);
                }
                JournalEntry::Finalized { events } => {
                    let answers = events.iter().map(|e| (e.pair_id, e.kept)).collect();
                    s.finalize(&answers);
                }
                JournalEntry::Abandoned => {
                    s.game.abandon();
                    s.stage = Stage::Over;
                }
            }
        }
        if s.phase() != Phase::Over {
            match s.game.status() {
                GameStatus::Ongoing => s.stage = Stage::Play,
                GameStatus::Finished(GameEnd::TwoPasses) => {
                    s.start_endgame(now);
                }
                GameStatus::Finished(_) => s.stage = Stage::Over,
            }
        }
        s.journal.clear();
        Ok(s)
    }

    pub fn seat_token(&self, color: Color) -> Option<&SeatToken> {
        self.seats[color.index()].as_ref().map(|s| &s.token)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: ParticipantId = ParticipantId(1);
    const B: ParticipantId = ParticipantId(2);

    fn c(s: &str) -> Coord {
        s.parse().unwrap()
    }

    fn seated(size: usize) -> (Session, Instant) {
        let now = Instant::now();
        let mut s = Session::new(SessionId(1), GameConfig::new(size, 0.0, Default::default()), Duration::from_secs(60))
            .unwrap();
        s.join(A, Some(Color::Black), None, now);
        s.join(B, Some(Color::White), None, now);
        (s, now)
    }

    fn codes(out: &[Outbound]) -> Vec<ErrorCode> {
        out.iter().filter_map(|o| o.msg.error_code()).collect()
    }

    #[test]
    fn second_claim_on_a_seat_is_refused() {
        let (mut s, now) = seated(5);
        let out = s.join(ParticipantId(3), Some(Color::Black), None, now);
        assert_eq!(codes(&out), vec![ErrorCode::SeatTaken]);
        let wrong = SeatToken("nope".into());
        let out = s.join(ParticipantId(3), Some(Color::Black), Some(wrong), now);
        assert_eq!(codes(&out), vec![ErrorCode::BadToken]);
    }

    #[test]
    fn token_reattaches_a_seat() {
        let (mut s, now) = seated(5);
        let token = s.seat_token(Color::Black).cloned();
        s.leave(A);
        let out = s.join(ParticipantId(9), Some(Color::Black), token, now);
        assert!(codes(&out).is_empty());
        assert!(s.holds(ParticipantId(9), Color::Black));
        let out = s.play(ParticipantId(9), Move::PlacePair(c("A1"), c("C3")), now);
        assert!(codes(&out).is_empty());
    }

    #[test]
    fn unanswered_prompt_abandons_after_timeout() {
        let (mut s, now) = seated(5);
        s.play(A, Move::PlacePair(c("B2"), c("D4")), now);
        s.play(B, Move::PlacePair(c("B3"), c("E5")), now);
        assert_eq!(s.phase(), Phase::Collapse);
        assert!(s.expire(now + Duration::from_secs(59)).is_empty());
        let out = s.expire(now + Duration::from_secs(60));
        assert_eq!(s.phase(), Phase::Over);
        assert!(out
            .iter()
            .any(|o| matches!(o.msg, ServerMessage::GameOver { end: GameEnd::Abandoned, .. })));
        assert_eq!(s.game().status(), GameStatus::Finished(GameEnd::Abandoned));
    }

    #[test]
    fn wrong_answer_leaves_the_prompt_open() {
        let (mut s, now) = seated(5);
        s.play(A, Move::PlacePair(c("B2"), c("D4")), now);
        s.play(B, Move::PlacePair(c("B3"), c("E5")), now);
        let before = s.pending_request().cloned();
        let out = s.choose(A, c("E5"), now);
        assert_eq!(codes(&out), vec![ErrorCode::ProtocolViolation]);
        assert_eq!(s.pending_request().cloned(), before);
        let out = s.choose(B, c("B2"), now);
        assert_eq!(codes(&out), vec![ErrorCode::NotYourChoice]);
    }

    #[test]
    fn two_passes_collapse_leftover_pairs_by_their_owners() {
        let (mut s, now) = seated(5);
        s.play(A, Move::PlacePair(c("A1"), c("E5")), now);
        s.play(B, Move::PlacePair(c("A5"), c("E1")), now);
        s.play(A, Move::Pass, now);
        let out = s.play(B, Move::Pass, now);
        assert_eq!(s.phase(), Phase::Endgame);
        let prompt: Vec<_> = out
            .iter()
            .filter(|o| matches!(o.msg, ServerMessage::ChoicePrompt { .. }))
            .collect();
        assert_eq!(prompt.len(), 1);
        assert_eq!(prompt[0].to, A);
        s.choose(A, c("E5"), now);
        let out = s.choose(B, c("A5"), now);
        assert_eq!(s.phase(), Phase::Over);
        let over = out.iter().find_map(|o| match &o.msg {
            ServerMessage::GameOver { result, .. } => Some(result.clone()),
            _ => None,
        });
        assert_eq!(over.as_deref(), Some("Draw"));
        assert_eq!(s.game().board().stone_count(), 2);
    }

    #[test]
    fn restore_replays_the_journal() {
        let (mut s, now) = seated(5);
        s.play(A, Move::PlacePair(c("B2"), c("D4")), now);
        s.play(B, Move::PlacePair(c("B3"), c("E5")), now);
        s.choose(A, c("D4"), now);
        s.choose(B, c("B3"), now);
        s.play(A, Move::PlacePair(c("A1"), c("C1")), now);
        let journal = s.take_journal();
        let back = Session::restore(&journal, Duration::from_secs(60), now).unwrap();
        assert_eq!(back.game().position_hash(), s.game().position_hash());
        assert_eq!(back.seat_token(Color::White), s.seat_token(Color::White));
        assert_eq!(back.phase(), Phase::Play);
        assert!(!back.has_participant(A));
    }
}
