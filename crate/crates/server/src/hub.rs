use std::collections::{BTreeMap, HashMap};
use std::io;
use std::time::{Duration, Instant};

use crate::journal::JournalStore;
use crate::protocol::{ClientMessage, ErrorCode, Phase, ServerMessage, SessionId, PROTOCOL_VERSION};
use crate::session::{Outbound, ParticipantId, RestoreError, Session};

/// Seven days.
pub const DEFAULT_CHOICE_TIMEOUT: Duration = Duration::from_secs(7 * 24 * 3600);

#[derive(Debug, thiserror::Error)]
pub enum RecoverError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("session {session}: {source}")]
    Session {
        session: SessionId,
        #[source]
        source: RestoreError,
    },
}

/// All sessions and which session each connection is attached to.
#[derive(Debug)]
pub struct Hub {
    sessions: BTreeMap<SessionId, Session>,
    attached: HashMap<ParticipantId, SessionId>,
    next_session: u64,
    choice_timeout: Duration,
    store: Option<JournalStore>,
}

impl Hub {
    pub fn new(choice_timeout: Duration) -> Hub {
        Hub {
            sessions: BTreeMap::new(),
            attached: HashMap::new(),
            next_session: 1,
            choice_timeout,
            store: None,
        }
    }

    /// A hub that journals to `store`, with every journaled session restored.
    pub fn recover(store: JournalStore, choice_timeout: Duration, now: Instant) -> Result<Hub, RecoverError> {
        let mut hub = Hub::new(choice_timeout);
        for (id, entries) in store.load_all()? {
            let session =
                Session::restore(&entries, choice_timeout, now).map_err(|source| RecoverError::Session {
                    session: id,
                    source,
                })?;
            hub.next_session = hub.next_session.max(id.0 + 1);
            hub.sessions.insert(id, session);
        }
        hub.store = Some(store);
        Ok(hub)
    }

    pub fn session(&self, id: SessionId) -> Option<&Session> {
        self.sessions.get(&id)
    }

    pub fn session_ids(&self) -> impl Iterator<Item = SessionId> + '_ {
        self.sessions.keys().copied()
    }

    pub fn handle(&mut self, pid: ParticipantId, msg: ClientMessage, now: Instant) -> Vec<Outbound> {
        let (id, out) = match msg {
            ClientMessage::Hello { .. } => {
                return vec![Outbound {
                    to: pid,
                    msg: ServerMessage::Welcome {
                        protocol: PROTOCOL_VERSION,
                    },
                }]
            }
            ClientMessage::CreateGame { config, seat } => {
                let id = SessionId(self.next_session);
                let mut session = match Session::new(id, config, self.choice_timeout) {
                    Ok(s) => s,
                    Err(e) => return error(pid, ErrorCode::BadConfig, e.to_string()),
                };
                self.next_session += 1;
                self.detach(pid);
                let out = session.join(pid, Some(seat), None, now);
                self.sessions.insert(id, session);
                self.attached.insert(pid, id);
                (id, out)
            }
            ClientMessage::Join { session, seat, token } => {
                if !self.sessions.contains_key(&session) {
                    return error(pid, ErrorCode::NoSuchSession, format!("no session {session}"));
                }
                if self.attached.get(&pid) != Some(&session) {
                    self.detach(pid);
                }
                let s = self.sessions.get_mut(&session).expect("checked above");
                let out = s.join(pid, seat, token, now);
                if s.has_participant(pid) {
                    self.attached.insert(pid, session);
                }
                (session, out)
            }
            ClientMessage::MovePlaced { mv } => {
                let Some(s) = self.attached_session(pid) else {
                    return error(pid, ErrorCode::NotJoined, "join a session first");
                };
                (s.id(), s.play(pid, mv.into(), now))
            }
            ClientMessage::ChoiceMade { keep } => {
                let Some(s) = self.attached_session(pid) else {
                    return error(pid, ErrorCode::NotJoined, "join a session first");
                };
                (s.id(), s.choose(pid, keep, now))
            }
        };
        self.persist(id);
        out
    }

    fn attached_session(&mut self, pid: ParticipantId) -> Option<&mut Session> {
        let id = self.attached.get(&pid)?;
        self.sessions.get_mut(id)
    }

    fn detach(&mut self, pid: ParticipantId) {
        if let Some(id) = self.attached.remove(&pid) {
            if let Some(s) = self.sessions.get_mut(&id) {
                s.leave(pid);
            }
        }
    }

    pub fn disconnect(&mut self, pid: ParticipantId) {
        self.detach(pid);
    }

    /// Abandons sessions whose outstanding choice has timed out.
    pub fn tick(&mut self, now: Instant) -> Vec<Outbound> {
        let mut out = Vec::new();
        let ids: Vec<SessionId> = self.sessions.keys().copied().collect();
        for id in ids {
            let s = self.sessions.get_mut(&id).expect("listed above");
            let expired = s.expire(now);
            if !expired.is_empty() {
                out.extend(expired);
                self.persist(id);
            }
        }
        out
    }

    fn persist(&mut self, id: SessionId) {
        let Some(s) = self.sessions.get_mut(&id) else {
            return;
        };
        let entries = s.take_journal();
        let Some(store) = &self.store else {
            return;
        };
        if entries.is_empty() {
            return;
        }
        let mut result = store.append(id, &entries);
        if result.is_ok() && s.phase() == Phase::Over {
            result = store.write_record(id, &s.record_text());
        }
        if let Err(e) = result {
            eprintln!("journal for session {id}: {e}");
        }
    }
}

fn error(to: ParticipantId, code: ErrorCode, detail: impl Into<String>) -> Vec<Outbound> {
    vec![Outbound {
        to,
        msg: ServerMessage::error(code, detail),
    }]
}
