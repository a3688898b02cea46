//! Session server for live Quantum Go games.
//!
//! Clients exchange JSON messages in length-prefixed frames. Each game runs
//! as a [`Session`]: a synchronous state machine that turns one client
//! message into the messages owed to each participant. The [`Hub`] routes
//! messages to sessions and journals them; [`net`] puts it on a socket.

pub mod hub;
pub mod journal;
pub mod net;
pub mod protocol;
pub mod session;

pub use hub::{Hub, DEFAULT_CHOICE_TIMEOUT};
pub use journal::{JournalEntry, JournalStore};
pub use protocol::{ClientMessage, ErrorCode, Phase, ServerMessage, SessionId, StateSync, WireMove};
pub use session::{Outbound, ParticipantId, Session};
