//! TCP transport: 4-byte big-endian length prefix, then a UTF-8 JSON body.

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use bytes::Bytes;
use futures::{SinkExt, StreamExt};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::mpsc;
use tokio_util::codec::{Framed, LengthDelimitedCodec};

use crate::hub::Hub;
use crate::protocol::{ClientMessage, ErrorCode, ServerMessage};
use crate::session::{Outbound, ParticipantId};

pub const MAX_FRAME: usize = 1 << 20;

pub fn codec() -> LengthDelimitedCodec {
    LengthDelimitedCodec::builder()
        .length_field_length(4)
        .big_endian()
        .max_frame_length(MAX_FRAME)
        .new_codec()
}

pub fn encode<T: Serialize>(msg: &T) -> Bytes {
    Bytes::from(serde_json::to_vec(msg).expect("protocol types serialize"))
}

pub fn decode<T: DeserializeOwned>(frame: &[u8]) -> Result<T, serde_json::Error> {
    serde_json::from_slice(frame)
}

type Outboxes = Mutex<HashMap<ParticipantId, mpsc::UnboundedSender<ServerMessage>>>;

struct Shared {
    hub: Mutex<Hub>,
    outboxes: Outboxes,
    next_participant: AtomicU64,
}

impl Shared {
    fn deliver(&self, out: Vec<Outbound>) {
        let boxes = self.outboxes.lock().expect("outbox lock");
        for o in out {
            if let Some(tx) = boxes.get(&o.to) {
                let _ = tx.send(o.msg);
            }
        }
    }
}

/// Serves `hub` on `listener` until the listener fails.
pub async fn serve(listener: TcpListener, hub: Hub) -> io::Result<()> {
    let shared = Arc::new(Shared {
        hub: Mutex::new(hub),
        outboxes: Mutex::new(HashMap::new()),
        next_participant: AtomicU64::new(1),
    });
    let ticker = Arc::clone(&shared);
    tokio::spawn(async move {
        let mut every = tokio::time::interval(Duration::from_secs(30));
        loop {
            every.tick().await;
            let out = ticker.hub.lock().expect("hub lock").tick(Instant::now());
            ticker.deliver(out);
        }
    });
    loop {
        let (stream, _) = listener.accept().await?;
        let shared = Arc::clone(&shared);
        tokio::spawn(async move {
            let _ = connection(shared, stream).await;
        });
    }
}

async fn connection(shared: Arc<Shared>, stream: TcpStream) -> io::Result<()> {
    let pid = ParticipantId(shared.next_participant.fetch_add(1, Ordering::Relaxed));
    let (tx, mut rx) = mpsc::unbounded_channel();
    shared.outboxes.lock().expect("outbox lock").insert(pid, tx.clone());
    let (mut sink, mut frames) = Framed::new(stream, codec()).split();
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            if sink.send(encode(&msg)).await.is_err() {
                break;
            }
        }
    });
    let result = async {
        while let Some(frame) = frames.next().await {
            let frame = frame?;
            let out = match decode::<ClientMessage>(&frame) {
                Ok(msg) => shared.hub.lock().expect("hub lock").handle(pid, msg, Instant::now()),
                Err(e) => vec![Outbound {
                    to: pid,
                    msg: ServerMessage::error(ErrorCode::Malformed, e.to_string()),
                }],
            };
            shared.deliver(out);
        }
        Ok(())
    }
    .await;
    shared.hub.lock().expect("hub lock").disconnect(pid);
    shared.outboxes.lock().expect("outbox lock").remove(&pid);
    drop(tx);
    let _ = writer.await;
    result
}

/// Binds `addr` and serves in the background, returning the bound address.
pub async fn spawn(addr: impl ToSocketAddrs, hub: Hub) -> io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(serve(listener, hub));
    Ok(local)
}

/// A protocol client over one connection.
pub struct Client {
    framed: Framed<TcpStream, LengthDelimitedCodec>,
}

impl Client {
    pub async fn connect(addr: impl ToSocketAddrs) -> io::Result<Client> {
        let stream = TcpStream::connect(addr).await?;
        Ok(Client {
            framed: Framed::new(stream, codec()),
        })
    }

    pub async fn send(&mut self, msg: &ClientMessage) -> io::Result<()> {
        self.framed.send(encode(msg)).await
    }

    /// The next server message; `None` once the server closes the connection.
    pub async fn recv(&mut self) -> io::Result<Option<ServerMessage>> {
        match self.framed.next().await {
            None => Ok(None),
            Some(frame) => {
                let frame = frame?;
                decode(&frame)
                    .map(Some)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
            }
        }
    }
}
