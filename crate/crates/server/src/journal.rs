//! Append-only session journals, one JSON object per line, and the `.qgr`
//! record of every finished game.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use qgo_core::{CollapseEvent, Color, GameConfig};
use serde::{Deserialize, Serialize};

use crate::protocol::{SeatToken, SessionId, WireMove};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum JournalEntry {
    Created {
        session: SessionId,
        config: GameConfig,
    },
    Seat {
        seat: Color,
        token: SeatToken,
    },
    Move {
        number: u32,
        #[serde(rename = "move")]
        mv: WireMove,
        events: Vec<CollapseEvent>,
    },
    Finalized {
        events: Vec<CollapseEvent>,
    },
    Abandoned,
}

#[derive(Debug, Clone)]
pub struct JournalStore {
    dir: PathBuf,
}

impl JournalStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<JournalStore> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(JournalStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn journal_path(&self, id: SessionId) -> PathBuf {
        self.dir.join(format!("session-{id}.jsonl"))
    }

    pub fn record_path(&self, id: SessionId) -> PathBuf {
        self.dir.join(format!("session-{id}.qgr"))
    }

    pub fn append(&self, id: SessionId, entries: &[JournalEntry]) -> io::Result<()> {
        if entries.is_empty() {
            return Ok(());
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.journal_path(id))?;
        let mut buf = Vec::new();
        for e in entries {
            serde_json::to_writer(&mut buf, e)?;
            buf.push(b'\n');
        }
        file.write_all(&buf)?;
        file.sync_data()
    }

    pub fn write_record(&self, id: SessionId, text: &str) -> io::Result<()> {
        fs::write(self.record_path(id), text)
    }

    /// Every journal in the directory, by session id. A torn last line is
    /// dropped.
    pub fn load_all(&self) -> io::Result<Vec<(SessionId, Vec<JournalEntry>)>> {
        let mut out = Vec::new();
        for dirent in fs::read_dir(&self.dir)? {
            let path = dirent?.path();
            let Some(id) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix("session-")?.strip_suffix(".jsonl"))
                .and_then(|n| n.parse().ok())
            else {
                continue;
            };
            out.push((SessionId(id), read_entries(&path)?));
        }
        out.sort_by_key(|(id, _)| *id);
        Ok(out)
    }
}

fn read_entries(path: &Path) -> io::Result<Vec<JournalEntry>> {
    let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<Result<_, _>>()?;
    let mut entries = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(e) => entries.push(e),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), i + 1),
                ))
            }
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_round_trip_through_the_store() {
        let dir = tempfile::tempdir().unwrap();
        let store = JournalStore::open(dir.path()).unwrap();
        let id = SessionId(7);
        let entries = vec![
            JournalEntry::Created {
                session: id,
                config: GameConfig::new(9, 7.5, Default::default()),
            },
            JournalEntry::Seat {
                seat: Color::White,
                token: SeatToken("t".into()),
            },
            JournalEntry::Move {
                number: 1,
                mv: WireMove::Pass,
                events: Vec::new(),
            },
        ];
        store.append(id, &entries[..2]).unwrap();
        store.append(id, &entries[2..]).unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        assert_eq!(store.load_all().unwrap(), vec![(id, entries)]);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let store = JournalStore::open(dir.path()).unwrap();
        store.append(SessionId(1), &[JournalEntry::Abandoned]).unwrap();
        let mut f = OpenOptions::new()
            .append(true)
            .open(store.journal_path(SessionId(1)))
            .unwrap();
        f.write_all(b"{\"entry\":\"mo").unwrap();
        assert_eq!(store.load_all().unwrap()[0].1, vec![JournalEntry::Abandoned]);
    }
}
