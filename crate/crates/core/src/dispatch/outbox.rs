use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Channel, DispatchError, Payload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryStatus {
    Queued,
    Sent,
    Failed,
}

/// One rendered message on one channel and how its delivery went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutboxRecord {
    pub id: String,
    pub request_id: u64,
    pub channel: Channel,
    pub label: Arc<str>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    pub payload: Option<Payload>,
    pub status: DeliveryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub attempts: u32,
    /// Wall-clock milliseconds since the Unix epoch.
    pub t_ms: u64,
}

impl OutboxRecord {
    /// Only `queued -> sent` and `queued -> failed` are allowed.
    pub fn finish(&mut self, status: DeliveryStatus, reason: Option<String>) {
        debug_assert_eq!(self.status, DeliveryStatus::Queued);
        debug_assert_ne!(status, DeliveryStatus::Queued);
        self.status = status;
        self.reason = reason;
    }
}

/// Append-only newline-delimited JSON file. Appends are serialized.
#[derive(Debug)]
pub struct Outbox {
    path: PathBuf,
    file: Mutex<File>,
}

impl Outbox {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, DispatchError> {
        let path = path.into();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| DispatchError::Outbox {
                path: path.clone(),
                source,
            })?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|source| DispatchError::Outbox {
                path: path.clone(),
                source,
            })?;
        Ok(Outbox {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &OutboxRecord) -> io::Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())?;
        file.flush()
    }

    pub fn read(path: impl AsRef<Path>) -> io::Result<Vec<OutboxRecord>> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        BufReader::new(file)
            .lines()
            .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
            .map(|l| serde_json::from_str(&l?).map_err(io::Error::from))
            .collect()
    }

    pub fn records(&self) -> io::Result<Vec<OutboxRecord>> {
        Outbox::read(&self.path)
    }
}
