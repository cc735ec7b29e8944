use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLogRecord {
    /// UTC, RFC 3339.
    pub timestamp: String,
    /// The request's query string exactly as received.
    pub query: String,
    pub itinerary_count: usize,
    pub compute_ms: f64,
    pub error: Option<String>,
}

/// Append-only JSON-lines log. Each record is written and flushed under one
/// lock, so concurrent lines never interleave.
#[derive(Debug)]
pub struct QueryLog {
    out: Mutex<BufWriter<File>>,
}

impl QueryLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            out: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn append(&self, record: &QueryLogRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        out.write_all(&line)?;
        out.flush()
    }
}
