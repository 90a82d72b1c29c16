use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bt::{Effect, NodeStatus, UserEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Completed,
    Aborted,
    /// Ended without the questionnaire being answered.
    Unevaluated,
}

impl SessionStatus {
    pub fn is_open(self) -> bool {
        self == SessionStatus::Active
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::Active => "active",
            SessionStatus::Completed => "completed",
            SessionStatus::Aborted => "aborted",
            SessionStatus::Unevaluated => "unevaluated",
        }
    }
}

/// A marked node that reached a terminal status in reply to a user turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    /// The node's marks joined by `→`, e.g. `j→k`.
    pub marks: String,
    pub node_id: String,
    pub status: NodeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "direction", rename_all = "snake_case")]
pub enum Entry {
    Bot {
        node_id: String,
        effect: Effect,
    },
    User {
        /// The node the event was delivered to.
        node_id: String,
        event: UserEvent,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rows: Vec<Row>,
        status: SessionStatus,
    },
}

impl Entry {
    pub fn node_id(&self) -> &str {
        match self {
            Entry::Bot { node_id, .. } | Entry::User { node_id, .. } => node_id,
        }
    }

    pub fn is_user(&self) -> bool {
        matches!(self, Entry::User { .. })
    }
}

/// Ordered record of one session, with questionnaire answers by question id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub spec_id: String,
    pub entries: Vec<Entry>,
    #[serde(default)]
    pub responses: BTreeMap<String, usize>,
}

impl Transcript {
    pub fn new(session_id: impl Into<String>, spec_id: impl Into<String>) -> Self {
        Transcript {
            session_id: session_id.into(),
            spec_id: spec_id.into(),
            entries: Vec::new(),
            responses: BTreeMap::new(),
        }
    }

    pub fn user_events(&self) -> impl Iterator<Item = &UserEvent> {
        self.entries.iter().filter_map(|e| match e {
            Entry::User { event, .. } => Some(event),
            Entry::Bot { .. } => None,
        })
    }

    pub fn bot_entries(&self) -> impl Iterator<Item = (&str, &Effect)> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Bot { node_id, effect } => Some((node_id.as_str(), effect)),
            Entry::User { .. } => None,
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.entries.iter().flat_map(|e| match e {
            Entry::User { rows, .. } => rows.as_slice(),
            Entry::Bot { .. } => &[],
        })
    }

    /// Encodes as JSON lines: a header, one line per entry, one per response.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("transcript lines serialize"));
            out.push('\n');
        };
        push(&Line::Header { session_id: self.session_id.clone(), spec_id: self.spec_id.clone() });
        for e in &self.entries {
            push(&Line::Entry(e.clone()));
        }
        for (q, i) in &self.responses {
            push(&Line::Response { question_id: q.clone(), option_index: *i });
        }
        out
    }

    pub fn from_lines(input: impl BufRead) -> io::Result<Transcript> {
        let mut transcript: Option<Transcript> = None;
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(&line).map_err(io::Error::other)?;
            match (parsed, transcript.as_mut()) {
                (Line::Header { session_id, spec_id }, None) => {
                    transcript = Some(Transcript::new(session_id, spec_id));
                }
                (Line::Entry(e), Some(t)) => t.entries.push(e),
                (Line::Response { question_id, option_index }, Some(t)) => {
                    t.responses.insert(question_id, option_index);
                }
                _ => return Err(io::Error::other("transcript header missing or repeated")),
            }
        }
        transcript.ok_or_else(|| io::Error::other("empty transcript file"))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header { session_id: String, spec_id: String },
    Entry(Entry),
    Response { question_id: String, option_index: usize },
}

/// One line of the store's index file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub session_id: String,
    pub spec_id: String,
    pub created_at: u64,
}

/// Transcript files, one per session, plus an index of all sessions.
#[derive(Debug, Clone)]
pub struct TranscriptStore {
    dir: PathBuf,
}

impl TranscriptStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TranscriptStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.jsonl"))
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join("index.jsonl")
    }

    pub fn register(&self, record: &IndexRecord) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut f = OpenOptions::new().create(true).append(true).open(self.index_path())?;
        let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
        line.push('\n');
        f.write_all(line.as_bytes())
    }

    /// Rewrites the session's file with the full transcript.
    pub fn save(&self, transcript: &Transcript) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(&transcript.session_id);
        let tmp = path.with_extension("jsonl.tmp");
        fs::write(&tmp, transcript.to_lines())?;
        fs::rename(tmp, path)
    }

    pub fn load(&self, session_id: &str) -> io::Result<Transcript> {
        Transcript::from_lines(BufReader::new(fs::File::open(self.path_for(session_id))?))
    }

    pub fn index(&self) -> io::Result<Vec<IndexRecord>> {
        let file = match fs::File::open(self.index_path()) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        BufReader::new(file)
            .lines()
            .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
            .map(|l| serde_json::from_str(&l?).map_err(io::Error::other))
            .collect()
    }

    /// Every stored transcript for `spec_id`, in index order.
    pub fn load_spec(&self, spec_id: &str) -> io::Result<Vec<Transcript>> {
        self.index()?.into_iter().filter(|r| r.spec_id == spec_id).map(|r| self.load(&r.session_id)).collect()
    }
}
