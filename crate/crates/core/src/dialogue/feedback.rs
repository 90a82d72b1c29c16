use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A user question no configured need matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmetNeedRecord {
    pub session_id: String,
    pub question: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Append-only JSON-lines files, one per spec, under `dir`.
#[derive(Debug, Clone)]
pub struct FeedbackLog {
    dir: PathBuf,
}

impl FeedbackLog {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FeedbackLog { dir: dir.into() }
    }

    pub fn path_for(&self, spec_id: &str) -> PathBuf {
        self.dir.join(format!("{spec_id}.unmet.jsonl"))
    }

    pub fn append(&self, spec_id: &str, record: &UnmetNeedRecord) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut file = OpenOptions::new().create(true).append(true).open(self.path_for(spec_id))?;
        let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
        line.push('\n');
        file.write_all(line.as_bytes())
    }

    pub fn read(&self, spec_id: &str) -> io::Result<Vec<UnmetNeedRecord>> {
        read_lines(&self.path_for(spec_id))
    }
}

fn read_lines(path: &Path) -> io::Result<Vec<UnmetNeedRecord>> {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(io::Error::other)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let log = FeedbackLog::new(dir.path());
        assert!(log.read("loan").unwrap().is_empty());
        let r = UnmetNeedRecord {
            session_id: "s1".into(),
            question: "can I appeal this decision".into(),
            timestamp: 7,
        };
        log.append("loan", &r).unwrap();
        log.append("loan", &r).unwrap();
        assert_eq!(log.read("loan").unwrap(), [r.clone(), r]);
    }
}
