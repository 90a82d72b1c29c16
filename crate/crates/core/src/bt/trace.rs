use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::engine::TickResult;
use super::node::NodeStatus;

/// One visited node in one tick. Written one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub node: String,
    pub status: NodeStatus,
}

pub fn records_for(tick: u64, result: &TickResult) -> impl Iterator<Item = TraceRecord> + '_ {
    result.visited.iter().map(move |(node, status)| TraceRecord { tick, node: node.clone(), status: *status })
}

pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_trace<R: BufRead>(input: R) -> io::Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(out)
}
