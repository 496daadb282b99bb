//! The run trace: one JSON record per observable step, written as JSONL.
//!
//! Records are the simulator's only output channel, so they carry enough
//! to replay a run by eye: a global sequence number, the acting agent and
//! its local date, the action with its parameters and result, and a hash
//! of the whole ledger state afterwards. Two runs agree iff their traces
//! agree byte for byte.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One observable step of a run.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seq: u64,
    /// The acting agent's local date when the step completed; agentless
    /// steps report 0.
    pub day: u64,
    /// Acting agent, or "*" for steps not owned by one agent.
    pub actor: String,
    pub action: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub params: Value,
    pub result: Value,
    /// XOR fold of per-ledger SHA-256 digests after the step, hex encoded.
    pub world_hash: String,
}

pub fn write_record(w: &mut impl Write, record: &TraceRecord) -> io::Result<()> {
    serde_json::to_writer(&mut *w, record)?;
    w.write_all(b"\n")
}

/// Read every record of a JSONL trace, rejecting blank or malformed lines.
pub fn read_trace(r: impl BufRead) -> io::Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: blank line in trace", n + 1),
            ));
        }
        let record: TraceRecord = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Where two traces first disagree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TraceDiff {
    Identical,
    /// Record `index` differs; the named fields disagree.
    DiffersAt {
        index: usize,
        fields: Vec<String>,
        left: Box<TraceRecord>,
        right: Box<TraceRecord>,
    },
    /// One trace ends while the other still has records.
    LengthMismatch {
        left: usize,
        right: usize,
    },
}

/// Compare two traces structurally and report the first divergence.
pub fn diff_traces(left: &[TraceRecord], right: &[TraceRecord]) -> TraceDiff {
    for (index, (l, r)) in left.iter().zip(right.iter()).enumerate() {
        if l == r {
            continue;
        }
        let mut fields = Vec::new();
        if l.seq != r.seq {
            fields.push("seq".to_string());
        }
        if l.day != r.day {
            fields.push("day".to_string());
        }
        if l.actor != r.actor {
            fields.push("actor".to_string());
        }
        if l.action != r.action {
            fields.push("action".to_string());
        }
        if l.label != r.label {
            fields.push("label".to_string());
        }
        if l.params != r.params {
            fields.push("params".to_string());
        }
        if l.result != r.result {
            fields.push("result".to_string());
        }
        if l.world_hash != r.world_hash {
            fields.push("world_hash".to_string());
        }
        return TraceDiff::DiffersAt {
            index,
            fields,
            left: Box::new(l.clone()),
            right: Box::new(r.clone()),
        };
    }
    if left.len() != right.len() {
        return TraceDiff::LengthMismatch {
            left: left.len(),
            right: right.len(),
        };
    }
    TraceDiff::Identical
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rec(seq: u64, action: &str) -> TraceRecord {
        TraceRecord {
            seq,
            day: 0,
            actor: "alice".into(),
            action: action.into(),
            label: None,
            params: json!({}),
            result: json!({}),
            world_hash: "00".repeat(32),
        }
    }

    #[test]
    fn roundtrips_through_jsonl() {
        let records = vec![rec(0, "mint"), rec(1, "propose")];
        let mut buf = Vec::new();
        for r in &records {
            write_record(&mut buf, r).unwrap();
        }
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn diff_pinpoints_first_divergence() {
        let a = vec![rec(0, "mint"), rec(1, "propose"), rec(2, "settle")];
        let mut b = a.clone();
        b[1].action = "accept".into();
        match diff_traces(&a, &b) {
            TraceDiff::DiffersAt { index, fields, .. } => {
                assert_eq!(index, 1);
                assert_eq!(fields, vec!["action".to_string()]);
            }
            other => panic!("unexpected diff: {other:?}"),
        }
        assert_eq!(diff_traces(&a, &a), TraceDiff::Identical);
        match diff_traces(&a, &a[..2]) {
            TraceDiff::LengthMismatch { left: 3, right: 2 } => {}
            other => panic!("unexpected diff: {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(read_trace(&b"not json\n"[..]).is_err());
        assert!(read_trace(&b"\n"[..]).is_err());
    }
}
