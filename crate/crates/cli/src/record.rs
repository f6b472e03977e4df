//! The per-query match record: the one-line JSON format `retrieve` writes
//! and `metrics`/`prompts` read back.
//!
//! Writing is hand-formatted — fixed field order, scores always printed
//! with six decimals — so identical runs are byte-identical; the JSON
//! library is used only where escaping matters (string values) and for
//! parsing.

use std::io::Write;

use serde::Deserialize;
use tmr_core::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
pub struct MatchRow {
    pub uid: u32,
    pub source: String,
    pub target: String,
    pub base_score: f64,
    pub adjusted_score: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct QueryRecord {
    pub query: String,
    pub domain: Option<String>,
    pub matches: Vec<MatchRow>,
    pub exhausted: bool,
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("plain string serialization cannot fail")
}

impl QueryRecord {
    pub fn write_jsonl(&self, out: &mut impl Write) -> std::io::Result<()> {
        write!(out, "{{\"query\":{}", json_str(&self.query))?;
        match &self.domain {
            Some(d) => write!(out, ",\"domain\":{}", json_str(d))?,
            None => write!(out, ",\"domain\":null")?,
        }
        write!(out, ",\"matches\":[")?;
        for (i, m) in self.matches.iter().enumerate() {
            if i > 0 {
                write!(out, ",")?;
            }
            write!(
                out,
                "{{\"uid\":{},\"source\":{},\"target\":{},\"base_score\":{:.6},\"adjusted_score\":{:.6}}}",
                m.uid,
                json_str(&m.source),
                json_str(&m.target),
                m.base_score,
                m.adjusted_score,
            )?;
        }
        writeln!(out, "],\"exhausted\":{}}}", self.exhausted)
    }
}

/// Load a whole retrieval run. Line numbers in errors are 1-based.
pub fn load_records(path: &std::path::Path) -> Result<Vec<QueryRecord>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    raw.lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| {
                Error::CorpusShape(format!("{}: line {}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}
