//! Query-file loading: one query per line, with an optional trailing
//! `<TAB>domain` label used by the in-domain / out-of-domain policies.

use std::path::Path;

use tmr_core::{Error, Result};

pub struct QueryLine {
    pub text: String,
    pub domain: Option<String>,
}

pub fn load_queries(path: &Path) -> Result<Vec<QueryLine>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(raw
        .lines()
        .map(|line| match line.split_once('\t') {
            Some((text, domain)) => QueryLine {
                text: text.to_string(),
                domain: Some(domain.to_string()),
            },
            None => QueryLine {
                text: line.to_string(),
                domain: None,
            },
        })
        .collect())
}
