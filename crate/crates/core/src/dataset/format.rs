//! Plain-text sparse dataset format.
//!
//! ```text
//! features word1 word2
//! 1
//! 1 1
//! 0 0
//! ```
//!
//! The first line declares the feature names. Every following line is a
//! label (`0` or `1`) followed by the strictly increasing 0-based indices of
//! the features present in that row. Tokens are separated by single spaces,
//! lines by `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Dataset, Row};
use crate::error::{Error, Result};

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, &path.to_string_lossy())
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_dataset(d)).map_err(|e| Error::io(path, e))
}

pub fn render_dataset(d: &Dataset) -> String {
    let mut out = String::from("features");
    for name in d.features() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for row in d.rows() {
        out.push(if row.target { '1' } else { '0' });
        for i in &row.present {
            write!(out, " {i}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the text of a dataset file; `id` becomes the dataset id and is used
/// in error messages.
pub fn parse_dataset(text: &str, id: &str) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: id.to_string(),
        line,
        message,
    };

    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .filter(|(_, l)| !l.is_empty())
        .ok_or_else(|| err(1, "missing `features` header".into()))?;
    let mut tokens = header.split(' ');
    if tokens.next() != Some("features") {
        return Err(err(1, "header must start with `features`".into()));
    }
    let features: Vec<String> = tokens.map(str::to_string).collect();
    if let Some(bad) = features
        .iter()
        .find(|t| t.is_empty() || t.contains('\r') || t.contains('\t'))
    {
        return Err(err(1, format!("malformed feature name {bad:?}")));
    }
    let mut seen = std::collections::HashSet::new();
    for name in &features {
        if !seen.insert(name.as_str()) {
            return Err(err(1, format!("duplicate feature name `{name}`")));
        }
    }

    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let mut tokens = line.split(' ');
        let target = match tokens.next() {
            Some("0") => false,
            Some("1") => true,
            Some(other) => return Err(err(lineno, format!("label must be 0 or 1, got {other:?}"))),
            None => unreachable!("split yields at least one token"),
        };
        let mut present = Vec::new();
        for tok in tokens {
            let i: u32 = tok
                .parse()
                .map_err(|_| err(lineno, format!("bad feature index {tok:?}")))?;
            if i as usize >= features.len() {
                return Err(err(
                    lineno,
                    format!("index {i} out of range for {} features", features.len()),
                ));
            }
            if present.last().is_some_and(|&p| p >= i) {
                return Err(err(lineno, "indices must be strictly increasing".into()));
            }
            present.push(i);
        }
        rows.push(Row::new(present, target));
    }
    if rows.is_empty() {
        return Err(err(1, "dataset has no rows".into()));
    }
    Dataset::new(id, features, rows).map_err(|e| err(1, e.to_string()))
}
