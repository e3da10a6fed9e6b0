//! Delimited edge-list reader.

use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MalformedRow {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub edges: Vec<(String, String, f64)>,
    pub header: Option<Vec<String>>,
    pub malformed: Vec<MalformedRow>,
}

fn detect_delimiter(text: &str) -> std::result::Result<u8, String> {
    let tab = text.lines().any(|l| l.contains('\t'));
    let comma = text.lines().any(|l| l.contains(','));
    match (tab, comma) {
        (true, true) => Err("ambiguous delimiter: both tabs and commas present".into()),
        (true, false) => Ok(b'\t'),
        _ => Ok(b','),
    }
}

fn parse_weight(field: &str) -> std::result::Result<f64, String> {
    let w: f64 = field
        .parse()
        .map_err(|_| format!("weight {field:?} is not a number"))?;
    if !w.is_finite() || w < 0.0 {
        return Err(format!("weight {field:?} must be finite and non-negative"));
    }
    Ok(w)
}

/// Parses `source, target[, weight]` rows; a missing weight means 1.
///
/// The delimiter is a comma or a tab, whichever occurs. The first row is a
/// header when its third field is not numeric. Bad rows are collected rather
/// than aborting the parse.
pub fn parse_edge_text(text: &str) -> std::result::Result<EdgeList, String> {
    let delimiter = detect_delimiter(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = EdgeList {
        edges: Vec::new(),
        header: None,
        malformed: Vec::new(),
    };
    let mut first = true;
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                out.malformed.push(MalformedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().all(str::is_empty) {
            continue;
        }
        if std::mem::take(&mut first) && row.len() >= 3 && row[2].parse::<f64>().is_err() {
            out.header = Some(row.iter().map(str::to_owned).collect());
            continue;
        }
        let parsed = match row.len() {
            2 | 3 if row[0].is_empty() || row[1].is_empty() => Err("empty node id".to_owned()),
            2 => Ok(1.0),
            3 => parse_weight(&row[2]),
            n => Err(format!("expected 2 or 3 fields, found {n}")),
        };
        match parsed {
            Ok(w) => out.edges.push((row[0].to_owned(), row[1].to_owned(), w)),
            Err(reason) => out.malformed.push(MalformedRow { line, reason }),
        }
    }
    Ok(out)
}

/// Reads an edge list from disk. Malformed rows abort unless `lenient`.
pub fn parse_edge_list(path: &Path, lenient: bool) -> Result<EdgeList> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let data = |message: String| CliError::Data {
        path: path.to_owned(),
        message,
    };
    let list = parse_edge_text(&text).map_err(data)?;
    if let (false, Some(first)) = (lenient, list.malformed.first()) {
        return Err(CliError::Malformed {
            path: path.to_owned(),
            count: list.malformed.len(),
            first_line: first.line,
            first_reason: first.reason.clone(),
        });
    }
    if list.edges.is_empty() {
        return Err(data("no valid edge rows".into()));
    }
    Ok(list)
}
