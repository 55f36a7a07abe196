//! Bit-stable artifact writers: CSV for per-scale tables, JSON for scalar
//! summaries. Floats carry 17 significant digits so rereading an artifact
//! reproduces the exact f64.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, TurbError};

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_f64(raw: &str) -> Result<f64> {
    raw.trim()
        .parse()
        .map_err(|_| TurbError::InvalidConfig(format!("`{}` is not a number", raw.trim())))
}

/// Renders a CSV table: `# key = value` comment lines, a header, then rows
/// of 17-digit floats.
pub fn render_csv(comments: &[(&str, String)], header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for (k, v) in comments {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn write_csv(
    path: &Path,
    comments: &[(&str, String)],
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    std::fs::write(path, render_csv(comments, header, rows))?;
    Ok(())
}

/// A parsed CSV artifact: comment keys, column names, numeric rows.
pub struct CsvTable {
    pub comments: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut comments = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    comments.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            match &header {
                None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
                Some(h) => {
                    let row: Result<Vec<f64>> = line.split(',').map(parse_f64).collect();
                    let row = row?;
                    if row.len() != h.len() {
                        return Err(TurbError::InvalidConfig(format!(
                            "row has {} cells, header has {}",
                            row.len(),
                            h.len()
                        )));
                    }
                    rows.push(row);
                }
            }
        }
        let header = header
            .ok_or_else(|| TurbError::InvalidConfig("CSV file has no header line".into()))?;
        Ok(CsvTable {
            comments,
            header,
            rows,
        })
    }

    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TurbError::InvalidConfig(format!("CSV has no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// JSON value with insertion-ordered object keys; non-finite numbers render
/// as null.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    UInt(u64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

/// Object entry with a borrowed key, the common case.
pub fn kv(key: &str, value: Json) -> (String, Json) {
    (key.to_string(), value)
}

impl Json {
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, depth: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::UInt(u) => {
                let _ = write!(out, "{u}");
            }
            Json::Num(v) => {
                if v.is_finite() {
                    let _ = write!(out, "{v:.16e}");
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        '\r' => out.push_str("\\r"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    indent(out, depth + 1);
                    item.write(out, depth + 1);
                }
                out.push('\n');
                indent(out, depth);
                out.push(']');
            }
            Json::Obj(pairs) => {
                if pairs.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in pairs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    indent(out, depth + 1);
                    let _ = write!(out, "\"{k}\": ");
                    v.write(out, depth + 1);
                }
                out.push('\n');
                indent(out, depth);
                out.push('}');
            }
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub fn write_json(path: &Path, value: &Json) -> Result<()> {
    std::fs::write(path, value.render())?;
    Ok(())
}

/// `(value, stderr)` pair as a two-key object; infinite stderr (too few
/// samples) renders as null.
pub fn json_value_err(value: f64, stderr: f64) -> Json {
    Json::Obj(vec![kv("value", Json::Num(value)), kv("stderr", Json::Num(stderr))])
}
