use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{normalize_community, CorpusError, PostKind, PostRecord};

/// Maps source field names onto [`PostRecord`] fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub id: String,
    pub community: String,
    pub created: String,
    /// Explicit kind field. When absent from a record, the kind is inferred
    /// from the presence of `submission_marker`.
    pub kind: String,
    pub submission_marker: String,
    /// Text fields concatenated (newline-separated) in this order.
    pub text_fields: Vec<String>,
}

impl Default for FieldMap {
    fn default() -> Self {
        Self {
            id: "id".into(),
            community: "subreddit".into(),
            created: "created_utc".into(),
            kind: "kind".into(),
            submission_marker: "title".into(),
            text_fields: vec![
                "title".into(),
                "selftext".into(),
                "body".into(),
                "text".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedPosts {
    pub records: Vec<PostRecord>,
    /// Non-blank lines seen.
    pub lines: usize,
    pub malformed: usize,
    pub duplicates: usize,
}

/// Parses one JSON object per line.
///
/// Blank lines are ignored. Malformed lines are skipped and counted; if more
/// than half of the non-blank lines are malformed the stream is rejected, since
/// that almost always means the field mapping is wrong.
pub fn parse_posts<R: BufRead>(reader: R, fields: &FieldMap) -> Result<ParsedPosts, CorpusError> {
    let mut out = ParsedPosts::default();
    let mut seen = HashSet::new();
    let mut first_error: Option<(usize, String)> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.lines += 1;
        match parse_line(&line, fields) {
            Ok(record) => {
                if seen.insert(record.id.clone()) {
                    out.records.push(record);
                } else {
                    out.duplicates += 1;
                }
            }
            Err(msg) => {
                out.malformed += 1;
                first_error.get_or_insert((lineno + 1, msg));
            }
        }
    }

    if out.malformed * 2 > out.lines {
        let (first_line, first_error) = first_error.unwrap_or_default();
        return Err(CorpusError::TooManyMalformed {
            malformed: out.malformed,
            total: out.lines,
            first_line,
            first_error,
        });
    }
    Ok(out)
}

fn parse_line(line: &str, fields: &FieldMap) -> Result<PostRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("record is not an object")?;

    let id = scalar_string(obj, &fields.id).ok_or_else(|| format!("missing {:?}", fields.id))?;
    if id.is_empty() {
        return Err("empty id".into());
    }
    let community = scalar_string(obj, &fields.community)
        .map(|c| normalize_community(&c))
        .filter(|c| !c.is_empty())
        .ok_or_else(|| format!("missing {:?}", fields.community))?;
    let created = timestamp(obj.get(&fields.created))
        .ok_or_else(|| format!("missing or invalid {:?}", fields.created))?;
    if created <= 0 {
        return Err(format!("non-positive timestamp {created}"));
    }

    let kind = match obj.get(&fields.kind).and_then(Value::as_str) {
        Some(k) => parse_kind(k).ok_or_else(|| format!("unknown kind {k:?}"))?,
        None if obj.contains_key(&fields.submission_marker) => PostKind::Submission,
        None => PostKind::Comment,
    };

    let text = fields
        .text_fields
        .iter()
        .filter_map(|f| obj.get(f).and_then(Value::as_str))
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    if text.is_empty() && kind == PostKind::Comment {
        return Err("comment without text".into());
    }

    Ok(PostRecord {
        id,
        community,
        kind,
        created,
        text,
    })
}

fn parse_kind(raw: &str) -> Option<PostKind> {
    match raw.to_ascii_lowercase().as_str() {
        "submission" | "t3" | "post" | "link" => Some(PostKind::Submission),
        "comment" | "t1" => Some(PostKind::Comment),
        _ => None,
    }
}

fn scalar_string(obj: &Map<String, Value>, key: &str) -> Option<String> {
    match obj.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

// Archive dumps store created_utc as an integer, a float, or a numeric string.
fn timestamp(v: Option<&Value>) -> Option<i64> {
    match v? {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        Value::String(s) => s
            .parse::<i64>()
            .ok()
            .or_else(|| s.parse::<f64>().ok().map(|f| f as i64)),
        _ => None,
    }
}
