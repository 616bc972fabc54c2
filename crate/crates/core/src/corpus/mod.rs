//! Post ingestion, keyword filtering, monthly bucketing and sampling.

mod bucket;
mod keywords;
mod parse;

pub use bucket::{
    bucket_by_month, filter_bucket, sample_month, Bucketed, MonthBucket, SamplingCaps,
};
pub use keywords::{
    filter_price_related, tokenize_lower, FilterReport, KeywordConfig, KeywordMatcher,
};
pub use parse::{parse_posts, FieldMap, ParsedPosts};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::month::Month;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostKind {
    Submission,
    Comment,
}

impl PostKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PostKind::Submission => "submission",
            PostKind::Comment => "comment",
        }
    }
}

/// One timestamped post.
///
/// For submissions `text` holds the title and body joined by a newline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    #[serde(rename = "subreddit")]
    pub community: String,
    pub kind: PostKind,
    #[serde(rename = "created_utc")]
    pub created: i64,
    pub text: String,
}

impl PostRecord {
    pub fn month(&self) -> Month {
        Month::from_epoch(self.created).expect("created validated at parse time")
    }
}

/// Lowercases a community name and strips a leading `r/`.
pub fn normalize_community(raw: &str) -> String {
    let lower = raw.trim().to_lowercase();
    lower
        .strip_prefix("/r/")
        .or_else(|| lower.strip_prefix("r/"))
        .unwrap_or(&lower)
        .to_string()
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read post stream: {0}")]
    Io(#[from] std::io::Error),
    #[error("{malformed} of {total} lines malformed (first at line {first_line}: {first_error}); check the field mapping")]
    TooManyMalformed {
        malformed: usize,
        total: usize,
        first_line: usize,
        first_error: String,
    },
    #[error("keyword config line {line}: {message}")]
    KeywordConfig { line: usize, message: String },
}
