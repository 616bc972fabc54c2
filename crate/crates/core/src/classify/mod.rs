//! Post labels, gold-label construction, agreement and classifier metrics.
//!
//! Labels follow the annotation scheme `0 = deflation`, `1 = neither`,
//! `2 = inflation`. Scores used for index construction are `label - 1`.

mod agreement;
mod backend;
mod lexicon;
mod metrics;

pub use agreement::{krippendorff_alpha, AlphaMetric, AlphaResult, AnnotationSet};
pub use backend::{
    classify_batch, parse_label_reply, BackendError, BatchOutcome, ClassifierBackend,
    HttpTransport, LabelFileBackend, RemoteBackend, RemoteConfig, Transport, PROMPT,
};
pub use lexicon::{lexicon_compound, Lexicon};
pub use metrics::{evaluate, EvalMetrics};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PostRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Label(u8);

impl Label {
    pub const DEFLATION: Label = Label(0);
    pub const NEITHER: Label = Label(1);
    pub const INFLATION: Label = Label(2);
    pub const ALL: [Label; 3] = [Label::DEFLATION, Label::NEITHER, Label::INFLATION];

    pub fn new(value: u8) -> Result<Self, ClassifyError> {
        if value <= 2 {
            Ok(Label(value))
        } else {
            Err(ClassifyError::InvalidLabel(value.to_string()))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Index score in {-1, 0, 1}.
    pub fn score(self) -> i8 {
        self.0 as i8 - 1
    }
}

impl TryFrom<u8> for Label {
    type Error = ClassifyError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Label::new(v)
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A post with its label. `score == label - 1` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScoredPostRecord", into = "ScoredPostRecord")]
pub struct ScoredPost {
    pub post: PostRecord,
    label: Label,
    /// Set when the backend could not label the post and the neutral label
    /// was substituted.
    pub failed: bool,
}

impl ScoredPost {
    pub fn new(post: PostRecord, label: Label) -> Self {
        Self {
            post,
            label,
            failed: false,
        }
    }

    pub fn failed(post: PostRecord) -> Self {
        Self {
            post,
            label: Label::NEITHER,
            failed: true,
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn score(&self) -> i8 {
        self.label.score()
    }
}

// On-disk form: the input record plus label, score and failure flag.
#[derive(Serialize, Deserialize)]
struct ScoredPostRecord {
    #[serde(flatten)]
    post: PostRecord,
    label: Label,
    score: i8,
    #[serde(default)]
    failed: bool,
}

impl TryFrom<ScoredPostRecord> for ScoredPost {
    type Error = ClassifyError;
    fn try_from(r: ScoredPostRecord) -> Result<Self, Self::Error> {
        if r.score != r.label.score() {
            return Err(ClassifyError::ScoreMismatch {
                id: r.post.id,
                label: r.label.value(),
                score: r.score,
            });
        }
        Ok(ScoredPost {
            post: r.post,
            label: r.label,
            failed: r.failed,
        })
    }
}

impl From<ScoredPost> for ScoredPostRecord {
    fn from(s: ScoredPost) -> Self {
        ScoredPostRecord {
            score: s.score(),
            post: s.post,
            label: s.label,
            failed: s.failed,
        }
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("invalid label {0:?}; expected 0, 1 or 2")]
    InvalidLabel(String),
    #[error("post {id}: score {score} does not match label {label}")]
    ScoreMismatch { id: String, label: u8, score: i8 },
    #[error("majority vote needs exactly 3 ratings, got {0}")]
    VoteArity(usize),
    #[error("alpha needs at least two items and at least one item with two ratings")]
    InsufficientRatings,
    #[error("predicted has {predicted} labels but gold has {gold}")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("cannot evaluate an empty label set")]
    Empty,
    #[error("backend failed on all {posts} posts; first error: {first}")]
    BackendUnreachable { posts: usize, first: BackendError },
    #[error("label file line {line}: {message}")]
    LabelFile { line: usize, message: String },
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Gold label from three ratings: the label held by at least two raters,
/// otherwise `NEITHER`.
pub fn majority_vote(ratings: &[Label]) -> Result<Label, ClassifyError> {
    let [a, b, c] = ratings else {
        return Err(ClassifyError::VoteArity(ratings.len()));
    };
    Ok(if a == b || a == c {
        *a
    } else if b == c {
        *b
    } else {
        Label::NEITHER
    })
}
