//! Bigram TF-IDF weights and their shift between two periods.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::io::BufRead;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::classify::{Label, ScoredPost};
use crate::month::MonthRange;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").expect("valid pattern"));

#[derive(Debug, Error)]
pub enum LexshiftError {
    #[error("no documents to fit")]
    NoDocuments,
    #[error(
        "empty vocabulary: {docs} documents, {candidates} distinct bigrams, none with \
         document frequency in [{min_df}, {max_df}]"
    )]
    EmptyVocabulary {
        docs: usize,
        candidates: usize,
        min_df: usize,
        max_df: f64,
    },
    #[error("the {0} period has no documents")]
    EmptyPeriod(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tokens dropped before bigrams are formed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// The shipped English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Self::default().with(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn read<R: BufRead>(mut reader: R) -> Result<Self, LexshiftError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Ok(Self::parse(&text))
    }

    /// Adds words; they are lowercased and matched as whole tokens.
    pub fn with<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.words
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercases, removes URLs and apostrophes, splits on anything that is not
/// alphanumeric and drops stopwords.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let lower = text.to_lowercase();
    let no_urls = URL.replace_all(&lower, " ");
    let no_apostrophes: String = no_urls
        .chars()
        .filter(|&c| c != '\'' && c != '\u{2019}')
        .collect();
    no_apostrophes
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

/// Tokens of an inflation-labelled post; any other label yields nothing.
pub fn preprocess(post: &ScoredPost, stopwords: &Stopwords) -> Vec<String> {
    if post.label() != Label::INFLATION {
        return Vec::new();
    }
    tokenize(&post.post.text, stopwords)
}

/// Documents from inflation-labelled posts whose month falls in `range`,
/// optionally restricted to one community. Posts left with no tokens are
/// skipped.
pub fn period_docs(
    posts: &[ScoredPost],
    community: Option<&str>,
    range: MonthRange,
    stopwords: &Stopwords,
) -> Vec<Vec<String>> {
    posts
        .iter()
        .filter(|p| community.is_none_or(|c| p.post.community == c))
        .filter(|p| range.contains(p.post.month()))
        .map(|p| preprocess(p, stopwords))
        .filter(|d| !d.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bigram(pub String, pub String);

impl fmt::Display for Bigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.0, self.1)
    }
}

impl Serialize for Bigram {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Adjacent token pairs.
pub fn bigrams(tokens: &[String]) -> impl Iterator<Item = Bigram> + '_ {
    tokens
        .windows(2)
        .map(|w| Bigram(w[0].clone(), w[1].clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfidfParams {
    pub min_df: usize,
    /// Upper document-frequency bound as a fraction of the document count.
    pub max_df_ratio: f64,
}

impl Default for TfidfParams {
    fn default() -> Self {
        Self {
            min_df: 5,
            max_df_ratio: 0.95,
        }
    }
}

/// Vocabulary and smoothed idf weights fitted on one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    vocabulary: BTreeMap<Bigram, usize>,
    terms: Vec<Bigram>,
    idf: Vec<f64>,
    df: Vec<usize>,
    doc_count: usize,
}

/// Sparse document vector as `(column, weight)` pairs in column order.
pub type DocVector = Vec<(usize, f64)>;

impl TfidfModel {
    /// Fits on token lists. Bigrams kept satisfy
    /// `min_df <= df <= max_df_ratio * N`; `idf = ln((1 + N) / (1 + df)) + 1`.
    pub fn fit(docs: &[Vec<String>], params: TfidfParams) -> Result<Self, LexshiftError> {
        if docs.iter().all(|d| d.is_empty()) {
            return Err(LexshiftError::NoDocuments);
        }
        let n = docs.len();
        let mut df: BTreeMap<Bigram, usize> = BTreeMap::new();
        for doc in docs {
            let unique: HashSet<Bigram> = bigrams(doc).collect();
            for b in unique {
                *df.entry(b).or_default() += 1;
            }
        }
        let max_df = params.max_df_ratio * n as f64;
        let candidates = df.len();
        let kept: Vec<(Bigram, usize)> = df
            .into_iter()
            .filter(|&(_, d)| d >= params.min_df && d as f64 <= max_df)
            .collect();
        if kept.is_empty() {
            return Err(LexshiftError::EmptyVocabulary {
                docs: n,
                candidates,
                min_df: params.min_df,
                max_df,
            });
        }
        let idf = kept
            .iter()
            .map(|&(_, d)| ((1 + n) as f64 / (1 + d) as f64).ln() + 1.0)
            .collect();
        let df = kept.iter().map(|&(_, d)| d).collect();
        let terms: Vec<Bigram> = kept.into_iter().map(|(b, _)| b).collect();
        let vocabulary = terms
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        Ok(Self {
            vocabulary,
            terms,
            idf,
            df,
            doc_count: n,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn column(&self, bigram: &Bigram) -> Option<usize> {
        self.vocabulary.get(bigram).copied()
    }

    /// Vocabulary in column order, which is lexicographic.
    pub fn terms(&self) -> &[Bigram] {
        &self.terms
    }

    pub fn idf(&self, column: usize) -> f64 {
        self.idf[column]
    }

    pub fn df(&self, column: usize) -> usize {
        self.df[column]
    }

    /// Bigram counts times idf, scaled to unit L2 norm. Documents without
    /// vocabulary bigrams map to the empty vector.
    pub fn vectorize(&self, tokens: &[String]) -> DocVector {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for b in bigrams(tokens) {
            if let Some(col) = self.column(&b) {
                *counts.entry(col).or_default() += 1;
            }
        }
        let mut v: DocVector = counts
            .into_iter()
            .map(|(col, c)| (col, c as f64 * self.idf[col]))
            .collect();
        let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut v {
                *w /= norm;
            }
        }
        v
    }

    /// Mean weight of every column over `docs`, counting absent bigrams as 0.
    pub fn mean_weights(&self, docs: &[Vec<String>]) -> Vec<f64> {
        let mut sums = vec![0.0; self.len()];
        for doc in docs {
            for (col, w) in self.vectorize(doc) {
                sums[col] += w;
            }
        }
        let n = docs.len() as f64;
        sums.into_iter().map(|s| s / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftEntry {
    pub bigram: Bigram,
    pub mean_before: f64,
    pub mean_after: f64,
    /// `mean_after - mean_before`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftReport {
    /// Largest deltas first.
    pub emerging: Vec<ShiftEntry>,
    /// Smallest deltas first.
    pub declining: Vec<ShiftEntry>,
}

/// Compares mean weights before and after under one shared model.
///
/// Ties on delta are broken by bigram order in both lists.
pub fn shift(
    model: &TfidfModel,
    before: &[Vec<String>],
    after: &[Vec<String>],
    top_k: usize,
) -> Result<ShiftReport, LexshiftError> {
    if before.is_empty() {
        return Err(LexshiftError::EmptyPeriod("before"));
    }
    if after.is_empty() {
        return Err(LexshiftError::EmptyPeriod("after"));
    }
    let mb = model.mean_weights(before);
    let ma = model.mean_weights(after);
    let entries: Vec<ShiftEntry> = model
        .terms()
        .iter()
        .enumerate()
        .map(|(i, b)| ShiftEntry {
            bigram: b.clone(),
            mean_before: mb[i],
            mean_after: ma[i],
            delta: ma[i] - mb[i],
        })
        .collect();
    let ranked = |desc: bool| {
        let mut v = entries.clone();
        v.sort_by(|a, b| {
            let ord = a.delta.total_cmp(&b.delta);
            (if desc { ord.reverse() } else { ord }).then_with(|| a.bigram.cmp(&b.bigram))
        });
        v.truncate(top_k);
        v
    };
    Ok(ShiftReport {
        emerging: ranked(true),
        declining: ranked(false),
    })
}

impl ShiftReport {
    /// `bigram,mean_before,mean_after,delta,period`, emerging rows first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bigram,mean_before,mean_after,delta,period\n");
        for (period, list) in [("emerging", &self.emerging), ("declining", &self.declining)] {
            for e in list {
                writeln!(
                    out,
                    "{},{},{},{},{period}",
                    e.bigram, e.mean_before, e.mean_after, e.delta
                )
                .expect("writing to a String");
            }
        }
        out
    }
}
