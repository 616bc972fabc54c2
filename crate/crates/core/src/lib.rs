//! Monthly inflation-score series built from classified social-media posts.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`]: parse line-delimited posts, keyword-filter them, bucket them
//!   into community-months and apply per-month sampling caps.
//! - [`classify`]: label posts (deflation / neither / inflation), gold-label
//!   construction by majority vote, Krippendorff's alpha, classifier metrics,
//!   and the lexicon compound score used by the sentiment baseline.
//! - [`index`]: per-community and pooled monthly scores, trailing moving
//!   averages and the two unsupervised baselines.
//! - [`stats`]: alignment, Pearson/Spearman with p-values, bivariate Granger
//!   F-tests with t and F tail probabilities.
//! - [`changepoint`]: PELT segmentation with an L2 cost.
//! - [`lexshift`]: bigram TF-IDF shift around a changepoint.

pub mod changepoint;
pub mod classify;
pub mod corpus;
pub mod index;
pub mod lexshift;
pub mod month;
pub mod stats;

pub use month::{Month, MonthRange};

/// Crate version, recorded in artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
