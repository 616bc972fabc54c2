//! The book's chapters, compiled so their listings run as doc-tests.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}

#[doc = include_str!("../../../book/src/scoring.md")]
pub mod scoring {}

#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}

#[doc = include_str!("../../../book/src/changepoints.md")]
pub mod changepoints {}

#[doc = include_str!("../../../book/src/lexshift.md")]
pub mod lexshift {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
