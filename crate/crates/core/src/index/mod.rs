//! Monthly inflation scores and baselines.

mod series;

pub use series::{MonthlySeries, SeriesPoint, SeriesUnit};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::classify::{lexicon_compound, Lexicon, ScoredPost};
use crate::corpus::{MonthBucket, PostRecord};
use crate::month::Month;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("month {0} appears twice")]
    DuplicateMonth(Month),
    #[error("series line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Monthly mean score of one community's posts.
///
/// Posts from other communities are ignored. Months without posts inside the
/// observed span are missing points.
pub fn subreddit_ris(scored: &[ScoredPost], community: &str) -> MonthlySeries {
    pooled_mean(
        format!("ris_{community}"),
        scored.iter().filter(|s| s.post.community == community),
    )
}

/// Pooled monthly mean over all posts of all communities.
///
/// Every post carries the same weight, so communities with more posts in a
/// month pull the aggregate further; this is not a mean of community means.
pub fn aggregate_ris(scored: &[ScoredPost]) -> MonthlySeries {
    pooled_mean("ris_aggregate".to_string(), scored.iter())
}

fn pooled_mean<'a>(name: String, scored: impl Iterator<Item = &'a ScoredPost>) -> MonthlySeries {
    let mut acc: BTreeMap<Month, (i64, usize)> = BTreeMap::new();
    for s in scored {
        let e = acc.entry(s.post.month()).or_default();
        e.0 += i64::from(s.score());
        e.1 += 1;
    }
    let points = acc.into_iter().map(|(month, (sum, n))| SeriesPoint {
        month,
        value: Some(sum as f64 / n as f64),
        n,
    });
    MonthlySeries::from_points(name, SeriesUnit::Score, points).expect("unique months")
}

/// Trailing moving average.
///
/// The output at month `t` averages `t - window + 1 ..= t`. The first
/// `window - 1` months are dropped; a window containing a missing month yields
/// a missing point. `n` is the total of the window's counts.
pub fn moving_average(series: &MonthlySeries, window: usize) -> MonthlySeries {
    assert!(window >= 1, "window must be at least 1");
    let pts = series.points();
    let points: Vec<SeriesPoint> = pts
        .windows(window)
        .map(|w| {
            let last = w[window - 1];
            let value = w
                .iter()
                .map(|p| p.value)
                .sum::<Option<f64>>()
                .map(|s| s / window as f64);
            SeriesPoint {
                month: last.month,
                value,
                n: w.iter().map(|p| p.n).sum(),
            }
        })
        .collect();
    let name = if window == 1 {
        series.name.clone()
    } else {
        format!("{}_ma{window}", series.name)
    };
    MonthlySeries::from_points(name, series.unit, points).expect("unique months")
}

/// Share of keyword-matching posts among all posts, pooled across
/// communities. Months whose prefilter total is zero are missing.
pub fn volume_share(buckets: &[MonthBucket]) -> MonthlySeries {
    let mut acc: BTreeMap<Month, (usize, usize)> = BTreeMap::new();
    for b in buckets {
        let e = acc.entry(b.month).or_default();
        e.0 += b.n_matched;
        e.1 += b.n_total_prefilter;
    }
    let points = acc
        .into_iter()
        .map(|(month, (matched, total))| SeriesPoint {
            month,
            value: (total > 0).then(|| matched as f64 / total as f64),
            n: total,
        });
    MonthlySeries::from_points("volume_share", SeriesUnit::Fraction, points).expect("unique months")
}

/// Monthly mean lexicon compound score over all posts.
pub fn sentiment_baseline(posts: &[PostRecord], lexicon: &Lexicon) -> MonthlySeries {
    let mut acc: BTreeMap<Month, (f64, usize)> = BTreeMap::new();
    for p in posts {
        let e = acc.entry(p.month()).or_default();
        e.0 += lexicon_compound(&p.text, lexicon);
        e.1 += 1;
    }
    let points = acc.into_iter().map(|(month, (sum, n))| SeriesPoint {
        month,
        value: Some(sum / n as f64),
        n,
    });
    MonthlySeries::from_points("sentiment", SeriesUnit::Score, points).expect("unique months")
}
