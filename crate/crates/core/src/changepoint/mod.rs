//! Exact penalized segmentation of a series with PELT and an L2 cost.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::month::Month;

#[derive(Debug, Error, PartialEq)]
pub enum ChangepointError {
    #[error("penalty factor must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("minimum segment length must be at least 1")]
    ZeroMinSegment,
    #[error("series of length {n} is shorter than the minimum segment length {m}")]
    TooShort { n: usize, m: usize },
    #[error("series value at index {0} is not finite")]
    NonFinite(usize),
}

/// Prefix sums of `y` and `y^2`.
#[derive(Debug, Clone)]
pub struct PrefixSums {
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl PrefixSums {
    pub fn new(y: &[f64]) -> Self {
        let mut s1 = Vec::with_capacity(y.len() + 1);
        let mut s2 = Vec::with_capacity(y.len() + 1);
        s1.push(0.0);
        s2.push(0.0);
        for &v in y {
            s1.push(s1.last().unwrap() + v);
            s2.push(s2.last().unwrap() + v * v);
        }
        Self { s1, s2 }
    }

    pub fn len(&self) -> usize {
        self.s1.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sum(&self, start: usize, end: usize) -> f64 {
        self.s1[end] - self.s1[start]
    }

    /// Cost of the half-open range `start..end`.
    fn cost(&self, start: usize, end: usize) -> f64 {
        let len = (end - start) as f64;
        let s1 = self.sum(start, end);
        (self.s2[end] - self.s2[start] - s1 * s1 / len).max(0.0)
    }
}

/// Sum of squared deviations from the mean over the inclusive range `i..=j`.
pub fn l2_cost(prefix: &PrefixSums, i: usize, j: usize) -> f64 {
    assert!(i <= j && j < prefix.len(), "need 0 <= i <= j < n");
    prefix.cost(i, j + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyConfig {
    /// Multiplier on `ln(n) * variance`.
    pub c: f64,
    /// Minimum segment length.
    pub m: usize,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self { c: 1.0, m: 2 }
    }
}

impl PenaltyConfig {
    /// `c * ln(n) * var(y)` with the population variance of the whole series.
    pub fn beta(&self, y: &[f64]) -> f64 {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        self.c * n.ln() * var
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub mean: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segmentation {
    /// Index of the last point of every segment except the final one.
    pub changepoints: Vec<usize>,
    pub segments: Vec<Segment>,
    /// Segment costs plus `beta` per changepoint.
    pub total_cost: f64,
    pub beta: f64,
    /// Set when the series has zero variance and the penalty vanishes.
    pub degenerate: bool,
}

impl Segmentation {
    fn from_starts(prefix: &PrefixSums, starts: &[usize], beta: f64, degenerate: bool) -> Self {
        let n = prefix.len();
        let segments: Vec<Segment> = starts
            .iter()
            .enumerate()
            .map(|(i, &start)| {
                let end = starts.get(i + 1).copied().unwrap_or(n);
                Segment {
                    start,
                    end,
                    mean: prefix.sum(start, end) / (end - start) as f64,
                    cost: prefix.cost(start, end),
                }
            })
            .collect();
        let changepoints: Vec<usize> = starts[1..].iter().map(|s| s - 1).collect();
        let total_cost =
            segments.iter().map(|s| s.cost).sum::<f64>() + beta * changepoints.len() as f64;
        Self {
            changepoints,
            segments,
            total_cost,
            beta,
            degenerate,
        }
    }

    /// First month of each new segment, given the month of every input point.
    pub fn changepoint_months(&self, months: &[Month]) -> Vec<Month> {
        self.changepoints.iter().map(|&k| months[k + 1]).collect()
    }
}

fn validate(y: &[f64], cfg: &PenaltyConfig) -> Result<(), ChangepointError> {
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(ChangepointError::InvalidPenalty(cfg.c));
    }
    if cfg.m == 0 {
        return Err(ChangepointError::ZeroMinSegment);
    }
    if y.len() < cfg.m.max(1) {
        return Err(ChangepointError::TooShort {
            n: y.len(),
            m: cfg.m,
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(ChangepointError::NonFinite(i));
    }
    Ok(())
}

/// Optimal segmentation minimizing total L2 cost plus `beta` per changepoint,
/// with every segment at least `cfg.m` long.
///
/// Among equal-cost optima the one whose last changepoint is earliest wins,
/// recursively.
pub fn pelt(y: &[f64], cfg: &PenaltyConfig) -> Result<Segmentation, ChangepointError> {
    validate(y, cfg)?;
    let prefix = PrefixSums::new(y);
    let beta = cfg.beta(y);
    if beta == 0.0 {
        return Ok(Segmentation::from_starts(&prefix, &[0], 0.0, true));
    }
    let n = y.len();
    let m = cfg.m;
    // f[t]: optimal penalized cost of y[..t]; f[0] = -beta so the first
    // segment is not charged.
    let mut f = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    f[0] = -beta;
    // (start, time after which the start is no longer admissible)
    let mut candidates: Vec<(usize, Option<usize>)> = vec![(0, None)];
    for t in m..=n {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for &(s, _) in candidates.iter().filter(|&&(s, _)| t - s >= m) {
            let v = f[s] + prefix.cost(s, t) + beta;
            if v < best {
                best = v;
                arg = s;
            }
        }
        f[t] = best;
        last[t] = arg;
        // A start beaten at t cannot be optimal for t' >= t + m, the first
        // time t itself becomes a usable start for t'.
        for (s, kill) in candidates.iter_mut() {
            if kill.is_none() && t - *s >= m && f[*s] + prefix.cost(*s, t) > f[t] {
                *kill = Some(t + m);
            }
        }
        candidates.retain(|&(_, kill)| kill.is_none_or(|k| k > t + 1));
        if t + m <= n {
            candidates.push((t, None));
        }
    }
    let mut starts = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last[t];
        starts.push(s);
        t = s;
    }
    starts.reverse();
    Ok(Segmentation::from_starts(&prefix, &starts, beta, false))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub c: f64,
    pub m: usize,
    pub changepoints: Vec<usize>,
    pub degenerate: bool,
}

pub const DEFAULT_SCAN_CS: [f64; 3] = [0.5, 1.0, 2.0];

/// One PELT run per `(c, m)`, ordered by `c` then `m`.
pub fn sensitivity_scan(
    y: &[f64],
    cs: &[f64],
    ms: &[usize],
) -> Result<Vec<ScanRow>, ChangepointError> {
    let mut grid: Vec<(f64, usize)> = cs
        .iter()
        .flat_map(|&c| ms.iter().map(move |&m| (c, m)))
        .collect();
    grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    grid.into_iter()
        .map(|(c, m)| {
            let seg = pelt(y, &PenaltyConfig { c, m })?;
            Ok(ScanRow {
                c,
                m,
                changepoints: seg.changepoints,
                degenerate: seg.degenerate,
            })
        })
        .collect()
}

/// Scan results of one community, with the month of every input point.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityScan {
    pub community: String,
    pub months: Vec<Month>,
    pub rows: Vec<ScanRow>,
}

/// `community,c,m,n_changepoints,dates` with `;`-separated `YYYY-MM` dates.
pub fn scan_csv(scans: &[CommunityScan]) -> String {
    let mut out = String::from("community,c,m,n_changepoints,dates\n");
    for scan in scans {
        for row in &scan.rows {
            let dates: Vec<String> = row
                .changepoints
                .iter()
                .map(|&k| scan.months[k + 1].to_string())
                .collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                scan.community,
                row.c,
                row.m,
                row.changepoints.len(),
                dates.join(";")
            )
            .expect("writing to a String");
        }
    }
    out
}
