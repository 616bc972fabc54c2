//! Correlation and Granger causality between monthly series.

mod correlation;
pub mod dist;
mod granger;
mod ols;

pub use correlation::{
    average_ranks, pearson, spearman, spearman_exact_p, CorrelationKind, CorrelationResult,
    EXACT_PERMUTATION_MAX_N,
};
pub use granger::{granger, granger_one, GrangerResult};
pub use ols::{ols, OlsFit};

use std::collections::BTreeSet;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{MonthlySeries, SeriesPoint, SeriesUnit};
use crate::month::{Month, MonthRange};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("series {name} is empty")]
    EmptySeries { name: String },
    #[error("series {a} and {b} share {common} months with data, need at least 3")]
    TooFewCommonMonths { a: String, b: String, common: usize },
    #[error("series {name} is constant, correlation is undefined")]
    Constant { name: String },
    #[error("exact permutation test supports n <= {max}, got {n}")]
    TooLargeForExact { n: usize, max: usize },
    #[error("design has {rows} rows and {cols} columns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("singular design, collinear columns: {}", columns.join(", "))]
    Singular { columns: Vec<String> },
    #[error("lag must be at least 1")]
    ZeroLag,
    #[error("{n} observations are too few for lag {lag}")]
    InsufficientDof { n: usize, lag: usize },
    #[error("indicator line {line}: {message}")]
    Indicator { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Two series restricted to the months where both have data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedPair {
    pub x_name: String,
    pub y_name: String,
    pub months: Vec<Month>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl AlignedPair {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }
}

/// Pairs up the months observed in both series, optionally limited to
/// `window`.
pub fn align(
    a: &MonthlySeries,
    b: &MonthlySeries,
    window: Option<MonthRange>,
) -> Result<AlignedPair, StatsError> {
    for s in [a, b] {
        if s.observed().next().is_none() {
            return Err(StatsError::EmptySeries {
                name: s.name.clone(),
            });
        }
    }
    let mut pair = AlignedPair {
        x_name: a.name.clone(),
        y_name: b.name.clone(),
        months: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
    };
    for (month, x) in a.observed() {
        if window.is_some_and(|w| !w.contains(month)) {
            continue;
        }
        if let Some(y) = b.value(month) {
            pair.months.push(month);
            pair.x.push(x);
            pair.y.push(y);
        }
    }
    if pair.len() < 3 {
        return Err(StatsError::TooFewCommonMonths {
            a: a.name.clone(),
            b: b.name.clone(),
            common: pair.len(),
        });
    }
    Ok(pair)
}

/// How an indicator enters the analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorTransform {
    #[default]
    Level,
    /// Month-over-month difference.
    Diff,
    /// Percent change against the same month a year earlier.
    YoyPercent,
}

impl IndicatorTransform {
    pub fn apply(self, series: &MonthlySeries) -> MonthlySeries {
        match self {
            Self::Level => series.clone(),
            Self::Diff => series.diff(),
            Self::YoyPercent => {
                let points = series.points().iter().filter_map(|p| {
                    let base = series.get(p.month.offset(-12))?;
                    Some(SeriesPoint {
                        value: p.value.zip(base.value).map(|(v, b)| 100.0 * (v / b - 1.0)),
                        ..*p
                    })
                });
                MonthlySeries::from_points(
                    format!("{}_yoy", series.name),
                    SeriesUnit::Percent,
                    points,
                )
                .expect("months unique in source")
            }
        }
    }
}

impl FromStr for IndicatorTransform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "level" => Ok(Self::Level),
            "diff" => Ok(Self::Diff),
            "yoy_percent" | "yoy" => Ok(Self::YoyPercent),
            other => Err(format!(
                "unknown transform {other:?} (level, diff, yoy_percent)"
            )),
        }
    }
}

/// Reads a two-column `DATE,VALUE` indicator export with `YYYY-MM-DD` dates.
///
/// A value of `.` (the FRED marker for a missing observation) becomes a
/// missing point. Two rows in the same month are an error.
pub fn read_indicator_csv<R: Read>(
    reader: R,
    name: &str,
    unit: SeriesUnit,
) -> Result<MonthlySeries, StatsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let first = header.get(0).unwrap_or_default().to_ascii_lowercase();
    if header.len() < 2 || !(first == "date" || first == "observation_date") {
        return Err(StatsError::Indicator {
            line: 1,
            message: format!(
                "expected header DATE,VALUE, got {:?}",
                header.iter().collect::<Vec<_>>()
            ),
        });
    }
    let mut seen = BTreeSet::new();
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| StatsError::Indicator { line, message };
        let date = &record[0];
        let month: Month = date
            .get(..7)
            .filter(|_| date.len() == 10)
            .ok_or_else(|| err(format!("expected YYYY-MM-DD date, got {date:?}")))
            .and_then(|_| date.parse().map_err(|e| err(format!("{e}"))))?;
        if !seen.insert(month) {
            return Err(err(format!("second row for month {month}")));
        }
        let raw = record.get(1).unwrap_or_default();
        let value = match raw {
            "" | "." => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| err(format!("invalid value {v:?}")))?,
            ),
        };
        points.push(SeriesPoint {
            month,
            value,
            n: usize::from(value.is_some()),
        });
    }
    Ok(MonthlySeries::from_points(name, unit, points).expect("duplicates rejected above"))
}
