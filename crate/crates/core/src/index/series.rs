use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::IndexError;
use crate::month::{Month, MonthRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesUnit {
    Score,
    Index,
    Percent,
    Fraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub month: Month,
    /// `None` marks a month without data.
    pub value: Option<f64>,
    /// Observations behind the value.
    pub n: usize,
}

/// A month-indexed series over a contiguous range of months.
///
/// Gaps are explicit: every month between the first and last point is present,
/// with `value: None` where there is no data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    pub name: String,
    pub unit: SeriesUnit,
    points: Vec<SeriesPoint>,
}

impl MonthlySeries {
    pub fn empty(name: impl Into<String>, unit: SeriesUnit) -> Self {
        Self {
            name: name.into(),
            unit,
            points: Vec::new(),
        }
    }

    /// Builds a series from points in any order. Months between the first and
    /// last point that are not given become missing points.
    pub fn from_points(
        name: impl Into<String>,
        unit: SeriesUnit,
        points: impl IntoIterator<Item = SeriesPoint>,
    ) -> Result<Self, IndexError> {
        let mut by_month = BTreeMap::new();
        for p in points {
            if by_month.insert(p.month, p).is_some() {
                return Err(IndexError::DuplicateMonth(p.month));
            }
        }
        let (Some(&first), Some(&last)) = (by_month.keys().next(), by_month.keys().next_back())
        else {
            return Ok(Self::empty(name, unit));
        };
        let range = MonthRange::new(first, last).expect("ordered keys");
        let points = range
            .iter()
            .map(|m| {
                by_month.remove(&m).unwrap_or(SeriesPoint {
                    month: m,
                    value: None,
                    n: 0,
                })
            })
            .collect();
        Ok(Self {
            name: name.into(),
            unit,
            points,
        })
    }

    /// Convenience for fully observed series starting at `start`.
    pub fn from_values(
        name: impl Into<String>,
        unit: SeriesUnit,
        start: Month,
        values: &[f64],
    ) -> Self {
        Self {
            name: name.into(),
            unit,
            points: values
                .iter()
                .enumerate()
                .map(|(i, &v)| SeriesPoint {
                    month: start.offset(i as i64),
                    value: Some(v),
                    n: 1,
                })
                .collect(),
        }
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_month(&self) -> Option<Month> {
        self.points.first().map(|p| p.month)
    }

    pub fn last_month(&self) -> Option<Month> {
        self.points.last().map(|p| p.month)
    }

    pub fn get(&self, month: Month) -> Option<&SeriesPoint> {
        let first = self.first_month()?;
        let idx = first.months_until(month);
        usize::try_from(idx).ok().and_then(|i| self.points.get(i))
    }

    pub fn value(&self, month: Month) -> Option<f64> {
        self.get(month).and_then(|p| p.value)
    }

    /// Months with data, in order.
    pub fn observed(&self) -> impl Iterator<Item = (Month, f64)> + '_ {
        self.points
            .iter()
            .filter_map(|p| p.value.map(|v| (p.month, v)))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Re-indexes onto `range`, padding with missing points and dropping
    /// months outside it.
    pub fn reindex(&self, range: MonthRange) -> Self {
        Self {
            name: self.name.clone(),
            unit: self.unit,
            points: range
                .iter()
                .map(|m| {
                    self.get(m).copied().unwrap_or(SeriesPoint {
                        month: m,
                        value: None,
                        n: 0,
                    })
                })
                .collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            name: self.name.clone(),
            unit: self.unit,
            points: self
                .points
                .iter()
                .map(|p| SeriesPoint {
                    value: p.value.map(&f),
                    ..*p
                })
                .collect(),
        }
    }

    /// Month-over-month first difference; the first month is dropped.
    pub fn diff(&self) -> Self {
        let points = self
            .points
            .windows(2)
            .map(|w| SeriesPoint {
                month: w[1].month,
                value: w[0].value.zip(w[1].value).map(|(a, b)| b - a),
                n: w[1].n,
            })
            .collect();
        Self {
            name: format!("{}_diff", self.name),
            unit: self.unit,
            points,
        }
    }

    /// `month,value,n` with an empty value for missing months.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("month,value,n\n");
        for p in &self.points {
            match p.value {
                Some(v) => writeln!(out, "{},{},{}", p.month, v, p.n),
                None => writeln!(out, "{},,{}", p.month, p.n),
            }
            .expect("writing to a String");
        }
        out
    }

    /// Reads the format written by [`MonthlySeries::to_csv`]. Lines starting
    /// with `#` are skipped.
    pub fn read_csv<R: BufRead>(
        reader: R,
        name: impl Into<String>,
        unit: SeriesUnit,
    ) -> Result<Self, IndexError> {
        let mut points = Vec::new();
        let mut header_seen = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line.starts_with("month") {
                    continue;
                }
            }
            let err = |message: String| IndexError::Csv {
                line: i + 1,
                message,
            };
            let cols: Vec<&str> = line.split(',').collect();
            let [month, value, n] = cols[..] else {
                return Err(err(format!("expected 3 columns, got {}", cols.len())));
            };
            let month: Month = month.parse().map_err(|e| err(format!("{e}")))?;
            let value = if value.is_empty() {
                None
            } else {
                Some(value.parse::<f64>().map_err(|e| err(format!("{e}")))?)
            };
            let n = n.parse().map_err(|e| err(format!("{e}")))?;
            points.push(SeriesPoint { month, value, n });
        }
        Self::from_points(name, unit, points)
    }
}
