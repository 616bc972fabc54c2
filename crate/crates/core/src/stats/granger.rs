use nalgebra::DMatrix;
use serde::Serialize;

use super::dist::f_sf;
use super::ols::ols;
use super::{AlignedPair, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    /// Rows entering the regressions, `n - lag`.
    pub n_effective: usize,
    pub df_num: usize,
    pub df_den: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

/// Bivariate Granger F-tests in both directions: `x -> y` first, then
/// `y -> x`.
pub fn granger(
    pair: &AlignedPair,
    lag: usize,
) -> Result<(GrangerResult, GrangerResult), StatsError> {
    Ok((
        granger_one(&pair.x, &pair.y, &pair.x_name, &pair.y_name, lag)?,
        granger_one(&pair.y, &pair.x, &pair.y_name, &pair.x_name, lag)?,
    ))
}

/// Tests whether lags of `cause` improve an autoregression of `effect`.
pub fn granger_one(
    cause: &[f64],
    effect: &[f64],
    cause_name: &str,
    effect_name: &str,
    lag: usize,
) -> Result<GrangerResult, StatsError> {
    assert_eq!(cause.len(), effect.len(), "series must be aligned");
    let n = cause.len();
    if lag == 0 {
        return Err(StatsError::ZeroLag);
    }
    let rows = n.saturating_sub(lag);
    if rows <= 2 * lag + 1 {
        return Err(StatsError::InsufficientDof { n, lag });
    }
    let df_den = rows - 2 * lag - 1;

    let mut names = vec!["const".to_string()];
    names.extend((1..=lag).map(|i| format!("{effect_name}_lag{i}")));
    names.extend((1..=lag).map(|i| format!("{cause_name}_lag{i}")));
    let names: Vec<&str> = names.iter().map(String::as_str).collect();

    let full = DMatrix::from_fn(rows, 2 * lag + 1, |r, c| {
        let t = r + lag;
        match c {
            0 => 1.0,
            c if c <= lag => effect[t - c],
            c => cause[t - (c - lag)],
        }
    });
    let target = &effect[lag..];
    let unrestricted = ols(&full, target, &names)?;
    let restricted_design = full.columns(0, lag + 1).into_owned();
    let restricted = ols(&restricted_design, target, &names[..=lag])?;

    let gain = (restricted.rss - unrestricted.rss).max(0.0);
    let (f_stat, p_value) = if unrestricted.rss > 0.0 {
        let f = (gain / lag as f64) / (unrestricted.rss / df_den as f64);
        (f, f_sf(f, lag as f64, df_den as f64))
    } else if gain > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        (0.0, 1.0)
    };
    Ok(GrangerResult {
        cause: cause_name.to_string(),
        effect: effect_name.to_string(),
        lag,
        f_stat,
        p_value,
        n_effective: rows,
        df_num: lag,
        df_den,
        rss_restricted: restricted.rss,
        rss_unrestricted: unrestricted.rss,
    })
}
