use serde::{Deserialize, Serialize};

use super::{ClassifyError, Label};

/// Ratings for one item. `None` marks a rater who did not rate the item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub post_id: String,
    pub ratings: Vec<Option<Label>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMetric {
    #[default]
    Nominal,
    Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// Expected disagreement was zero (every pairable value identical);
    /// `alpha` is reported as 1.
    pub degenerate: bool,
    /// Number of pairable values.
    pub n_pairable: usize,
}

const K: usize = 3;

/// Krippendorff's alpha over the three-label scheme.
///
/// Builds the coincidence matrix `o[c][k] = sum_u pairs_u(c, k) / (m_u - 1)`
/// over units with at least two ratings, then `alpha = 1 - D_o / D_e`.
pub fn krippendorff_alpha(
    sets: &[AnnotationSet],
    metric: AlphaMetric,
) -> Result<AlphaResult, ClassifyError> {
    if sets.len() < 2 {
        return Err(ClassifyError::InsufficientRatings);
    }
    let mut coincidence = [[0.0f64; K]; K];
    let mut any_pairable = false;
    for set in sets {
        let mut counts = [0usize; K];
        for r in set.ratings.iter().flatten() {
            counts[r.index()] += 1;
        }
        let m: usize = counts.iter().sum();
        if m < 2 {
            continue;
        }
        any_pairable = true;
        let w = 1.0 / (m - 1) as f64;
        for c in 0..K {
            for k in 0..K {
                let pairs = if c == k {
                    counts[c] * counts[c].saturating_sub(1)
                } else {
                    counts[c] * counts[k]
                };
                coincidence[c][k] += pairs as f64 * w;
            }
        }
    }
    if !any_pairable {
        return Err(ClassifyError::InsufficientRatings);
    }

    let marginals: [f64; K] = std::array::from_fn(|c| coincidence[c].iter().sum());
    let n: f64 = marginals.iter().sum();
    let delta = distance_table(metric, &marginals);

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..K {
        for k in 0..K {
            observed += coincidence[c][k] * delta[c][k];
            expected += marginals[c] * marginals[k] * delta[c][k];
        }
    }
    let n_pairable = n.round() as usize;
    if expected == 0.0 {
        return Ok(AlphaResult {
            alpha: 1.0,
            degenerate: true,
            n_pairable,
        });
    }
    // D_o / D_e with D_o = observed / n and D_e = expected / (n (n - 1)).
    let alpha = 1.0 - (n - 1.0) * observed / expected;
    Ok(AlphaResult {
        alpha,
        degenerate: false,
        n_pairable,
    })
}

fn distance_table(metric: AlphaMetric, marginals: &[f64; K]) -> [[f64; K]; K] {
    std::array::from_fn(|c| {
        std::array::from_fn(|k| match metric {
            AlphaMetric::Nominal => f64::from(u8::from(c != k)),
            AlphaMetric::Ordinal => {
                if c == k {
                    return 0.0;
                }
                let (lo, hi) = (c.min(k), c.max(k));
                let span: f64 = marginals[lo..=hi].iter().sum();
                let d = span - (marginals[c] + marginals[k]) / 2.0;
                d * d
            }
        })
    })
}
