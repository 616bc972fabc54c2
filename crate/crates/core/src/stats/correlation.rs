use serde::Serialize;

use super::dist::t_two_sided_p;
use super::{AlignedPair, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub kind: CorrelationKind,
    pub coefficient: f64,
    /// Two-sided, from the t statistic with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Pearson product-moment correlation.
pub fn pearson(pair: &AlignedPair) -> Result<CorrelationResult, StatsError> {
    let r = pearson_coefficient(pair, &pair.x, &pair.y)?;
    Ok(result(CorrelationKind::Pearson, r, pair.len()))
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(pair: &AlignedPair) -> Result<CorrelationResult, StatsError> {
    let r = pearson_coefficient(pair, &average_ranks(&pair.x), &average_ranks(&pair.y))?;
    Ok(result(CorrelationKind::Spearman, r, pair.len()))
}

/// Largest `n` accepted by [`spearman_exact_p`].
pub const EXACT_PERMUTATION_MAX_N: usize = 10;

/// Two-sided permutation p-value of Spearman's rho over all `n!` orderings of
/// the `y` ranks. Ties keep their average ranks.
pub fn spearman_exact_p(pair: &AlignedPair) -> Result<f64, StatsError> {
    let n = pair.len();
    if n > EXACT_PERMUTATION_MAX_N {
        return Err(StatsError::TooLargeForExact {
            n,
            max: EXACT_PERMUTATION_MAX_N,
        });
    }
    let rx = centered(&average_ranks(&pair.x));
    let mut ry = centered(&average_ranks(&pair.y));
    pearson_coefficient(pair, &rx, &ry)?;
    // rho is proportional to the dot product of centered ranks for a fixed
    // multiset of y ranks, so permutations can be compared on the dot product.
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let observed = dot(&rx, &ry).abs() - 1e-9;
    let mut extreme = 0u64;
    let mut total = 0u64;
    heap_permutations(&mut ry, &mut |perm| {
        total += 1;
        if dot(&rx, perm).abs() >= observed {
            extreme += 1;
        }
    });
    Ok(extreme as f64 / total as f64)
}

fn heap_permutations(v: &mut [f64], visit: &mut impl FnMut(&[f64])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    visit(v);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            visit(v);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn result(kind: CorrelationKind, r: f64, n: usize) -> CorrelationResult {
    let df = (n - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided_p(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    CorrelationResult {
        kind,
        coefficient: r,
        p_value,
        n,
    }
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn pearson_coefficient(pair: &AlignedPair, x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let (dx, dy) = (centered(x), centered(y));
    let sxx: f64 = dx.iter().map(|d| d * d).sum();
    let syy: f64 = dy.iter().map(|d| d * d).sum();
    for (ss, name) in [(sxx, &pair.x_name), (syy, &pair.y_name)] {
        if ss == 0.0 {
            return Err(StatsError::Constant { name: name.clone() });
        }
    }
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Month;
    use proptest::prelude::*;

    fn pair(x: &[f64], y: &[f64]) -> AlignedPair {
        let start: Month = "2012-01".parse().unwrap();
        AlignedPair {
            x_name: "x".into(),
            y_name: "y".into(),
            months: (0..x.len()).map(|i| start.offset(i as i64)).collect(),
            x: x.to_vec(),
            y: y.to_vec(),
        }
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), [1.0, 2.5, 2.5, 4.0]);
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 5.0]),
            [2.0, 3.5, 3.5, 1.0]
        );
        assert_eq!(average_ranks(&[3.0, 3.0, 3.0]), [2.0; 3]);
    }

    #[test]
    fn perfect_linear() {
        let x = [0.3, 1.0, 2.2, 5.0, 8.1];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson(&pair(&x, &y)).unwrap();
        assert!((r.coefficient - 1.0).abs() < 1e-15);
        assert!(r.p_value < 1e-6);
        let r = spearman(&pair(&x, &x.map(f64::exp))).unwrap();
        assert_eq!(r.coefficient, 1.0);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn small_known_case() {
        // x = 1..5, y = (2,1,4,3,6): sxy = 10, sxx = 10, syy = 14.8
        let r = pearson(&pair(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[2.0, 1.0, 4.0, 3.0, 6.0],
        ))
        .unwrap();
        let expected = 10.0 / 148f64.sqrt();
        assert!((r.coefficient - expected).abs() < 1e-15);
        assert_eq!(r.n, 5);
        assert_eq!(r.kind, CorrelationKind::Pearson);
    }

    #[test]
    fn constant_is_error() {
        let err = pearson(&pair(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0])).unwrap_err();
        assert!(matches!(err, StatsError::Constant { ref name } if name == "y"));
        assert!(spearman(&pair(&[1.0; 3], &[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn exact_permutation_p() {
        // n = 4, perfect agreement: only the identity and the full reversal
        // reach |rho| = 1, so p = 2 / 24.
        let p = spearman_exact_p(&pair(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!((p - 2.0 / 24.0).abs() < 1e-15);
        let x: Vec<f64> = (0..11).map(f64::from).collect();
        assert!(spearman_exact_p(&pair(&x, &x)).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (4usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance((x, y) in arb_pair(), a in 0.1f64..10.0, b in -50.0f64..50.0) {
            let r = pearson(&pair(&x, &y)).unwrap();
            prop_assert!(r.coefficient.abs() <= 1.0);
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
            let up: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let down: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
            prop_assert!((pearson(&pair(&up, &y)).unwrap().coefficient - r.coefficient).abs() < 1e-9);
            prop_assert!((pearson(&pair(&down, &y)).unwrap().coefficient + r.coefficient).abs() < 1e-9);
        }

        #[test]
        fn spearman_monotone_invariance((x, y) in arb_pair()) {
            let r = spearman(&pair(&x, &y)).unwrap();
            let t: Vec<f64> = x.iter().map(|v| (v / 50.0).exp() + v * v * v).collect();
            prop_assert_eq!(spearman(&pair(&t, &y)).unwrap().coefficient, r.coefficient);
            let rev: Vec<f64> = y.iter().rev().copied().collect();
            let xr: Vec<f64> = x.iter().rev().copied().collect();
            prop_assert_eq!(spearman(&pair(&xr, &rev)).unwrap().coefficient, r.coefficient);
        }
    }
}
