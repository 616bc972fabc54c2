//! Reference implementations shared by the integration and acceptance tests.
//!
//! These are written for clarity, not speed, and avoid the data structures
//! used by the library (no prefix sums, no coincidence matrix).

#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::Value;

pub fn fixture(name: &str) -> Value {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let path = [
        manifest.join("tests/fixtures"),
        manifest.join("../core/tests/fixtures"),
    ]
    .into_iter()
    .map(|d| d.join(name))
    .find(|p| p.exists())
    .unwrap_or_else(|| panic!("fixture {name} not found"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

/// Two-pass sum of squared deviations.
pub fn naive_cost(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean) * (v - mean)).sum()
}

pub fn penalty(y: &[f64], c: f64) -> f64 {
    let n = y.len() as f64;
    c * n.ln() * naive_cost(y) / n
}

/// Optimal partitioning by plain dynamic programming over every admissible
/// last-segment start. Ties go to the earliest start.
pub fn dp_segmentation(y: &[f64], c: f64, m: usize) -> (f64, Vec<usize>) {
    let n = y.len();
    let beta = penalty(y, c);
    let mut best = vec![f64::INFINITY; n + 1];
    let mut arg = vec![0usize; n + 1];
    best[0] = 0.0;
    for t in m..=n {
        for s in 0..=t - m {
            if s != 0 && s < m {
                continue;
            }
            let pen = if s == 0 { 0.0 } else { beta };
            let v = best[s] + naive_cost(&y[s..t]) + pen;
            if v < best[t] {
                best[t] = v;
                arg[t] = s;
            }
        }
    }
    let mut cps = Vec::new();
    let mut t = n;
    while arg[t] > 0 {
        cps.push(arg[t] - 1);
        t = arg[t];
    }
    cps.reverse();
    (best[n], cps)
}

/// Minimum penalized cost over every subset of split positions.
pub fn exhaustive_segmentation(y: &[f64], c: f64, m: usize) -> (f64, Vec<usize>) {
    let n = y.len();
    assert!(n <= 16, "exhaustive search is exponential");
    let beta = penalty(y, c);
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << (n - 1)) {
        // bit i set: a segment ends at index i
        let mut starts = vec![0];
        starts.extend((0..n - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1));
        starts.push(n);
        if starts.windows(2).any(|w| w[1] - w[0] < m) {
            continue;
        }
        let cost: f64 = starts
            .windows(2)
            .map(|w| naive_cost(&y[w[0]..w[1]]))
            .sum::<f64>()
            + beta * (starts.len() - 2) as f64;
        if cost < best.0 {
            let cps = starts[1..starts.len() - 1].iter().map(|s| s - 1).collect();
            best = (cost, cps);
        }
    }
    best
}

/// Krippendorff's alpha straight from pairable values: observed disagreement
/// averages over ordered within-unit pairs, expected over all ordered pairs of
/// pooled values.
pub fn alpha_by_pairs(units: &[Vec<Option<u8>>], ordinal: bool) -> f64 {
    let pairable: Vec<Vec<u8>> = units
        .iter()
        .map(|u| u.iter().flatten().copied().collect::<Vec<_>>())
        .filter(|u| u.len() >= 2)
        .collect();
    let pooled: Vec<u8> = pairable.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let freq = |g: u8| pooled.iter().filter(|&&v| v == g).count() as f64;
    let delta = |a: u8, b: u8| -> f64 {
        if a == b {
            return 0.0;
        }
        if !ordinal {
            return 1.0;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let span: f64 = (lo..=hi).map(freq).sum::<f64>() - (freq(lo) + freq(hi)) / 2.0;
        span * span
    };
    let mut observed = 0.0;
    for u in &pairable {
        let mu = u.len() as f64;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    observed += delta(u[i], u[j]) / (mu - 1.0);
                }
            }
        }
    }
    observed /= n;
    let mut expected = 0.0;
    for i in 0..pooled.len() {
        for j in 0..pooled.len() {
            if i != j {
                expected += delta(pooled[i], pooled[j]);
            }
        }
    }
    expected /= n * (n - 1.0);
    1.0 - observed / expected
}

/// The label at least two of three raters chose, else 1.
pub fn vote_by_counting(r: [u8; 3]) -> u8 {
    (0..3u8)
        .find(|&l| r.iter().filter(|&&v| v == l).count() >= 2)
        .unwrap_or(1)
}
