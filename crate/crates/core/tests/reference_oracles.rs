//! Segmentation, agreement and TF-IDF against independent reference
//! implementations.

mod common;

use common::{
    alpha_by_pairs, dp_segmentation, exhaustive_segmentation, fixture, floats, vote_by_counting,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::changepoint::{pelt, sensitivity_scan, PenaltyConfig};
use ris_core::classify::{krippendorff_alpha, majority_vote, AlphaMetric, AnnotationSet, Label};
use ris_core::lexshift::{shift, TfidfModel, TfidfParams};

#[test]
fn pelt_agrees_with_dynamic_programming() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(2..=30);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let c = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let m = rng.random_range(1..=3usize);
        if n < m {
            continue;
        }
        let seg = pelt(&y, &PenaltyConfig { c, m }).unwrap();
        let (cost, cps) = dp_segmentation(&y, c, m);
        assert!((seg.total_cost - cost).abs() <= 1e-9, "{y:?} c={c} m={m}");
        assert_eq!(seg.changepoints, cps, "{y:?} c={c} m={m}");
    }
}

#[test]
fn pelt_agrees_with_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let n = rng.random_range(2..=12);
        // level shifts make multi-segment optima common
        let y: Vec<f64> = (0..n)
            .map(|i| if i >= n / 2 { 1.5 } else { 0.0 } + rng.random_range(-0.5..0.5))
            .collect();
        let c = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let m = rng.random_range(1..=3usize).min(n);
        let seg = pelt(&y, &PenaltyConfig { c, m }).unwrap();
        let (cost, cps) = exhaustive_segmentation(&y, c, m);
        assert!((seg.total_cost - cost).abs() <= 1e-9);
        assert_eq!(seg.changepoints, cps);
    }
}

#[test]
fn step_example_thresholds() {
    let y = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
    // unsplit 150 against split 0 + beta, beta = 25 ln(6) c
    let threshold = 150.0 / (25.0 * 6f64.ln());
    let rows = sensitivity_scan(&y, &[0.5, 1.0, 2.0, threshold * 1.01], &[2]).unwrap();
    let counts: Vec<usize> = rows.iter().map(|r| r.changepoints.len()).collect();
    assert_eq!(counts, [1, 1, 1, 0]);
    assert_eq!(rows[0].changepoints, [2]);
    assert_eq!(exhaustive_segmentation(&y, 1.0, 2).1, [2]);
}

#[test]
fn changepoint_count_monotone_in_penalty() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cs: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25).collect();
    for _ in 0..100 {
        let n = rng.random_range(6..=40);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let m = rng.random_range(1..=3);
        let rows = sensitivity_scan(&y, &cs, &[m]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].changepoints.len() <= w[0].changepoints.len());
        }
    }
}

fn random_units(rng: &mut ChaCha8Rng) -> Vec<Vec<Option<u8>>> {
    let units = rng.random_range(2..=8);
    let raters = rng.random_range(2..=4);
    (0..units)
        .map(|_| {
            (0..raters)
                .map(|_| (rng.random_range(0..5) > 0).then(|| rng.random_range(0..3u8)))
                .collect()
        })
        .collect()
}

fn as_sets(units: &[Vec<Option<u8>>]) -> Vec<AnnotationSet> {
    units
        .iter()
        .enumerate()
        .map(|(i, u)| AnnotationSet {
            post_id: i.to_string(),
            ratings: u
                .iter()
                .map(|r| r.map(|v| Label::new(v).unwrap()))
                .collect(),
        })
        .collect()
}

#[test]
fn alpha_matches_pairwise_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut compared = 0;
    while compared < 20 {
        let units = random_units(&mut rng);
        let sets = as_sets(&units);
        for (metric, ordinal) in [(AlphaMetric::Nominal, false), (AlphaMetric::Ordinal, true)] {
            let Ok(got) = krippendorff_alpha(&sets, metric) else {
                continue;
            };
            if got.degenerate || got.n_pairable < 2 {
                continue;
            }
            let want = alpha_by_pairs(&units, ordinal);
            assert!(
                (got.alpha - want).abs() <= 1e-9,
                "{units:?}: {} vs {want}",
                got.alpha
            );
            compared += usize::from(!ordinal);
        }
    }
}

#[test]
fn alpha_perfect_agreement_is_one() {
    let units: Vec<Vec<Option<u8>>> = (0..6).map(|i| vec![Some(i % 3); 3]).collect();
    let a = krippendorff_alpha(&as_sets(&units), AlphaMetric::Nominal).unwrap();
    assert_eq!(a.alpha, 1.0);
}

#[test]
fn vote_matches_counting_rule() {
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let got = majority_vote(&[a, b, c].map(|v| Label::new(v).unwrap())).unwrap();
                assert_eq!(got.value(), vote_by_counting([a, b, c]));
            }
        }
    }
}

fn split(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

#[test]
fn tfidf_matches_reference_vectorizer() {
    let d = fixture("tfidf.json");
    let docs = |k: &str| -> Vec<Vec<String>> {
        d[k].as_array()
            .unwrap()
            .iter()
            .map(|s| split(s.as_str().unwrap()))
            .collect()
    };
    let (before, after) = (docs("before"), docs("after"));
    let all: Vec<_> = before.iter().chain(&after).cloned().collect();
    let model = TfidfModel::fit(
        &all,
        TfidfParams {
            min_df: 1,
            max_df_ratio: 1.0,
        },
    )
    .unwrap();
    let vocab: Vec<String> = model.terms().iter().map(|b| b.to_string()).collect();
    let want_vocab: Vec<String> = d["vocabulary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect();
    assert_eq!(vocab, want_vocab);
    for (i, want) in floats(&d["idf"]).into_iter().enumerate() {
        assert!((model.idf(i) - want).abs() <= 1e-12);
    }
    // "beef prices" is in 3 of 6 documents
    let col = vocab.iter().position(|b| b == "beef prices").unwrap();
    assert!((model.idf(col) - ((7.0f64 / 4.0).ln() + 1.0)).abs() <= 1e-15);

    for (doc, row) in all.iter().zip(d["weights"].as_array().unwrap()) {
        let mut dense = vec![0.0; model.len()];
        for (c, w) in model.vectorize(doc) {
            dense[c] = w;
        }
        for (got, want) in dense.iter().zip(floats(row)) {
            assert!((got - want).abs() <= 1e-9);
        }
    }

    let k = model.len();
    let report = shift(&model, &before, &after, k).unwrap();
    let mb = floats(&d["mean_before"]);
    let ma = floats(&d["mean_after"]);
    let mut want: Vec<(f64, &str)> = (0..k).map(|i| (ma[i] - mb[i], vocab[i].as_str())).collect();
    want.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    for (e, (delta, name)) in report.emerging.iter().zip(&want) {
        assert_eq!(e.bigram.to_string(), *name);
        assert!((e.delta - delta).abs() <= 1e-9);
    }

    let swapped = shift(&model, &after, &before, k).unwrap();
    for (a, b) in report.emerging.iter().zip(&swapped.declining) {
        assert_eq!(a.bigram, b.bigram);
        assert_eq!(a.delta, -b.delta);
    }
}
