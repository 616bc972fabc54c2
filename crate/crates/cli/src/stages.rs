//! Pipeline stages. Each reads the previous stage's artifacts from the output
//! directory and writes its own.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use ris_core::changepoint::{pelt, scan_csv, sensitivity_scan, CommunityScan, PenaltyConfig};
use ris_core::classify::{
    classify_batch, ClassifierBackend, HttpTransport, LabelFileBackend, Lexicon, RemoteBackend,
    RemoteConfig, ScoredPost,
};
use ris_core::corpus::{
    bucket_by_month, filter_bucket, parse_posts, sample_month, KeywordConfig, KeywordMatcher,
    MonthBucket, PostRecord,
};
use ris_core::index::{
    aggregate_ris, moving_average, sentiment_baseline, subreddit_ris, volume_share, MonthlySeries,
    SeriesUnit,
};
use ris_core::lexshift::{period_docs, shift, Stopwords, TfidfModel};
use ris_core::stats::{align, granger, pearson, read_indicator_csv, spearman};
use ris_core::{Month, MonthRange};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ClassifierSection, PipelineConfig};
use crate::provenance::Provenance;
use crate::svg::Chart;

/// Artifact locations inside the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
    pub fn posts(&self) -> PathBuf {
        self.root.join("posts.jsonl")
    }
    pub fn buckets(&self) -> PathBuf {
        self.root.join("buckets.csv")
    }
    pub fn scored(&self) -> PathBuf {
        self.root.join("scored.jsonl")
    }
    pub fn series_dir(&self) -> PathBuf {
        self.root.join("series")
    }
    pub fn series_csv(&self, name: &str) -> PathBuf {
        self.series_dir().join(format!("{name}.csv"))
    }
    pub fn series_json(&self) -> PathBuf {
        self.root.join("series.json")
    }
    pub fn validation(&self) -> PathBuf {
        self.root.join("validation.json")
    }
    pub fn changepoints(&self) -> PathBuf {
        self.root.join("changepoints.csv")
    }
    pub fn charts_dir(&self) -> PathBuf {
        self.root.join("charts")
    }
    pub fn changepoint_chart(&self, community: &str) -> PathBuf {
        self.charts_dir()
            .join(format!("changepoints_{}.svg", file_stem(community)))
    }
    pub fn lexshift(&self) -> PathBuf {
        self.root.join("lexshift.csv")
    }
    pub fn report(&self) -> PathBuf {
        self.root.join("report.json")
    }
    pub fn report_chart(&self) -> PathBuf {
        self.charts_dir().join("ris.svg")
    }
}

/// Replaces anything but `[a-z0-9_]` so names are safe as file stems.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Artifact of an earlier stage that is not on disk.
#[derive(Debug)]
pub struct MissingArtifact {
    pub path: PathBuf,
    pub producer: &'static str,
}

impl std::fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "missing artifact {}; run `ris {}` first",
            self.path.display(),
            self.producer
        )
    }
}

impl std::error::Error for MissingArtifact {}

fn require(path: PathBuf, producer: &'static str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(MissingArtifact { path, producer }.into())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, prov: &Provenance, rows: &[T]) -> Result<()> {
    let mut out = prov.jsonl_line();
    for row in rows {
        out.push_str(&serde_json::to_string(row)?);
        out.push('\n');
    }
    write_file(path, &out)
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || (i == 0 && Provenance::from_jsonl_line(&line).is_some()) {
            continue;
        }
        rows.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    Ok(rows)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Comment lines are skipped by every CSV reader in the pipeline.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub lines: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub out_of_range: usize,
    pub matched: usize,
    pub sampled: usize,
    pub communities: usize,
}

/// Parses, filters, buckets and samples the corpus.
///
/// Writes `posts.jsonl` (sampled posts) and `buckets.csv` (per community-month
/// counts before filtering, after filtering and after sampling).
pub fn ingest(cfg: &PipelineConfig, out: &Layout) -> Result<IngestSummary> {
    let mut posts = Vec::new();
    let (mut lines, mut malformed, mut duplicates) = (0, 0, 0);
    for path in &cfg.paths.corpus {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let parsed = parse_posts(BufReader::new(file), &cfg.corpus.fields)
            .with_context(|| format!("parsing {}", path.display()))?;
        lines += parsed.lines;
        malformed += parsed.malformed;
        duplicates += parsed.duplicates;
        posts.extend(parsed.records);
    }
    // the same id in two files keeps its first occurrence
    let mut seen = std::collections::HashSet::new();
    let before = posts.len();
    posts.retain(|p| seen.insert(p.id.clone()));
    duplicates += before - posts.len();

    let keywords = keyword_config(cfg)?;
    let matcher = KeywordMatcher::new(&keywords);
    let extra: Vec<String> = cfg
        .corpus
        .communities
        .iter()
        .map(|c| ris_core::corpus::normalize_community(c))
        .collect();
    let bucketed = bucket_by_month(&posts, cfg.corpus.range, &extra);
    let sampled: Vec<MonthBucket> = bucketed
        .buckets
        .iter()
        .map(|b| sample_month(&filter_bucket(b, &matcher), cfg.sampling, cfg.seed))
        .collect();

    let prov = Provenance::new("ingest", cfg);
    let kept: Vec<&PostRecord> = sampled.iter().flat_map(|b| &b.posts).collect();
    write_jsonl(&out.posts(), &prov, &kept)?;
    let mut csv = prov.csv_header();
    csv.push_str("community,month,n_total_prefilter,n_matched,n_sampled\n");
    for b in &sampled {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            b.community,
            b.month,
            b.n_total_prefilter,
            b.n_matched,
            b.posts.len()
        ));
    }
    write_file(&out.buckets(), &csv)?;

    Ok(IngestSummary {
        lines,
        malformed,
        duplicates,
        out_of_range: bucketed.out_of_range,
        matched: sampled.iter().map(|b| b.n_matched).sum(),
        sampled: kept.len(),
        communities: sampled
            .iter()
            .map(|b| &b.community)
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
    })
}

/// Bucket counts written by [`ingest`], with empty post lists.
pub fn read_bucket_counts(path: &Path) -> Result<Vec<MonthBucket>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (line, row) in data_lines(&text) {
        if row.starts_with("community,") {
            continue;
        }
        let err = || format!("{} line {line}: malformed row {row:?}", path.display());
        let cols: Vec<&str> = row.split(',').collect();
        let [community, month, total, matched, _sampled] = cols[..] else {
            bail!(err());
        };
        out.push(MonthBucket {
            community: community.to_string(),
            month: month.parse().with_context(err)?,
            posts: Vec::new(),
            n_total_prefilter: total.parse().with_context(err)?,
            n_matched: matched.parse().with_context(err)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifySummary {
    pub posts: usize,
    pub failures: usize,
    pub label_counts: [usize; 3],
}

fn backend(cfg: &PipelineConfig) -> Result<Box<dyn ClassifierBackend>> {
    match &cfg.classifier {
        ClassifierSection::Labels => {
            let mut all = LabelFileBackend::default();
            for path in &cfg.paths.labels {
                let file =
                    File::open(path).with_context(|| format!("opening {}", path.display()))?;
                all.merge(
                    LabelFileBackend::read(BufReader::new(file))
                        .with_context(|| format!("reading {}", path.display()))?,
                );
            }
            Ok(Box::new(all))
        }
        ClassifierSection::Remote(r) => {
            let mut rc = RemoteConfig::new(r.url.clone()).with_token_env(&r.token_env);
            rc.attempts = r.attempts;
            rc.max_in_flight = r.max_in_flight;
            rc.requests_per_second = r.requests_per_second;
            rc.backoff = Duration::from_millis(r.backoff_ms);
            let transport = HttpTransport::new(Duration::from_secs(r.timeout_secs));
            Ok(Box::new(RemoteBackend::with_transport(
                rc,
                Box::new(transport),
            )))
        }
    }
}

/// Labels every sampled post and writes `scored.jsonl`.
pub fn classify(cfg: &PipelineConfig, out: &Layout) -> Result<ClassifySummary> {
    let posts: Vec<PostRecord> = read_jsonl(&require(out.posts(), "ingest")?)?;
    let backend = backend(cfg)?;
    let outcome = classify_batch(backend.as_ref(), &posts)?;
    let mut label_counts = [0; 3];
    for s in &outcome.scored {
        label_counts[s.label().index()] += 1;
    }
    write_jsonl(
        &out.scored(),
        &Provenance::new("classify", cfg),
        &outcome.scored,
    )?;
    Ok(ClassifySummary {
        posts: posts.len(),
        failures: outcome.failures,
        label_counts,
    })
}

fn read_scored(out: &Layout) -> Result<Vec<ScoredPost>> {
    read_jsonl(&require(out.scored(), "classify")?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreSummary {
    pub series: Vec<String>,
}

pub const AGGREGATE: &str = "ris_aggregate";

fn smoothed_name(name: &str, window: usize) -> String {
    if window == 1 {
        name.to_string()
    } else {
        format!("{name}_ma{window}")
    }
}

/// Communities in bucket order.
fn communities(buckets: &[MonthBucket]) -> Vec<String> {
    let mut names: Vec<String> = buckets.iter().map(|b| b.community.clone()).collect();
    names.dedup();
    names
}

/// Builds the score series and both baselines, raw and smoothed.
///
/// Writes one CSV per series under `series/` and all of them as a JSON array
/// in `series.json`.
pub fn score(cfg: &PipelineConfig, out: &Layout) -> Result<ScoreSummary> {
    let scored = read_scored(out)?;
    let buckets = read_bucket_counts(&require(out.buckets(), "ingest")?)?;
    let lexicon = {
        let path = &cfg.paths.lexicon;
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Lexicon::read(BufReader::new(file))
            .with_context(|| format!("reading {}", path.display()))?
    };
    let w = cfg.index.smoothing_window;

    let mut all = Vec::new();
    for community in communities(&buckets) {
        let s =
            subreddit_ris(&scored, &community).with_name(format!("ris_{}", file_stem(&community)));
        all.push(moving_average(&s, w));
        all.push(s);
    }
    let posts: Vec<PostRecord> = scored.iter().map(|s| s.post.clone()).collect();
    for s in [
        aggregate_ris(&scored),
        volume_share(&buckets),
        sentiment_baseline(&posts, &lexicon),
    ] {
        all.push(moving_average(&s, w));
        all.push(s);
    }
    if w == 1 {
        all.dedup_by(|a, b| a.name == b.name);
    }

    let prov = Provenance::new("score", cfg);
    for s in &all {
        let mut text = prov.csv_header();
        text.push_str(&s.to_csv());
        write_file(&out.series_csv(&s.name), &text)?;
    }
    write_json(
        &out.series_json(),
        &json!({ "provenance": prov.json_value(), "series": all }),
    )?;
    Ok(ScoreSummary {
        series: all.into_iter().map(|s| s.name).collect(),
    })
}

fn read_series(out: &Layout, name: &str, unit: SeriesUnit) -> Result<MonthlySeries> {
    let path = require(out.series_csv(name), "score")?;
    let file = File::open(&path)?;
    MonthlySeries::read_csv(BufReader::new(file), name, unit)
        .with_context(|| format!("reading {}", path.display()))
}

fn read_indicators(cfg: &PipelineConfig) -> Result<Vec<MonthlySeries>> {
    cfg.indicators
        .iter()
        .map(|spec| {
            let file = File::open(&spec.path)
                .with_context(|| format!("opening {}", spec.path.display()))?;
            let raw = read_indicator_csv(file, &spec.name, SeriesUnit::Index)
                .with_context(|| format!("reading {}", spec.path.display()))?;
            Ok(spec.transform.apply(&raw))
        })
        .collect()
}

/// Signals compared against the indicators.
pub fn signal_names(cfg: &PipelineConfig, smoothed: bool) -> Vec<String> {
    let w = if smoothed {
        cfg.index.smoothing_window
    } else {
        1
    };
    [AGGREGATE, "volume_share", "sentiment"]
        .iter()
        .map(|n| smoothed_name(n, w))
        .collect()
}

fn signal_unit(name: &str) -> SeriesUnit {
    if name.starts_with("volume_share") {
        SeriesUnit::Fraction
    } else {
        SeriesUnit::Score
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateSummary {
    pub pairs: usize,
    pub tests: usize,
}

/// Correlations and Granger tests of every signal against every indicator.
///
/// `smoothed` overrides `analysis.smoothed` when given.
pub fn validate(
    cfg: &PipelineConfig,
    out: &Layout,
    smoothed: Option<bool>,
) -> Result<ValidateSummary> {
    if cfg.indicators.is_empty() {
        bail!(crate::config::ConfigError(
            "validate needs at least one [[indicator]]".into()
        ));
    }
    let smoothed = smoothed.unwrap_or(cfg.analysis.smoothed);
    let indicators = read_indicators(cfg)?;
    let mut pairs = Vec::new();
    let mut tests = 0;
    for name in signal_names(cfg, smoothed) {
        let signal = read_series(out, &name, signal_unit(&name))?;
        for ind in &indicators {
            let pair = align(&signal, ind, cfg.analysis.window)?;
            let mut lags = Vec::new();
            for &lag in &cfg.analysis.lags {
                let (forward, backward) = granger(&pair, lag).with_context(|| {
                    format!(
                        "granger test {} vs {} at lag {lag}",
                        pair.x_name, pair.y_name
                    )
                })?;
                tests += 2;
                lags.push(json!({ "lag": lag, "forward": forward, "backward": backward }));
            }
            let r = pearson(&pair)?;
            let rho = spearman(&pair)?;
            tests += 2;
            pairs.push(json!({
                "signal": pair.x_name,
                "indicator": pair.y_name,
                "n": pair.len(),
                "first_month": pair.months.first(),
                "last_month": pair.months.last(),
                "pearson": r,
                "spearman": rho,
                "granger": lags,
            }));
        }
    }
    let n = pairs.len();
    write_json(
        &out.validation(),
        &json!({
            "provenance": Provenance::new("validate", cfg).json_value(),
            "smoothed": smoothed,
            "window": cfg.analysis.window,
            "pairs": pairs,
        }),
    )?;
    Ok(ValidateSummary { pairs: n, tests })
}

#[derive(Debug, Clone, Serialize)]
pub struct FocusMatch {
    pub community: String,
    pub focus: Month,
    /// `None` when the reference segmentation has no changepoint.
    pub nearest: Option<Month>,
    pub distance_months: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChangepointSummary {
    pub communities: Vec<String>,
    /// Communities with too few observed months to segment.
    pub skipped: Vec<String>,
    pub focus: Vec<FocusMatch>,
}

/// Changepoint nearest to `focus`; the earlier one on a tie.
pub fn nearest_changepoint(changepoints: &[Month], focus: Month) -> Option<Month> {
    changepoints
        .iter()
        .copied()
        .min_by_key(|m| (m.months_until(focus).abs(), *m))
}

/// Series segmented by the changepoint stage: every community and the
/// aggregate, labelled by community name.
fn segmented_series(
    cfg: &PipelineConfig,
    out: &Layout,
    buckets: &[MonthBucket],
) -> Result<Vec<(String, MonthlySeries)>> {
    let w = if cfg.changepoint.smoothed {
        cfg.index.smoothing_window
    } else {
        1
    };
    let mut list = Vec::new();
    for c in communities(buckets) {
        let name = smoothed_name(&format!("ris_{}", file_stem(&c)), w);
        list.push((c, read_series(out, &name, SeriesUnit::Score)?));
    }
    list.push((
        "aggregate".to_string(),
        read_series(out, &smoothed_name(AGGREGATE, w), SeriesUnit::Score)?,
    ));
    Ok(list)
}

/// Sensitivity scan over the configured `(c, m)` grid plus the reference
/// setting. Writes `changepoints.csv` and one chart per community.
pub fn changepoint(
    cfg: &PipelineConfig,
    out: &Layout,
    focus: Option<Month>,
) -> Result<ChangepointSummary> {
    let buckets = read_bucket_counts(&require(out.buckets(), "ingest")?)?;
    let cp = &cfg.changepoint;
    let focus = focus.or(cp.focus);
    let mut cs = cp.cs.clone();
    cs.push(cp.reference.c);
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    let mut ms = cp.ms.clone();
    ms.push(cp.reference.m);
    ms.sort_unstable();
    ms.dedup();
    let reference: PenaltyConfig = cp.reference.into();

    let prov = Provenance::new("changepoint", cfg);
    let mut scans = Vec::new();
    let mut summary = ChangepointSummary {
        communities: Vec::new(),
        skipped: Vec::new(),
        focus: Vec::new(),
    };
    for (community, series) in segmented_series(cfg, out, &buckets)? {
        let (months, values): (Vec<Month>, Vec<f64>) = series.observed().unzip();
        if values.len() < ms.iter().copied().max().unwrap_or(1) {
            summary.skipped.push(community);
            continue;
        }
        let rows = sensitivity_scan(&values, &cs, &ms)
            .with_context(|| format!("segmenting {community}"))?;
        let seg = pelt(&values, &reference)?;
        let markers = seg.changepoint_months(&months);
        let highlight = focus.and_then(|f| nearest_changepoint(&markers, f));
        if let Some(f) = focus {
            summary.focus.push(FocusMatch {
                community: community.clone(),
                focus: f,
                nearest: highlight,
                distance_months: highlight.map(|m| m.months_until(f).abs()),
            });
        }
        let chart = Chart {
            title: format!("{} (c = {}, m = {})", series.name, reference.c, reference.m),
            series: vec![&series],
            markers,
            highlight,
        };
        write_file(&out.changepoint_chart(&community), &chart.render(&prov))?;
        summary.communities.push(community.clone());
        scans.push(CommunityScan {
            community,
            months,
            rows,
        });
    }
    let mut csv = prov.csv_header();
    csv.push_str(&scan_csv(&scans));
    write_file(&out.changepoints(), &csv)?;
    Ok(summary)
}

/// One row of `changepoints.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub community: String,
    pub c: f64,
    pub m: usize,
    pub n_changepoints: usize,
    pub dates: Vec<Month>,
}

pub fn read_scan_csv(path: &Path) -> Result<Vec<ScanRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (line, row) in data_lines(&text) {
        if row.starts_with("community,") {
            continue;
        }
        let err = || format!("{} line {line}: malformed row {row:?}", path.display());
        let cols: Vec<&str> = row.split(',').collect();
        let [community, c, m, n, dates] = cols[..] else {
            bail!(err());
        };
        let dates: Vec<Month> = dates
            .split(';')
            .filter(|d| !d.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(err)?;
        let rec = ScanRecord {
            community: community.to_string(),
            c: c.parse().with_context(err)?,
            m: m.parse().with_context(err)?,
            n_changepoints: n.parse().with_context(err)?,
            dates,
        };
        if rec.n_changepoints != rec.dates.len() {
            bail!(err());
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LexshiftSummary {
    pub before_docs: usize,
    pub after_docs: usize,
    pub vocabulary: usize,
}

fn keyword_config(cfg: &PipelineConfig) -> Result<KeywordConfig> {
    Ok(match &cfg.paths.keywords {
        Some(path) => KeywordConfig::parse(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?,
        None => KeywordConfig::default(),
    })
}

/// TF-IDF shift between the configured windows. Writes `lexshift.csv`.
pub fn lexshift(cfg: &PipelineConfig, out: &Layout) -> Result<LexshiftSummary> {
    let scored = read_scored(out)?;
    let stopwords = match &cfg.paths.stopwords {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Stopwords::read(BufReader::new(file))?
        }
        None => Stopwords::english(),
    }
    // the search keywords would otherwise dominate every period
    .with(keyword_config(cfg)?.price_terms);
    let ls = &cfg.lexshift;
    let community = ls
        .community
        .as_deref()
        .map(ris_core::corpus::normalize_community);
    let docs = |range: MonthRange| period_docs(&scored, community.as_deref(), range, &stopwords);
    let (before, after) = (docs(ls.before), docs(ls.after));
    let union: Vec<Vec<String>> = before.iter().chain(&after).cloned().collect();
    let model = TfidfModel::fit(&union, ls.params())?;
    let report = shift(&model, &before, &after, ls.top_k)?;
    let mut csv = Provenance::new("lexshift", cfg).csv_header();
    csv.push_str(&report.to_csv());
    write_file(&out.lexshift(), &csv)?;
    Ok(LexshiftSummary {
        before_docs: before.len(),
        after_docs: after.len(),
        vocabulary: model.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub path: PathBuf,
}

fn read_shift_csv(path: &Path) -> Result<Vec<Value>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (line, row) in data_lines(&text) {
        if row.starts_with("bigram,") {
            continue;
        }
        let cols: Vec<&str> = row.split(',').collect();
        let [bigram, before, after, delta, period] = cols[..] else {
            bail!("{} line {line}: malformed row {row:?}", path.display());
        };
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .with_context(|| format!("{} line {line}: bad number {s:?}", path.display()))
        };
        rows.push(json!({
            "bigram": bigram,
            "mean_before": num(before)?,
            "mean_after": num(after)?,
            "delta": num(delta)?,
            "period": period,
        }));
    }
    Ok(rows)
}

/// Combines the stage artifacts into `report.json` and draws the aggregate
/// score chart.
pub fn report(cfg: &PipelineConfig, out: &Layout, focus: Option<Month>) -> Result<ReportSummary> {
    let focus = focus.or(cfg.changepoint.focus);
    let series_json = read_json(&require(out.series_json(), "score")?)?;
    let validation = read_json(&require(out.validation(), "validate")?)?;
    let scans = read_scan_csv(&require(out.changepoints(), "changepoint")?)?;
    let shifts = read_shift_csv(&require(out.lexshift(), "lexshift")?)?;
    let buckets = read_bucket_counts(&require(out.buckets(), "ingest")?)?;

    let reference = cfg.changepoint.reference;
    let reference_dates = |community: &str| -> Vec<Month> {
        scans
            .iter()
            .find(|r| r.community == community && r.c == reference.c && r.m == reference.m)
            .map(|r| r.dates.clone())
            .unwrap_or_default()
    };
    let mut by_community: BTreeMap<String, Value> = BTreeMap::new();
    for r in &scans {
        let dates = reference_dates(&r.community);
        let nearest = focus.and_then(|f| nearest_changepoint(&dates, f));
        by_community.insert(
            r.community.clone(),
            json!({
                "reference_changepoints": dates,
                "nearest_to_focus": nearest,
            }),
        );
    }

    let mut coverage: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for b in &buckets {
        let e = coverage.entry(b.community.clone()).or_default();
        e.0 += b.n_total_prefilter;
        e.1 += b.n_matched;
    }
    let posts: Vec<PostRecord> = read_jsonl(&require(out.posts(), "ingest")?)?;
    for p in &posts {
        if let Some(e) = coverage.get_mut(&p.community) {
            e.2 += 1;
        }
    }
    let coverage: Vec<Value> = coverage
        .into_iter()
        .map(|(c, (total, matched, sampled))| {
            json!({ "community": c, "posts": total, "matched": matched, "sampled": sampled })
        })
        .collect();

    let series_names: Vec<Value> = series_json["series"]
        .as_array()
        .map(|a| a.iter().map(|s| s["name"].clone()).collect())
        .unwrap_or_default();

    let prov = Provenance::new("report", cfg);
    write_json(
        &out.report(),
        &json!({
            "provenance": prov.json_value(),
            "coverage": coverage,
            "series": series_names,
            "validation": validation["pairs"],
            "changepoints": {
                "reference": { "c": reference.c, "m": reference.m },
                "focus": focus,
                "communities": by_community,
                "scan": scans,
            },
            "lexshift": shifts,
        }),
    )?;

    let raw = read_series(out, AGGREGATE, SeriesUnit::Score)?;
    let smooth_name = smoothed_name(AGGREGATE, cfg.index.smoothing_window);
    let smooth = read_series(out, &smooth_name, SeriesUnit::Score)?;
    let markers = reference_dates("aggregate");
    let highlight = focus.and_then(|f| nearest_changepoint(&markers, f));
    let mut series = vec![&raw];
    if smooth_name != AGGREGATE {
        series.push(&smooth);
    }
    let chart = Chart {
        title: "Aggregate inflation score".into(),
        series,
        markers,
        highlight,
    };
    write_file(&out.report_chart(), &chart.render(&prov))?;
    Ok(ReportSummary { path: out.report() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Month {
        s.parse().unwrap()
    }

    #[test]
    fn nearest_prefers_earlier_on_tie() {
        let cps = [m("2020-01"), m("2020-05")];
        assert_eq!(nearest_changepoint(&cps, m("2020-03")), Some(m("2020-01")));
        assert_eq!(nearest_changepoint(&cps, m("2020-04")), Some(m("2020-05")));
        assert_eq!(nearest_changepoint(&[], m("2020-04")), None);
    }

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("personalfinance"), "personalfinance");
        assert_eq!(file_stem("Ask Me/Now"), "_sk__e__ow");
    }

    #[test]
    fn scan_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.csv");
        let text = "# stage: changepoint\ncommunity,c,m,n_changepoints,dates\n\
                    food,0.5,2,2,2020-03;2021-06\nfood,2,2,0,\n";
        fs::write(&path, text).unwrap();
        let rows = read_scan_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].dates, [m("2020-03"), m("2021-06")]);
        assert_eq!(rows[1].c, 2.0);
        assert!(rows[1].dates.is_empty());

        fs::write(&path, "food,0.5,2,3,2020-03\n").unwrap();
        assert!(read_scan_csv(&path).is_err());
    }

    #[test]
    fn bucket_counts_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        fs::write(
            &path,
            "# seed: 1\ncommunity,month,n_total_prefilter,n_matched,n_sampled\nfood,2020-01,10,4,3\n",
        )
        .unwrap();
        let b = read_bucket_counts(&path).unwrap();
        assert_eq!(b[0].n_total_prefilter, 10);
        assert_eq!(b[0].n_matched, 4);
        assert_eq!(b[0].month, m("2020-01"));
    }

    #[test]
    fn missing_artifact_names_producer() {
        let err = require(PathBuf::from("/nonexistent/scored.jsonl"), "classify").unwrap_err();
        assert!(err.to_string().contains("run `ris classify` first"));
        assert!(err.downcast_ref::<MissingArtifact>().is_some());
    }
}
