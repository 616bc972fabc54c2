use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{KeywordMatcher, PostKind, PostRecord};
use crate::month::{Month, MonthRange};

/// All posts of one community in one month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthBucket {
    pub community: String,
    pub month: Month,
    pub posts: Vec<PostRecord>,
    /// Posts in the community-month before keyword filtering.
    pub n_total_prefilter: usize,
    /// Posts that passed the keyword filter, before sampling.
    pub n_matched: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingCaps {
    pub submissions: usize,
    pub comments: usize,
}

impl Default for SamplingCaps {
    fn default() -> Self {
        Self {
            submissions: 200,
            comments: 800,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Bucketed {
    /// Sorted by (community, month).
    pub buckets: Vec<MonthBucket>,
    pub out_of_range: usize,
}

/// Groups posts into one bucket per (community, month) over `range`.
///
/// Every month of the range is emitted for every community, including months
/// without posts. `extra_communities` are emitted even if no post mentions
/// them. Posts outside the range are dropped and counted.
pub fn bucket_by_month(
    posts: &[PostRecord],
    range: MonthRange,
    extra_communities: &[String],
) -> Bucketed {
    let mut grouped: BTreeMap<String, BTreeMap<Month, Vec<PostRecord>>> = BTreeMap::new();
    for c in extra_communities {
        grouped.entry(c.clone()).or_default();
    }
    let mut out_of_range = 0;
    for post in posts {
        let months = grouped.entry(post.community.clone()).or_default();
        let month = post.month();
        if range.contains(month) {
            months.entry(month).or_default().push(post.clone());
        } else {
            out_of_range += 1;
        }
    }

    let mut buckets = Vec::with_capacity(grouped.len() * range.len());
    for (community, mut months) in grouped {
        for month in range.iter() {
            let posts = months.remove(&month).unwrap_or_default();
            buckets.push(MonthBucket {
                community: community.clone(),
                month,
                n_total_prefilter: posts.len(),
                n_matched: posts.len(),
                posts,
            });
        }
    }
    Bucketed {
        buckets,
        out_of_range,
    }
}

/// Applies the keyword filter inside a bucket, keeping the prefilter total.
pub fn filter_bucket(bucket: &MonthBucket, matcher: &KeywordMatcher) -> MonthBucket {
    let posts: Vec<PostRecord> = bucket
        .posts
        .iter()
        .filter(|p| matcher.matches(p))
        .cloned()
        .collect();
    MonthBucket {
        community: bucket.community.clone(),
        month: bucket.month,
        n_total_prefilter: bucket.n_total_prefilter,
        n_matched: posts.len(),
        posts,
    }
}

/// Caps submissions and comments independently by uniform sampling without
/// replacement.
///
/// Each (seed, community, month, kind) gets its own generator, so the sample of
/// one bucket never depends on which other buckets exist. Sampled posts keep
/// their original order.
pub fn sample_month(bucket: &MonthBucket, caps: SamplingCaps, seed: u64) -> MonthBucket {
    assert!(
        caps.submissions > 0 && caps.comments > 0,
        "caps must be positive"
    );
    let keep_subs = sample_kind(bucket, PostKind::Submission, caps.submissions, seed);
    let keep_comments = sample_kind(bucket, PostKind::Comment, caps.comments, seed);

    let mut sub_i = 0;
    let mut com_i = 0;
    let mut posts = Vec::new();
    for post in &bucket.posts {
        let (keep, i) = match post.kind {
            PostKind::Submission => (&keep_subs, &mut sub_i),
            PostKind::Comment => (&keep_comments, &mut com_i),
        };
        if keep.as_ref().is_none_or(|k| k.contains(i)) {
            posts.push(post.clone());
        }
        *i += 1;
    }
    MonthBucket {
        community: bucket.community.clone(),
        month: bucket.month,
        posts,
        n_total_prefilter: bucket.n_total_prefilter,
        n_matched: bucket.n_matched,
    }
}

/// Sorted indices (within the kind) to keep, or `None` if under the cap.
fn sample_kind(bucket: &MonthBucket, kind: PostKind, cap: usize, seed: u64) -> Option<Vec<usize>> {
    let n = bucket.posts.iter().filter(|p| p.kind == kind).count();
    if n <= cap {
        return None;
    }
    let mut rng = keyed_rng(seed, &bucket.community, bucket.month, kind);
    let mut picked = rand::seq::index::sample(&mut rng, n, cap).into_vec();
    picked.sort_unstable();
    Some(picked)
}

fn keyed_rng(seed: u64, community: &str, month: Month, kind: PostKind) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(community.as_bytes());
    h.update([0u8]);
    h.update(month.to_string().as_bytes());
    h.update(kind.as_str().as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::KeywordConfig;

    fn month(s: &str) -> Month {
        s.parse().unwrap()
    }

    fn post(id: usize, community: &str, kind: PostKind, created: i64) -> PostRecord {
        PostRecord {
            id: format!("{community}-{id}"),
            community: community.into(),
            kind,
            created,
            text: format!("post {id}"),
        }
    }

    fn bucket_with(subs: usize, comments: usize) -> MonthBucket {
        let m = month("2015-06");
        let t = m.first_instant() + 100;
        let mut posts: Vec<_> = (0..subs)
            .map(|i| post(i, "cars", PostKind::Submission, t))
            .collect();
        posts.extend((0..comments).map(|i| post(subs + i, "cars", PostKind::Comment, t)));
        MonthBucket {
            community: "cars".into(),
            month: m,
            n_total_prefilter: posts.len(),
            n_matched: posts.len(),
            posts,
        }
    }

    fn count(b: &MonthBucket, kind: PostKind) -> usize {
        b.posts.iter().filter(|p| p.kind == kind).count()
    }

    #[test]
    fn under_caps_unchanged() {
        let b = bucket_with(150, 500);
        assert_eq!(sample_month(&b, SamplingCaps::default(), 1), b);
    }

    #[test]
    fn caps_applied_deterministically() {
        let b = bucket_with(300, 1000);
        let s1 = sample_month(&b, SamplingCaps::default(), 42);
        let s2 = sample_month(&b, SamplingCaps::default(), 42);
        assert_eq!(count(&s1, PostKind::Submission), 200);
        assert_eq!(count(&s1, PostKind::Comment), 800);
        assert_eq!(s1, s2);
        assert_eq!(s1.n_total_prefilter, 1300);
        assert_eq!(s1.n_matched, 1300);
        let s3 = sample_month(&b, SamplingCaps::default(), 43);
        assert_ne!(s1.posts, s3.posts);
        // original order preserved
        let pos: Vec<_> = s1
            .posts
            .iter()
            .map(|p| b.posts.iter().position(|q| q == p).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sample_independent_of_other_communities() {
        let b = bucket_with(300, 10);
        let mut renamed = b.clone();
        renamed.community = "food".into();
        let a = sample_month(&b, SamplingCaps::default(), 7);
        let c = sample_month(&renamed, SamplingCaps::default(), 7);
        // same seed but different community key gives a different draw
        let ids = |x: &MonthBucket| x.posts.iter().map(|p| p.text.clone()).collect::<Vec<_>>();
        assert_ne!(ids(&a), ids(&c));
    }

    #[test]
    fn buckets_with_explicit_gaps() {
        let jan = month("2012-01");
        let posts = vec![
            post(
                0,
                "food",
                PostKind::Comment,
                jan.first_instant() + 14 * 86_400,
            ),
            post(
                1,
                "food",
                PostKind::Comment,
                month("2012-03").first_instant() + 86_400,
            ),
            post(
                2,
                "food",
                PostKind::Comment,
                month("2013-03").first_instant(),
            ),
        ];
        let range = MonthRange::new(jan, month("2012-03")).unwrap();
        let out = bucket_by_month(&posts, range, &[]);
        let sizes: Vec<_> = out.buckets.iter().map(|b| b.posts.len()).collect();
        assert_eq!(sizes, [1, 0, 1]);
        assert_eq!(out.out_of_range, 1);
    }

    #[test]
    fn month_boundary_is_utc() {
        let jan = month("2012-01");
        let posts = vec![post(0, "food", PostKind::Comment, jan.last_instant())];
        let range = MonthRange::new(jan, jan.succ()).unwrap();
        let out = bucket_by_month(&posts, range, &[]);
        assert_eq!(out.buckets[0].month, jan);
        assert_eq!(out.buckets[0].posts.len(), 1);
        assert_eq!(out.buckets[1].posts.len(), 0);
    }

    #[test]
    fn empty_input_gives_empty_buckets() {
        let range = MonthRange::new(month("2012-01"), month("2012-03")).unwrap();
        let out = bucket_by_month(&[], range, &["food".to_string()]);
        assert_eq!(out.buckets.len(), 3);
        assert!(out.buckets.iter().all(|b| b.posts.is_empty()));
        assert!(bucket_by_month(&[], range, &[]).buckets.is_empty());
    }

    #[test]
    fn bucket_totals_cover_in_range_posts() {
        let start = month("2012-01");
        let posts: Vec<_> = (0..200)
            .map(|i| {
                let c = ["food", "cars", "travel"][i % 3];
                post(
                    i,
                    c,
                    PostKind::Comment,
                    start.first_instant() + (i as i64) * 400_000,
                )
            })
            .collect();
        let range = MonthRange::new(start, month("2012-12")).unwrap();
        let out = bucket_by_month(&posts, range, &[]);
        let total: usize = out.buckets.iter().map(|b| b.posts.len()).sum();
        let in_range = posts.iter().filter(|p| range.contains(p.month())).count();
        assert_eq!(total, in_range);
        assert_eq!(total + out.out_of_range, posts.len());
    }

    #[test]
    fn filter_keeps_prefilter_total() {
        let m = month("2015-06");
        let mut b = bucket_with(0, 0);
        b.posts = vec![
            PostRecord {
                text: "prices up".into(),
                ..post(0, "cars", PostKind::Comment, m.first_instant())
            },
            PostRecord {
                text: "nice car".into(),
                ..post(1, "cars", PostKind::Comment, m.first_instant())
            },
        ];
        b.n_total_prefilter = 2;
        let f = filter_bucket(&b, &KeywordMatcher::new(&KeywordConfig::default()));
        assert_eq!(f.posts.len(), 1);
        assert_eq!(f.n_matched, 1);
        assert_eq!(f.n_total_prefilter, 2);
    }
}
