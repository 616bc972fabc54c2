use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{normalize_community, CorpusError, PostRecord};

const DEFAULT_PRICE_TERMS: [&str; 8] = [
    "price",
    "cost",
    "inflation",
    "deflation",
    "expensive",
    "cheap",
    "purchase",
    "sale",
];

const DEFAULT_GEO_TERMS: &str = include_str!("../../data/geo_terms.txt");

/// Search keywords used to select price-related posts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordConfig {
    pub price_terms: Vec<String>,
    /// Only consulted for communities listed in `geo_required`.
    pub geo_terms: Vec<String>,
    pub geo_required: BTreeSet<String>,
}

impl Default for KeywordConfig {
    fn default() -> Self {
        Self {
            price_terms: DEFAULT_PRICE_TERMS.iter().map(|s| s.to_string()).collect(),
            geo_terms: term_lines(DEFAULT_GEO_TERMS).collect(),
            geo_required: BTreeSet::from(["travel".to_string()]),
        }
    }
}

fn term_lines(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
}

impl KeywordConfig {
    /// Parses the sectioned plain-text format:
    ///
    /// ```text
    /// [price]
    /// price
    /// cost
    /// [geo]
    /// new york
    /// [geo_required]
    /// travel
    /// ```
    ///
    /// One term per line, `#` starts a comment line. Sections that are absent
    /// keep their defaults.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut sections: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !matches!(name, "price" | "geo" | "geo_required") {
                    return Err(CorpusError::KeywordConfig {
                        line: i + 1,
                        message: format!("unknown section [{name}]"),
                    });
                }
                sections.entry(name).or_default();
                current = Some(name);
                continue;
            }
            let Some(section) = current else {
                return Err(CorpusError::KeywordConfig {
                    line: i + 1,
                    message: "term outside of a section".into(),
                });
            };
            sections
                .entry(section)
                .or_default()
                .push(line.to_lowercase());
        }

        let mut cfg = Self::default();
        if let Some(terms) = sections.remove("price") {
            cfg.price_terms = terms;
        }
        if let Some(terms) = sections.remove("geo") {
            cfg.geo_terms = terms;
        }
        if let Some(names) = sections.remove("geo_required") {
            cfg.geo_required = names.iter().map(|n| normalize_community(n)).collect();
        }
        Ok(cfg)
    }
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize_lower(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Precompiled form of a [`KeywordConfig`].
///
/// Price terms match a token that starts with the term, so `price` matches
/// `prices` but `car` never matches inside `scarcity`. Geo terms match as
/// exact contiguous token sequences (`new york`, `u.s.` -> `u s`), which keeps
/// short city names such as `reno` from firing on `renovation`.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    price: Vec<String>,
    geo: Vec<Vec<String>>,
    geo_required: BTreeSet<String>,
}

impl KeywordMatcher {
    pub fn new(cfg: &KeywordConfig) -> Self {
        Self {
            price: cfg
                .price_terms
                .iter()
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
            geo: cfg
                .geo_terms
                .iter()
                .map(|t| tokenize_lower(t))
                .filter(|t| !t.is_empty())
                .collect(),
            geo_required: cfg.geo_required.clone(),
        }
    }

    pub fn has_price_term(&self, tokens: &[String]) -> bool {
        tokens
            .iter()
            .any(|tok| self.price.iter().any(|term| tok.starts_with(term.as_str())))
    }

    pub fn has_geo_term(&self, tokens: &[String]) -> bool {
        self.geo.iter().any(|term| {
            tokens
                .windows(term.len())
                .any(|w| w.iter().zip(term).all(|(a, b)| a == b))
        })
    }

    pub fn matches(&self, post: &PostRecord) -> bool {
        let tokens = tokenize_lower(&post.text);
        self.has_price_term(&tokens)
            && (!self.geo_required.contains(&post.community) || self.has_geo_term(&tokens))
    }
}

/// Kept and dropped counts per community.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub per_community: BTreeMap<String, (usize, usize)>,
}

impl FilterReport {
    pub fn kept(&self) -> usize {
        self.per_community.values().map(|(k, _)| k).sum()
    }

    pub fn dropped(&self) -> usize {
        self.per_community.values().map(|(_, d)| d).sum()
    }
}

/// Keeps price-related posts in input order.
pub fn filter_price_related(
    posts: &[PostRecord],
    cfg: &KeywordConfig,
) -> (Vec<PostRecord>, FilterReport) {
    let matcher = KeywordMatcher::new(cfg);
    let mut report = FilterReport::default();
    let mut kept = Vec::new();
    for post in posts {
        let entry = report
            .per_community
            .entry(post.community.clone())
            .or_default();
        if matcher.matches(post) {
            entry.0 += 1;
            kept.push(post.clone());
        } else {
            entry.1 += 1;
        }
    }
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::super::PostKind;
    use super::*;
    use proptest::prelude::*;

    fn post(community: &str, text: &str) -> PostRecord {
        PostRecord {
            id: text.to_string(),
            community: community.into(),
            kind: PostKind::Comment,
            created: 1_330_000_000,
            text: text.into(),
        }
    }

    #[test]
    fn default_terms() {
        let cfg = KeywordConfig::default();
        assert_eq!(cfg.price_terms.len(), 8);
        assert!(cfg.geo_terms.contains(&"new york".to_string()));
        assert!(cfg.geo_terms.contains(&"dc".to_string()));
        assert!(cfg.geo_terms.contains(&"amtrak".to_string()));
        assert!(cfg.geo_required.contains("travel"));
    }

    #[test]
    fn spec_examples() {
        let cfg = KeywordConfig::default();
        let posts = vec![
            post("cars", "gas prices are insane"),
            post("food", "best pizza downtown"),
            post("travel", "hotel cost in paris"),
            post("travel", "hotel cost in New York"),
        ];
        let (kept, report) = filter_price_related(&posts, &cfg);
        let texts: Vec<_> = kept.iter().map(|p| p.text.as_str()).collect();
        assert_eq!(texts, ["gas prices are insane", "hotel cost in New York"]);
        assert_eq!(report.per_community["travel"], (1, 1));
        assert_eq!(report.per_community["food"], (0, 1));
        assert_eq!(report.kept(), 2);
        assert_eq!(report.dropped(), 2);
    }

    #[test]
    fn token_boundaries() {
        let m = KeywordMatcher::new(&KeywordConfig {
            price_terms: vec!["car".into()],
            ..KeywordConfig::default()
        });
        assert!(!m.has_price_term(&tokenize_lower("scarcity is real")));
        assert!(m.has_price_term(&tokenize_lower("Cars are pricey")));
        let geo = KeywordMatcher::new(&KeywordConfig::default());
        assert!(!geo.has_geo_term(&tokenize_lower("renovation costs")));
        assert!(geo.has_geo_term(&tokenize_lower("flights to the U.S. are cheap")));
        assert!(geo.has_geo_term(&tokenize_lower("St. Louis in May")));
        assert!(!geo.has_geo_term(&tokenize_lower("new car in york")));
    }

    #[test]
    fn parse_config_file() {
        let text = "# comment\n[price]\nPrice\ncost\n\n[geo_required]\nr/Travel\nfood\n";
        let cfg = KeywordConfig::parse(text).unwrap();
        assert_eq!(cfg.price_terms, ["price", "cost"]);
        assert_eq!(cfg.geo_terms, KeywordConfig::default().geo_terms);
        assert_eq!(
            cfg.geo_required,
            BTreeSet::from(["travel".into(), "food".into()])
        );
        assert!(KeywordConfig::parse("price\n").is_err());
        assert!(KeywordConfig::parse("[nope]\nx\n").is_err());
    }

    fn arb_posts() -> impl Strategy<Value = Vec<PostRecord>> {
        let words = prop::sample::select(vec![
            "price", "prices", "cheap", "pizza", "the", "us", "texas", "paris", "new", "york",
            "sale", "car", "scarcity", "hotel",
        ]);
        let community = prop::sample::select(vec!["travel", "cars", "food"]);
        prop::collection::vec((community, prop::collection::vec(words, 0..8)), 0..30).prop_map(
            |v| {
                v.into_iter()
                    .enumerate()
                    .map(|(i, (c, ws))| PostRecord {
                        id: i.to_string(),
                        community: c.to_string(),
                        kind: PostKind::Submission,
                        created: 1_330_000_000,
                        text: ws.join(" "),
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #[test]
        fn filter_is_idempotent(posts in arb_posts()) {
            let cfg = KeywordConfig::default();
            let (once, _) = filter_price_related(&posts, &cfg);
            let (twice, _) = filter_price_related(&once, &cfg);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn geo_filter_is_a_subset(posts in arb_posts()) {
            let with_geo = KeywordConfig::default();
            let without_geo = KeywordConfig { geo_required: BTreeSet::new(), ..KeywordConfig::default() };
            let (a, _) = filter_price_related(&posts, &with_geo);
            let (b, _) = filter_price_related(&posts, &without_geo);
            for p in &a {
                prop_assert!(b.contains(p));
            }
        }
    }
}
