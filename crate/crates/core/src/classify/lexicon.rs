//! Rule-based compound sentiment score over a valence lexicon.
//!
//! Implements the core of the VADER scoring rules: per-token valences, a
//! negation flip for negators within the three preceding tokens, booster words
//! with distance damping, and ALL-CAPS emphasis. Punctuation emphasis, the
//! "but" contrast rule and idioms are not applied.

use std::collections::HashMap;
use std::io::BufRead;

use super::ClassifyError;

const NEGATION_SCALAR: f64 = -0.74;
const BOOSTER_INCREMENT: f64 = 0.293;
const BOOSTER_DECREMENT: f64 = -0.293;
const CAPS_INCREMENT: f64 = 0.733;
const NORMALIZATION_ALPHA: f64 = 15.0;

const NEGATORS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "dont", "hadnt",
    "hasnt", "havent", "isnt", "mightnt", "mustnt", "neither", "neednt", "never", "none", "nope",
    "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent",
    "without", "wont", "wouldnt", "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely",
    "amazingly",
    "awfully",
    "completely",
    "considerably",
    "decidedly",
    "deeply",
    "enormously",
    "entirely",
    "especially",
    "exceptionally",
    "extremely",
    "fabulously",
    "greatly",
    "highly",
    "hugely",
    "incredibly",
    "intensely",
    "majorly",
    "more",
    "most",
    "particularly",
    "purely",
    "quite",
    "really",
    "remarkably",
    "so",
    "substantially",
    "thoroughly",
    "totally",
    "tremendously",
    "uber",
    "unbelievably",
    "unusually",
    "utterly",
    "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost",
    "barely",
    "hardly",
    "kinda",
    "less",
    "little",
    "marginally",
    "occasionally",
    "partly",
    "scarcely",
    "slightly",
    "somewhat",
    "sorta",
];

/// Term to valence map. Keys are lowercase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
}

impl Lexicon {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        Self {
            valences: pairs
                .into_iter()
                .map(|(t, v)| (t.as_ref().to_lowercase(), v))
                .collect(),
        }
    }

    /// Reads `term<TAB>valence` lines. Extra tab-separated columns (as in the
    /// distributed VADER lexicon) are ignored; `#` lines are comments.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, ClassifyError> {
        let mut valences = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let term = cols.next().unwrap_or_default().trim();
            let value = cols.next().ok_or_else(|| ClassifyError::Lexicon {
                line: i + 1,
                message: "expected term<TAB>valence".into(),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| ClassifyError::Lexicon {
                line: i + 1,
                message: format!("invalid valence {value:?}"),
            })?;
            valences.insert(term.to_lowercase(), value);
        }
        Ok(Self { valences })
    }

    pub fn get(&self, term: &str) -> Option<f64> {
        self.valences.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

struct Token<'a> {
    raw: &'a str,
    lower: String,
}

impl Token<'_> {
    fn is_shouting(&self) -> bool {
        self.raw.chars().any(char::is_alphabetic) && !self.raw.chars().any(char::is_lowercase)
    }
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation() && c != '\''))
        .filter(|w| !w.is_empty())
        .map(|raw| Token {
            raw,
            lower: raw.to_lowercase(),
        })
        .collect()
}

fn is_negator(lower: &str) -> bool {
    let stripped: String = lower.chars().filter(|&c| c != '\'' && c != '’').collect();
    NEGATORS.contains(&stripped.as_str()) || lower.contains("n't")
}

fn booster_scalar(tok: &Token<'_>, valence: f64, caps_differ: bool) -> f64 {
    let mut scalar = if BOOSTERS_UP.contains(&tok.lower.as_str()) {
        BOOSTER_INCREMENT
    } else if BOOSTERS_DOWN.contains(&tok.lower.as_str()) {
        BOOSTER_DECREMENT
    } else {
        return 0.0;
    };
    if valence < 0.0 {
        scalar = -scalar;
    }
    if caps_differ && tok.is_shouting() {
        scalar += if valence > 0.0 {
            CAPS_INCREMENT
        } else {
            -CAPS_INCREMENT
        };
    }
    scalar
}

/// Compound score `s / sqrt(s^2 + 15)` of the summed adjusted valences.
pub fn lexicon_compound(text: &str, lexicon: &Lexicon) -> f64 {
    let toks = tokens(text);
    let shouting = toks.iter().filter(|t| t.is_shouting()).count();
    let caps_differ = shouting > 0 && shouting < toks.len();

    let mut sum = 0.0;
    for (i, tok) in toks.iter().enumerate() {
        if BOOSTERS_UP.contains(&tok.lower.as_str()) || BOOSTERS_DOWN.contains(&tok.lower.as_str())
        {
            continue;
        }
        let Some(mut valence) = lexicon.get(&tok.lower) else {
            continue;
        };
        if caps_differ && tok.is_shouting() {
            valence += if valence > 0.0 {
                CAPS_INCREMENT
            } else {
                -CAPS_INCREMENT
            };
        }
        for dist in 1..=3usize.min(i) {
            let prev = &toks[i - dist];
            if lexicon.get(&prev.lower).is_none() {
                let damping = [1.0, 0.95, 0.9][dist - 1];
                valence += booster_scalar(prev, valence, caps_differ) * damping;
            }
            if is_negator(&prev.lower) {
                valence *= NEGATION_SCALAR;
            }
        }
        sum += valence;
    }
    normalize(sum)
}

fn normalize(sum: f64) -> f64 {
    (sum / (sum * sum + NORMALIZATION_ALPHA).sqrt()).clamp(-1.0, 1.0)
}
