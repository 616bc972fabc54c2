//! Writes the synthetic corpus under `fixtures/synthetic/`.
//!
//! ```text
//! cargo run -p ris-cli --example make_fixture -- fixtures/synthetic
//! ```
//!
//! Five communities over 2012-01..2022-12. A latent monthly inflation rate
//! drives both the price index and, two months earlier, the share of
//! inflation-labelled posts, so the scores lead the index. Vocabulary in
//! inflation posts changes at the start of 2021.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::{Month, MonthRange};
use serde_json::json;

const SEED: u64 = 20240611;
const COMMUNITIES: [(&str, f64); 5] = [
    ("food", 0.00),
    ("cars", 0.05),
    ("RealEstate", 0.15),
    ("travel", -0.05),
    ("Frugal", 0.10),
];
const LEAD: i64 = 2;

/// Phrases of inflation posts: before the shift, after the shift.
fn inflation_phrases(community: &str) -> (&'static [&'static str], &'static [&'static str]) {
    match community {
        "food" => (
            &[
                "kobe beef dry aged steak looks delicious but the price",
                "dry aged kobe beef costs a fortune",
                "looks delicious but that price for kobe beef",
            ],
            &[
                "beef prices keep going up at the store",
                "hot dog prices doubled this year",
                "grocery prices are insane and beef prices too",
            ],
        ),
        "cars" => (
            &[
                "german cars cost more to maintain as a daily driver",
                "good deal on a daily driver but the price went up",
                "german cars are expensive to run",
            ],
            &[
                "used car prices went crazy with the chip shortage",
                "gas prices and used car prices keep climbing",
                "chip shortage means dealer markups over sticker price",
            ],
        ),
        "realestate" => (
            &[
                "closing costs keep rising and cash flow is thin",
                "property management costs eat the cash flow",
                "closing costs were higher than the estimate",
            ],
            &[
                "home prices and mortgage rates both rising",
                "mortgage rates jumped and home prices still climbing",
                "rising rate environment pushes home prices up",
            ],
        ),
        "travel" => (
            &[
                "round trip flights to california cost more now",
                "make sure you book the round trip early, prices in florida rise",
                "hotel cost in new york went up for our round trip",
            ],
            &[
                "rental prices in hawaii are out of control",
                "covid test plus rental prices made the florida trip expensive",
                "rental prices in california doubled since last year",
            ],
        ),
        _ => (
            &[
                "credit card rewards barely keep up with the cost of living",
                "way cheaper to cook but prices creep up on the credit card",
                "credit card bill higher because everything costs more",
            ],
            &[
                "dollar tree raised the price to a dollar and a quarter",
                "gas prices are killing the budget, dollar tree runs help",
                "gas prices and grocery costs forced us to cut back",
            ],
        ),
    }
}

const NEITHER: &[&str] = &[
    "what is a fair price for a good weekend in texas",
    "found a sale on winter tires, great deal",
    "how do you compare cost per unit at the store",
    "is the purchase worth it for a beginner in ohio",
    "love this recipe, cheap and happy family in colorado",
];

const DEFLATION: &[&str] = &[
    "prices finally dropping, great sale everywhere in oregon",
    "gas is cheap again, nice relief in texas",
    "prices fell so much, happy to buy now in nevada",
];

const OFF_TOPIC: &[&str] = &[
    "look at this photo from last weekend",
    "anyone else watching the game tonight",
    "my dog ate my homework again",
];

/// Monthly inflation rate in percent.
fn monthly_rate(m: Month, rng: &mut ChaCha8Rng) -> f64 {
    let year = m.year();
    let base = match year {
        ..=2019 => 0.15,
        2020 => {
            if (3..=5).contains(&m.month()) {
                -0.25
            } else {
                0.1
            }
        }
        2021 => 0.25 + 0.04 * m.month() as f64,
        _ => {
            if m.month() <= 6 {
                0.75
            } else {
                0.2
            }
        }
    };
    base + rng.random_range(-0.08..0.08)
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

fn main() {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "fixtures/synthetic".into()),
    );
    fs::create_dir_all(&out).expect("create output dir");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let start: Month = "2012-01".parse().unwrap();
    let end: Month = "2022-12".parse().unwrap();
    // two extra months so the lead is defined at the end
    let span = MonthRange::new(start.offset(-12), end.offset(LEAD)).unwrap();
    let rates: Vec<(Month, f64)> = span
        .iter()
        .map(|m| (m, monthly_rate(m, &mut rng)))
        .collect();
    let rate = |m: Month| {
        rates
            .iter()
            .find(|(k, _)| *k == m)
            .map(|(_, r)| *r)
            .unwrap()
    };
    let yoy = |m: Month| (0..12).map(|i| rate(m.offset(-i))).sum::<f64>();

    let mut cpi = String::from("DATE,VALUE\n");
    let mut mich = String::from("observation_date,MICH\n");
    let mut level = 226.665;
    for m in MonthRange::new(start, end).unwrap().iter() {
        level *= 1.0 + rate(m) / 100.0;
        writeln!(cpi, "{m}-01,{level:.3}").unwrap();
        if m == "2016-07".parse().unwrap() {
            writeln!(mich, "{m}-01,.").unwrap();
        } else {
            let e = 2.6 + 0.35 * yoy(m.offset(-1)) + rng.random_range(-0.15..0.15);
            writeln!(mich, "{m}-01,{e:.1}").unwrap();
        }
    }

    let shift: Month = "2021-01".parse().unwrap();
    let mut posts = String::new();
    let mut labels = String::from("post_id,label\n");
    let mut next_id = 0u32;
    let push = |posts: &mut String, rec: serde_json::Value| {
        posts.push_str(&rec.to_string());
        posts.push('\n');
    };
    for m in MonthRange::new(start.offset(-1), end).unwrap().iter() {
        for (community, offset) in COMMUNITIES {
            let key = community.to_lowercase();
            let (before, after) = inflation_phrases(&key);
            let phrases = if m >= shift { after } else { before };
            let signal = yoy(m.offset(LEAD)) / 100.0;
            let p_inflation = (0.12 + offset + 5.0 * signal).clamp(0.02, 0.9);
            let p_deflation = if signal < 0.012 { 0.18 } else { 0.06 };
            let n_sub = rng.random_range(2..=5);
            let n_com = rng.random_range(4..=8);
            let n_off = rng.random_range(0..=2);
            for i in 0..(n_sub + n_com + n_off) {
                next_id += 1;
                let id = format!("t{next_id:05}");
                let created = m.first_instant() + rng.random_range(0..27 * 86_400);
                let off_topic = i >= n_sub + n_com;
                let u: f64 = rng.random();
                let label = if u < p_inflation {
                    2
                } else if u < p_inflation + p_deflation {
                    0
                } else {
                    1
                };
                let mut text = if off_topic {
                    pick(&mut rng, OFF_TOPIC).to_string()
                } else {
                    match label {
                        2 => pick(&mut rng, phrases).to_string(),
                        0 => pick(&mut rng, DEFLATION).to_string(),
                        _ => pick(&mut rng, NEITHER).to_string(),
                    }
                };
                // some travel posts lack a U.S. destination and are filtered
                if key == "travel" && !off_topic && rng.random_range(0..6) == 0 {
                    text = "the price of a hostel in lisbon went up".into();
                }
                let subreddit = if rng.random_range(0..10) == 0 {
                    format!("r/{community}")
                } else {
                    community.to_string()
                };
                let rec = if i < n_sub || (off_topic && i % 2 == 0) {
                    json!({
                        "id": id,
                        "subreddit": subreddit,
                        "created_utc": created,
                        "title": text,
                        "selftext": "",
                    })
                } else {
                    json!({
                        "id": id,
                        "subreddit": subreddit,
                        "created_utc": created,
                        "body": text,
                    })
                };
                push(&mut posts, rec);
                writeln!(labels, "{id},{label}").unwrap();
            }
        }
    }
    // malformed lines and a duplicate exercise the parser's error accounting
    posts.push_str("{\"id\": \"broken\"\n");
    posts.push_str("not json at all\n");
    let first = posts.lines().next().unwrap().to_string();
    posts.push_str(&first);
    posts.push('\n');

    let lexicon = "\
# term\tvalence
good\t1.9
great\t3.1
nice\t1.8
love\t3.2
happy\t2.7
relief\t1.3
deal\t0.9
delicious\t2.7
fair\t1.3
worth\t0.9
expensive\t-1.2
insane\t-1.7
crazy\t-1.4
killing\t-3.4
forced\t-1.4
fortune\t1.2
thin\t-0.5
jumped\t0.2
out\t0.0
cut\t-1.1
shortage\t-1.4
doubled\t0.4
";

    fs::write(out.join("posts.jsonl"), posts).unwrap();
    fs::write(out.join("labels.csv"), labels).unwrap();
    fs::write(out.join("cpi.csv"), cpi).unwrap();
    fs::write(out.join("mich.csv"), mich).unwrap();
    fs::write(out.join("lexicon.tsv"), lexicon).unwrap();
}
