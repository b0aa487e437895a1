//! Independent oracles shared by the integration tests: definitional
//! convolution and pooling written straight from the 1-based formulas,
//! central finite differences, and a synthetic news-style corpus.

#![allow(dead_code)]

pub mod checks;

use rand::seq::IndexedRandom;
use rand::Rng;

use chartcn::trainer::TextExample;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;

/// `h_j(y) = Σ_i Σ_{x=1..k} f_ij(x) · g_i(y·d − x + c)`, `c = k − d + 1`,
/// for `y = 1, 2, ...` while every read index stays in `[1, l]`.
/// `weights[j][i][x-1]`, `input[i][pos-1]`.
pub fn naive_conv(input: &[Vec<f64>], weights: &[Vec<Vec<f64>>], k: usize, d: usize) -> Vec<Vec<f64>> {
    let l = input[0].len() as i64;
    let (k, d) = (k as i64, d as i64);
    let c = k - d + 1;
    let mut out = Vec::new();
    for f_j in weights {
        let mut h = Vec::new();
        let mut y = 1i64;
        loop {
            let lowest = y * d - k + c;
            let highest = y * d - 1 + c;
            if lowest < 1 || highest > l {
                break;
            }
            let mut acc = 0.0;
            for (f_ij, g_i) in f_j.iter().zip(input) {
                for x in 1..=k {
                    acc += f_ij[(x - 1) as usize] * g_i[(y * d - x + c - 1) as usize];
                }
            }
            h.push(acc);
            y += 1;
        }
        out.push(h);
    }
    out
}

/// `h(y) = max_{x=1..k} g(y·d − x + c)` per frame, same index law as
/// [`naive_conv`].
pub fn naive_pool(input: &[Vec<f64>], k: usize, d: usize) -> Vec<Vec<f64>> {
    let (k, d) = (k as i64, d as i64);
    let c = k - d + 1;
    input
        .iter()
        .map(|g| {
            let l = g.len() as i64;
            let mut h = Vec::new();
            let mut y = 1i64;
            while y * d - k + c >= 1 && y * d - 1 + c <= l {
                let m = (1..=k)
                    .map(|x| g[(y * d - x + c - 1) as usize])
                    .fold(f64::NEG_INFINITY, f64::max);
                h.push(m);
                y += 1;
            }
            h
        })
        .collect()
}

/// Central difference gradient of `f` at `x`.
pub fn fd_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + FD_STEP;
            let up = f(&probe);
            probe[i] = orig - FD_STEP;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Largest elementwise `|a − b| / max(|a|, |b|, floor)`. The floor keeps
/// entries that are zero analytically from dividing rounding noise by zero.
pub fn max_rel_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "compared vectors differ in length");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_rows<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_vec(rng, cols)).collect()
}

/// Fixed projection used to turn a vector output into a scalar loss.
pub fn probe_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    random_vec(rng, n)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub const NEWS_CLASSES: [&str; 4] = ["world", "sports", "business", "sci/tech"];

const TOPIC_WORDS: [&[&str]; 4] = [
    &[
        "minister", "government", "election", "troops", "embassy", "president", "parliament",
        "ceasefire", "refugees", "diplomats", "rebels", "capital", "border", "summit", "treaty",
        "protest", "military", "united", "nations", "iraq", "baghdad", "palestinian", "israeli",
        "kashmir", "sudan", "darfur", "nuclear", "talks", "prime", "opposition", "officials",
        "killed", "attack", "bomb", "police", "foreign", "sanctions", "vote", "leaders", "peace",
    ],
    &[
        "game", "season", "coach", "team", "win", "league", "championship", "players", "score",
        "tournament", "olympic", "medal", "victory", "defeat", "quarterback", "inning", "goal",
        "striker", "match", "final", "cup", "title", "race", "golf", "tennis", "yankees",
        "red", "sox", "nba", "nfl", "injury", "playoff", "stadium", "fans", "record", "points",
        "seed", "round", "champion", "athens",
    ],
    &[
        "shares", "profit", "quarter", "earnings", "stocks", "market", "oil", "prices", "investors",
        "company", "billion", "million", "percent", "economy", "sales", "deal", "merger", "bank",
        "interest", "rates", "dollar", "revenue", "analysts", "growth", "inflation", "retail",
        "trade", "deficit", "federal", "reserve", "crude", "barrel", "wall", "street", "nasdaq",
        "dow", "fund", "bid", "acquire", "forecast",
    ],
    &[
        "software", "internet", "computer", "microsoft", "google", "web", "users", "technology",
        "space", "nasa", "scientists", "research", "wireless", "online", "search", "linux",
        "chip", "intel", "mobile", "phone", "network", "security", "virus", "spam", "data",
        "digital", "music", "download", "apple", "ibm", "server", "browser", "study", "species",
        "planet", "launch", "satellite", "genetic", "version", "device",
    ],
];

const COMMON_WORDS: &[&str] = &[
    "the", "a", "of", "to", "in", "and", "on", "for", "with", "said", "new", "after", "its",
    "at", "by", "from", "as", "is", "that", "has", "was", "will", "over", "year", "first",
    "two", "week", "monday", "tuesday", "wednesday", "thursday", "friday", "reuters", "ap",
    "more", "than", "up", "out", "could", "would", "about", "into", "report", "plans", "top",
    "says", "back", "last", "next", "against", "their", "his", "one", "three", "day", "time",
    "may", "today", "early", "late", "major", "big", "under", "set", "expected", "amid",
    "while", "other", "still", "hit", "move", "news", "group", "make", "long", "second",
];

/// Title and description built from the class's topic words mixed with
/// common words, `topic_share` of tokens coming from the topic list.
pub fn synthetic_news<R: Rng>(rng: &mut R, label: usize, topic_share: f64) -> (String, String) {
    let phrase = |len: usize, rng: &mut R| -> String {
        (0..len)
            .map(|_| {
                let from_topic = rng.random_bool(topic_share);
                let list: &[&str] = if from_topic {
                    TOPIC_WORDS[label]
                } else if rng.random_bool(0.15) {
                    // Off-topic vocabulary blurs the classes.
                    TOPIC_WORDS[rng.random_range(0..4)]
                } else {
                    COMMON_WORDS
                };
                *list.choose(rng).expect("nonempty word list")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let title_len = rng.random_range(4..9);
    let title = capitalize(&phrase(title_len, rng));
    let desc_len = rng.random_range(16..32);
    let desc = capitalize(&phrase(desc_len, rng)) + ".";
    (title, desc)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// `per_class` CSV rows per class (label 1-based, then title, description).
pub fn synthetic_news_csv<R: Rng>(rng: &mut R, per_class: usize, topic_share: f64) -> String {
    let mut out = String::new();
    for i in 0..per_class * 4 {
        let label = i % 4;
        let (title, desc) = synthetic_news(rng, label, topic_share);
        out.push_str(&format!("{},\"{}\",\"{}\"\n", label + 1, title, desc.replace('"', "\"\"")));
    }
    out
}

/// Random strings over `chars` with labels cycling through `classes`.
pub fn random_labeled_strings<R: Rng>(
    rng: &mut R,
    count: usize,
    len: usize,
    classes: usize,
    chars: &[char],
) -> Vec<TextExample> {
    (0..count)
        .map(|i| {
            let text: String = (0..len).map(|_| *chars.choose(rng).expect("nonempty alphabet")).collect();
            TextExample::new(text, i % classes)
        })
        .collect()
}

/// Checks every quantizer property for one string; returns the first
/// violation.
pub fn quantizer_properties(s: &str, l: usize, alphabet: &chartcn::quantizer::Alphabet) -> Result<(), String> {
    use chartcn::quantizer::{decode, encode, EncodedText, PLACEHOLDER};

    let enc = encode(s, alphabet, l);
    let frames = enc.to_frames::<f64>();
    for col in 0..l {
        let sum: f64 = (0..frames.frames()).map(|f| frames.get(f, col)).sum();
        if sum != 0.0 && sum != 1.0 {
            return Err(format!("column {col} sums to {sum}"));
        }
        if (0..frames.frames()).any(|f| frames.get(f, col) != 0.0 && frames.get(f, col) != 1.0) {
            return Err(format!("column {col} holds a value other than 0 or 1"));
        }
    }
    let lowered: Vec<char> = s.chars().flat_map(char::to_lowercase).collect();
    let kept: Vec<char> = lowered.iter().copied().take(l).collect();
    let n = kept.len();
    for j in 0..l {
        let want = if j < n { alphabet.index_of(kept[n - 1 - j]) } else { None };
        if enc.active()[j] != want {
            return Err(format!("column {} should encode {want:?}", j + 1));
        }
    }
    let prefix: String = s.chars().take(l).collect();
    if lowered.len() == s.chars().count() && encode(&prefix, alphabet, l) != enc {
        return Err("prefix of length l encodes differently".into());
    }
    let lower_s: String = lowered.iter().collect();
    if encode(&lower_s, alphabet, l) != enc {
        return Err("lowercased text encodes differently".into());
    }
    let expected: String = kept
        .iter()
        .map(|&c| if alphabet.index_of(c).is_some() { c } else { PLACEHOLDER })
        .collect();
    let decoded = decode(&enc, alphabet).map_err(|e| e.to_string())?;
    if decoded != expected {
        return Err(format!("decode gave {decoded:?}, expected {expected:?}"));
    }
    if EncodedText::from_frames(&frames).map_err(|e| e.to_string())?.active() != enc.active() {
        return Err("frame matrix does not validate back to the same encoding".into());
    }
    Ok(())
}

/// Random text mixing alphabet characters, uppercase letters, blanks and
/// characters outside the alphabet.
pub fn random_text<R: Rng>(rng: &mut R, max_len: usize) -> String {
    const EXTRA: &[char] = &['A', 'Z', 'Q', ' ', ' ', '\t', 'é', '©', 'ß', '中', 'Σ', '\n', '\u{2019}'];
    let alphabet = chartcn::quantizer::Alphabet::standard();
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.7) {
                *alphabet.chars().choose(rng).expect("nonempty")
            } else {
                *EXTRA.choose(rng).expect("nonempty")
            }
        })
        .collect()
}
