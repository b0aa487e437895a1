//! Thesaurus-driven synonym replacement.
//!
//! A text's replaceable units are the whitespace tokens (or contiguous runs of
//! up to three tokens) whose normalized form is a thesaurus key. The number of
//! units to replace, `r`, and the rank of each chosen synonym, `s`, are both
//! drawn from truncated geometric laws `P[i] ∝ param^i` starting at 0.
//!
//! Thesaurus file format, one entry per line:
//!
//! ```text
//! good<TAB>fine|nice|satisfactory
//! new york<TAB>big apple
//! ```
//!
//! Synonyms are listed closest first. Blank lines and lines starting with `#`
//! are ignored.

use std::collections::HashMap;
use std::ops::Range;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::text::{normalize, tokenize};
use crate::{Error, Result};

/// Longest multi-word key considered during matching.
pub const MAX_PHRASE_TOKENS: usize = 3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Thesaurus {
    entries: HashMap<String, Vec<String>>,
    longest_key: usize,
}

fn normalize_key(key: &str) -> String {
    key.split_whitespace()
        .map(normalize)
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

impl Thesaurus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry under the normalized form of `key`.
    pub fn insert(&mut self, key: &str, synonyms: Vec<String>) -> Result<()> {
        let norm = normalize_key(key);
        if norm.is_empty() {
            return Err(Error::Data(format!("thesaurus key {key:?} has no word characters")));
        }
        if synonyms.is_empty() || synonyms.iter().any(|s| s.trim().is_empty()) {
            return Err(Error::Data(format!("thesaurus key {norm:?} has an empty synonym")));
        }
        if self.entries.contains_key(&norm) {
            return Err(Error::Data(format!("duplicate thesaurus key {norm:?}")));
        }
        self.longest_key = self.longest_key.max(norm.split(' ').count());
        self.entries.insert(norm, synonyms);
        Ok(())
    }

    pub fn parse(source: &str) -> Result<Self> {
        let mut thesaurus = Thesaurus::new();
        let mut first_seen: HashMap<String, usize> = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once('\t').ok_or_else(|| {
                Error::Data(format!("thesaurus line {lineno}: expected key<TAB>synonym|synonym"))
            })?;
            let norm = normalize_key(key);
            if norm.is_empty() {
                return Err(Error::Data(format!(
                    "thesaurus line {lineno}: key {key:?} has no word characters"
                )));
            }
            if let Some(prev) = first_seen.get(&norm) {
                return Err(Error::Data(format!(
                    "thesaurus: duplicate key {norm:?} on lines {prev} and {lineno}"
                )));
            }
            let synonyms: Vec<String> = rest.split('|').map(|s| s.trim().to_string()).collect();
            if synonyms.iter().any(String::is_empty) {
                return Err(Error::Data(format!(
                    "thesaurus line {lineno}: key {norm:?} has an empty synonym"
                )));
            }
            first_seen.insert(norm.clone(), lineno);
            thesaurus.insert(&norm, synonyms)?;
        }
        Ok(thesaurus)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source).map_err(|e| match e {
            Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn get(&self, key: &str) -> Option<&[String]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(&str, &[String])> {
        let mut out: Vec<_> = self
            .entries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(b.0));
        out
    }

    /// Serializes in the TSV format, keys sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (key, syns) in self.entries() {
            out.push_str(key);
            out.push('\t');
            out.push_str(&syns.join("|"));
            out.push('\n');
        }
        out
    }

    /// Byte ranges of the replaceable units of `text`, left to right, each
    /// with its thesaurus key. At every position the longest matching run of
    /// tokens wins.
    pub fn replaceable_spans(&self, text: &str) -> Vec<(Range<usize>, String)> {
        let tokens = tokenize(text);
        let norms: Vec<String> = tokens.iter().map(|t| t.core_str(text).to_lowercase()).collect();
        let longest = self.longest_key.min(MAX_PHRASE_TOKENS);
        let mut spans = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = None;
            for n in (1..=longest.min(tokens.len() - i)).rev() {
                let run = &tokens[i..i + n];
                if norms[i..i + n].iter().any(String::is_empty) {
                    continue;
                }
                // Punctuation may only sit on the outer edges of a phrase.
                let joined_cleanly = (0..n).all(|j| {
                    (j == 0 || run[j].core.0 == run[j].start)
                        && (j == n - 1 || run[j].core.1 == run[j].end())
                });
                if !joined_cleanly {
                    continue;
                }
                let key = norms[i..i + n].join(" ");
                if self.entries.contains_key(&key) {
                    matched = Some((n, run[0].core.0..run[n - 1].core.1, key));
                    break;
                }
            }
            match matched {
                Some((n, range, key)) => {
                    spans.push((range, key));
                    i += n;
                }
                None => i += 1,
            }
        }
        spans
    }
}

/// Converts a MyThes data file (`word|count` headers each followed by
/// `count` lines of `(pos)|syn|syn...`) into a [`Thesaurus`]. Synonyms of all
/// meanings are concatenated in file order, duplicates and the headword
/// itself dropped, and trailing parenthesized notes such as
/// `(generic term)` removed. The first line names the encoding and is skipped.
pub fn convert_mythes(source: &str) -> Result<Thesaurus> {
    let mut thesaurus = Thesaurus::new();
    let mut seen_keys: HashMap<String, usize> = HashMap::new();
    let mut lines = source.lines().enumerate().skip(1).peekable();
    while let Some((i, header)) = lines.next() {
        let header = header.trim_end_matches('\r');
        if header.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (word, count) = header
            .rsplit_once('|')
            .and_then(|(w, c)| Some((w, c.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| {
                Error::Data(format!("mythes line {lineno}: expected word|meaning-count"))
            })?;
        let key = normalize_key(word);
        let mut synonyms: Vec<String> = Vec::new();
        for _ in 0..count {
            let (j, meaning) = lines.next().ok_or_else(|| {
                Error::Data(format!(
                    "mythes line {lineno}: {word:?} announces {count} meanings but the file ends"
                ))
            })?;
            let mut parts = meaning.trim_end_matches('\r').split('|');
            let pos = parts.next().unwrap_or_default();
            if !pos.starts_with('(') && !pos.is_empty() {
                return Err(Error::Data(format!(
                    "mythes line {}: expected (part-of-speech)|synonym...",
                    j + 1
                )));
            }
            for syn in parts {
                let syn = strip_note(syn);
                if !syn.is_empty()
                    && normalize_key(syn) != key
                    && !synonyms.iter().any(|s| s == syn)
                {
                    synonyms.push(syn.to_string());
                }
            }
        }
        if key.is_empty() || synonyms.is_empty() {
            continue;
        }
        if let Some(prev) = seen_keys.get(&key) {
            return Err(Error::Data(format!(
                "mythes: duplicate headword {key:?} on lines {prev} and {lineno}"
            )));
        }
        seen_keys.insert(key.clone(), lineno);
        thesaurus.insert(&key, synonyms)?;
    }
    Ok(thesaurus)
}

fn strip_note(syn: &str) -> &str {
    let syn = syn.trim();
    match syn.rfind(" (") {
        Some(pos) if syn.ends_with(')') => syn[..pos].trim_end(),
        _ => syn,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    /// Replacement-count parameter.
    pub p: f64,
    /// Synonym-rank parameter.
    pub q: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            p: 0.5,
            q: 0.5,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// `P[i] = param^i / Σ_{j=0}^{max_value} param^j` for `i` in `0..=max_value`.
pub fn truncated_geometric_probs(param: f64, max_value: usize) -> Vec<f64> {
    let mut weights = Vec::with_capacity(max_value + 1);
    let mut w = 1.0;
    for _ in 0..=max_value {
        weights.push(w);
        w *= param;
    }
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Draws from the truncated geometric law on `0..=max_value`.
pub fn sample_truncated_geometric<R: Rng + ?Sized>(param: f64, max_value: usize, rng: &mut R) -> usize {
    if max_value == 0 {
        return 0;
    }
    let total: f64 = {
        let mut w = 1.0;
        let mut t = 0.0;
        for _ in 0..=max_value {
            t += w;
            w *= param;
        }
        t
    };
    let u = rng.random::<f64>() * total;
    let mut w = 1.0;
    let mut acc = 0.0;
    for i in 0..max_value {
        acc += w;
        if u < acc {
            return i;
        }
        w *= param;
    }
    max_value
}

/// Replaces a random number of replaceable units of `text` with synonyms.
pub fn augment<R: Rng + ?Sized>(
    text: &str,
    thesaurus: &Thesaurus,
    config: &AugmentConfig,
    rng: &mut R,
) -> String {
    if thesaurus.is_empty() {
        return text.to_string();
    }
    let spans = thesaurus.replaceable_spans(text);
    let r = sample_truncated_geometric(config.p, spans.len(), rng);
    replace_spans(text, thesaurus, &spans, r, config.q, rng)
}

/// Like [`augment`] but with the replacement count fixed to `count`
/// (clamped to the number of replaceable units).
pub fn augment_with_count<R: Rng + ?Sized>(
    text: &str,
    thesaurus: &Thesaurus,
    count: usize,
    q: f64,
    rng: &mut R,
) -> String {
    let spans = thesaurus.replaceable_spans(text);
    let r = count.min(spans.len());
    replace_spans(text, thesaurus, &spans, r, q, rng)
}

fn replace_spans<R: Rng + ?Sized>(
    text: &str,
    thesaurus: &Thesaurus,
    spans: &[(Range<usize>, String)],
    r: usize,
    q: f64,
    rng: &mut R,
) -> String {
    if r == 0 {
        return text.to_string();
    }
    let mut chosen = index::sample(rng, spans.len(), r).into_vec();
    chosen.sort_unstable();
    let mut out = String::with_capacity(text.len() + 16 * r);
    let mut cursor = 0;
    for idx in chosen {
        let (range, key) = &spans[idx];
        let synonyms = thesaurus.get(key).expect("span keys come from the thesaurus");
        let s = sample_truncated_geometric(q, synonyms.len() - 1, rng);
        out.push_str(&text[cursor..range.start]);
        push_with_case(&mut out, &synonyms[s], &text[range.clone()]);
        cursor = range.end;
    }
    out.push_str(&text[cursor..]);
    out
}

fn push_with_case(out: &mut String, synonym: &str, original: &str) {
    let upper = original.chars().next().is_some_and(char::is_uppercase);
    let mut chars = synonym.chars();
    match chars.next() {
        Some(first) if upper => {
            out.extend(first.to_uppercase());
            out.push_str(chars.as_str());
        }
        _ => out.push_str(synonym),
    }
}

/// A thesaurus bundled with its sampling parameters.
#[derive(Debug, Clone)]
pub struct Augmenter {
    pub thesaurus: Thesaurus,
    pub config: AugmentConfig,
}

impl Augmenter {
    pub fn new(thesaurus: Thesaurus, config: AugmentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Augmenter { thesaurus, config })
    }

    pub fn augment<R: Rng + ?Sized>(&self, text: &str, rng: &mut R) -> String {
        augment(text, &self.thesaurus, &self.config, rng)
    }
}
