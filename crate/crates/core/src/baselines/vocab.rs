use std::collections::HashMap;
use std::path::Path;

use crate::text::words;
use crate::{Error, Result};

pub const DEFAULT_VOCAB_CAP: usize = 5000;

/// The most frequent training words, by descending count with ties broken
/// lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

pub fn build_vocabulary<'a>(texts: impl IntoIterator<Item = &'a str>, cap: usize) -> Vocabulary {
    let mut freq: HashMap<String, u64> = HashMap::new();
    for text in texts {
        for w in words(text) {
            *freq.entry(w).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(cap);
    Vocabulary::from_ranked(ranked)
}

/// Raw counts of vocabulary words in `text`.
pub fn featurize_bow(text: &str, vocab: &Vocabulary) -> Vec<f64> {
    vocab.featurize(text, false)
}

impl Vocabulary {
    fn from_ranked(ranked: Vec<(String, u64)>) -> Self {
        let index = ranked
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i))
            .collect();
        let (words, counts) = ranked.into_iter().unzip();
        Vocabulary {
            words,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Counts of vocabulary words in `text`; with `binary` each present word
    /// contributes 1.
    pub fn featurize(&self, text: &str, binary: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.words.len()];
        for w in words(text) {
            if let Some(&i) = self.index.get(&w) {
                out[i] = if binary { 1.0 } else { out[i] + 1.0 };
            }
        }
        out
    }

    /// One `word<TAB>count` line per entry, in rank order.
    pub fn to_tsv(&self) -> String {
        self.words
            .iter()
            .zip(&self.counts)
            .map(|(w, c)| format!("{w}\t{c}\n"))
            .collect()
    }

    pub fn parse_tsv(source: &str) -> Result<Self> {
        let mut ranked = Vec::new();
        for (i, line) in source.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parsed = line
                .split_once('\t')
                .and_then(|(w, c)| Some((w.to_string(), c.parse::<u64>().ok()?)));
            match parsed {
                Some(entry) => ranked.push(entry),
                None => {
                    return Err(Error::Data(format!(
                        "vocabulary line {}: expected word<TAB>count",
                        i + 1
                    )))
                }
            }
        }
        Ok(Self::from_ranked(ranked))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}
