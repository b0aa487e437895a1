use std::collections::HashMap;
use std::path::Path;

use crate::{Error, Result};

/// A word → vector table read from the plain-text embedding format: one
/// `word v1 v2 ... vd` line per word, optionally preceded by a
/// `count dim` header line.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    dim: usize,
    words: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl Embeddings {
    pub fn new(entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let dim = entries.first().map_or(0, |e| e.1.len());
        let mut out = Embeddings {
            dim,
            words: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        };
        for (word, v) in entries {
            out.push(word, v, None)?;
        }
        Ok(out)
    }

    fn push(&mut self, word: String, v: Vec<f64>, line: Option<usize>) -> Result<()> {
        let at = line.map_or(String::new(), |l| format!("line {l}: "));
        if v.len() != self.dim || v.is_empty() {
            return Err(Error::Data(format!(
                "{at}vector for {word:?} has {} values, expected {}",
                v.len(),
                self.dim
            )));
        }
        if self.index.contains_key(&word) {
            return Err(Error::Data(format!("{at}duplicate embedding word {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.push(v);
        Ok(())
    }

    pub fn parse(source: &str) -> Result<Self> {
        let mut out = Embeddings {
            dim: 0,
            words: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        };
        let mut declared_count = None;
        for (i, line) in source.lines().enumerate() {
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if i == 0 && fields.len() == 2 {
                if let (Ok(count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    declared_count = Some(count);
                    out.dim = dim;
                    continue;
                }
            }
            let values = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Data(format!("line {lineno}: {e}")))?;
            if out.dim == 0 {
                out.dim = values.len();
            }
            out.push(fields[0].to_string(), values, Some(lineno))?;
        }
        if let Some(n) = declared_count {
            if n != out.words.len() {
                return Err(Error::Data(format!(
                    "header declares {n} words but {} were read",
                    out.words.len()
                )));
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source).map_err(|e| match e {
            Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Looks `token` up as written, then lowercased.
    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.index_of(token)
            .or_else(|| self.index_of(&token.to_lowercase()))
    }
}
