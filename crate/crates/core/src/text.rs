//! Word-level tokenization shared by thesaurus augmentation and the
//! bag-of-words baselines: whitespace split, then leading and trailing
//! punctuation stripped and the remainder lowercased.

/// A whitespace-delimited token and the byte span of its punctuation-stripped core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub raw: &'a str,
    /// Byte offset of `raw` in the source text.
    pub start: usize,
    /// Byte range of the core within the source text; empty when the token is
    /// all punctuation.
    pub core: (usize, usize),
}

impl<'a> Token<'a> {
    pub fn core_str(&self, text: &'a str) -> &'a str {
        &text[self.core.0..self.core.1]
    }

    pub fn end(&self) -> usize {
        self.start + self.raw.len()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits `text` on whitespace, keeping byte offsets.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(make_token(text, s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(make_token(text, s, text.len()));
    }
    tokens
}

fn make_token(text: &str, start: usize, end: usize) -> Token<'_> {
    let raw = &text[start..end];
    let trimmed_front = raw.trim_start_matches(|c: char| !is_word_char(c));
    let core_start = start + (raw.len() - trimmed_front.len());
    let core = trimmed_front.trim_end_matches(|c: char| !is_word_char(c));
    Token {
        raw,
        start,
        core: (core_start, core_start + core.len()),
    }
}

/// Lowercased, punctuation-stripped form of a single token.
pub fn normalize(token: &str) -> String {
    token
        .trim_matches(|c: char| !is_word_char(c))
        .to_lowercase()
}

/// Normalized, non-empty words of `text` in order.
pub fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(normalize)
        .filter(|w| !w.is_empty())
}
