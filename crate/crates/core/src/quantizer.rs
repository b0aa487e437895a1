//! 1-of-m character quantization in backward order.
//!
//! Text is lowercased, cut to `l` characters and laid out reversed, so column
//! 1 holds the last kept character. Characters outside the alphabet, and
//! columns past the end of the text, are all-zero.

use std::collections::HashMap;
use std::path::Path;

use crate::tensor_ops::FrameSeq;
use crate::{Error, Real, Result};

/// Substituted by [`decode`] for all-zero columns inside the encoded text.
pub const PLACEHOLDER: char = '\u{FFFD}';

const LETTERS_AND_DIGITS: &str = "abcdefghijklmnopqrstuvwxyz0123456789";
const SYMBOLS: &str = "-,;.!?:'\u{2019}\"/\\|_@#$%^&*~`+=<>()[]{}";

/// Ordered set of distinct characters; its size is the input frame count m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl Alphabet {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self> {
        let chars: Vec<char> = chars.into_iter().collect();
        let mut index = HashMap::with_capacity(chars.len());
        for (i, &c) in chars.iter().enumerate() {
            if let Some(prev) = index.insert(c, i) {
                return Err(Error::Config(format!(
                    "duplicate alphabet character {c:?} at positions {prev} and {i}"
                )));
            }
        }
        if chars.is_empty() {
            return Err(Error::Config("alphabet must not be empty".into()));
        }
        Ok(Alphabet { chars, index })
    }

    /// The 70-character alphabet: 26 letters, 10 digits, newline and 33 symbols.
    pub fn standard() -> Self {
        let chars = LETTERS_AND_DIGITS
            .chars()
            .chain(std::iter::once('\n'))
            .chain(SYMBOLS.chars());
        Self::new(chars).expect("standard alphabet is duplicate-free")
    }

    /// The standard alphabet without newline (newline encodes as all-zero),
    /// giving 69 input frames.
    pub fn standard_69() -> Self {
        Self::new(LETTERS_AND_DIGITS.chars().chain(SYMBOLS.chars()))
            .expect("standard alphabet is duplicate-free")
    }

    /// Parses one character per line. Escapes: `\n` newline, `\s` space,
    /// `\t` tab, `\\` backslash. Empty lines are skipped.
    pub fn parse(source: &str) -> Result<Self> {
        let mut chars = Vec::new();
        for (lineno, line) in source.split('\n').enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            let c = match line {
                "\\n" => '\n',
                "\\s" => ' ',
                "\\t" => '\t',
                "\\\\" => '\\',
                _ => {
                    let mut it = line.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => c,
                        _ => {
                            return Err(Error::Config(format!(
                                "alphabet line {}: expected a single character or escape, got {line:?}",
                                lineno + 1
                            )))
                        }
                    }
                }
            };
            chars.push(c);
        }
        Self::new(chars)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source)
    }

    /// Inverse of [`Alphabet::parse`].
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for &c in &self.chars {
            match c {
                '\n' => out.push_str("\\n"),
                ' ' => out.push_str("\\s"),
                '\t' => out.push_str("\\t"),
                '\\' => out.push_str("\\\\"),
                _ => out.push(c),
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }
}

/// Which characters survive when the text is longer than `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    #[default]
    KeepFirst,
    KeepLast,
}

/// A quantized text: `m` frames by `l` positions, stored as the active frame
/// of each column (`None` for all-zero columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedText {
    frames: usize,
    active: Vec<Option<usize>>,
    encoded_chars: usize,
}

impl EncodedText {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn length(&self) -> usize {
        self.active.len()
    }

    /// Number of source characters that made it into the encoding.
    pub fn encoded_chars(&self) -> usize {
        self.encoded_chars
    }

    pub fn active(&self) -> &[Option<usize>] {
        &self.active
    }

    pub fn column_sum(&self, column: usize) -> usize {
        usize::from(self.active[column].is_some())
    }

    pub fn to_frames<T: Real>(&self) -> FrameSeq<T> {
        let mut frames = FrameSeq::zeros(self.frames, self.active.len());
        for (pos, a) in self.active.iter().enumerate() {
            if let Some(i) = *a {
                frames.set(i, pos, T::one());
            }
        }
        frames
    }

    /// Validates that every column of `frames` is all-zero or one-hot.
    /// Trailing all-zero columns are treated as padding.
    pub fn from_frames<T: Real>(frames: &FrameSeq<T>) -> Result<Self> {
        let mut active = vec![None; frames.length()];
        for (pos, slot) in active.iter_mut().enumerate() {
            for f in 0..frames.frames() {
                let v = frames.get(f, pos);
                if v == T::zero() {
                    continue;
                }
                if v != T::one() || slot.is_some() {
                    return Err(Error::Validation(format!(
                        "column {} is not one-hot or all-zero",
                        pos + 1
                    )));
                }
                *slot = Some(f);
            }
        }
        let encoded_chars = active.iter().rposition(Option::is_some).map_or(0, |p| p + 1);
        Ok(EncodedText {
            frames: frames.frames(),
            active,
            encoded_chars,
        })
    }
}

/// Quantizes `text` to `length` columns in backward order.
pub fn encode(text: &str, alphabet: &Alphabet, length: usize) -> EncodedText {
    encode_with(text, alphabet, length, Truncation::KeepFirst)
}

pub fn encode_with(
    text: &str,
    alphabet: &Alphabet,
    length: usize,
    truncation: Truncation,
) -> EncodedText {
    assert!(length >= 1, "encoding length must be >= 1");
    let lowered: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let kept = match truncation {
        Truncation::KeepFirst => &lowered[..lowered.len().min(length)],
        Truncation::KeepLast => &lowered[lowered.len().saturating_sub(length)..],
    };
    let mut active = vec![None; length];
    for (slot, &c) in active.iter_mut().zip(kept.iter().rev()) {
        *slot = alphabet.index_of(c);
    }
    EncodedText {
        frames: alphabet.len(),
        active,
        encoded_chars: kept.len(),
    }
}

/// Reverses [`encode`]: zero columns within the encoded text become
/// [`PLACEHOLDER`].
pub fn decode(encoded: &EncodedText, alphabet: &Alphabet) -> Result<String> {
    if encoded.frames != alphabet.len() {
        return Err(Error::Validation(format!(
            "encoding has {} frames but the alphabet has {} characters",
            encoded.frames,
            alphabet.len()
        )));
    }
    Ok(encoded.active[..encoded.encoded_chars]
        .iter()
        .rev()
        .map(|a| a.map_or(PLACEHOLDER, |i| alphabet.chars[i]))
        .collect())
}

/// Decodes a raw frame matrix, validating one-hot columns. Leading
/// placeholders (the unused tail of the encoding) are stripped.
pub fn decode_frames<T: Real>(frames: &FrameSeq<T>, alphabet: &Alphabet) -> Result<String> {
    let encoded = EncodedText::from_frames(frames)?;
    let text = decode(&encoded, alphabet)?;
    Ok(text.trim_start_matches(PLACEHOLDER).to_string())
}
