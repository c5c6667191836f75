//! Tokenization and normalization shared by the catalog and the parser.

use alloc::string::String;
use alloc::vec::Vec;

use unicode_segmentation::UnicodeSegmentation;

pub use crate::stem::stem;

/// A word of the input with its byte span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
    pub lower: String,
    /// Set when the word carried a possessive `'s` that was split off.
    pub possessive: bool,
}

impl Token<'_> {
    pub fn stem(&self) -> String {
        stem(&self.lower)
    }
}

/// Splits text on Unicode word boundaries, dropping punctuation and
/// whitespace. A trailing possessive `'s` is removed from the token and
/// recorded in [`Token::possessive`].
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    text.unicode_word_indices()
        .map(|(start, word)| {
            let (word, possessive) = match word
                .strip_suffix("'s")
                .or_else(|| word.strip_suffix("\u{2019}s"))
            {
                Some(base) if !base.is_empty() => (base, true),
                _ => (word, false),
            };
            Token {
                text: word,
                start,
                end: start + word.len(),
                lower: word.to_lowercase(),
                possessive,
            }
        })
        .collect()
}

/// Lowercased words joined by single spaces.
pub fn normalize(text: &str) -> String {
    join(tokenize(text).iter().map(|t| t.lower.as_str()))
}

/// Stemmed words joined by single spaces.
pub fn stemmed_key(text: &str) -> String {
    join(
        tokenize(text)
            .iter()
            .map(|t| t.stem())
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str),
    )
}

pub(crate) fn join<'a>(words: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for w in words {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

/// Character n-grams of a single word. Words shorter than `n` yield
/// themselves.
pub fn char_ngrams(word: &str, n: usize) -> Vec<&str> {
    let bounds: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .chain(core::iter::once(word.len()))
        .collect();
    let chars = bounds.len() - 1;
    if chars == 0 {
        return Vec::new();
    }
    if chars <= n {
        return alloc::vec![word];
    }
    (0..=chars - n)
        .map(|i| &word[bounds[i]..bounds[i + n]])
        .collect()
}

const STOPWORDS: &[&str] = &[
    "a", "about", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be", "been", "but",
    "by", "can", "count", "did", "do", "does", "for", "from", "give", "had", "has", "have", "he",
    "her", "his", "how", "i", "in", "into", "is", "it", "its", "list", "many", "me", "much",
    "name", "of", "on", "or", "she", "show", "some", "tell", "than", "that", "the", "their",
    "them", "there", "these", "they", "this", "those", "to", "total", "us", "was", "were", "what",
    "when", "where", "which", "who", "whom", "whose", "why", "will", "with", "you",
];

/// Function words that never form a reference on their own.
pub fn is_stopword(lower: &str) -> bool {
    STOPWORDS.binary_search(&lower).is_ok()
}
