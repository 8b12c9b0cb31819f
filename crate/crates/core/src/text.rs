//! Token normalization shared by lexicon scoring and the chat word limit.

use alloc::string::String;
use alloc::vec::Vec;

/// Maximum words in a single chat utterance.
pub const CHAT_WORD_LIMIT: usize = 30;

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{2013}' | '\u{2014}' | '\u{2026}' | '\u{00AB}' | '\u{00BB}' | '\u{00BF}' | '\u{00A1}'
        )
}

/// Whitespace tokens with leading/trailing punctuation trimmed; tokens that
/// were punctuation only are dropped. Case is preserved.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_punct))
        .filter(|t| !t.is_empty())
}

pub fn word_count(text: &str) -> usize {
    words(text).count()
}

/// Lowercased tokens for lexicon lookup.
pub fn lexicon_tokens(text: &str) -> Vec<String> {
    words(text).map(|w| w.to_lowercase()).collect()
}

/// Keeps the first `limit` words of `text` (original spelling, single spaces).
pub fn truncate_words(text: &str, limit: usize) -> String {
    let mut out = String::new();
    for (i, w) in text.split_whitespace().filter(|t| !t.trim_matches(is_punct).is_empty()).take(limit).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}
