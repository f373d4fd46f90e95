use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

/// Word segmentation used by the length and rarity heuristics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// UAX #29 word boundaries, keeping only word-like tokens (no punctuation).
    #[default]
    UnicodeWords,
    /// Split on Unicode whitespace.
    Whitespace,
}

impl Tokenizer {
    pub fn tokens<'a>(&self, text: &'a str) -> Vec<&'a str> {
        match self {
            Tokenizer::UnicodeWords => text.unicode_words().collect(),
            Tokenizer::Whitespace => text.split_whitespace().collect(),
        }
    }

    pub fn count(&self, text: &str) -> usize {
        match self {
            Tokenizer::UnicodeWords => text.unicode_words().count(),
            Tokenizer::Whitespace => text.split_whitespace().count(),
        }
    }
}

impl std::str::FromStr for Tokenizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unicode" | "unicode_words" => Ok(Tokenizer::UnicodeWords),
            "whitespace" => Ok(Tokenizer::Whitespace),
            other => Err(format!("unknown tokenizer `{other}`")),
        }
    }
}

/// Canonical text form applied to every loaded string.
pub fn normalize_text(text: &str) -> String {
    text.nfc().collect()
}

/// Key form for token-level lookups: NFKC, then lowercase.
pub fn normalize_token(token: &str) -> String {
    token.nfkc().collect::<String>().to_lowercase()
}
