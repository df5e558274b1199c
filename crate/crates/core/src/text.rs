//! Tokenization shared by the index, the query side and subject matching.
//!
//! Bodies and queries go through [`tokenize`], which drops stopwords and
//! single-digit tokens. Subjects go through [`subject_tokens`], which keeps
//! stopwords so that subject containment sees every word the user typed.

/// Fixed stopword list applied to bodies and queries alike.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "by", "for", "from", "in", "is", "it",
    "its", "of", "on", "or", "that", "the", "these", "this", "those", "to", "was", "were",
    "with",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Casefolded alphanumeric runs, with no filtering.
pub fn raw_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

fn keep(token: &str) -> bool {
    let pure_digit = token.chars().all(|c| c.is_ascii_digit());
    !(pure_digit && token.chars().count() < 2) && !is_stopword(token)
}

/// Index/query tokenization.
pub fn tokenize(text: &str) -> Vec<String> {
    raw_tokens(text).filter(|t| keep(t)).collect()
}

/// Subject tokenization; stopwords are retained.
pub fn subject_tokens(subject: &str) -> Vec<String> {
    raw_tokens(subject).collect()
}
