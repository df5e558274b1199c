//! Query tokenization and vocabulary-restricted expansion.
//!
//! Each query word is widened to the index terms that share its Porter stem
//! and to the index terms within a small edit distance of the word or of one
//! of those stem-mates. The search keeps AND semantics over the original
//! words and OR semantics over each word's variants.

pub mod levenshtein;
pub mod porter;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{is_stopword, tokenize as tokenize_text};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub raw: String,
    pub words: Vec<String>,
}

/// Tokenizes a query exactly as bodies are tokenized for indexing.
pub fn tokenize(raw: &str) -> Result<Query> {
    let words = tokenize_text(raw);
    if words.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(Query { raw: raw.to_string(), words })
}

/// Index term set with a stem lookup table.
#[derive(Debug, Default, Clone)]
pub struct Vocabulary {
    terms: BTreeSet<String>,
    by_stem: HashMap<String, Vec<String>>,
}

impl Vocabulary {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let terms: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        let mut by_stem: HashMap<String, Vec<String>> = HashMap::new();
        for t in &terms {
            by_stem.entry(porter::stem(t)).or_default().push(t.clone());
        }
        Vocabulary { terms, by_stem }
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Vocabulary terms whose stem equals `stem(word)`.
    pub fn stem_family(&self, word: &str) -> BTreeSet<String> {
        self.by_stem
            .get(&porter::stem(word))
            .map(|v| v.iter().cloned().collect())
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expander {
    /// Largest accepted Levenshtein distance.
    pub max_distance: usize,
    /// Both strings must be at least this long for the edit rule to apply.
    pub min_len: usize,
    /// When false only the word itself is kept.
    pub enabled: bool,
}

impl Default for Expander {
    fn default() -> Self {
        Expander { max_distance: 2, min_len: 5, enabled: true }
    }
}

impl Expander {
    pub fn disabled() -> Self {
        Expander { enabled: false, ..Self::default() }
    }

    /// The symmetric edit-variant relation between two surface forms.
    pub fn edit_related(&self, a: &str, b: &str) -> bool {
        !is_stopword(a)
            && !is_stopword(b)
            && a.chars().count().min(b.chars().count()) >= self.min_len
            && levenshtein::within(a, b, self.max_distance)
    }

    /// Variant set of one word over `vocab`.
    pub fn expand(&self, word: &str, vocab: &Vocabulary) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if vocab.contains(word) {
            out.insert(word.to_string());
        }
        if !self.enabled || is_stopword(word) {
            return out;
        }
        let family = vocab.stem_family(word);
        let mut anchors: Vec<&str> = vec![word];
        anchors.extend(family.iter().map(String::as_str));
        for candidate in vocab.iter() {
            if anchors.iter().any(|a| self.edit_related(a, candidate)) {
                out.insert(candidate.to_string());
            }
        }
        out.extend(family);
        out
    }

    pub fn expand_query(&self, query: &Query, vocab: &Vocabulary) -> ExpandedQuery {
        let variants = query
            .words
            .iter()
            .map(|w| (w.clone(), self.expand(w, vocab)))
            .collect();
        ExpandedQuery { original: query.clone(), variants }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedQuery {
    pub original: Query,
    pub variants: BTreeMap<String, BTreeSet<String>>,
}

impl ExpandedQuery {
    /// Distinct original words in query order.
    pub fn words(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.original
            .words
            .iter()
            .filter(|w| seen.insert(w.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn variants_of(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.variants.get(word)
    }

    /// Union of all variant terms.
    pub fn terms(&self) -> BTreeSet<&str> {
        self.variants.values().flatten().map(String::as_str).collect()
    }

    /// True when `token` is the word itself or one of its variants.
    pub fn accepts(&self, word: &str, token: &str) -> bool {
        token == word || self.variants.get(word).is_some_and(|v| v.contains(token))
    }

    /// True when every original word is accepted by some token.
    pub fn covered_by<'a, I>(&self, tokens: I) -> bool
    where
        I: IntoIterator<Item = &'a str> + Clone,
    {
        self.words().iter().all(|w| tokens.clone().into_iter().any(|t| self.accepts(w, t)))
    }
}
