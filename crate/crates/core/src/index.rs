//! Inverted index over thread-node documents and per-sender term profiles.
//!
//! Weights are `tf * log10(N / df)`. At document granularity N counts
//! indexed nodes; at sender granularity every sender's emails are pooled into
//! one pseudo-document and N counts senders.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queryexp::{ExpandedQuery, Vocabulary};
use crate::text::tokenize;
use crate::threadstore::NodeId;

/// Sparse non-negative term weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedVector {
    pub components: BTreeMap<String, f64>,
}

impl WeightedVector {
    pub fn get(&self, term: &str) -> f64 {
        self.components.get(term).copied().unwrap_or(0.0)
    }

    pub fn dot(&self, other: &WeightedVector) -> f64 {
        let (small, large) = if self.components.len() <= other.components.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.components.iter().map(|(t, w)| w * large.get(t)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.components.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|w| *w == 0.0)
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for WeightedVector {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        WeightedVector { components: iter.into_iter().map(|(t, w)| (t.into(), w)).collect() }
    }
}

/// `tf * log10(n / df)`, zero when the term is absent.
pub fn tf_idf_weight(tf: u32, df: u32, n: u32) -> f64 {
    if tf == 0 || df == 0 || n == 0 {
        return 0.0;
    }
    tf as f64 * (n as f64 / df as f64).log10()
}

fn count_terms(tokens: impl IntoIterator<Item = String>) -> BTreeMap<String, u32> {
    let mut out = BTreeMap::new();
    for t in tokens {
        *out.entry(t).or_insert(0) += 1;
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SenderProfile {
    pub sender: String,
    pub term_freq: BTreeMap<String, u32>,
    pub email_count: u32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IndexStore {
    postings: BTreeMap<String, Vec<(NodeId, u32)>>,
    doc_freq: BTreeMap<String, u32>,
    /// Forward index: sorted (term, tf) per document.
    doc_terms: BTreeMap<NodeId, Vec<(String, u32)>>,
    doc_lengths: BTreeMap<NodeId, u32>,
    senders: BTreeMap<String, SenderProfile>,
    sender_doc_freq: BTreeMap<String, u32>,
    doc_norms: BTreeMap<NodeId, f64>,
    sender_norms: BTreeMap<String, f64>,
    norms_fresh: bool,
}

impl IndexStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a document. Returns false, leaving the index untouched, when the
    /// node is already indexed.
    pub fn index_document(&mut self, node: NodeId, text: &str) -> bool {
        if self.doc_terms.contains_key(&node) {
            warn!("document {node:?} already indexed; ignoring");
            return false;
        }
        let tokens = tokenize(text);
        self.doc_lengths.insert(node, tokens.len() as u32);
        let counts = count_terms(tokens);
        for (term, tf) in &counts {
            self.postings.entry(term.clone()).or_default().push((node, *tf));
            *self.doc_freq.entry(term.clone()).or_insert(0) += 1;
        }
        self.doc_terms.insert(node, counts.into_iter().collect());
        self.norms_fresh = false;
        true
    }

    /// Pools an email's subject and main body into its sender's profile.
    pub fn add_sender_email(&mut self, sender: &str, subject: &str, main_body: &str) {
        let profile = self.senders.entry(sender.to_string()).or_insert_with(|| SenderProfile {
            sender: sender.to_string(),
            ..SenderProfile::default()
        });
        profile.email_count += 1;
        for t in tokenize(subject).into_iter().chain(tokenize(main_body)) {
            let count = profile.term_freq.entry(t.clone()).or_insert(0);
            if *count == 0 {
                *self.sender_doc_freq.entry(t).or_insert(0) += 1;
            }
            *count += 1;
        }
        self.norms_fresh = false;
    }

    pub fn total_docs(&self) -> u32 {
        self.doc_terms.len() as u32
    }

    pub fn total_senders(&self) -> u32 {
        self.senders.len() as u32
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn sender_doc_freq(&self, term: &str) -> u32 {
        self.sender_doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn postings(&self, term: &str) -> &[(NodeId, u32)] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn doc_length(&self, node: NodeId) -> Option<u32> {
        self.doc_lengths.get(&node).copied()
    }

    pub fn is_indexed(&self, node: NodeId) -> bool {
        self.doc_terms.contains_key(&node)
    }

    pub fn term_freq(&self, term: &str, node: NodeId) -> u32 {
        self.doc_terms
            .get(&node)
            .and_then(|terms| {
                terms.binary_search_by(|(t, _)| t.as_str().cmp(term)).ok().map(|i| terms[i].1)
            })
            .unwrap_or(0)
    }

    pub fn sender_profile(&self, sender: &str) -> Option<&SenderProfile> {
        self.senders.get(sender)
    }

    pub fn senders(&self) -> impl Iterator<Item = &SenderProfile> {
        self.senders.values()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.terms())
    }

    pub fn idf(&self, term: &str) -> f64 {
        tf_idf_weight(1, self.doc_freq(term), self.total_docs())
    }

    pub fn sender_idf(&self, term: &str) -> f64 {
        tf_idf_weight(1, self.sender_doc_freq(term), self.total_senders())
    }

    /// Document-granularity TF-IDF of `term` in `node`.
    pub fn tf_idf(&self, term: &str, node: NodeId) -> Result<f64> {
        let tf = self.term_freq(term, node);
        if tf == 0 {
            return Ok(0.0);
        }
        let df = self.doc_freq(term);
        if df == 0 {
            return Err(Error::Inconsistent(format!("term `{term}` occurs in {node:?} but has df 0")));
        }
        Ok(tf_idf_weight(tf, df, self.total_docs()))
    }

    pub fn sender_tf_idf(&self, term: &str, sender: &str) -> f64 {
        let tf = self
            .senders
            .get(sender)
            .and_then(|p| p.term_freq.get(term).copied())
            .unwrap_or(0);
        tf_idf_weight(tf, self.sender_doc_freq(term), self.total_senders())
    }

    pub fn doc_vector<'a, I>(&self, node: NodeId, universe: I) -> WeightedVector
    where
        I: IntoIterator<Item = &'a str>,
    {
        universe
            .into_iter()
            .map(|t| (t, self.tf_idf(t, node).unwrap_or(0.0)))
            .filter(|(_, w)| *w != 0.0)
            .collect()
    }

    /// Zero vector for unknown senders.
    pub fn sender_vector<'a, I>(&self, sender: &str, universe: I) -> WeightedVector
    where
        I: IntoIterator<Item = &'a str>,
    {
        universe
            .into_iter()
            .map(|t| (t, self.sender_tf_idf(t, sender)))
            .filter(|(_, w)| *w != 0.0)
            .collect()
    }

    /// Full sender vector over every term the sender used.
    pub fn full_sender_vector(&self, sender: &str) -> WeightedVector {
        match self.senders.get(sender) {
            Some(p) => self.sender_vector(sender, p.term_freq.keys().map(String::as_str)),
            None => WeightedVector::default(),
        }
    }

    fn compute_doc_norm(&self, node: NodeId) -> f64 {
        let n = self.total_docs();
        self.doc_terms
            .get(&node)
            .map(|terms| {
                terms
                    .iter()
                    .map(|(t, tf)| tf_idf_weight(*tf, self.doc_freq(t), n).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .unwrap_or(0.0)
    }

    fn compute_sender_norm(&self, sender: &str) -> f64 {
        self.full_sender_vector(sender).norm()
    }

    /// Recomputes cached vector norms after documents or senders were added.
    pub fn refresh(&mut self) {
        if self.norms_fresh {
            return;
        }
        self.doc_norms = self.doc_terms.keys().map(|n| (*n, self.compute_doc_norm(*n))).collect();
        self.sender_norms = self.senders.keys().map(|s| (s.clone(), self.compute_sender_norm(s))).collect();
        self.norms_fresh = true;
    }

    /// Norm of the document's full TF-IDF vector.
    pub fn doc_norm(&self, node: NodeId) -> f64 {
        match (self.norms_fresh, self.doc_norms.get(&node)) {
            (true, Some(n)) => *n,
            _ => self.compute_doc_norm(node),
        }
    }

    pub fn sender_norm(&self, sender: &str) -> f64 {
        match (self.norms_fresh, self.sender_norms.get(sender)) {
            (true, Some(n)) => *n,
            _ => self.compute_sender_norm(sender),
        }
    }

    /// Nodes containing, for every original query word, at least one of its
    /// variants.
    pub fn retrieve_docs(&self, query: &ExpandedQuery) -> Vec<NodeId> {
        let mut result: Option<BTreeSet<NodeId>> = None;
        for word in query.words() {
            let hits: BTreeSet<NodeId> = query
                .variants_of(word)
                .into_iter()
                .flatten()
                .flat_map(|v| self.postings(v).iter().map(|(n, _)| *n))
                .collect();
            result = Some(match result {
                None => hits,
                Some(acc) => acc.intersection(&hits).copied().collect(),
            });
        }
        result.unwrap_or_default().into_iter().collect()
    }

    /// Checks that document frequencies agree with the postings.
    pub fn validate(&self) -> Result<()> {
        for (term, list) in &self.postings {
            let distinct: BTreeSet<NodeId> = list.iter().map(|(n, _)| *n).collect();
            if distinct.len() != list.len() || self.doc_freq(term) as usize != list.len() {
                return Err(Error::Inconsistent(format!("df mismatch for `{term}`")));
            }
        }
        if self.doc_freq.len() != self.postings.len() {
            return Err(Error::Inconsistent("df table has terms without postings".into()));
        }
        Ok(())
    }
}
