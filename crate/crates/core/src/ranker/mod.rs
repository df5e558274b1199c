//! Retrieval set assembly and the subject/content/sender scoring.
//!
//! `score = sscore * (cscore + tscore)` where tscore is thread-subject
//! membership, cscore sums level-decayed cosine similarities of an email's
//! documents, and sscore is the cosine between the sender profile and the
//! query at sender granularity.

mod baseline;

pub use baseline::{baseline_rank, clue_ratio, Method};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, FixedOffset};
use serde::Serialize;

use crate::corpus::EmailId;
use crate::error::Result;
use crate::index::{IndexStore, WeightedVector};
use crate::mailbox::Mailbox;
use crate::netexpert::{global_sscore, ExpertAnswer};
use crate::queryexp::{tokenize, ExpandedQuery, Expander};
use crate::threadstore::{NodeId, ThreadId};

/// `dot(a, b) / (|a| |b|)`, zero when either vector is zero.
pub fn cosine(a: &WeightedVector, b: &WeightedVector) -> f64 {
    cosine_parts(a.dot(b), a.norm(), b.norm())
}

pub(crate) fn cosine_parts(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    (dot / (norm_a * norm_b)).clamp(0.0, 1.0)
}

/// Level-decayed sum: `sum_j 0.5^j * sims[j]`.
pub fn cscore_from_sims(sims: &[f64]) -> f64 {
    sims.iter().enumerate().map(|(j, s)| 0.5f64.powi(j as i32) * s).sum()
}

pub fn combine(s_score: f64, c_score: f64, t_score: f64) -> f64 {
    s_score * (c_score + t_score)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    pub expander: Expander,
    /// Added to every sender score; zero keeps the plain product.
    pub sscore_epsilon: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions { expander: Expander::default(), sscore_epsilon: 0.0 }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RetrievedSet {
    pub emails: BTreeSet<EmailId>,
    pub via_subject: BTreeSet<EmailId>,
    pub via_content: BTreeSet<EmailId>,
    /// Nodes that contain every query word.
    pub indexed: Vec<NodeId>,
    /// Threads whose subject contains every query word.
    pub threads: Vec<ThreadId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredEmail {
    pub email_id: EmailId,
    pub t_score: f64,
    pub c_score: f64,
    pub s_score: f64,
    pub score: f64,
    pub date: DateTime<FixedOffset>,
}

impl ScoredEmail {
    pub(crate) fn plain(email_id: EmailId, date: DateTime<FixedOffset>, score: f64) -> Self {
        ScoredEmail { email_id, t_score: 0.0, c_score: 0.0, s_score: 0.0, score, date }
    }
}

/// Score descending, then date descending, then id ascending.
pub fn compare_scored(a: &ScoredEmail, b: &ScoredEmail) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.date.cmp(&a.date))
        .then_with(|| a.email_id.cmp(&b.email_id))
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedList {
    pub query: ExpandedQuery,
    pub items: Vec<ScoredEmail>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<&EmailId> {
        self.items.iter().map(|s| &s.email_id).collect()
    }

    pub fn position(&self, id: &EmailId) -> Option<usize> {
        self.items.iter().position(|s| &s.email_id == id)
    }
}

/// Query-side term weights before IDF: for every occurrence of an original
/// word, each of its variants (and the word itself) gains one.
pub fn query_term_counts(query: &ExpandedQuery) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for w in &query.original.words {
        let mut terms: BTreeSet<&str> = query.variants_of(w).into_iter().flatten().map(String::as_str).collect();
        terms.insert(w);
        for t in terms {
            *out.entry(t.to_string()).or_insert(0.0) += 1.0;
        }
    }
    out
}

pub fn doc_query_vector(index: &IndexStore, counts: &BTreeMap<String, f64>) -> WeightedVector {
    counts.iter().map(|(t, c)| (t.as_str(), c * index.idf(t))).filter(|(_, w)| *w != 0.0).collect()
}

pub fn sender_query_vector(index: &IndexStore, counts: &BTreeMap<String, f64>) -> WeightedVector {
    counts.iter().map(|(t, c)| (t.as_str(), c * index.sender_idf(t))).filter(|(_, w)| *w != 0.0).collect()
}

/// Cosine of a node's full TF-IDF vector against the query vector.
pub fn doc_similarity(index: &IndexStore, node: NodeId, query: &WeightedVector) -> f64 {
    let dot: f64 = query
        .components
        .iter()
        .map(|(t, q)| q * index.tf_idf(t, node).unwrap_or(0.0))
        .sum();
    cosine_parts(dot, query.norm(), index.doc_norm(node))
}

/// Local sender score.
pub fn sender_similarity(index: &IndexStore, sender: &str, query: &WeightedVector) -> f64 {
    let dot: f64 = query.components.iter().map(|(t, q)| q * index.sender_tf_idf(t, sender)).sum();
    cosine_parts(dot, query.norm(), index.sender_norm(sender))
}

pub struct Ranker<'a> {
    mailbox: &'a Mailbox,
    options: RankOptions,
}

impl<'a> Ranker<'a> {
    pub fn new(mailbox: &'a Mailbox, options: RankOptions) -> Self {
        Ranker { mailbox, options }
    }

    pub fn options(&self) -> &RankOptions {
        &self.options
    }

    pub fn expand(&self, raw: &str) -> Result<ExpandedQuery> {
        let query = tokenize(raw)?;
        Ok(self.options.expander.expand_query(&query, self.mailbox.vocabulary()))
    }

    /// Emails owning a node that holds every query word, emails whose main
    /// body sits below such a node, and every email of a subject-matched
    /// thread.
    pub fn retrieve(&self, query: &ExpandedQuery) -> RetrievedSet {
        let store = self.mailbox.threads();
        let indexed = self.mailbox.index().retrieve_docs(query);
        let hits = store.retrieve(query, &indexed);

        let direct: HashSet<NodeId> = indexed.iter().copied().collect();
        let below: HashSet<NodeId> = hits.descendants.values().flatten().copied().collect();
        let mut via_content = BTreeSet::new();
        if !direct.is_empty() {
            for (email, levels) in store.placements() {
                if levels.iter().any(|n| direct.contains(n)) || below.contains(&levels[0]) {
                    via_content.insert(email.clone());
                }
            }
        }
        let via_subject: BTreeSet<EmailId> = hits
            .threads
            .iter()
            .flat_map(|t| store.emails_in_thread(*t))
            .cloned()
            .collect();
        let emails = via_subject.union(&via_content).cloned().collect();
        RetrievedSet { emails, via_subject, via_content, indexed, threads: hits.threads }
    }

    /// Scores every retrieved email. With `network`, sender scores use the
    /// network-wide weights where present.
    pub fn score(&self, query: &ExpandedQuery, set: &RetrievedSet, network: Option<&ExpertAnswer>) -> Vec<ScoredEmail> {
        let index = self.mailbox.index();
        let store = self.mailbox.threads();
        let counts = query_term_counts(query);
        let q_doc = doc_query_vector(index, &counts);
        let q_sender = sender_query_vector(index, &counts);
        let subject_threads: HashSet<ThreadId> = set.threads.iter().copied().collect();

        let mut node_sims: HashMap<NodeId, f64> = HashMap::new();
        let mut sender_sims: HashMap<&str, f64> = HashMap::new();
        let mut out = Vec::with_capacity(set.emails.len());
        for id in &set.emails {
            let Some(email) = self.mailbox.email(id) else { continue };
            let levels = store.placement(id).unwrap_or(&[]);
            let t = match store.thread_of(id) {
                Some(th) if subject_threads.contains(&th) => 1.0,
                _ => 0.0,
            };
            let sims: Vec<f64> = levels
                .iter()
                .map(|n| *node_sims.entry(*n).or_insert_with(|| doc_similarity(index, *n, &q_doc)))
                .collect();
            let c = cscore_from_sims(&sims);
            let s = *sender_sims.entry(email.sender.as_str()).or_insert_with(|| match network {
                Some(answer) => global_sscore(index, &email.sender, &q_sender, answer),
                None => sender_similarity(index, &email.sender, &q_sender),
            }) + self.options.sscore_epsilon;
            out.push(ScoredEmail {
                email_id: id.clone(),
                t_score: t,
                c_score: c,
                s_score: s,
                score: combine(s, c, t),
                date: email.date,
            });
        }
        out.sort_by(compare_scored);
        out
    }

    pub fn rank(&self, raw: &str) -> Result<RankedList> {
        self.rank_with(raw, None)
    }

    pub fn rank_with(&self, raw: &str, network: Option<&ExpertAnswer>) -> Result<RankedList> {
        let query = self.expand(raw)?;
        let set = self.retrieve(&query);
        let items = self.score(&query, &set, network);
        Ok(RankedList { query, items })
    }

    /// Runs one of the ranking methods over the same retrieved set.
    pub fn rank_method(&self, method: Method, raw: &str, clue: Option<&str>) -> Result<RankedList> {
        if method == Method::Era {
            return self.rank(raw);
        }
        let query = self.expand(raw)?;
        let set = self.retrieve(&query);
        let items = baseline_rank(method, &set, self.mailbox, clue)?;
        Ok(RankedList { query, items })
    }
}
