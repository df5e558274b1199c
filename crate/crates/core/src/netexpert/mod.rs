//! Network expertise service: users publish per-term sender weights computed
//! over their public emails, and searchers ask who is expert in the query
//! terms. Answers feed the global sender score and contact recommendations.

pub mod client;
pub mod protocol;
pub mod server;

pub use client::ExpertClient;
pub use protocol::Message;
pub use server::{ExpertServer, ProfileStore, ServerHandle};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{IndexStore, WeightedVector};
use crate::mailbox::Mailbox;
use crate::ranker::{cosine_parts, sender_similarity};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertiseProfile {
    pub user: String,
    pub terms: BTreeMap<String, f64>,
}

impl ExpertiseProfile {
    pub fn validate(&self) -> Result<()> {
        if self.user.trim().is_empty() {
            return Err(Error::Protocol("profile without a user".into()));
        }
        match self.terms.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            Some((t, w)) => Err(Error::Protocol(format!("weight {w} for `{t}` must be finite and non-negative"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpertAnswer {
    /// Users with a positive weight, heaviest first.
    pub per_term: BTreeMap<String, Vec<(String, f64)>>,
}

impl ExpertAnswer {
    pub fn from_profiles<'a, I>(profiles: I, terms: &[String]) -> Self
    where
        I: IntoIterator<Item = &'a ExpertiseProfile> + Clone,
    {
        let per_term = terms
            .iter()
            .map(|t| {
                let mut users: Vec<(String, f64)> = profiles
                    .clone()
                    .into_iter()
                    .filter_map(|p| p.terms.get(t).filter(|w| **w > 0.0).map(|w| (p.user.clone(), *w)))
                    .collect();
                users.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                (t.clone(), users)
            })
            .collect();
        ExpertAnswer { per_term }
    }

    pub fn weight(&self, user: &str, term: &str) -> Option<f64> {
        self.per_term.get(term)?.iter().find(|(u, _)| u == user).map(|(_, w)| *w)
    }

    pub fn is_empty(&self) -> bool {
        self.per_term.values().all(Vec::is_empty)
    }
}

/// Sender score with network weights overriding the sender's local
/// components term by term. Without any override it is the local score.
pub fn global_sscore(index: &IndexStore, sender: &str, query: &WeightedVector, answer: &ExpertAnswer) -> f64 {
    let overrides: Vec<(&str, f64)> = query
        .components
        .keys()
        .filter_map(|t| answer.weight(sender, t).map(|w| (t.as_str(), w)))
        .collect();
    if overrides.is_empty() {
        return sender_similarity(index, sender, query);
    }
    let mut dot = 0.0;
    for (t, q) in &query.components {
        let w = match overrides.iter().find(|(o, _)| o == t) {
            Some((_, w)) => *w,
            None => index.sender_tf_idf(t, sender),
        };
        dot += q * w;
    }
    let local_norm = index.sender_norm(sender);
    let mut norm_sq = local_norm * local_norm;
    for (t, w) in &overrides {
        norm_sq += w * w - index.sender_tf_idf(t, sender).powi(2);
    }
    cosine_parts(dot, query.norm(), norm_sq.max(0.0).sqrt())
}

/// Network users weighted on every query term who are not yet contacts,
/// by summed weight.
pub fn recommend(answer: &ExpertAnswer, query_terms: &[String], contacts: &BTreeSet<&str>) -> Vec<(String, f64)> {
    let mut totals: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    let distinct: BTreeSet<&String> = query_terms.iter().collect();
    for term in &distinct {
        for (user, w) in answer.per_term.get(*term).into_iter().flatten() {
            if *w > 0.0 {
                let slot = totals.entry(user.as_str()).or_insert((0, 0.0));
                slot.0 += 1;
                slot.1 += w;
            }
        }
    }
    let mut out: Vec<(String, f64)> = totals
        .into_iter()
        .filter(|(u, (n, _))| *n == distinct.len() && !contacts.contains(u))
        .map(|(u, (_, w))| (u.to_string(), w))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// The profile `user` may publish: term counts over the user's own emails in
/// the public folders, weighted by the mailbox's sender-level IDF.
pub fn public_profile(mailbox: &Mailbox, user: &str, public_folders: &[String]) -> ExpertiseProfile {
    let mut tf: BTreeMap<String, u32> = BTreeMap::new();
    for e in mailbox.emails().filter(|e| e.sender == user && public_folders.contains(&e.folder)) {
        for t in tokenize(&e.norm_subject).into_iter().chain(tokenize(&e.main_body().text)) {
            *tf.entry(t).or_insert(0) += 1;
        }
    }
    let index = mailbox.index();
    let terms = tf
        .into_iter()
        .map(|(t, n)| {
            let w = n as f64 * index.sender_idf(&t);
            (t, w)
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();
    ExpertiseProfile { user: user.to_string(), terms }
}
