//! Thread trees whose nodes are deduplicated email documents.
//!
//! An incoming email is laid out oldest quotation first. Threads sharing its
//! normalized subject are searched for the longest descending node path whose
//! contents match that sequence; the unmatched remainder is hung below the
//! end of the path. A zero-length match starts a new thread.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Email, EmailDocument, EmailId};
use crate::queryexp::ExpandedQuery;
use crate::text::subject_tokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThreadId(pub u32);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreadNode {
    pub id: NodeId,
    pub thread: ThreadId,
    /// The document that first introduced this content.
    pub doc: EmailDocument,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Emails whose main body is this node's content.
    pub main_body_of: Vec<EmailId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thread {
    pub id: ThreadId,
    pub subject: String,
    pub roots: Vec<NodeId>,
    #[serde(skip)]
    by_fingerprint: HashMap<String, Vec<NodeId>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchPath {
    pub nodes: Vec<NodeId>,
}

impl MatchPath {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdditionCase {
    NewThread,
    AllQuotationsMatched,
    SomeQuotationsMatched,
    AllDocumentsMatched,
    NoDocumentMatched,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditionOutcome {
    pub case: AdditionCase,
    pub thread: ThreadId,
    /// Nodes created for this email, oldest first. These need indexing.
    pub inserted: Vec<NodeId>,
}

/// How document contents are compared when walking a thread.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Similarity {
    /// Word-bigram Jaccard threshold for the fallback match; `None` disables it.
    pub fuzzy_threshold: Option<f64>,
}

impl Default for Similarity {
    fn default() -> Self {
        Similarity { fuzzy_threshold: Some(0.9) }
    }
}

fn shingles(fingerprint: &str) -> HashSet<(&str, &str)> {
    let words: Vec<&str> = fingerprint.split(' ').filter(|w| !w.is_empty()).collect();
    match words.len() {
        0 => HashSet::new(),
        1 => HashSet::from([(words[0], "")]),
        _ => words.windows(2).map(|w| (w[0], w[1])).collect(),
    }
}

/// Jaccard similarity of word-bigram shingles; 0 for two empty texts.
pub fn shingle_jaccard(a: &str, b: &str) -> f64 {
    let (sa, sb) = (shingles(a), shingles(b));
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Result of thread-aware retrieval for a query.
#[derive(Debug, Clone, Default)]
pub struct ThreadRetrieval {
    /// Threads whose subject contains every query word (or a variant).
    pub threads: Vec<ThreadId>,
    /// For each index-retrieved node, every node strictly below it.
    pub descendants: BTreeMap<NodeId, Vec<NodeId>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ThreadStore {
    threads: Vec<Thread>,
    nodes: Vec<ThreadNode>,
    /// Node holding each level of each email (index = level).
    placements: BTreeMap<EmailId, Vec<NodeId>>,
    similarity: Similarity,
    #[serde(skip)]
    by_subject: HashMap<String, Vec<ThreadId>>,
    /// Word count per node fingerprint, for cheap rejection of fuzzy matches.
    #[serde(skip)]
    word_counts: Vec<usize>,
}

fn word_count(fingerprint: &str) -> usize {
    fingerprint.split(' ').filter(|w| !w.is_empty()).count()
}

impl ThreadStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_similarity(similarity: Similarity) -> Self {
        ThreadStore { similarity, ..Self::default() }
    }

    /// Rebuilds lookup tables after deserialization.
    pub(crate) fn rebuild(&mut self) {
        self.by_subject.clear();
        self.word_counts = self.nodes.iter().map(|n| word_count(&n.doc.fingerprint)).collect();
        for t in &mut self.threads {
            t.by_fingerprint.clear();
            self.by_subject.entry(t.subject.clone()).or_default().push(t.id);
        }
        for n in &self.nodes {
            self.threads[n.thread.0 as usize]
                .by_fingerprint
                .entry(n.doc.fingerprint.clone())
                .or_default()
                .push(n.id);
        }
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn nodes(&self) -> &[ThreadNode] {
        &self.nodes
    }

    pub fn thread(&self, id: ThreadId) -> &Thread {
        &self.threads[id.0 as usize]
    }

    pub fn node(&self, id: NodeId) -> &ThreadNode {
        &self.nodes[id.0 as usize]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains_email(&self, id: &EmailId) -> bool {
        self.placements.contains_key(id)
    }

    /// Nodes holding the email's documents, indexed by level.
    pub fn placement(&self, id: &EmailId) -> Option<&[NodeId]> {
        self.placements.get(id).map(Vec::as_slice)
    }

    pub fn placements(&self) -> impl Iterator<Item = (&EmailId, &[NodeId])> {
        self.placements.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Thread holding the email's main body.
    pub fn thread_of(&self, id: &EmailId) -> Option<ThreadId> {
        self.placements.get(id).map(|p| self.node(p[0]).thread)
    }

    pub fn find_threads_by_subject(&self, subject: &str) -> Vec<&Thread> {
        self.by_subject
            .get(subject)
            .map(|ids| ids.iter().map(|id| self.thread(*id)).collect())
            .unwrap_or_default()
    }

    /// Emails whose main body lies in the thread, in node order.
    pub fn emails_in_thread(&self, id: ThreadId) -> Vec<&EmailId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.thread(id).roots.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            let node = self.node(n);
            out.extend(node.main_body_of.iter());
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// Every node strictly below `id`, preorder.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.node(id).children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.node(n).children.iter().rev());
        }
        out
    }

    fn same_content(&self, node: NodeId, doc: &EmailDocument) -> bool {
        self.node(node).doc.fingerprint == doc.fingerprint
    }

    fn similar_content(&self, node: NodeId, doc: &EmailDocument) -> bool {
        match self.similarity.fuzzy_threshold {
            Some(t) => {
                // Jaccard <= |smaller| / |larger| <= word-count ratio
                let (a, b) = (self.word_counts[node.0 as usize], word_count(&doc.fingerprint));
                let (lo, hi) = (a.min(b) as f64, a.max(b).max(1) as f64);
                lo / hi >= t && shingle_jaccard(&self.node(node).doc.fingerprint, &doc.fingerprint) >= t
            }
            None => false,
        }
    }

    /// Exact matches among `candidates`, or fuzzy ones when there are none.
    fn matching(&self, candidates: &[NodeId], doc: &EmailDocument) -> Vec<NodeId> {
        let exact: Vec<NodeId> = candidates.iter().copied().filter(|n| self.same_content(*n, doc)).collect();
        if !exact.is_empty() {
            return exact;
        }
        candidates.iter().copied().filter(|n| self.similar_content(*n, doc)).collect()
    }

    fn extend_path(&self, node: NodeId, oldest_first: &[&EmailDocument]) -> Vec<NodeId> {
        let mut best = vec![node];
        if let Some((next, rest)) = oldest_first.split_first() {
            for child in self.matching(&self.node(node).children, next) {
                let tail = self.extend_path(child, rest);
                if tail.len() + 1 > best.len() {
                    best = std::iter::once(node).chain(tail).collect();
                }
            }
        }
        best
    }

    /// Longest descending path matching the email's documents taken oldest
    /// quotation first. Empty when the oldest document matches nothing.
    pub fn longest_match_path(&self, thread: ThreadId, email: &Email) -> MatchPath {
        let oldest_first: Vec<&EmailDocument> = email.documents.iter().rev().collect();
        let t = self.thread(thread);
        let first = oldest_first[0];
        let starts = match t.by_fingerprint.get(&first.fingerprint) {
            Some(exact) if !exact.is_empty() => exact.clone(),
            _ => {
                let all: Vec<NodeId> = t.by_fingerprint.values().flatten().copied().collect();
                let mut fuzzy = self.matching(&all, first);
                fuzzy.sort_unstable();
                fuzzy
            }
        };
        let mut best = Vec::new();
        for start in starts {
            let path = self.extend_path(start, &oldest_first[1..]);
            if path.len() > best.len() {
                best = path;
            }
        }
        MatchPath { nodes: best }
    }

    fn new_thread(&mut self, subject: &str) -> ThreadId {
        let id = ThreadId(self.threads.len() as u32);
        self.threads.push(Thread {
            id,
            subject: subject.to_string(),
            roots: Vec::new(),
            by_fingerprint: HashMap::new(),
        });
        self.by_subject.entry(subject.to_string()).or_default().push(id);
        id
    }

    fn insert_node(&mut self, thread: ThreadId, parent: Option<NodeId>, doc: &EmailDocument) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.word_counts.push(word_count(&doc.fingerprint));
        self.nodes.push(ThreadNode {
            id,
            thread,
            doc: doc.clone(),
            parent,
            children: Vec::new(),
            main_body_of: Vec::new(),
        });
        match parent {
            Some(p) => self.nodes[p.0 as usize].children.push(id),
            None => self.threads[thread.0 as usize].roots.push(id),
        }
        self.threads[thread.0 as usize]
            .by_fingerprint
            .entry(doc.fingerprint.clone())
            .or_default()
            .push(id);
        id
    }

    /// Hangs `docs` (oldest first) as a chain below `parent`.
    fn insert_chain(&mut self, thread: ThreadId, mut parent: Option<NodeId>, docs: &[&EmailDocument]) -> Vec<NodeId> {
        let mut inserted = Vec::with_capacity(docs.len());
        for doc in docs {
            let id = self.insert_node(thread, parent, doc);
            inserted.push(id);
            parent = Some(id);
        }
        inserted
    }

    fn record(&mut self, email: &Email, oldest_first_nodes: &[NodeId]) {
        let by_level: Vec<NodeId> = oldest_first_nodes.iter().rev().copied().collect();
        let main = &mut self.nodes[by_level[0].0 as usize].main_body_of;
        if !main.contains(&email.email_id) {
            main.push(email.email_id.clone());
        }
        self.placements.insert(email.email_id.clone(), by_level);
    }

    /// Adds one email and reports which of the four cases applied.
    pub fn add_email(&mut self, email: &Email) -> AdditionOutcome {
        let oldest_first: Vec<&EmailDocument> = email.documents.iter().rev().collect();
        let n_e = oldest_first.len();

        let candidates: Vec<ThreadId> = self
            .by_subject
            .get(&email.norm_subject)
            .cloned()
            .unwrap_or_default();

        if candidates.is_empty() {
            let thread = self.new_thread(&email.norm_subject);
            let inserted = self.insert_chain(thread, None, &oldest_first);
            self.record(email, &inserted);
            return AdditionOutcome { case: AdditionCase::NewThread, thread, inserted };
        }

        // candidates are in creation order, so a strict `>` keeps the oldest on ties
        let mut best: Option<(ThreadId, MatchPath)> = None;
        for t in candidates {
            let path = self.longest_match_path(t, email);
            if best.as_ref().is_none_or(|(_, b)| path.len() > b.len()) {
                best = Some((t, path));
            }
        }
        let (thread, path) = best.expect("non-empty candidates");
        let n_p = path.len();

        if n_p == 0 {
            let thread = self.new_thread(&email.norm_subject);
            let inserted = self.insert_chain(thread, None, &oldest_first);
            self.record(email, &inserted);
            return AdditionOutcome { case: AdditionCase::NoDocumentMatched, thread, inserted };
        }

        let case = if n_p == n_e {
            AdditionCase::AllDocumentsMatched
        } else if n_p == n_e - 1 {
            AdditionCase::AllQuotationsMatched
        } else {
            AdditionCase::SomeQuotationsMatched
        };
        let end = *path.nodes.last().expect("non-empty path");
        let inserted = self.insert_chain(thread, Some(end), &oldest_first[n_p..]);
        let mut all = path.nodes;
        all.extend(&inserted);
        self.record(email, &all);
        AdditionOutcome { case, thread, inserted }
    }

    /// Subject-matched threads plus the descendants of every indexed hit.
    pub fn retrieve(&self, query: &ExpandedQuery, indexed: &[NodeId]) -> ThreadRetrieval {
        let mut threads = Vec::new();
        for (subject, ids) in &self.by_subject {
            let tokens = subject_tokens(subject);
            if query.covered_by(tokens.iter().map(String::as_str)) {
                threads.extend(ids.iter().copied());
            }
        }
        threads.sort_unstable();
        let descendants = indexed.iter().map(|n| (*n, self.descendants(*n))).collect();
        ThreadRetrieval { threads, descendants }
    }

    /// Order-independent description of every thread: each tree printed with
    /// children sorted by content. Two stores with equal shapes hold
    /// isomorphic forests.
    pub fn shape(&self) -> Vec<String> {
        fn render(store: &ThreadStore, id: NodeId) -> String {
            let node = store.node(id);
            let mut kids: Vec<String> = node.children.iter().map(|c| render(store, *c)).collect();
            kids.sort();
            format!("[{}{}]", node.doc.fingerprint, kids.concat())
        }
        let mut out: Vec<String> = self
            .threads
            .iter()
            .map(|t| {
                let mut roots: Vec<String> = t.roots.iter().map(|r| render(self, *r)).collect();
                roots.sort();
                format!("{}:{}", t.subject, roots.concat())
            })
            .collect();
        out.sort();
        out
    }

    /// Checks tree structure: parent/child links agree, siblings hold
    /// distinct contents, and every email's levels form a parent chain.
    pub fn validate(&self) -> Result<(), String> {
        for n in &self.nodes {
            if let Some(p) = n.parent {
                if !self.node(p).children.contains(&n.id) {
                    return Err(format!("node {:?} missing from parent's children", n.id));
                }
                if self.node(p).thread != n.thread {
                    return Err(format!("node {:?} crosses threads", n.id));
                }
            }
            let mut seen = BTreeSet::new();
            for c in &n.children {
                if self.node(*c).parent != Some(n.id) {
                    return Err(format!("child {c:?} does not point back"));
                }
                if !seen.insert(self.node(*c).doc.fingerprint.as_str()) {
                    return Err(format!("duplicate sibling content under {:?}", n.id));
                }
            }
        }
        for (email, levels) in &self.placements {
            for pair in levels.windows(2) {
                if self.node(pair[0]).parent != Some(pair[1]) {
                    return Err(format!("{email}: level chain broken at {:?}", pair[0]));
                }
            }
            if !self.node(levels[0]).main_body_of.contains(email) {
                return Err(format!("{email}: main body back-reference missing"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::epoch;

    fn email(id: &str, subject: &str, docs: &[&str]) -> Email {
        Email::from_parts(
            EmailId::from(id),
            "a@x",
            epoch(),
            subject,
            docs.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn texts(store: &ThreadStore, ids: &[NodeId]) -> Vec<String> {
        ids.iter().map(|n| store.node(*n).doc.text.clone()).collect()
    }

    // documents are given main body first: [ed_b, ed_1, ed_2]
    const SUBJ: &str = "Revised Daily Notice";

    #[test]
    fn new_thread_chain_from_oldest() {
        let mut s = ThreadStore::new();
        let out = s.add_email(&email("e", SUBJ, &["b", "one", "two"]));
        assert_eq!(out.case, AdditionCase::NewThread);
        assert_eq!(texts(&s, &out.inserted), vec!["two", "one", "b"]);
        let root = s.thread(out.thread).roots[0];
        assert_eq!(s.node(root).doc.text, "two");
        assert_eq!(s.placement(&"e".into()).unwrap().len(), 3);
    }

    #[test]
    fn case1_all_quotations_matched() {
        let mut s = ThreadStore::new();
        s.add_email(&email("p", SUBJ, &["one", "two"]));
        let e = email("e", &format!("Re: {SUBJ}"), &["b", "one", "two"]);
        let t = s.find_threads_by_subject(&e.norm_subject)[0].id;
        assert_eq!(s.longest_match_path(t, &e).len(), 2);
        let out = s.add_email(&e);
        assert_eq!(out.case, AdditionCase::AllQuotationsMatched);
        assert_eq!(texts(&s, &out.inserted), vec!["b"]);
        let b = out.inserted[0];
        assert_eq!(s.node(s.node(b).parent.unwrap()).doc.text, "one");
    }

    #[test]
    fn case2_some_quotations_matched() {
        let mut s = ThreadStore::new();
        s.add_email(&email("p", SUBJ, &["two"]));
        let e = email("e", SUBJ, &["b", "one", "two"]);
        let t = s.find_threads_by_subject(&e.norm_subject)[0].id;
        assert_eq!(s.longest_match_path(t, &e).len(), 1);
        let out = s.add_email(&e);
        assert_eq!(out.case, AdditionCase::SomeQuotationsMatched);
        assert_eq!(texts(&s, &out.inserted), vec!["one", "b"]);
        assert_eq!(s.node_count(), 3);
    }

    #[test]
    fn case3_all_documents_matched_records_late_email() {
        let mut s = ThreadStore::new();
        s.add_email(&email("reply", SUBJ, &["b", "one", "two"]));
        let late = email("late", SUBJ, &["one", "two"]);
        let out = s.add_email(&late);
        assert_eq!(out.case, AdditionCase::AllDocumentsMatched);
        assert!(out.inserted.is_empty());
        let main = s.placement(&"late".into()).unwrap()[0];
        assert_eq!(s.node(main).main_body_of, vec![EmailId::from("late")]);
    }

    #[test]
    fn case4_no_document_matched() {
        let mut s = ThreadStore::new();
        s.add_email(&email("p", SUBJ, &["one", "two"]));
        let e = email("e", SUBJ, &["other", "unrelated"]);
        let t = s.find_threads_by_subject(&e.norm_subject)[0].id;
        assert_eq!(s.longest_match_path(t, &e).len(), 0);
        let out = s.add_email(&e);
        assert_eq!(out.case, AdditionCase::NoDocumentMatched);
        assert_eq!(s.find_threads_by_subject("revised daily notice").len(), 2);
        assert!(s.find_threads_by_subject("unknown").is_empty());
    }

    #[test]
    fn readding_changes_nothing() {
        let mut s = ThreadStore::new();
        let e = email("e", SUBJ, &["b", "one"]);
        s.add_email(&e);
        let before = s.shape();
        let out = s.add_email(&e);
        assert_eq!(out.case, AdditionCase::AllDocumentsMatched);
        assert_eq!(s.shape(), before);
        assert_eq!(s.node(s.placement(&"e".into()).unwrap()[0]).main_body_of.len(), 1);
    }

    #[test]
    fn best_thread_by_path_length_then_age() {
        let mut s = ThreadStore::new();
        s.add_email(&email("a", SUBJ, &["x"]));
        s.add_email(&email("b", SUBJ, &["y"])); // case 4, second thread
        s.add_email(&email("c", SUBJ, &["z", "y"])); // extends second thread
        let out = s.add_email(&email("d", SUBJ, &["w", "z", "y"]));
        assert_eq!(out.thread, ThreadId(1));
        assert_eq!(out.case, AdditionCase::AllQuotationsMatched);
    }

    #[test]
    fn fuzzy_fallback_matches_rewrapped_quote() {
        let original = "please find attached the revised daily notice for october with updated volumes for all the pipelines in the west region and the east region";
        let requoted = format!("{original} thanks");
        let mut s = ThreadStore::new();
        s.add_email(&email("p", SUBJ, &[original]));
        let out = s.add_email(&email("e", SUBJ, &["ok", &requoted]));
        assert!(shingle_jaccard(&crate::corpus::fingerprint(original), &crate::corpus::fingerprint(&requoted)) >= 0.9);
        assert_eq!(out.case, AdditionCase::AllQuotationsMatched);

        let mut strict = ThreadStore::with_similarity(Similarity { fuzzy_threshold: None });
        strict.add_email(&email("p", SUBJ, &[original]));
        let out = strict.add_email(&email("e", SUBJ, &["ok", &requoted]));
        assert_eq!(out.case, AdditionCase::NoDocumentMatched);
    }

    #[test]
    fn descendants_of_mid_node() {
        let mut s = ThreadStore::new();
        s.add_email(&email("r", SUBJ, &["mid", "root"]));
        s.add_email(&email("c1", SUBJ, &["c1", "mid", "root"]));
        s.add_email(&email("c2", SUBJ, &["c2", "mid", "root"]));
        s.add_email(&email("g", SUBJ, &["g", "c1", "mid", "root"]));
        let mid = s.placement(&"r".into()).unwrap()[0];
        let mut got = texts(&s, &s.descendants(mid));
        got.sort();
        assert_eq!(got, vec!["c1", "c2", "g"]);
    }

    #[test]
    fn emails_in_thread_lists_main_bodies() {
        let mut s = ThreadStore::new();
        s.add_email(&email("r", SUBJ, &["mid", "root"]));
        s.add_email(&email("c", SUBJ, &["c", "mid", "root"]));
        let t = s.thread_of(&"c".into()).unwrap();
        let ids: Vec<&str> = s.emails_in_thread(t).iter().map(|e| e.0.as_str()).collect();
        assert_eq!(ids, vec!["r", "c"]);
    }

    #[test]
    fn roundtrip_rebuilds_lookup() {
        let mut s = ThreadStore::new();
        s.add_email(&email("r", SUBJ, &["mid", "root"]));
        let json = serde_json::to_string(&s).unwrap();
        let mut back: ThreadStore = serde_json::from_str(&json).unwrap();
        back.rebuild();
        let out = back.add_email(&email("c", SUBJ, &["c", "mid", "root"]));
        assert_eq!(out.case, AdditionCase::AllQuotationsMatched);
    }
}
