//! The owner's mailbox: parsed emails, their thread forest and the index,
//! kept consistent and saved together in one container file.
//!
//! Container layout: a first line `MAILRANK-STORE <version>` followed by a
//! single JSON object with `emails`, `threads` and `index`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use log::debug;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Email, EmailId};
use crate::error::{Error, Result};
use crate::index::IndexStore;
use crate::queryexp::Vocabulary;
use crate::threadstore::{AdditionOutcome, ThreadStore};

pub const MAGIC: &str = "MAILRANK-STORE";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub emails: usize,
    pub documents: usize,
    pub threads: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub added: usize,
    /// Re-deliveries of an email already stored.
    pub duplicates: usize,
    /// Emails whose Message-ID collided with different content and were stored under a new id.
    pub rekeyed: Vec<EmailId>,
}

#[derive(Debug, Clone)]
pub enum Added {
    New(AdditionOutcome),
    Rekeyed(EmailId, AdditionOutcome),
    Duplicate,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Mailbox {
    emails: BTreeMap<EmailId, Email>,
    threads: ThreadStore,
    index: IndexStore,
    #[serde(skip)]
    vocabulary: OnceLock<Vocabulary>,
}

fn same_content(a: &Email, b: &Email) -> bool {
    a.sender == b.sender
        && a.date == b.date
        && a.norm_subject == b.norm_subject
        && a.documents.len() == b.documents.len()
        && a.documents.iter().zip(&b.documents).all(|(x, y)| x.fingerprint == y.fingerprint)
}

fn content_suffix(email: &Email) -> String {
    let mut h = Sha256::new();
    h.update(email.sender.as_bytes());
    h.update(email.date.to_rfc3339().as_bytes());
    h.update(email.norm_subject.as_bytes());
    for d in &email.documents {
        h.update([0u8]);
        h.update(d.fingerprint.as_bytes());
    }
    hex::encode(&h.finalize()[..4])
}

impl Mailbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn email(&self, id: &EmailId) -> Option<&Email> {
        self.emails.get(id)
    }

    pub fn emails(&self) -> impl Iterator<Item = &Email> {
        self.emails.values()
    }

    pub fn threads(&self) -> &ThreadStore {
        &self.threads
    }

    pub fn index(&self) -> &IndexStore {
        &self.index
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        self.vocabulary.get_or_init(|| self.index.vocabulary())
    }

    /// Distinct senders, the owner's contact list.
    pub fn contacts(&self) -> BTreeSet<&str> {
        self.emails.values().map(|e| e.sender.as_str()).filter(|s| !s.is_empty()).collect()
    }

    /// The most frequent sender, taken as the mailbox owner.
    pub fn owner(&self) -> Option<&str> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for e in self.emails.values().filter(|e| !e.sender.is_empty()) {
            *counts.entry(e.sender.as_str()).or_insert(0) += 1;
        }
        counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0))).map(|(s, _)| s)
    }

    pub fn counts(&self) -> Counts {
        Counts {
            emails: self.emails.len(),
            documents: self.emails.values().map(|e| e.documents.len()).sum(),
            threads: self.threads.threads().len(),
            nodes: self.threads.node_count(),
        }
    }

    /// Threads and indexes one email. Identical re-deliveries are ignored; a
    /// different email reusing a known id is stored under `<id>~<hash>`.
    /// Call [`Mailbox::refresh`] after a batch of additions.
    pub fn add_email(&mut self, mut email: Email) -> Added {
        let mut rekeyed = None;
        if let Some(existing) = self.emails.get(&email.email_id) {
            if same_content(existing, &email) {
                return Added::Duplicate;
            }
            let id = EmailId(format!("{}~{}", email.email_id, content_suffix(&email)));
            if self.emails.contains_key(&id) {
                return Added::Duplicate;
            }
            debug!("message id {} reused; storing as {id}", email.email_id);
            email.rekey(id.clone());
            rekeyed = Some(id);
        }
        let outcome = self.threads.add_email(&email);
        for node in &outcome.inserted {
            self.index.index_document(*node, &self.threads.node(*node).doc.text);
        }
        self.index.add_sender_email(&email.sender, &email.norm_subject, &email.main_body().text);
        self.emails.insert(email.email_id.clone(), email);
        self.vocabulary = OnceLock::new();
        match rekeyed {
            Some(id) => Added::Rekeyed(id, outcome),
            None => Added::New(outcome),
        }
    }

    /// Adds a batch oldest first (ties by id) and refreshes cached norms.
    pub fn ingest(&mut self, mut emails: Vec<Email>) -> IngestSummary {
        emails.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.email_id.cmp(&b.email_id)));
        let mut summary = IngestSummary::default();
        for e in emails {
            match self.add_email(e) {
                Added::New(_) => summary.added += 1,
                Added::Rekeyed(id, _) => {
                    summary.added += 1;
                    summary.rekeyed.push(id);
                }
                Added::Duplicate => summary.duplicates += 1,
            }
        }
        self.refresh();
        summary
    }

    pub fn refresh(&mut self) {
        self.index.refresh();
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "{MAGIC} {FORMAT_VERSION}").map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        serde_json::to_writer(&mut w, self)?;
        w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        let mut r = BufReader::new(file);
        let mut header = String::new();
        r.read_line(&mut header).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let store_err = |msg: String| Error::Store { path: path.to_path_buf(), msg };
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(store_err("not a mailbox store".into()));
        }
        match parts.next().and_then(|v| v.parse::<u32>().ok()) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(store_err(format!("unsupported store version {v}"))),
            None => return Err(store_err("missing store version".into())),
        }
        let mut mb: Mailbox = serde_json::from_reader(r).map_err(|e| store_err(e.to_string()))?;
        mb.threads.rebuild();
        mb.refresh();
        Ok(mb)
    }

    /// Loads `path` when it exists, otherwise starts empty.
    pub fn open_or_new(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::new())
        }
    }

    /// Cross-checks the thread forest against the index.
    pub fn validate(&self) -> Result<()> {
        self.threads.validate().map_err(Error::Inconsistent)?;
        self.index.validate()?;
        if self.index.total_docs() as usize != self.threads.node_count() {
            return Err(Error::Inconsistent(format!(
                "{} indexed documents for {} nodes",
                self.index.total_docs(),
                self.threads.node_count()
            )));
        }
        Ok(())
    }
}
