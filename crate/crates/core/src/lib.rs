//! Email search ranking over a personal mailbox.
//!
//! Emails are split into their own text and quoted documents, threaded into
//! trees of deduplicated documents, and indexed per document. A query is
//! expanded with stem and spelling variants, matched against thread subjects
//! and documents, and every retrieved email is scored as
//! `sender * (content + subject)`.
//!
//! ```no_run
//! use mailrank::{corpus, mailbox::Mailbox, ranker::{RankOptions, Ranker}};
//!
//! let found = corpus::collect_emails("maildir".as_ref(), &corpus::IngestFilter::default())?;
//! let mut mailbox = Mailbox::new();
//! mailbox.ingest(found.emails);
//! let ranked = Ranker::new(&mailbox, RankOptions::default()).rank("master netting")?;
//! for item in ranked.items.iter().take(10) {
//!     println!("{:.4} {}", item.score, item.email_id);
//! }
//! # Ok::<(), mailrank::Error>(())
//! ```

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod index;
pub mod mailbox;
pub mod netexpert;
pub mod queryexp;
pub mod ranker;
pub mod text;
pub mod threadstore;

pub use error::{Error, Result};
