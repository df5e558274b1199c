//! Ingests a maildir tree (a temporary one unless a path is given), saves
//! the mailbox store and reloads it.
//!
//! cargo run --example maildir_ingest -- [maildir]

use std::fs;
use std::path::{Path, PathBuf};

use mailrank::corpus::{collect_emails, IngestFilter};
use mailrank::mailbox::Mailbox;

fn write(dir: &Path, name: &str, text: &str) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join(name), text).unwrap();
}

fn sample(root: &Path) {
    write(
        &root.join("jdoe/inbox"),
        "1.",
        "Message-ID: <1.x@example>\nDate: Tue, 15 May 2001 08:00:00 -0700 (PDT)\nFrom: ann@example.com\nTo: jdoe@example.com\nSubject: Storage report\n\nInjections were 80 Bcf last week.\n",
    );
    write(
        &root.join("jdoe/sent_items"),
        "1.",
        "Message-ID: <2.x@example>\nDate: Tue, 15 May 2001 09:30:00 -0700 (PDT)\nFrom: jdoe@example.com\nTo: ann@example.com\nSubject: RE: Storage report\n\nThanks, that matches our estimate.\n\n -----Original Message-----\nFrom: \tAnn\nSent:\tTuesday, May 15, 2001 8:00 AM\nTo:\tJohn Doe\nSubject:\tStorage report\n\nInjections were 80 Bcf last week.\n",
    );
    write(&root.join("jdoe/deleted_items"), "1.", "Message-ID: <3.x@example>\nFrom: spam@example.com\nSubject: Offer\n\nBuy now.\n");
}

fn main() -> mailrank::Result<()> {
    let tmp = tempfile::tempdir().expect("temp dir");
    let root: PathBuf = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let r = tmp.path().join("maildir");
            sample(&r);
            r
        }
    };

    let collected = collect_emails(&root, &IngestFilter::default())?;
    for (path, why) in &collected.skipped {
        println!("skipped {}: {why}", path.display());
    }
    let mut mb = Mailbox::new();
    let summary = mb.ingest(collected.emails);
    println!("added {}, duplicates {}, rekeyed {}", summary.added, summary.duplicates, summary.rekeyed.len());

    let store = tmp.path().join("mail.store");
    mb.save(&store)?;
    let reloaded = Mailbox::load(&store)?;
    let c = reloaded.counts();
    println!("{} emails, {} documents, {} threads, {} nodes", c.emails, c.documents, c.threads, c.nodes);
    for e in reloaded.emails() {
        println!("  {} [{}] {} levels  {}", e.email_id, e.folder, e.documents.len(), e.raw_subject);
    }
    Ok(())
}
