//! Scores every ranking method against graded judgments with NDCG@K and
//! binarized precision, recall and F-measure.
//!
//! cargo run --example evaluate_methods

use chrono::Duration;
use mailrank::corpus::{epoch, Email, EmailId};
use mailrank::evalkit::{evaluate_run, format_table, Judgment, Qrels, RunEntry};
use mailrank::mailbox::Mailbox;
use mailrank::ranker::{Method, RankOptions, Ranker};

fn email(id: &str, sender: &str, hours: i64, subject: &str, body: &str) -> Email {
    Email::from_parts(EmailId::from(id), sender, epoch() + Duration::hours(hours), subject, vec![body.to_string()])
}

fn main() -> mailrank::Result<()> {
    let mut mb = Mailbox::new();
    mb.ingest(vec![
        email("r1", "legal@example.com", 1, "Master netting agreement", "Attached is the master netting agreement for signature."),
        email("r2", "legal@example.com", 2, "Netting schedule", "Schedule B of the master agreement covers netting of payments."),
        email("r3", "credit@example.com", 3, "Credit review", "Credit approved the netting terms; the master is with legal."),
        email("n1", "desk@example.com", 4, "Master calendar", "The master calendar for netting holidays is posted."),
        email("n2", "desk@example.com", 5, "Lunch", "Lunch is on the master floor today."),
        email("f1", "ops@example.com", 6, "Meter readings", "Meter readings for May are in."),
        email("f2", "it@example.com", 7, "Password reset", "Reset your password before Friday."),
        email("f3", "hr@example.com", 8, "Benefits", "Open enrollment closes soon."),
    ]);
    let qrels = Qrels::from_judgments([("r1", 3), ("r2", 2), ("r3", 1), ("n1", 0)].map(|(e, g)| Judgment {
        query_id: "Q1".into(),
        email_id: e.into(),
        grade: g,
    }))?;

    let ranker = Ranker::new(&mb, RankOptions::default());
    let mut reports = Vec::new();
    for method in Method::ALL {
        let list = ranker.rank_method(method, "master netting", Some("agreement"))?;
        let entries: Vec<RunEntry> = list
            .items
            .iter()
            .enumerate()
            .map(|(i, s)| RunEntry { query_id: "Q1".into(), email_id: s.email_id.to_string(), rank: i + 1, score: s.score, tag: method.name().into() })
            .collect();
        reports.push(evaluate_run(&entries, &qrels, &[1, 3, 5], method.name())?);
    }
    print!("{}", format_table(&reports));
    Ok(())
}
