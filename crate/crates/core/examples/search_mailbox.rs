//! Ranks a small mailbox for a query and shows the subject, content and
//! sender components behind each score.
//!
//! cargo run --example search_mailbox -- "gas price"

use chrono::Duration;
use mailrank::corpus::{epoch, Email, EmailId};
use mailrank::mailbox::Mailbox;
use mailrank::ranker::{Method, RankOptions, Ranker};

fn email(id: &str, sender: &str, hours: i64, subject: &str, segments: &[&str]) -> Email {
    Email::from_parts(EmailId::from(id), sender, epoch() + Duration::hours(hours), subject, segments.iter().map(|s| s.to_string()).collect())
}

fn mailbox() -> Mailbox {
    let q = "What gas price should we assume for the Q3 budget?";
    let a = "Use the forward curve; the gas price at Henry Hub is 4.10.";
    let mut mb = Mailbox::new();
    mb.ingest(vec![
        email("1", "trader@example.com", 1, "Gas price assumption", &[q]),
        email("2", "analyst@example.com", 2, "RE: Gas price assumption", &[a, q]),
        email("3", "analyst@example.com", 3, "Curve update", &["The gas curve moved; price changes are posted on the desk site."]),
        email("4", "hr@example.com", 4, "Benefits", &["Open enrollment ends Friday. Gas card reimbursements need receipts."]),
        email("5", "analyst@example.com", 5, "Storage", &["Storage injections look strong this week. Gas price spreads widened."]),
        email("6", "it@example.com", 6, "Outage", &["Email will be down Saturday."]),
    ]);
    mb
}

fn main() -> mailrank::Result<()> {
    let raw = std::env::args().nth(1).unwrap_or_else(|| "gas price".into());
    let mb = mailbox();
    let ranker = Ranker::new(&mb, RankOptions::default());

    let list = ranker.rank(&raw)?;
    println!("{:<4} {:>8} {:>6} {:>8} {:>8}  subject", "id", "score", "t", "c", "s");
    for item in &list.items {
        let e = mb.email(&item.email_id).expect("ranked email exists");
        println!("{:<4} {:>8.4} {:>6.1} {:>8.4} {:>8.4}  {}", item.email_id, item.score, item.t_score, item.c_score, item.s_score, e.raw_subject);
    }

    println!("\nby date:");
    for item in ranker.rank_method(Method::Date, &raw, None)?.items {
        println!("  {} {}", item.email_id, item.date.format("%H:%M"));
    }
    Ok(())
}
