//! Runs an expertise server on loopback, publishes two user profiles, and
//! compares local and network-aware rankings.
//!
//! cargo run --example expertise_network

use std::collections::BTreeSet;
use std::time::Duration;

use chrono::Duration as Span;
use mailrank::corpus::{epoch, Email, EmailId};
use mailrank::mailbox::Mailbox;
use mailrank::netexpert::{self, ExpertClient, ExpertServer, ExpertiseProfile, ProfileStore};
use mailrank::ranker::{query_term_counts, sender_query_vector, RankOptions, Ranker};

fn email(id: &str, sender: &str, hours: i64, subject: &str, body: &str) -> Email {
    Email::from_parts(EmailId::from(id), sender, epoch() + Span::hours(hours), subject, vec![body.to_string()])
}

fn main() -> mailrank::Result<()> {
    let mut mb = Mailbox::new();
    mb.ingest(vec![
        email("1", "pat@example.com", 1, "Weekly numbers", "Volumes, weather and a note on the hedge."),
        email("2", "pat@example.com", 2, "Weather", "Cold front on Tuesday."),
        email("5", "ops@example.com", 5, "Meter readings", "Meter readings for May are in."),
        email("6", "it@example.com", 6, "Password reset", "Reset your password before Friday."),
        email("7", "hr@example.com", 7, "Benefits", "Open enrollment closes soon."),
        email("3", "lee@example.com", 3, "Quick one", "Is the hedge booked? The hedge ratio looked off."),
        email("4", "kim@example.com", 4, "Hedge accounting", "Hedge effectiveness testing is due; hedge documentation attached."),
    ]);

    let server = ExpertServer::bind("127.0.0.1:0", ProfileStore::in_memory())?.spawn()?;
    let mut client = ExpertClient::connect(server.addr(), Duration::from_secs(5))?;
    client.publish(&ExpertiseProfile { user: "lee@example.com".into(), terms: [("hedge".to_string(), 9.0)].into() })?;
    client.publish(&ExpertiseProfile { user: "sam@elsewhere.com".into(), terms: [("hedge".to_string(), 4.0)].into() })?;

    let ranker = Ranker::new(&mb, RankOptions::default());
    let query = ranker.expand("hedge")?;
    let answer = client.experts(&query.terms().into_iter().map(String::from).collect::<Vec<_>>())?;

    let set = ranker.retrieve(&query);
    let local = ranker.score(&query, &set, None);
    let global = ranker.score(&query, &set, Some(&answer));
    println!("{:<16} {:>8} {:>8}", "sender", "local", "global");
    for (l, g) in local.iter().zip(&global) {
        let sender = &mb.email(&l.email_id).expect("scored email").sender;
        println!("{:<16} {:>8.4} {:>8.4}", sender, l.s_score, g.s_score);
    }

    let q_sender = sender_query_vector(mb.index(), &query_term_counts(&query));
    println!("\nglobal sender score for lee: {:.4}", netexpert::global_sscore(mb.index(), "lee@example.com", &q_sender, &answer));
    let contacts: BTreeSet<&str> = mb.contacts();
    for (user, weight) in netexpert::recommend(&answer, &query.original.words, &contacts) {
        println!("recommended contact: {user} ({weight})");
    }
    server.shutdown();
    Ok(())
}
