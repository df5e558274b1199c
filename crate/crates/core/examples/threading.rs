//! Reassembles a conversation from emails that quote each other, showing
//! how each arrival is classified.
//!
//! cargo run --example threading

use chrono::Duration;
use mailrank::corpus::{epoch, Email, EmailId};
use mailrank::threadstore::ThreadStore;

fn email(id: &str, minutes: i64, subject: &str, segments: &[&str]) -> Email {
    Email::from_parts(
        EmailId::from(id),
        &format!("{id}@example.com"),
        epoch() + Duration::minutes(minutes),
        subject,
        segments.iter().map(|s| s.to_string()).collect(),
    )
}

fn main() {
    let notice = "The pipeline will be down for maintenance on Saturday.";
    let question = "Does this affect the Sunday nominations?";
    let answer = "No, flows resume Saturday night.";

    // arrival order differs from writing order
    let arrivals = [
        email("notice", 0, "Maintenance", &[notice]),
        email("answer", 20, "RE: Maintenance", &[answer, question, notice]),
        email("question", 10, "RE: Maintenance", &[question, notice]),
        email("other", 30, "Maintenance", &["Compressor station 4 is offline."]),
    ];

    let mut store = ThreadStore::new();
    for e in &arrivals {
        let outcome = store.add_email(e);
        println!("{:<9} {:?}, {} new node(s)", e.email_id, outcome.case, outcome.inserted.len());
    }
    println!();
    for thread in store.threads() {
        println!("thread {} `{}`", thread.id.0, thread.subject);
        for root in &thread.roots {
            print_tree(&store, *root, 1);
        }
    }
}

fn print_tree(store: &ThreadStore, id: mailrank::threadstore::NodeId, depth: usize) {
    let node = store.node(id);
    let owners: Vec<String> = node.main_body_of.iter().map(ToString::to_string).collect();
    println!("{}{}  [{}]", "  ".repeat(depth), node.doc.text, owners.join(", "));
    for child in &node.children {
        print_tree(store, *child, depth + 1);
    }
}
