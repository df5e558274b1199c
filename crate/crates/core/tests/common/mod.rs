#![allow(dead_code)]

use std::fs;
use std::path::Path;

use chrono::Duration;
use mailrank::corpus::{epoch, Email, EmailId};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn email(id: &str, sender: &str, minutes: i64, subject: &str, segments: &[&str]) -> Email {
    Email::from_parts(
        EmailId::from(id),
        sender,
        epoch() + Duration::minutes(minutes),
        subject,
        segments.iter().map(|s| s.to_string()).collect(),
    )
}

pub fn words<R: Rng>(rng: &mut R, pool: &[&str], n: usize) -> String {
    (0..n).map(|_| *pool.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Syllable-built nonsense word; collisions are rare but possible.
pub fn nonce<R: Rng>(rng: &mut R) -> String {
    const SYL: [&str; 16] = ["ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ber", "dan", "fol", "gri", "hux", "jem", "pol", "zak"];
    (0..rng.gen_range(3..5)).map(|_| *SYL.choose(rng).unwrap()).collect()
}

/// A reply forest: email `i` quotes the full chain of its parent.
pub struct Chain {
    pub emails: Vec<Email>,
    pub parent: Vec<Option<usize>>,
}

pub fn reply_forest<R: Rng>(rng: &mut R, n: usize, max_depth: usize, subjects: &[&str], senders: &[&str], text: &mut dyn FnMut(&mut R) -> String) -> Chain {
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut own: Vec<String> = Vec::new();
    let mut subject: Vec<String> = Vec::new();
    let mut emails = Vec::new();
    for i in 0..n {
        let candidates: Vec<usize> = (0..i).filter(|j| depth[*j] + 1 < max_depth).collect();
        let p = if candidates.is_empty() || rng.gen_bool(0.25) { None } else { Some(*candidates.choose(rng).unwrap()) };
        let d = p.map_or(0, |p| depth[p] + 1);
        let s = match p {
            Some(p) => format!("Re: {}", subject[p]),
            None => subjects.choose(rng).unwrap().to_string(),
        };
        own.push(text(rng));
        let mut segments = vec![own[i].clone()];
        let mut cur = p;
        while let Some(c) = cur {
            segments.push(own[c].clone());
            cur = parent[c];
        }
        let sender = senders.choose(rng).unwrap();
        let refs: Vec<&str> = segments.iter().map(String::as_str).collect();
        emails.push(email(&format!("m{i}"), sender, i as i64, &s, &refs));
        parent.push(p);
        depth.push(d);
        subject.push(s);
    }
    Chain { emails, parent }
}

/// Writes an Enron-style file with a quoted history below `-----Original Message-----` separators.
pub fn write_message(dir: &Path, name: &str, id: &str, from: &str, date: &str, subject: &str, body: &str) {
    fs::create_dir_all(dir).unwrap();
    let text = format!(
        "Message-ID: <{id}>\nDate: {date}\nFrom: {from}\nTo: owner@enron.com\nSubject: {subject}\n\n{body}"
    );
    fs::write(dir.join(name), text).unwrap();
}

pub fn quoted(own: &str, history: &[(&str, &str, &str)]) -> String {
    let mut out = format!("{own}\n");
    for (from, subject, text) in history {
        out.push_str(&format!(
            "\n -----Original Message-----\nFrom: \t{from}\nSent:\tMonday, May 14, 2001 9:00 AM\nTo:\towner@enron.com\nSubject:\t{subject}\n\n{text}\n"
        ));
    }
    out
}
