//! Comparison orderings over the same retrieved set.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset};

use super::{RetrievedSet, ScoredEmail};
use crate::corpus::{Email, EmailId};
use crate::error::{Error, Result};
use crate::mailbox::Mailbox;
use crate::text::tokenize;
use crate::threadstore::ThreadId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Era,
    Date,
    ThreadDate,
    SubjectAlpha,
    SenderAlpha,
    Clues,
}

impl Method {
    pub const NAMES: [&'static str; 6] = ["era", "date", "thread_date", "subject_alpha", "sender_alpha", "clues"];
    pub const ALL: [Method; 6] = [
        Method::Era,
        Method::Date,
        Method::ThreadDate,
        Method::SubjectAlpha,
        Method::SenderAlpha,
        Method::Clues,
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| Self::ALL[i])
            .ok_or(Error::UnknownMethod(s))
    }
}

/// Share of the occurrences of clue-neighbour terms that fall inside the
/// clue's paragraphs. Neighbours are the other terms of any paragraph of the
/// main body containing the clue.
pub fn clue_ratio(main_body: &str, clue: &str) -> f64 {
    let mut paragraphs: Vec<Vec<String>> = vec![Vec::new()];
    for line in main_body.lines() {
        if line.trim().is_empty() {
            paragraphs.push(Vec::new());
        } else {
            paragraphs.last_mut().expect("non-empty").extend(tokenize(line));
        }
    }
    let mut inside: BTreeMap<&str, usize> = BTreeMap::new();
    for p in paragraphs.iter().filter(|p| p.iter().any(|t| t == clue)) {
        for t in p.iter().filter(|t| *t != clue) {
            *inside.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    if inside.is_empty() {
        return 0.0;
    }
    let total: usize = paragraphs.iter().flatten().filter(|t| inside.contains_key(t.as_str())).count();
    inside.values().sum::<usize>() as f64 / total as f64
}

fn by_date_desc(a: &Email, b: &Email) -> std::cmp::Ordering {
    b.date.cmp(&a.date).then_with(|| a.email_id.cmp(&b.email_id))
}

/// Orders the retrieved set by a non-scoring method. Scores in the result
/// are descending positions, except for `clues` where they are the ratios.
pub fn baseline_rank(method: Method, set: &RetrievedSet, mailbox: &Mailbox, clue: Option<&str>) -> Result<Vec<ScoredEmail>> {
    let mut emails: Vec<&Email> = set.emails.iter().filter_map(|id| mailbox.email(id)).collect();
    let mut ratios: BTreeMap<&EmailId, f64> = BTreeMap::new();
    match method {
        Method::Era => return Err(Error::UnknownMethod("era is not a baseline".into())),
        Method::Date => emails.sort_by(|a, b| by_date_desc(a, b)),
        Method::ThreadDate => {
            let thread_of = |e: &Email| mailbox.threads().thread_of(&e.email_id).unwrap_or(ThreadId(u32::MAX));
            let mut newest: BTreeMap<ThreadId, DateTime<FixedOffset>> = BTreeMap::new();
            for e in &emails {
                let slot = newest.entry(thread_of(e)).or_insert(e.date);
                *slot = (*slot).max(e.date);
            }
            emails.sort_by(|a, b| {
                let (ta, tb) = (thread_of(a), thread_of(b));
                (Reverse(newest[&ta]), ta).cmp(&(Reverse(newest[&tb]), tb)).then_with(|| by_date_desc(a, b))
            });
        }
        Method::SubjectAlpha => {
            emails.sort_by(|a, b| b.norm_subject.cmp(&a.norm_subject).then_with(|| by_date_desc(a, b)))
        }
        Method::SenderAlpha => emails.sort_by(|a, b| b.sender.cmp(&a.sender).then_with(|| by_date_desc(a, b))),
        Method::Clues => {
            let clue = clue.and_then(|c| tokenize(c).into_iter().next());
            for e in &emails {
                let r = clue.as_deref().map_or(0.0, |c| clue_ratio(&e.main_body().text, c));
                ratios.insert(&e.email_id, r);
            }
            emails.sort_by(|a, b| {
                ratios[&b.email_id].total_cmp(&ratios[&a.email_id]).then_with(|| by_date_desc(a, b))
            });
        }
    }
    let n = emails.len();
    Ok(emails
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let score = ratios.get(&e.email_id).copied().unwrap_or((n - i) as f64);
            ScoredEmail::plain(e.email_id.clone(), e.date, score)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::epoch;
    use crate::ranker::{RankOptions, Ranker};
    use chrono::Duration;

    fn email(id: &str, sender: &str, minutes: i64, subject: &str, segments: &[&str]) -> Email {
        let segments = segments.iter().map(|s| s.to_string()).collect();
        Email::from_parts(EmailId::from(id), sender, epoch() + Duration::minutes(minutes), subject, segments)
    }

    fn mailbox() -> Mailbox {
        let mut mb = Mailbox::new();
        mb.ingest(vec![
            email("a1", "zed@x", 1, "Alpha plan", &["pipeline schedule"]),
            email("a2", "amy@x", 5, "Re: Alpha plan", &["pipeline update", "pipeline schedule"]),
            email("b1", "max@x", 3, "Beta plan", &["pipeline costs"]),
            email("b2", "bo@x", 9, "Beta plan", &["pipeline costs again", "pipeline costs"]),
        ]);
        mb
    }

    fn order(method: Method, clue: Option<&str>) -> Vec<String> {
        let mb = mailbox();
        let list = Ranker::new(&mb, RankOptions::default()).rank_method(method, "pipeline", clue).unwrap();
        list.items.into_iter().map(|s| s.email_id.0).collect()
    }

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        let err = "pagerank".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("thread_date") && err.contains("clues"), "{err}");
    }

    #[test]
    fn date_orders() {
        assert_eq!(order(Method::Date, None), ["b2", "a2", "b1", "a1"]);
        assert_eq!(order(Method::ThreadDate, None), ["b2", "b1", "a2", "a1"]);
    }

    #[test]
    fn alpha_orders() {
        assert_eq!(order(Method::SubjectAlpha, None), ["b2", "b1", "a2", "a1"]);
        assert_eq!(order(Method::SenderAlpha, None), ["a1", "b1", "b2", "a2"]);
    }

    #[test]
    fn absent_clue_falls_back_to_date() {
        assert_eq!(order(Method::Clues, Some("politics")), order(Method::Date, None));
        assert_eq!(order(Method::Clues, None), order(Method::Date, None));
    }

    #[test]
    fn clue_ratio_values() {
        assert_eq!(clue_ratio("gas price\n\nother words", "politics"), 0.0);
        // neighbours: price (1 inside, 2 total), gas (1 inside, 1 total)
        let r = clue_ratio("politics gas price\n\nprice today", "politics");
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(clue_ratio("politics gas", "politics"), 1.0);
    }
}
