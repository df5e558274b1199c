//! Enron-style plain-text email parsing.
//!
//! A source file is a block of `Name: value` header lines (continuations
//! indented), a blank line, then the body. Bodies are cut into an ordered list
//! of documents: level 0 is the sender's own text, levels 1.. are the quoted
//! messages, most recent first.

mod ingest;
mod segment;

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset, TimeZone};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use ingest::{collect_emails, Collected, IngestFilter, DEFAULT_FOLDERS};
pub use segment::segment_body;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmailId(pub String);

impl fmt::Display for EmailId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EmailId {
    fn from(s: &str) -> Self {
        EmailId(s.to_string())
    }
}

/// Headers and body as they appear in the source file.
#[derive(Debug, Clone)]
pub struct RawEmail {
    pub source_path: PathBuf,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl RawEmail {
    pub fn parse(source_path: &Path, raw: &[u8]) -> Result<Self> {
        let text = String::from_utf8_lossy(raw);
        let mut headers: Vec<(String, String)> = Vec::new();
        let mut rest = None;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            offset += line.len();
            let content = line.trim_end_matches(['\n', '\r']);
            if content.trim().is_empty() {
                rest = Some(offset);
                break;
            }
            if content.starts_with([' ', '\t']) {
                if let Some((_, value)) = headers.last_mut() {
                    value.push(' ');
                    value.push_str(content.trim());
                }
                continue;
            }
            match content.split_once(':') {
                Some((name, value)) => headers.push((name.trim().to_string(), value.trim().to_string())),
                // mbox "From " envelope lines and other junk are skipped
                None => continue,
            }
        }
        let Some(body_start) = rest else {
            return Err(Error::MissingBodySeparator { path: source_path.to_path_buf() });
        };
        Ok(RawEmail {
            source_path: source_path.to_path_buf(),
            headers,
            body: text[body_start..].to_string(),
        })
    }

    /// First header with this name, compared case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmailDocument {
    pub doc_id: String,
    pub owner_email_id: EmailId,
    pub level: usize,
    pub text: String,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Email {
    pub email_id: EmailId,
    pub sender: String,
    pub recipients: Vec<String>,
    pub date: DateTime<FixedOffset>,
    pub raw_subject: String,
    pub norm_subject: String,
    /// Mailbox folder the file was found in (empty when unknown).
    #[serde(default)]
    pub folder: String,
    pub documents: Vec<EmailDocument>,
}

impl Email {
    pub fn main_body(&self) -> &EmailDocument {
        &self.documents[0]
    }

    /// Builds an email from already-extracted fields; `segments[0]` is the main body.
    pub fn from_parts(
        email_id: EmailId,
        sender: &str,
        date: DateTime<FixedOffset>,
        raw_subject: &str,
        segments: Vec<String>,
    ) -> Self {
        let mut segments = segments;
        if segments.is_empty() {
            segments.push(String::new());
        }
        let documents = segments
            .into_iter()
            .enumerate()
            .map(|(level, text)| EmailDocument {
                doc_id: format!("{email_id}#{level}"),
                owner_email_id: email_id.clone(),
                level,
                fingerprint: fingerprint(&text),
                text,
            })
            .collect();
        Email {
            email_id,
            sender: normalize_address(sender),
            recipients: Vec::new(),
            date,
            raw_subject: raw_subject.to_string(),
            norm_subject: normalize_subject(raw_subject),
            folder: String::new(),
            documents,
        }
    }

    pub(crate) fn rekey(&mut self, id: EmailId) {
        for doc in &mut self.documents {
            doc.doc_id = format!("{id}#{}", doc.level);
            doc.owner_email_id = id.clone();
        }
        self.email_id = id;
    }
}

pub fn epoch() -> DateTime<FixedOffset> {
    FixedOffset::east_opt(0).unwrap().timestamp_opt(0, 0).unwrap()
}

/// Parses one source file into an [`Email`].
pub fn parse_email(source_path: &Path, raw: &[u8]) -> Result<Email> {
    let raw = RawEmail::parse(source_path, raw)?;
    let sender = raw.header("From").unwrap_or("");
    let date = raw.header("Date").and_then(parse_date).unwrap_or_else(epoch);
    let subject = raw.header("Subject").unwrap_or("");
    let segments = segment_body(&raw.body);

    let email_id = match raw.header("Message-ID").map(str::trim).filter(|s| !s.is_empty()) {
        Some(id) => EmailId(id.to_string()),
        None => content_id(&date, sender, &raw.body),
    };
    let mut email = Email::from_parts(email_id, sender, date, subject, segments);
    email.recipients = ["To", "Cc"]
        .iter()
        .filter_map(|h| raw.header(h))
        .flat_map(|v| v.split(','))
        .map(normalize_address)
        .filter(|a| !a.is_empty())
        .collect();
    Ok(email)
}

fn content_id(date: &DateTime<FixedOffset>, sender: &str, body: &str) -> EmailId {
    let mut hasher = Sha256::new();
    hasher.update(date.to_rfc3339().as_bytes());
    hasher.update([0]);
    hasher.update(sender.as_bytes());
    hasher.update([0]);
    hasher.update(fingerprint(body).as_bytes());
    EmailId(format!("sha256:{}", hex::encode(&hasher.finalize()[..12])))
}

/// RFC 2822 date, tolerating the trailing `(PDT)` zone comment Enron files carry.
pub fn parse_date(value: &str) -> Option<DateTime<FixedOffset>> {
    let value = match value.find('(') {
        Some(i) => &value[..i],
        None => value,
    };
    DateTime::parse_from_rfc2822(value.trim()).ok()
}

/// `"Name" <addr@host>` and `addr@host` both become `addr@host`, lowercased.
pub fn normalize_address(value: &str) -> String {
    let value = value.trim();
    let addr = match (value.rfind('<'), value.rfind('>')) {
        (Some(open), Some(close)) if open < close => &value[open + 1..close],
        _ => value,
    };
    addr.trim().trim_matches('"').to_lowercase()
}

const SUBJECT_PREFIXES: [&str; 3] = ["re", "fwd", "fw"];

/// Strips any run of `Re:`/`Fw:`/`Fwd:` prefixes, then casefolds, trims and
/// collapses internal whitespace.
pub fn normalize_subject(raw_subject: &str) -> String {
    let mut rest = raw_subject.trim_start();
    'strip: loop {
        for prefix in SUBJECT_PREFIXES {
            let Some(head) = rest.get(..prefix.len()) else { continue };
            if !head.eq_ignore_ascii_case(prefix) {
                continue;
            }
            let after = rest[prefix.len()..].trim_start();
            if let Some(after) = after.strip_prefix(':') {
                rest = after.trim_start();
                continue 'strip;
            }
        }
        break;
    }
    rest.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Content key for document matching: lowercased, quote markers removed,
/// whitespace collapsed.
pub fn fingerprint(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        for word in segment::strip_quote_markers(line).0.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.extend(word.chars().flat_map(char::to_lowercase));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "Message-ID: <1.JavaMail.evans@thyme>\r\n\
Date: Mon, 14 May 2001 16:39:00 -0700 (PDT)\r\n\
From: Phillip.Allen@enron.com\r\n\
To: tim.belden@enron.com, \r\n\
\tjohn.doe@enron.com\r\n\
Subject: Re: Revised Daily Notice\r\n\
\r\n\
Here is our forecast\r\n";

    #[test]
    fn parse_maps_fields() {
        let e = parse_email(Path::new("a/inbox/1."), SAMPLE.as_bytes()).unwrap();
        assert_eq!(e.email_id.0, "<1.JavaMail.evans@thyme>");
        assert_eq!(e.sender, "phillip.allen@enron.com");
        assert_eq!(e.recipients, vec!["tim.belden@enron.com", "john.doe@enron.com"]);
        assert_eq!(e.date.to_rfc3339(), "2001-05-14T16:39:00-07:00");
        assert_eq!(e.raw_subject, "Re: Revised Daily Notice");
        assert_eq!(e.norm_subject, "revised daily notice");
        assert_eq!(e.documents.len(), 1);
        assert_eq!(e.documents[0].text, "Here is our forecast");
    }

    #[test]
    fn missing_fields_default() {
        let e = parse_email(Path::new("x"), b"X-Folder: inbox\n\nbody").unwrap();
        assert_eq!(e.norm_subject, "");
        assert_eq!(e.sender, "");
        assert_eq!(e.date, epoch());
        assert!(e.email_id.0.starts_with("sha256:"));
    }

    #[test]
    fn missing_separator_names_path() {
        let err = parse_email(Path::new("maildir/u/inbox/7."), b"From: a@b\nSubject: x").unwrap_err();
        assert!(err.to_string().contains("maildir/u/inbox/7."));
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let e = parse_email(Path::new("x"), b"Subject: caf\xe9\n\nna\xefve").unwrap();
        assert_eq!(e.norm_subject, "caf\u{fffd}");
        assert!(e.documents[0].text.contains('\u{fffd}'));
    }

    #[test]
    fn same_message_id_both_parse() {
        let a = parse_email(Path::new("a"), b"Message-ID: <x@y>\n\nfirst text").unwrap();
        let b = parse_email(Path::new("b"), b"Message-ID: <x@y>\n\nsecond text").unwrap();
        assert_eq!(a.email_id, b.email_id);
        assert_ne!(a.documents[0].fingerprint, b.documents[0].fingerprint);
    }

    #[test]
    fn subject_normalization() {
        assert_eq!(normalize_subject("Re: Revised Daily Notice"), "revised daily notice");
        assert_eq!(normalize_subject(""), "");
        assert_eq!(normalize_subject("FW: re: Fwd:  Budget Meeting "), "budget meeting");
        assert_eq!(normalize_subject("RE : RE: fwd:fw: x"), "x");
        assert_eq!(normalize_subject("Regarding the deal"), "regarding the deal");
        assert_eq!(normalize_subject("Fwdx: y"), "fwdx: y");
    }

    #[test]
    fn fingerprints() {
        assert_eq!(fingerprint("Hello\n  World"), "hello world");
        assert_eq!(fingerprint("> Hello\n> World"), "hello world");
        assert_eq!(fingerprint(">> > Hello\n>World  "), "hello world");
        assert_eq!(fingerprint(""), "");
    }

    #[test]
    fn addresses() {
        assert_eq!(normalize_address("\"Allen, Phillip\" <Phillip.Allen@Enron.com>"), "phillip.allen@enron.com");
        assert_eq!(normalize_address(" a@b.c "), "a@b.c");
    }

    #[test]
    fn date_with_comment() {
        assert!(parse_date("Wed, 13 Dec 2000 07:04:00 -0800 (PST)").is_some());
        assert!(parse_date("yesterday").is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_subject_idempotent(s in "((?i:re|fw|fwd) ?: ?){0,3}[ a-zA-Z:]{0,20}") {
                let once = normalize_subject(&s);
                prop_assert_eq!(normalize_subject(&once), once.clone());
            }

            #[test]
            fn fingerprint_ignores_rewrap(words in proptest::collection::vec("[a-z]{1,8}", 0..20), width in 1usize..6) {
                let flat = words.join(" ");
                let wrapped: Vec<String> = words.chunks(width).map(|c| format!("> {}", c.join("  "))).collect();
                prop_assert_eq!(fingerprint(&wrapped.join("\n")), fingerprint(&flat));
                prop_assert_eq!(fingerprint(&fingerprint(&flat)), fingerprint(&flat));
            }
        }
    }
}
