//! Body segmentation into main body + quotation levels.
//!
//! A new level opens on:
//! - an `-----Original Message-----` or `---- Forwarded by ... ----` separator,
//! - a block of two or more `From:`/`Sent:`/`To:`/`Subject:`/`Cc:`/`Date:` lines,
//! - the first line at a deeper `>` quote depth.
//!
//! Separator-style quotations nest in order of appearance; `>` depth nests
//! within the current separator context. Separator lines, header blocks and
//! quote markers are removed from the returned texts.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

fn separator_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*-{2,}\s*(original message|forwarded by\b.*|forwarded message)\s*-{2,}\s*$")
            .unwrap()
    })
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*(from|sent|to|cc|bcc|subject|date)\s*:").unwrap())
}

/// Lines between a separator and its header block that are treated as part
/// of the header (Lotus Notes puts the author name and timestamp there).
const MAX_ATTRIBUTION_LINES: usize = 3;

/// Splits leading `>` markers (optionally space-separated) off a line.
/// Returns the remaining content and the quote depth.
pub(crate) fn strip_quote_markers(line: &str) -> (&str, usize) {
    let mut depth = 0;
    let mut rest = line;
    loop {
        let trimmed = rest.trim_start();
        match trimmed.strip_prefix('>') {
            Some(after) => {
                depth += 1;
                rest = after;
            }
            None => break,
        }
    }
    if depth > 0 {
        rest = rest.strip_prefix(' ').unwrap_or(rest);
    }
    (rest, depth)
}

fn is_separator(content: &str) -> bool {
    separator_re().is_match(content)
}

fn is_header(content: &str) -> bool {
    header_re().is_match(content)
}

fn is_continuation(content: &str) -> bool {
    content.starts_with([' ', '\t']) && !content.trim().is_empty()
}

/// Length of the header block starting at `start`, or 0 when fewer than two
/// header lines begin there.
fn header_block_len(contents: &[&str], start: usize) -> usize {
    let mut i = start;
    let mut headers = 0;
    while i < contents.len() {
        if is_header(contents[i]) {
            headers += 1;
            i += 1;
        } else if headers > 0 && is_continuation(contents[i]) {
            i += 1;
        } else {
            break;
        }
    }
    if headers >= 2 {
        i - start
    } else {
        0
    }
}

/// Number of lines after a separator (at `start`) that belong to its header:
/// blank lines, up to [`MAX_ATTRIBUTION_LINES`] attribution lines, and the
/// header block itself. Without a header block only the blank lines count.
fn separator_header_len(contents: &[&str], start: usize) -> usize {
    let mut i = start;
    while i < contents.len() && contents[i].trim().is_empty() {
        i += 1;
    }
    let blank_end = i;
    let mut attribution = 0;
    while i < contents.len() && attribution <= MAX_ATTRIBUTION_LINES {
        let block = header_block_len(contents, i);
        if block > 0 {
            return i + block - start;
        }
        if is_separator(contents[i]) {
            break;
        }
        if !contents[i].trim().is_empty() {
            attribution += 1;
        }
        i += 1;
    }
    blank_end - start
}

/// Splits an email body into segment texts; index 0 is the sender's own text.
pub fn segment_body(body: &str) -> Vec<String> {
    let lines: Vec<&str> = body.lines().collect();
    let stripped: Vec<(&str, usize)> = lines.iter().map(|l| strip_quote_markers(l)).collect();

    let mut segments: Vec<Vec<&str>> = vec![Vec::new()];
    let mut slots: HashMap<(usize, usize), usize> = HashMap::from([((0, 0), 0)]);
    let mut context = 0;

    let mut i = 0;
    while i < lines.len() {
        let (content, depth) = stripped[i];
        if depth == 0 {
            if is_separator(lines[i]) {
                context += 1;
                slots.insert((context, 0), segments.len());
                segments.push(Vec::new());
                i += 1 + separator_header_len(&lines, i + 1);
                continue;
            }
            let block = header_block_len(&lines, i);
            if block > 0 {
                context += 1;
                slots.insert((context, 0), segments.len());
                segments.push(Vec::new());
                i += block;
                continue;
            }
        } else {
            if is_separator(content) {
                i += 1;
                continue;
            }
            // quoted header blocks are dropped without opening a level
            let quoted: Vec<&str> = stripped[i..]
                .iter()
                .take_while(|(_, d)| *d == depth)
                .map(|(c, _)| *c)
                .collect();
            let block = header_block_len(&quoted, 0);
            if block > 0 {
                i += block;
                continue;
            }
        }
        let next = segments.len();
        let slot = *slots.entry((context, depth)).or_insert(next);
        if slot == segments.len() {
            segments.push(Vec::new());
        }
        segments[slot].push(content.trim_end());
        i += 1;
    }

    segments.into_iter().map(|seg| seg.join("\n").trim().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "\
Please use the attached revised notice.

 -----Original Message-----
From: \tSmith, John
Sent:\tMonday, October 22, 2001 9:12 AM
To:\tDoe, Jane
Subject:\tRE: Revised Daily Notice

Jane, the numbers on page 2 look wrong.

 -----Original Message-----
From: \tDoe, Jane
Sent:\tMonday, October 22, 2001 8:55 AM
To:\tSmith, John
Subject:\tRevised Daily Notice

Here is the revised daily notice for today.
";

    #[test]
    fn reply_chain_gives_three_levels() {
        let segs = segment_body(FIG2);
        assert_eq!(
            segs,
            vec![
                "Please use the attached revised notice.",
                "Jane, the numbers on page 2 look wrong.",
                "Here is the revised daily notice for today.",
            ]
        );
    }

    #[test]
    fn no_markers_single_document() {
        assert_eq!(segment_body("just text\n\nmore text\n"), vec!["just text\n\nmore text"]);
        assert_eq!(segment_body(""), vec![""]);
    }

    #[test]
    fn all_quoted_body() {
        let segs = segment_body("> first line\n> second line\n");
        assert_eq!(segs, vec!["", "first line\nsecond line"]);
    }

    #[test]
    fn quote_depth_nests() {
        let body = "my answer\n> your question\n> > my original\n> more of yours\n";
        assert_eq!(
            segment_body(body),
            vec!["my answer", "your question\nmore of yours", "my original"]
        );
    }

    #[test]
    fn lotus_forward_with_attribution() {
        let body = "FYI\n\n---------------------- Forwarded by Jeff Dasovich/NA/Enron on 05/01/2001 10:12 AM ---------------------------\n\n\nSusan J Mara\n04/30/2001 05:43 PM\nTo: Jeff Dasovich/NA/Enron@Enron, Paul Kaufman/Enron@EnronXGate\ncc: \nSubject: Re: Edison\n\nThe Edison deal is off.\n";
        assert_eq!(segment_body(body), vec!["FYI", "The Edison deal is off."]);
    }

    #[test]
    fn bare_forward_has_empty_main_body() {
        let body = "-----Original Message-----\nFrom: a\nTo: b\n\nquoted only\n";
        assert_eq!(segment_body(body), vec!["", "quoted only"]);
    }

    #[test]
    fn header_block_without_separator() {
        let body = "see below\n\nFrom: Jane Doe\nSent: Monday\nTo: John\nSubject: x\n\nold text\n";
        assert_eq!(segment_body(body), vec!["see below", "old text"]);
    }

    #[test]
    fn single_header_line_is_text() {
        let body = "To: whom it may concern\nhello";
        assert_eq!(segment_body(body), vec!["To: whom it may concern\nhello"]);
    }

    #[test]
    fn quote_markers() {
        assert_eq!(strip_quote_markers("> > hi"), ("hi", 2));
        assert_eq!(strip_quote_markers("  >>hi"), ("hi", 2));
        assert_eq!(strip_quote_markers("hi > there"), ("hi > there", 0));
    }

    fn non_ws_chars(s: &str) -> Vec<char> {
        let mut v: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn coverage_on_fixture() {
        // every character outside separators, header blocks and quote markers
        // lands in exactly one segment
        let kept = "Please use the attached revised notice.\
Jane, the numbers on page 2 look wrong.\
Here is the revised daily notice for today.";
        let joined: String = segment_body(FIG2).concat();
        assert_eq!(non_ws_chars(&joined), non_ws_chars(kept));

        let body = "top\n> a\n> > b\n> c\nbottom\n";
        let joined: String = segment_body(body).concat();
        assert_eq!(non_ws_chars(&joined), non_ws_chars("top a b c bottom"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn k_boundaries_give_k_plus_one_levels(
                own in "[a-z ]{0,30}",
                quotes in proptest::collection::vec("[a-z][a-z ]{0,30}", 0..6),
            ) {
                let mut body = own.clone();
                for q in &quotes {
                    body.push_str("\n-----Original Message-----\nFrom: x\nSent: y\n\n");
                    body.push_str(q);
                }
                let segs = segment_body(&body);
                prop_assert_eq!(segs.len(), quotes.len() + 1);
                prop_assert_eq!(segs[0].as_str(), own.trim());
                for (seg, q) in segs[1..].iter().zip(&quotes) {
                    prop_assert_eq!(seg.as_str(), q.trim());
                }
            }
        }
    }
}
