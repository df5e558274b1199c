mod common;

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use common::{quoted, write_message};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_mailrank");

fn mailrank(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("MAILRANK_STORE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const DATE: &str = "Mon, 14 May 2001 0{h}:00:00 -0700 (PDT)";

fn date(h: u32) -> String {
    DATE.replace("{h}", &h.to_string())
}

/// Three threads over six messages and eleven documents, plus one file in a
/// folder that is skipped by default.
fn maildir(root: &Path) {
    let inbox = root.join("owner/inbox");
    let sent = root.join("owner/sent_items");
    let a1 = "Gas nominations for June are attached.";
    let a2 = "Please confirm the Transco nominations.";
    let a3 = "Confirmed, nominations are final.";
    write_message(&inbox, "1.", "a1@x", "ann@enron.com", &date(1), "Gas nominations", &format!("{a1}\n"));
    write_message(&sent, "1.", "a2@x", "owner@enron.com", &date(2), "RE: Gas nominations", &quoted(a2, &[("ann@enron.com", "Gas nominations", a1)]));
    write_message(
        &inbox,
        "2.",
        "a3@x",
        "ann@enron.com",
        &date(3),
        "RE: Gas nominations",
        &quoted(a3, &[("owner@enron.com", "RE: Gas nominations", a2), ("ann@enron.com", "Gas nominations", a1)]),
    );
    let b1 = "Draft master netting agreement for review.";
    let b2 = "Comments on the netting provisions below.";
    write_message(&inbox, "3.", "b1@x", "bob@enron.com", &date(4), "Master netting agreement", &format!("{b1}\n"));
    write_message(&sent, "2.", "b2@x", "owner@enron.com", &date(5), "RE: Master netting agreement", &quoted(b2, &[("bob@enron.com", "Master netting agreement", b1)]));
    write_message(&sent, "3.", "c1@x", "owner@enron.com", &date(6), "FW: Lunch", &quoted("See below.", &[("dan@other.com", "Lunch", "Lunch on Friday at noon?")]));
    write_message(&root.join("owner/deleted_items"), "1.", "d1@x", "eve@enron.com", &date(7), "Netting", "netting netting\n");
}

struct Fixture {
    _dir: TempDir,
    root: PathBuf,
    store: PathBuf,
}

fn ingested() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("maildir");
    maildir(&root);
    let store = dir.path().join("mail.store");
    let out = stdout(&mailrank(&["ingest", "--maildir", p(&root), "--store", p(&store)]));
    assert_eq!(out.trim(), "6 emails, 11 documents, 3 threads, 7 distinct nodes");
    Fixture { _dir: dir, root, store }
}

#[test]
fn ingest_counts_and_reingest() {
    let f = ingested();
    let again = stdout(&mailrank(&["ingest", "--maildir", p(&f.root), "--store", p(&f.store)]));
    assert_eq!(again.trim(), "6 emails, 11 documents, 3 threads, 7 distinct nodes");
    let all = stdout(&mailrank(&["ingest", "--maildir", p(&f.root), "--store", p(&f.store), "--all-folders"]));
    assert!(all.starts_with("7 emails"), "{all}");
}

#[test]
fn ingest_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("s");
    let out = stdout(&mailrank(&["ingest", "--maildir", p(dir.path()), "--store", p(&store)]));
    assert_eq!(out.trim(), "0 emails, 0 documents, 0 threads, 0 distinct nodes");
}

#[test]
fn search_is_deterministic() {
    let f = ingested();
    let args = ["search", "--store", p(&f.store), "--query", "netting agreement"];
    let first = stdout(&mailrank(&args));
    assert_eq!(first, stdout(&mailrank(&args)));
    assert!(first.contains("2 results"), "{first}");
    assert!(first.contains("b1@x") && first.contains("b2@x"), "{first}");
    assert!(!first.contains("d1@x"), "{first}");
}

#[test]
fn search_baseline_and_errors() {
    let f = ingested();
    let out = stdout(&mailrank(&["search", "--store", p(&f.store), "--query", "nominations", "--baseline", "date"]));
    let a3 = out.find("a3@x").unwrap();
    let a1 = out.find("a1@x").unwrap();
    assert!(a3 < a1, "newest first:\n{out}");

    let bad = mailrank(&["search", "--store", p(&f.store), "--query", "gas", "--baseline", "bogus"]);
    assert!(!bad.status.success());
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("bogus") && err.contains("thread_date") && err.contains("clues"), "{err}");

    let empty = mailrank(&["search", "--store", p(&f.store), "--query", "the of"]);
    assert!(!empty.status.success());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("empty query"));
}

#[test]
fn search_appends_run_file() {
    let f = ingested();
    let run = f.store.with_extension("run");
    for qid in ["q1", "q2"] {
        stdout(&mailrank(&["search", "--store", p(&f.store), "--query", "nominations", "--run-out", p(&run), "--query-id", qid]));
    }
    let text = std::fs::read_to_string(&run).unwrap();
    let entries = mailrank::evalkit::parse_run(&run, &text).unwrap();
    assert_eq!(entries.len(), 6);
    assert_eq!(entries[0].query_id, "q1");
    assert_eq!(entries[3].query_id, "q2");
}

#[test]
fn eval_table() {
    let f = ingested();
    let dir = f.store.parent().unwrap();
    let queries = dir.join("queries.tsv");
    let qrels = dir.join("qrels.txt");
    std::fs::write(&queries, "Q1\tnetting agreement\nQ2\tnominations\n").unwrap();
    std::fs::write(&qrels, "Q1 b1@x 3\nQ1 b2@x 1\nQ2 a1@x 3\nQ2 a3@x 1\n").unwrap();
    let report = dir.join("report.txt");
    let out = stdout(&mailrank(&[
        "eval", "--store", p(&f.store), "--queries", p(&queries), "--qrels", p(&qrels), "--k", "1", "--methods", "era,date",
        "--report-out", p(&report), "--runs-dir", p(&dir.join("runs")),
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].contains("era") && lines[0].contains("date"), "{out}");
    assert!(lines[1].starts_with("NDCG@1"), "{out}");
    assert!(!out.contains("NDCG@5"));
    assert!(dir.join("runs/era.run").exists() && dir.join("runs/date.run").exists());
    assert!(std::fs::read_to_string(&report).unwrap().contains("era."));

    let bad = mailrank(&["eval", "--store", p(&f.store), "--queries", p(&queries), "--qrels", p(&qrels), "--k", "0"]);
    assert!(!bad.status.success());
}

struct Server(Child, String);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn serve() -> Server {
    let mut child = Command::new(BIN).args(["serve", "--port", "0"]).stdout(Stdio::piped()).spawn().unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("address line").to_string();
    Server(child, addr)
}

#[test]
fn serve_publish_and_global_search() {
    let f = ingested();
    let server = serve();
    let local = stdout(&mailrank(&["search", "--store", p(&f.store), "--query", "netting"]));
    let empty = stdout(&mailrank(&["search", "--store", p(&f.store), "--query", "netting", "--global", &server.1]));
    assert_eq!(local, empty);

    let bare = stdout(&mailrank(&["publish", "--store", p(&f.store), "--server", &server.1]));
    assert_eq!(bare.trim(), "published 0 terms for owner@enron.com");

    let publishers: Vec<Child> = ["bob@enron.com", "owner@enron.com"]
        .iter()
        .map(|u| {
            Command::new(BIN)
                .args(["publish", "--store", p(&f.store), "--server", &server.1, "--public-folders", "inbox,sent_items", "--user", u])
                .stdout(Stdio::piped())
                .spawn()
                .unwrap()
        })
        .collect();
    for child in publishers {
        let out = stdout(&child.wait_with_output().unwrap());
        assert!(out.starts_with("published ") && !out.starts_with("published 0 "), "{out}");
    }
    let global = stdout(&mailrank(&["search", "--store", p(&f.store), "--query", "netting", "--global", &server.1]));
    assert!(global.contains("b1@x"));
}

#[test]
fn unreachable_server_falls_back() {
    let f = ingested();
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    drop(listener);
    let local = stdout(&mailrank(&["search", "--store", p(&f.store), "--query", "netting"]));
    let o = mailrank(&["search", "--store", p(&f.store), "--query", "netting", "--global", &addr]);
    assert_eq!(stdout(&o), local);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unavailable"));
}
