//! Graded-relevance evaluation: DCG and NDCG at cutoffs, and binarized
//! precision, recall and F-measure, averaged per query.
//!
//! File formats (whitespace separated, `#` starts a comment line):
//!
//! * qrels: `query_id<TAB>email_id<TAB>grade` with grade in 0..=3
//! * queries: `query_id<TAB>query text[<TAB>clue word]`
//! * runs: `query_id email_id rank score tag`

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ranker::RankedList;

pub const MAX_GRADE: u8 = 3;

/// `sum_{i=1..min(k,len)} (2^rel(i) - 1) / log2(1 + i)`.
pub fn dcg_at_k(grades: &[u8], k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidCutoff(k));
    }
    Ok(grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, g)| (2f64.powi(*g as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum())
}

/// DCG over the ideal reordering of the same list; zero when that is zero.
pub fn ndcg_at_k(grades: &[u8], k: usize) -> Result<f64> {
    let mut ideal = grades.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let best = dcg_at_k(&ideal, k)?;
    if best == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg_at_k(grades, k)? / best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f_measure: f64,
}

impl Prf {
    pub fn from_counts(hits: usize, retrieved: usize, relevant: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let recall = ratio(hits, relevant);
        let precision = ratio(hits, retrieved);
        let f_measure = if recall + precision == 0.0 {
            0.0
        } else {
            2.0 * recall * precision / (recall + precision)
        };
        Prf { recall, precision, f_measure }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub query_id: String,
    pub email_id: String,
    pub grade: u8,
}

#[derive(Debug, Clone, Default)]
pub struct Qrels {
    by_query: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Qrels {
    pub fn from_judgments<I: IntoIterator<Item = Judgment>>(judgments: I) -> Result<Self> {
        let mut q = Qrels::default();
        for (n, j) in judgments.into_iter().enumerate() {
            q.insert(j).map_err(|msg| Error::Format { path: PathBuf::from("<memory>"), line: n + 1, msg })?;
        }
        Ok(q)
    }

    fn insert(&mut self, j: Judgment) -> std::result::Result<(), String> {
        if j.grade > MAX_GRADE {
            return Err(format!("grade {} outside 0..={MAX_GRADE}", j.grade));
        }
        let slot = self.by_query.entry(j.query_id.clone()).or_default();
        if slot.insert(j.email_id.clone(), j.grade).is_some() {
            return Err(format!("duplicate judgment for {} {}", j.query_id, j.email_id));
        }
        Ok(())
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut q = Qrels::default();
        for (n, line) in data_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| Error::Format { path: path.to_path_buf(), line: n, msg };
            let [query_id, email_id, grade] = fields[..] else {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            };
            let grade = grade.parse::<u8>().map_err(|_| err(format!("bad grade `{grade}`")))?;
            q.insert(Judgment { query_id: query_id.into(), email_id: email_id.into(), grade }).map_err(err)?;
        }
        Ok(q)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read(path)?)
    }

    /// Grade of a judged email; unjudged emails count as 0.
    pub fn grade(&self, query_id: &str, email_id: &str) -> u8 {
        self.by_query.get(query_id).and_then(|m| m.get(email_id)).copied().unwrap_or(0)
    }

    pub fn contains_query(&self, query_id: &str) -> bool {
        self.by_query.contains_key(query_id)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    pub fn relevant(&self, query_id: &str) -> BTreeSet<&str> {
        self.by_query
            .get(query_id)
            .into_iter()
            .flatten()
            .filter(|(_, g)| **g >= 1)
            .map(|(e, _)| e.as_str())
            .collect()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Binarized metrics for one query: grades 1..=3 are relevant.
pub fn precision_recall_f(retrieved: &[&str], qrels: &Qrels, query_id: &str) -> Result<Prf> {
    if !qrels.contains_query(query_id) {
        return Err(Error::UnjudgedQuery(query_id.to_string()));
    }
    let relevant = qrels.relevant(query_id);
    let distinct: BTreeSet<&str> = retrieved.iter().copied().collect();
    let hits = distinct.iter().filter(|e| relevant.contains(*e)).count();
    Ok(Prf::from_counts(hits, distinct.len(), relevant.len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySpec {
    pub id: String,
    pub text: String,
    pub clue: Option<String>,
}

pub fn parse_queries(path: &Path, text: &str) -> Result<Vec<QuerySpec>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, line) in data_lines(text) {
        let mut fields = line.split('\t').map(str::trim);
        let err = |msg: String| Error::Format { path: path.to_path_buf(), line: n, msg };
        let (Some(id), Some(q)) = (fields.next(), fields.next()) else {
            return Err(err("expected `id<TAB>query`".into()));
        };
        if id.is_empty() || q.is_empty() {
            return Err(err("empty query id or text".into()));
        }
        if !seen.insert(id.to_string()) {
            return Err(err(format!("duplicate query id {id}")));
        }
        let clue = fields.next().filter(|c| !c.is_empty()).map(str::to_string);
        out.push(QuerySpec { id: id.into(), text: q.into(), clue });
    }
    Ok(out)
}

pub fn load_queries(path: &Path) -> Result<Vec<QuerySpec>> {
    parse_queries(path, &read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEntry {
    pub query_id: String,
    pub email_id: String,
    pub rank: usize,
    pub score: f64,
    pub tag: String,
}

pub fn write_run<W: Write>(out: &mut W, query_id: &str, list: &RankedList, tag: &str) -> Result<()> {
    for (i, item) in list.items.iter().enumerate() {
        writeln!(out, "{query_id} {} {} {:.6} {tag}", item.email_id, i + 1, item.score)
            .map_err(|e| Error::io("writing run", e))?;
    }
    Ok(())
}

pub fn parse_run(path: &Path, text: &str) -> Result<Vec<RunEntry>> {
    data_lines(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| Error::Format { path: path.to_path_buf(), line: n, msg };
            let [query_id, email_id, rank, score, tag] = fields[..] else {
                return Err(err(format!("expected 5 fields, found {}", fields.len())));
            };
            Ok(RunEntry {
                query_id: query_id.into(),
                email_id: email_id.into(),
                rank: rank.parse().map_err(|_| err(format!("bad rank `{rank}`")))?,
                score: score.parse().map_err(|_| err(format!("bad score `{score}`")))?,
                tag: tag.into(),
            })
        })
        .collect()
}

pub fn load_run(path: &Path) -> Result<Vec<RunEntry>> {
    parse_run(path, &read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryMetrics {
    pub query_id: String,
    pub ndcg: BTreeMap<usize, f64>,
    pub prf: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub tag: String,
    pub cutoffs: Vec<usize>,
    pub per_query: Vec<QueryMetrics>,
    pub mean_ndcg: BTreeMap<usize, f64>,
    pub mean_recall: f64,
    pub mean_precision: f64,
    pub mean_f_measure: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Evaluates one run over every judged query. Queries the run never
/// mentions count as empty result lists.
pub fn evaluate_run(entries: &[RunEntry], qrels: &Qrels, cutoffs: &[usize], tag: &str) -> Result<MetricReport> {
    if let Some(bad) = cutoffs.iter().find(|k| **k < 1) {
        return Err(Error::InvalidCutoff(*bad));
    }
    let mut by_query: BTreeMap<&str, Vec<&RunEntry>> = BTreeMap::new();
    let mut unknown = BTreeSet::new();
    for e in entries {
        if qrels.contains_query(&e.query_id) {
            by_query.entry(e.query_id.as_str()).or_default().push(e);
        } else {
            unknown.insert(e.query_id.as_str());
        }
    }
    for q in unknown {
        warn!("run {tag}: query {q} has no judgments; skipped");
    }
    let mut per_query = Vec::new();
    for qid in qrels.query_ids() {
        let mut list = by_query.remove(qid).unwrap_or_default();
        list.sort_by(|a, b| a.rank.cmp(&b.rank).then_with(|| b.score.total_cmp(&a.score)));
        let ids: Vec<&str> = list.iter().map(|e| e.email_id.as_str()).collect();
        let grades: Vec<u8> = ids.iter().map(|e| qrels.grade(qid, e)).collect();
        let ndcg = cutoffs.iter().map(|k| Ok((*k, ndcg_at_k(&grades, *k)?))).collect::<Result<_>>()?;
        per_query.push(QueryMetrics { query_id: qid.to_string(), ndcg, prf: precision_recall_f(&ids, qrels, qid)? });
    }
    let mean_ndcg = cutoffs
        .iter()
        .map(|k| (*k, mean(per_query.iter().map(|q| q.ndcg[k]))))
        .collect();
    Ok(MetricReport {
        tag: tag.to_string(),
        cutoffs: cutoffs.to_vec(),
        mean_ndcg,
        mean_recall: mean(per_query.iter().map(|q| q.prf.recall)),
        mean_precision: mean(per_query.iter().map(|q| q.prf.precision)),
        mean_f_measure: mean(per_query.iter().map(|q| q.prf.f_measure)),
        per_query,
    })
}

/// One report per distinct tag across the given run files, in first-seen order.
pub fn evaluate_runs(run_files: &[PathBuf], qrels_file: &Path, cutoffs: &[usize]) -> Result<Vec<MetricReport>> {
    let qrels = Qrels::load(qrels_file)?;
    let mut tags: Vec<String> = Vec::new();
    let mut by_tag: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
    for path in run_files {
        for e in load_run(path)? {
            if !by_tag.contains_key(&e.tag) {
                tags.push(e.tag.clone());
            }
            by_tag.entry(e.tag.clone()).or_default().push(e);
        }
    }
    tags.iter().map(|t| evaluate_run(&by_tag[t], &qrels, cutoffs, t)).collect()
}

/// Metrics as rows, runs as columns.
pub fn format_table(reports: &[MetricReport]) -> String {
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(first) = reports.first() {
        for k in &first.cutoffs {
            rows.push((format!("NDCG@{k}"), reports.iter().map(|r| r.mean_ndcg.get(k).copied().unwrap_or(0.0)).collect()));
        }
    }
    rows.push(("Recall".into(), reports.iter().map(|r| r.mean_recall).collect()));
    rows.push(("Precision".into(), reports.iter().map(|r| r.mean_precision).collect()));
    rows.push(("F-Measure".into(), reports.iter().map(|r| r.mean_f_measure).collect()));

    let width = reports.iter().map(|r| r.tag.len()).max().unwrap_or(0).max(8);
    let mut out = format!("{:<10}", "metric");
    for r in reports {
        let _ = write!(out, " {:>width$}", r.tag);
    }
    out.push('\n');
    for (name, values) in rows {
        let _ = write!(out, "{name:<10}");
        for v in values {
            let _ = write!(out, " {v:>width$.4}");
        }
        out.push('\n');
    }
    out
}

/// `tag.metric=value` lines, macro averages first, then per query.
pub fn format_key_values(reports: &[MetricReport]) -> String {
    let mut out = String::new();
    for r in reports {
        for (k, v) in &r.mean_ndcg {
            let _ = writeln!(out, "{}.ndcg@{k}={v:.6}", r.tag);
        }
        let _ = writeln!(out, "{}.recall={:.6}", r.tag, r.mean_recall);
        let _ = writeln!(out, "{}.precision={:.6}", r.tag, r.mean_precision);
        let _ = writeln!(out, "{}.f_measure={:.6}", r.tag, r.mean_f_measure);
        for q in &r.per_query {
            for (k, v) in &q.ndcg {
                let _ = writeln!(out, "{}.{}.ndcg@{k}={v:.6}", r.tag, q.query_id);
            }
            let _ = writeln!(out, "{}.{}.recall={:.6}", r.tag, q.query_id, q.prf.recall);
            let _ = writeln!(out, "{}.{}.precision={:.6}", r.tag, q.query_id, q.prf.precision);
            let _ = writeln!(out, "{}.{}.f_measure={:.6}", r.tag, q.query_id, q.prf.f_measure);
        }
    }
    out
}

pub fn parse_cutoffs(spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.parse::<usize>() {
            Ok(k) if k >= 1 => out.push(k),
            Ok(k) => return Err(Error::InvalidCutoff(k)),
            Err(_) => return Err(Error::InvalidCutoff(0)),
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidCutoff(0));
    }
    Ok(out)
}
