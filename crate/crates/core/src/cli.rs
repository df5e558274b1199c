//! Command-line front end: `ingest`, `search`, `eval`, `serve`, `publish`.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::warn;

use crate::corpus::{collect_emails, IngestFilter};
use crate::error::{Error, Result};
use crate::evalkit::{self, RunEntry};
use crate::mailbox::{Counts, Mailbox};
use crate::netexpert::{self, ExpertAnswer, ExpertClient, ExpertServer, ProfileStore};
use crate::queryexp::Expander;
use crate::ranker::{query_term_counts, Method, RankOptions, RankedList, Ranker};

const NETWORK_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Parser)]
#[command(name = "mailrank", version, about = "Rank email search results by subject, content and sender")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, thread and index a maildir tree into a store file.
    Ingest(IngestArgs),
    /// Rank the emails matching a query.
    Search(SearchArgs),
    /// Compare ranking methods against graded judgments.
    Eval(EvalArgs),
    /// Run the expertise server.
    Serve(ServeArgs),
    /// Publish the owner's public profile to an expertise server.
    Publish(PublishArgs),
}

#[derive(Debug, Args)]
pub struct StoreArg {
    /// Mailbox store file.
    #[arg(long, env = "MAILRANK_STORE")]
    pub store: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoringArgs {
    /// Match query words literally.
    #[arg(long)]
    pub no_expand: bool,
    /// Constant added to every sender score.
    #[arg(long, default_value_t = 0.0)]
    pub sscore_epsilon: f64,
}

impl ScoringArgs {
    fn options(&self) -> Result<RankOptions> {
        if !self.sscore_epsilon.is_finite() || self.sscore_epsilon < 0.0 {
            return Err(Error::Protocol(format!("--sscore-epsilon must be >= 0, got {}", self.sscore_epsilon)));
        }
        let expander = if self.no_expand { Expander::disabled() } else { Expander::default() };
        Ok(RankOptions { expander, sscore_epsilon: self.sscore_epsilon })
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub maildir: PathBuf,
    #[command(flatten)]
    pub store: StoreArg,
    /// Comma-separated folder names to keep.
    #[arg(long, value_delimiter = ',', conflicts_with = "all_folders")]
    pub folders: Option<Vec<String>>,
    /// Keep every folder.
    #[arg(long)]
    pub all_folders: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub store: StoreArg,
    #[arg(long, required_unless_present = "interactive")]
    pub query: Option<String>,
    /// Rows to print.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    /// Expertise server address for the global sender score.
    #[arg(long)]
    pub global: Option<String>,
    /// Order by a baseline instead: date, thread_date, subject_alpha, sender_alpha, clues.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Clue word for the clues baseline.
    #[arg(long)]
    pub clue: Option<String>,
    /// Append the full ranking to this run file.
    #[arg(long)]
    pub run_out: Option<PathBuf>,
    #[arg(long, default_value = "q")]
    pub query_id: String,
    /// Read queries from standard input, one per line.
    #[arg(long)]
    pub interactive: bool,
    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub store: StoreArg,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    /// Comma-separated cutoffs.
    #[arg(long, default_value = "1,5,10")]
    pub k: String,
    #[arg(long, value_delimiter = ',', default_value = "era,date,thread_date,subject_alpha,sender_alpha,clues")]
    pub methods: Vec<String>,
    /// Results kept per query.
    #[arg(long, default_value_t = 100)]
    pub depth: usize,
    /// Write one run file per method here.
    #[arg(long)]
    pub runs_dir: Option<PathBuf>,
    /// Write `method.metric=value` lines here.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Profile file, newline-delimited publish messages.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PublishArgs {
    #[command(flatten)]
    pub store: StoreArg,
    #[arg(long)]
    pub server: String,
    /// Folders whose sent emails may be published.
    #[arg(long, value_delimiter = ',')]
    pub public_folders: Vec<String>,
    /// Publishing user; defaults to the mailbox's most frequent sender.
    #[arg(long)]
    pub user: Option<String>,
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a, out).map(|_| ()),
        Command::Search(a) => cmd_search(&a, &mut io::stdin().lock(), out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Serve(a) => cmd_serve(&a, out),
        Command::Publish(a) => cmd_publish(&a, out),
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text).map_err(|e| Error::io("writing output", e))
}

pub fn format_counts(c: &Counts) -> String {
    format!("{} emails, {} documents, {} threads, {} distinct nodes", c.emails, c.documents, c.threads, c.nodes)
}

pub fn cmd_ingest(args: &IngestArgs, out: &mut dyn Write) -> Result<Counts> {
    let filter = if args.all_folders {
        IngestFilter::All
    } else {
        match &args.folders {
            Some(f) => IngestFilter::Folders(f.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
            None => IngestFilter::default(),
        }
    };
    let collected = collect_emails(&args.maildir, &filter)?;
    for (path, why) in &collected.skipped {
        eprintln!("skipped {}: {why}", path.display());
    }
    let mut mailbox = Mailbox::open_or_new(&args.store.store)?;
    let summary = mailbox.ingest(collected.emails);
    if let Some(parent) = args.store.store.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    mailbox.save(&args.store.store)?;
    if !summary.rekeyed.is_empty() {
        eprintln!("{} emails reused an existing Message-ID and were stored under new ids", summary.rekeyed.len());
    }
    let counts = mailbox.counts();
    emit(out, format_args!("{}\n", format_counts(&counts)))?;
    Ok(counts)
}

fn fetch_answer(addr: &str, terms: &[String]) -> Option<ExpertAnswer> {
    let result = ExpertClient::connect(addr, NETWORK_TIMEOUT).and_then(|mut c| c.experts(terms));
    match result {
        Ok(a) => Some(a),
        Err(e) => {
            warn!("expertise server {addr} unavailable ({e}); using local sender scores");
            eprintln!("warning: expertise server {addr} unavailable ({e}); using local sender scores");
            None
        }
    }
}

/// One search: ranked list plus recommendations when a server answered.
pub struct SearchOutcome {
    pub list: RankedList,
    pub recommendations: Vec<(String, f64)>,
}

pub fn search_once(mailbox: &Mailbox, options: RankOptions, raw: &str, global: Option<&str>, baseline: Option<Method>, clue: Option<&str>) -> Result<SearchOutcome> {
    let ranker = Ranker::new(mailbox, options);
    if let Some(method) = baseline.filter(|m| *m != Method::Era) {
        let list = ranker.rank_method(method, raw, clue)?;
        return Ok(SearchOutcome { list, recommendations: Vec::new() });
    }
    let query = ranker.expand(raw)?;
    let (set, answer) = match global {
        None => (ranker.retrieve(&query), None),
        Some(addr) => {
            let terms: Vec<String> = query_term_counts(&query).into_keys().collect();
            // ask the network while retrieving locally
            thread::scope(|s| {
                let pending = s.spawn(|| fetch_answer(addr, &terms));
                let set = ranker.retrieve(&query);
                (set, pending.join().unwrap_or(None))
            })
        }
    };
    let items = ranker.score(&query, &set, answer.as_ref());
    let recommendations = match &answer {
        Some(a) => netexpert::recommend(a, &query.original.words, &mailbox.contacts()),
        None => Vec::new(),
    };
    Ok(SearchOutcome { list: RankedList { query, items }, recommendations })
}

pub fn write_results(out: &mut dyn Write, mailbox: &Mailbox, outcome: &SearchOutcome, top: usize) -> Result<()> {
    let q = &outcome.list.query;
    let expansion: Vec<String> = q
        .words()
        .iter()
        .map(|w| {
            let v: Vec<&str> = q.variants_of(w).into_iter().flatten().map(String::as_str).collect();
            format!("{w}{{{}}}", v.join(","))
        })
        .collect();
    emit(out, format_args!("query: {}\nterms: {}\n", q.original.raw.trim(), expansion.join(" ")))?;
    emit(out, format_args!("{} results\n", outcome.list.len()))?;
    for (i, item) in outcome.list.items.iter().take(top).enumerate() {
        let (sender, subject) = mailbox
            .email(&item.email_id)
            .map(|e| (e.sender.as_str(), e.raw_subject.as_str()))
            .unwrap_or(("", ""));
        emit(
            out,
            format_args!(
                "{:>4}  {:>10.6}  {}  {:<28}  {}\n      {}\n",
                i + 1,
                item.score,
                item.date.format("%Y-%m-%d %H:%M"),
                sender,
                subject,
                item.email_id
            ),
        )?;
    }
    if !outcome.recommendations.is_empty() {
        emit(out, format_args!("recommended contacts:\n"))?;
        for (user, w) in &outcome.recommendations {
            emit(out, format_args!("  {user} {w:.6}\n"))?;
        }
    }
    Ok(())
}

pub fn cmd_search(args: &SearchArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let options = args.scoring.options()?;
    let baseline = args.baseline.as_deref().map(str::parse::<Method>).transpose()?;
    let mailbox = Mailbox::load(&args.store.store)?;
    let mut run = match &args.run_out {
        Some(p) => Some(
            fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io(format!("opening {}", p.display()), e))?,
        ),
        None => None,
    };
    let tag = baseline.unwrap_or(Method::Era).name();
    let mut one = |raw: &str, qid: &str, out: &mut dyn Write| -> Result<()> {
        let outcome = search_once(&mailbox, options, raw, args.global.as_deref(), baseline, args.clue.as_deref())?;
        write_results(out, &mailbox, &outcome, args.top)?;
        if let Some(f) = run.as_mut() {
            evalkit::write_run(f, qid, &outcome.list, tag)?;
        }
        Ok(())
    };
    if let Some(q) = &args.query {
        one(q, &args.query_id, out)?;
    }
    if args.interactive {
        let mut n = 0;
        loop {
            eprint!("query> ");
            let mut line = String::new();
            if input.read_line(&mut line).map_err(|e| Error::io("reading query", e))? == 0 {
                break;
            }
            if line.trim().is_empty() {
                continue;
            }
            n += 1;
            match one(line.trim(), &format!("{}{n}", args.query_id), out) {
                Err(Error::EmptyQuery) => eprintln!("empty query"),
                other => other?,
            }
        }
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let options = args.scoring.options()?;
    let cutoffs = evalkit::parse_cutoffs(&args.k)?;
    let methods = args.methods.iter().map(|m| m.parse::<Method>()).collect::<Result<Vec<_>>>()?;
    let queries = evalkit::load_queries(&args.queries)?;
    let qrels = evalkit::Qrels::load(&args.qrels)?;
    let mailbox = Mailbox::load(&args.store.store)?;
    let ranker = Ranker::new(&mailbox, options);

    let mut reports = Vec::new();
    for method in &methods {
        let mut entries = Vec::new();
        let mut run_text = Vec::new();
        for q in &queries {
            let list = match ranker.rank_method(*method, &q.text, q.clue.as_deref()) {
                Ok(l) => l,
                Err(Error::EmptyQuery) => {
                    warn!("query {} has no searchable words", q.id);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut list = list;
            list.items.truncate(args.depth);
            evalkit::write_run(&mut run_text, &q.id, &list, method.name())?;
            entries.extend(list.items.iter().enumerate().map(|(i, s)| RunEntry {
                query_id: q.id.clone(),
                email_id: s.email_id.to_string(),
                rank: i + 1,
                score: s.score,
                tag: method.name().to_string(),
            }));
        }
        if let Some(dir) = &args.runs_dir {
            fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
            let path = dir.join(format!("{}.run", method.name()));
            fs::write(&path, &run_text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        reports.push(evalkit::evaluate_run(&entries, &qrels, &cutoffs, method.name())?);
    }
    emit(out, format_args!("{}", evalkit::format_table(&reports)))?;
    if let Some(p) = &args.report_out {
        write_file(p, &evalkit::format_key_values(&reports))?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn cmd_serve(args: &ServeArgs, out: &mut dyn Write) -> Result<()> {
    let store = match &args.store {
        Some(p) => ProfileStore::persistent(p)?,
        None => ProfileStore::in_memory(),
    };
    let server = ExpertServer::bind((args.bind.as_str(), args.port), store)?;
    emit(out, format_args!("listening on {}\n", server.local_addr()?))?;
    out.flush().map_err(|e| Error::io("writing output", e))?;
    server.serve()
}

pub fn cmd_publish(args: &PublishArgs, out: &mut dyn Write) -> Result<()> {
    let mailbox = Mailbox::load(&args.store.store)?;
    let user = match args.user.as_deref().or(mailbox.owner()) {
        Some(u) => crate::corpus::normalize_address(u),
        None => return Err(Error::Protocol("mailbox has no sender to publish as; pass --user".into())),
    };
    let profile = netexpert::public_profile(&mailbox, &user, &args.public_folders);
    let mut client = ExpertClient::connect(args.server.as_str(), NETWORK_TIMEOUT)?;
    client.publish(&profile)?;
    emit(out, format_args!("published {} terms for {user}\n", profile.terms.len()))
}
