//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (validation or parse failure),
//! 2 usage error, 3 I/O error. Reports are written only after every step
//! has succeeded.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{
    agglomerative_cluster_grouped, cluster_documents, lexical_pair_scorer, singleton_baseline,
    AggloConfig, BaselineError, Linkage,
};
use crate::ingest::{self, IngestError};
use crate::metrics::Metric;
use crate::model::{validate_clustering, Clustering, Corpus, MentionKind};
use crate::protocol::{evaluate, EvalConfig, EvalError, MentionSource, Scope, SingletonMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub report_path: Option<PathBuf>,
}

impl CommandOutcome {
    fn ok(report_path: Option<PathBuf>) -> Self {
        CommandOutcome {
            exit_code: EXIT_OK,
            report_path,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cdcoref",
    version,
    about = "Cross-document coreference evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a clustering file against a corpus.
    Validate(ValidateArgs),
    /// Score a system clustering against gold.
    Score(ScoreArgs),
    /// Produce a baseline system clustering.
    Baseline(BaselineArgs),
    /// Corpus statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Event,
    Entity,
}

impl From<KindArg> for MentionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Event => MentionKind::Event,
            KindArg::Entity => MentionKind::Entity,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SingletonArg {
    Include,
    Exclude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Corpus,
    Topic,
    Subtopic,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Corpus => Scope::Corpus,
            ScopeArg::Topic => Scope::Topic,
            ScopeArg::Subtopic => Scope::Subtopic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    Gold,
    Predicted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Singleton,
    Lexical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Single,
    Complete,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Complete => Linkage::Complete,
        }
    }
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    clustering: PathBuf,
    #[arg(long, value_enum, default_value = "event")]
    kind: KindArg,
}

#[derive(Debug, Args)]
struct EvalFlags {
    /// Score singleton clusters inside the coreference metrics.
    #[arg(long, value_enum, default_value = "exclude")]
    singletons: SingletonArg,
    /// Granularity at which system clusters may link.
    #[arg(long, value_enum, default_value = "corpus")]
    scope: ScopeArg,
    /// Comma-separated list from muc,b3,ceafm,ceafe,lea,conll, or "all".
    #[arg(long, default_value = "all")]
    metrics: String,
    /// Whether system mentions are gold or predicted (recorded in the report).
    #[arg(long = "mention-source", value_enum, default_value = "gold")]
    mention_source: SourceArg,
    /// Format of the report written to --out.
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    system: PathBuf,
    #[arg(long, value_enum, default_value = "event")]
    kind: KindArg,
    #[command(flatten)]
    eval: EvalFlags,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Row label in the text table.
    #[arg(long, default_value = "system")]
    label: String,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(value_enum)]
    mode: ModeArg,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Clustering file supplying (predicted) input mentions; labels are ignored.
    /// Defaults to the gold mentions.
    #[arg(long)]
    mentions: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "event")]
    kind: KindArg,
    /// Merge threshold for lexical mode (default 0.5).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    linkage: Option<LinkageArg>,
    /// Pair-score TSV to cluster instead of the lexical scorer.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Cluster inside each document group of a k-way TF-IDF document clustering.
    #[arg(long = "doc-clusters")]
    doc_clusters: Option<usize>,
    /// Where to write the system clustering.
    #[arg(long)]
    out: PathBuf,
    /// Score the produced clustering against gold right away.
    #[arg(long)]
    evaluate: bool,
    #[command(flatten)]
    eval: EvalFlags,
    /// Report file for --evaluate.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Gold event clustering.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Gold entity clustering.
    #[arg(long)]
    entities: Option<PathBuf>,
    #[arg(long, default_value = "")]
    label: String,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its exit code and a one-line reason.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::Io(_) => EXIT_IO,
            _ => EXIT_INVALID,
        };
        let message = match &e {
            IngestError::Invalid(violations) => violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match e {
            EvalError::Config(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BaselineError> for Failure {
    fn from(e: BaselineError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return CommandOutcome {
                exit_code: code,
                report_path: None,
            };
        }
    };
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(&a, stdout),
        Command::Score(a) => cmd_score(&a, stdout),
        Command::Baseline(a) => cmd_baseline(&a, stdout),
        Command::Stats(a) => cmd_stats(&a, stdout),
    };
    match result {
        Ok(outcome) => outcome,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            CommandOutcome {
                exit_code: f.code,
                report_path: None,
            }
        }
    }
}

/// Writes through a sibling temp file and a rename, so a failed write never
/// leaves a partial report behind.
fn write_atomically(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn parse_metrics(spec: &str) -> Result<(Vec<Metric>, bool), Failure> {
    if spec.trim() == "all" {
        return Ok((Metric::ALL.to_vec(), true));
    }
    let mut metrics = Vec::new();
    let mut conll = false;
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("conll") {
            conll = true;
            continue;
        }
        let m: Metric = item.parse().map_err(Failure::usage)?;
        if !metrics.contains(&m) {
            metrics.push(m);
        }
    }
    metrics.sort();
    Ok((metrics, conll))
}

fn eval_config(flags: &EvalFlags, kind: MentionKind) -> Result<EvalConfig, Failure> {
    let (metrics, conll) = parse_metrics(&flags.metrics)?;
    let config = EvalConfig {
        singletons: match flags.singletons {
            SingletonArg::Include => SingletonMode::Include,
            SingletonArg::Exclude => SingletonMode::Exclude,
        },
        mention_source: match flags.mention_source {
            SourceArg::Gold => MentionSource::Gold,
            SourceArg::Predicted => MentionSource::Predicted,
        },
        scope: flags.scope.into(),
        metrics,
        conll,
        kind,
    };
    config
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))?;
    Ok(config)
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    Ok(ingest::parse_corpus(path)?)
}

fn cmd_validate(a: &ValidateArgs, stdout: &mut dyn Write) -> Result<CommandOutcome, Failure> {
    let corpus = load_corpus(&a.corpus)?;
    let c = ingest::parse_clustering(&a.clustering, &corpus, a.kind.into())?;
    debug_assert!(validate_clustering(&c, &corpus).is_empty());
    writeln!(
        stdout,
        "ok: {} mentions, {} clusters ({} singletons)",
        c.mentions().len(),
        c.clusters().len(),
        c.singleton_count()
    )?;
    Ok(CommandOutcome::ok(None))
}

/// Evaluates and emits the report: the text table (or JSON, when structured
/// output has no file) on stdout, and the chosen format to `out`.
#[allow(clippy::too_many_arguments)]
fn emit_report(
    gold: &Clustering,
    sys: &Clustering,
    corpus: &Corpus,
    config: &EvalConfig,
    format: FormatArg,
    out: Option<&Path>,
    label: &str,
    stdout: &mut dyn Write,
) -> Result<Option<PathBuf>, Failure> {
    let report = evaluate(gold, sys, corpus, config)?;
    let table = report.to_table(label);
    let rendered = match format {
        FormatArg::Text => table.clone(),
        FormatArg::Structured => report.to_json(),
    };
    if let Some(path) = out {
        write_atomically(path, &rendered)?;
        stdout.write_all(table.as_bytes())?;
        Ok(Some(path.to_path_buf()))
    } else {
        stdout.write_all(rendered.as_bytes())?;
        Ok(None)
    }
}

fn cmd_score(a: &ScoreArgs, stdout: &mut dyn Write) -> Result<CommandOutcome, Failure> {
    let kind = a.kind.into();
    let config = eval_config(&a.eval, kind)?;
    let corpus = load_corpus(&a.corpus)?;
    let gold = ingest::parse_clustering(&a.gold, &corpus, kind)?;
    let sys = ingest::parse_clustering(&a.system, &corpus, kind)?;
    let path = emit_report(
        &gold,
        &sys,
        &corpus,
        &config,
        a.eval.format,
        a.out.as_deref(),
        &a.label,
        stdout,
    )?;
    Ok(CommandOutcome::ok(path))
}

fn cmd_baseline(a: &BaselineArgs, stdout: &mut dyn Write) -> Result<CommandOutcome, Failure> {
    let kind: MentionKind = a.kind.into();
    let scope: Scope = a.eval.scope.into();
    if let ModeArg::Singleton = a.mode {
        let stray = [
            (a.tau.is_some(), "--tau"),
            (a.linkage.is_some(), "--linkage"),
            (a.scores.is_some(), "--scores"),
            (a.doc_clusters.is_some(), "--doc-clusters"),
        ];
        if let Some((_, flag)) = stray.iter().find(|(set, _)| *set) {
            return Err(Failure::usage(format!(
                "{flag} has no effect with the singleton baseline"
            )));
        }
    }
    if a.doc_clusters.is_some() && scope != Scope::Corpus {
        return Err(Failure::usage(
            "--doc-clusters and --scope topic|subtopic are mutually exclusive",
        ));
    }
    if !a.evaluate && a.report.is_some() {
        return Err(Failure::usage("--report requires --evaluate"));
    }
    let config = if a.evaluate {
        // baseline output is already produced at the requested granularity
        Some(eval_config(&a.eval, kind)?.with_scope(Scope::Corpus))
    } else {
        None
    };
    let cfg = AggloConfig::new(
        a.tau.unwrap_or(0.5),
        a.linkage.map(Into::into).unwrap_or_default(),
    )?;

    let corpus = load_corpus(&a.corpus)?;
    let gold = ingest::parse_clustering(&a.gold, &corpus, kind)?;
    let source = match &a.mentions {
        Some(path) => ingest::parse_clustering(path, &corpus, kind)?,
        None => gold.clone(),
    };
    let mentions = source.mentions();

    let system = match a.mode {
        ModeArg::Singleton => singleton_baseline(kind, mentions),
        ModeArg::Lexical => {
            let scores = match &a.scores {
                Some(path) => ingest::parse_pair_scores(path, mentions)?,
                None => lexical_pair_scorer(mentions),
            };
            if let Some(k) = a.doc_clusters {
                let groups = cluster_documents(&corpus, k)?;
                let group_of_doc: std::collections::HashMap<&str, usize> = groups
                    .iter()
                    .enumerate()
                    .flat_map(|(gi, docs)| docs.iter().map(move |d| (d.as_str(), gi)))
                    .collect();
                agglomerative_cluster_grouped(kind, mentions, &scores, &cfg, |m| {
                    format!("g{:06}", group_of_doc[m.doc_id.as_str()])
                })
            } else {
                agglomerative_cluster_grouped(kind, mentions, &scores, &cfg, |m| {
                    let doc = corpus.document(&m.doc_id).expect("validated mention");
                    match scope {
                        Scope::Corpus => String::new(),
                        Scope::Topic => doc.topic_id.clone(),
                        Scope::Subtopic => doc.subtopic_id.clone(),
                    }
                })
            }
        }
    };

    let mut buf = Vec::new();
    ingest::write_clustering(&system, &mut buf)?;
    let rendered = String::from_utf8(buf).expect("utf-8 clustering");

    let mut table = Vec::new();
    if let Some(config) = &config {
        emit_report(
            &gold,
            &system,
            &corpus,
            config,
            a.eval.format,
            a.report.as_deref(),
            "baseline",
            &mut table,
        )?;
    }
    write_atomically(&a.out, &rendered)?;
    writeln!(
        stdout,
        "wrote {} mentions in {} clusters to {}",
        system.mentions().len(),
        system.clusters().len(),
        a.out.display()
    )?;
    stdout.write_all(&table)?;
    Ok(CommandOutcome::ok(Some(a.out.clone())))
}

fn cmd_stats(a: &StatsArgs, stdout: &mut dyn Write) -> Result<CommandOutcome, Failure> {
    let corpus = load_corpus(&a.corpus)?;
    let mut gold = Vec::new();
    if let Some(p) = &a.events {
        gold.push(ingest::parse_clustering(p, &corpus, MentionKind::Event)?);
    }
    if let Some(p) = &a.entities {
        gold.push(ingest::parse_clustering(p, &corpus, MentionKind::Entity)?);
    }
    let refs: Vec<&Clustering> = gold.iter().collect();
    let report = ingest::corpus_stats(&a.label, &corpus, &refs);
    let table = report.to_table();
    let rendered = match a.format {
        FormatArg::Text => table.clone(),
        FormatArg::Structured => {
            let mut s = serde_json::to_string_pretty(&report).expect("stats serialize");
            s.push('\n');
            s
        }
    };
    match &a.out {
        Some(path) => {
            write_atomically(path, &rendered)?;
            stdout.write_all(table.as_bytes())?;
            Ok(CommandOutcome::ok(Some(path.clone())))
        }
        None => {
            stdout.write_all(rendered.as_bytes())?;
            Ok(CommandOutcome::ok(None))
        }
    }
}
