//! Readers and writers for corpus, clustering and pair-score files, plus
//! corpus statistics.
//!
//! * Corpus: JSON Lines, one document per line with fields `doc_id`,
//!   `topic_id`, `subtopic_id`, `sentences` (a list of token lists).
//! * Clustering: tab-separated `mention_id doc_id start end cluster_id`.
//!   An empty or `-` cluster_id (or a missing fifth column) puts the mention
//!   in a singleton cluster of its own, named `singleton:<mention_id>`.
//! * Pair scores: tab-separated `mention_id mention_id score`.
//!
//! Lines starting with `#` and blank lines are skipped in the two TSV
//! formats. Writers use LF endings with a trailing newline.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    validate_clustering, Clustering, ClusteringError, Corpus, CorpusError, Document, Mention,
    MentionKind, Violation,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("line {line}: {source}")]
    Clustering {
        line: usize,
        source: ClusteringError,
    },
    #[error("invalid clustering: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("line {line}: unknown mention_id {mention_id:?}")]
    UnknownMention { line: usize, mention_id: String },
    #[error("line {line}: score out of range: {score}")]
    ScoreOutOfRange { line: usize, score: String },
    #[error("line {line}: self-pair {mention_id:?}")]
    SelfPair { line: usize, mention_id: String },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    doc_id: String,
    topic_id: String,
    subtopic_id: String,
    sentences: Vec<Vec<String>>,
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Corpus, IngestError> {
    read_corpus(open(path.as_ref())?)
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, IngestError> {
    let mut documents = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord =
            serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
                line: i + 1,
                reason: e.to_string(),
            })?;
        documents.push(Document::from_sentences(
            &record.doc_id,
            &record.topic_id,
            &record.subtopic_id,
            &record.sentences,
        ));
    }
    if documents.is_empty() {
        return Err(CorpusError::NoDocuments.into());
    }
    Ok(Corpus::new(documents)?)
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> io::Result<()> {
    for doc in corpus.documents() {
        let record = DocumentRecord {
            doc_id: doc.doc_id.clone(),
            topic_id: doc.topic_id.clone(),
            subtopic_id: doc.subtopic_id.clone(),
            sentences: doc.sentences(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn parse_index(field: &str, line: usize, name: &str) -> Result<usize, IngestError> {
    field.parse().map_err(|_| IngestError::Malformed {
        line,
        reason: format!("{name} is not a non-negative integer: {field:?}"),
    })
}

pub fn parse_clustering(
    path: impl AsRef<Path>,
    corpus: &Corpus,
    kind: MentionKind,
) -> Result<Clustering, IngestError> {
    read_clustering(open(path.as_ref())?, corpus, kind)
}

/// Reads a clustering file and validates it against `corpus`. Surfaces are
/// filled in from the corpus tokens.
pub fn read_clustering<R: BufRead>(
    reader: R,
    corpus: &Corpus,
    kind: MentionKind,
) -> Result<Clustering, IngestError> {
    let mut labeled: Vec<(Mention, String, bool)> = Vec::new();
    let mut explicit: HashSet<String> = HashSet::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 && fields.len() != 5 {
            return Err(IngestError::Malformed {
                line: lineno,
                reason: format!(
                    "expected 4 or 5 tab-separated fields, found {}",
                    fields.len()
                ),
            });
        }
        let mention_id = fields[0];
        if mention_id.is_empty() {
            return Err(IngestError::Malformed {
                line: lineno,
                reason: "empty mention_id".into(),
            });
        }
        if ids.insert(mention_id.to_string(), lineno).is_some() {
            return Err(IngestError::Clustering {
                line: lineno,
                source: ClusteringError::DuplicateMentionId(mention_id.to_string()),
            });
        }
        let start = parse_index(fields[2], lineno, "start")?;
        let end = parse_index(fields[3], lineno, "end")?;
        let mut mention = Mention::new(mention_id, fields[1], start, end, kind);
        if let Some(surface) = corpus
            .document(fields[1])
            .and_then(|d| d.span_text(start, end))
        {
            mention.surface = surface;
        }
        let (label, implicit) = match fields.get(4).copied() {
            None | Some("") | Some("-") => (format!("singleton:{mention_id}"), true),
            Some(id) => {
                explicit.insert(id.to_string());
                (id.to_string(), false)
            }
        };
        labeled.push((mention, label, implicit));
    }
    for (m, label, implicit) in &labeled {
        if *implicit && explicit.contains(label) {
            return Err(IngestError::Malformed {
                line: ids[&m.mention_id],
                reason: format!("cluster_id {label:?} collides with an implicit singleton id"),
            });
        }
    }
    let labeled = labeled.into_iter().map(|(m, label, _)| (m, label));
    let clustering = Clustering::from_labeled(kind, labeled)
        .map_err(|e| IngestError::Clustering { line: 0, source: e })?;
    let violations = validate_clustering(&clustering, corpus);
    if !violations.is_empty() {
        return Err(IngestError::Invalid(violations));
    }
    Ok(clustering)
}

pub fn write_clustering<W: Write>(c: &Clustering, mut out: W) -> io::Result<()> {
    for (m, label) in c.labeled() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            m.mention_id, m.doc_id, m.start, m.end, label
        )?;
    }
    Ok(())
}

pub fn save_clustering(c: &Clustering, path: impl AsRef<Path>) -> io::Result<()> {
    let mut buf = Vec::new();
    write_clustering(c, &mut buf)?;
    std::fs::write(path, buf)
}

/// Symmetric pairwise similarity scores over mention ids. Absent pairs
/// score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreMatrix {
    entries: BTreeMap<(String, String), f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("score out of range: {0}")]
    OutOfRange(f64),
    #[error("self-pair {0:?}")]
    SelfPair(String),
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl ScoreMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the score of the unordered pair `{a, b}`, replacing any earlier value.
    pub fn insert(&mut self, a: &str, b: &str, score: f64) -> Result<(), ScoreError> {
        if a == b {
            return Err(ScoreError::SelfPair(a.to_string()));
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(ScoreError::OutOfRange(score));
        }
        self.entries.insert(pair_key(a, b), score);
        Ok(())
    }

    pub fn get(&self, a: &str, b: &str) -> f64 {
        self.entries.get(&pair_key(a, b)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored entries as `(a, b, score)` with `a < b`, in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries
            .iter()
            .map(|((a, b), &s)| (a.as_str(), b.as_str(), s))
    }
}

pub fn parse_pair_scores(
    path: impl AsRef<Path>,
    mentions: &[Mention],
) -> Result<ScoreMatrix, IngestError> {
    read_pair_scores(open(path.as_ref())?, mentions)
}

/// Reads a score file. Every id must belong to `mentions`; a later line for
/// the same unordered pair overrides an earlier one.
pub fn read_pair_scores<R: BufRead>(
    reader: R,
    mentions: &[Mention],
) -> Result<ScoreMatrix, IngestError> {
    let universe: HashSet<&str> = mentions.iter().map(|m| m.mention_id.as_str()).collect();
    let mut matrix = ScoreMatrix::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(IngestError::Malformed {
                line: lineno,
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        for id in &fields[..2] {
            if !universe.contains(id) {
                return Err(IngestError::UnknownMention {
                    line: lineno,
                    mention_id: id.to_string(),
                });
            }
        }
        let raw = fields[2].trim();
        let plain_decimal = !raw.is_empty()
            && raw
                .chars()
                .all(|c| c.is_ascii_digit() || c == '.' || c == '-' || c == '+');
        let score: f64 = match raw.parse() {
            Ok(s) if plain_decimal => s,
            _ => {
                return Err(IngestError::Malformed {
                    line: lineno,
                    reason: format!("not a decimal score: {raw:?}"),
                })
            }
        };
        matrix
            .insert(fields[0], fields[1], score)
            .map_err(|e| match e {
                ScoreError::OutOfRange(_) => IngestError::ScoreOutOfRange {
                    line: lineno,
                    score: raw.to_string(),
                },
                ScoreError::SelfPair(id) => IngestError::SelfPair {
                    line: lineno,
                    mention_id: id,
                },
            })?;
    }
    Ok(matrix)
}

pub fn write_pair_scores<W: Write>(scores: &ScoreMatrix, mut out: W) -> io::Result<()> {
    for (a, b, s) in scores.iter() {
        writeln!(out, "{a}\t{b}\t{s}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KindStats {
    pub n_mentions: usize,
    pub n_singletons: usize,
    pub n_nonsingleton_clusters: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StatsReport {
    pub label: String,
    pub n_topics: usize,
    pub n_documents: usize,
    pub n_sentences: usize,
    pub per_kind: BTreeMap<MentionKind, KindStats>,
}

pub fn corpus_stats(label: &str, corpus: &Corpus, gold: &[&Clustering]) -> StatsReport {
    let n_sentences = corpus
        .documents()
        .iter()
        .map(|d| {
            d.tokens
                .iter()
                .map(|t| t.sentence_index)
                .collect::<HashSet<_>>()
                .len()
        })
        .sum();
    let per_kind = gold
        .iter()
        .map(|c| {
            let n_singletons = c.singleton_count();
            (
                c.kind(),
                KindStats {
                    n_mentions: c.mentions().len(),
                    n_singletons,
                    n_nonsingleton_clusters: c.clusters().len() - n_singletons,
                },
            )
        })
        .collect();
    StatsReport {
        label: label.to_string(),
        n_topics: corpus.topics().len(),
        n_documents: corpus.documents().len(),
        n_sentences,
        per_kind,
    }
}

impl StatsReport {
    /// Renders a two-column table; per-kind rows show `event/entity`
    /// slash values when both kinds are present.
    pub fn to_table(&self) -> String {
        let per_kind = |f: fn(&KindStats) -> usize| -> String {
            let vals: Vec<String> = self.per_kind.values().map(|k| f(k).to_string()).collect();
            if vals.is_empty() {
                "-".to_string()
            } else {
                vals.join("/")
            }
        };
        let kinds: Vec<String> = self.per_kind.keys().map(|k| k.to_string()).collect();
        let rows = [
            ("# Topics".to_string(), self.n_topics.to_string()),
            ("# Documents".to_string(), self.n_documents.to_string()),
            ("# Sentences".to_string(), self.n_sentences.to_string()),
            ("# Mentions".to_string(), per_kind(|k| k.n_mentions)),
            ("# Singletons".to_string(), per_kind(|k| k.n_singletons)),
            (
                "# Clusters".to_string(),
                per_kind(|k| k.n_nonsingleton_clusters),
            ),
        ];
        let label = if self.label.is_empty() {
            "split"
        } else {
            &self.label
        };
        let mut out = format!("{:<14}{}\n", "", label);
        for (name, value) in rows {
            out.push_str(&format!("{name:<14}{value}\n"));
        }
        if !kinds.is_empty() {
            out.push_str(&format!(
                "(slash values: {}; clusters exclude singletons)\n",
                kinds.join("/")
            ));
        }
        out
    }
}
