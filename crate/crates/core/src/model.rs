//! Core domain types: tokens, documents, the corpus, mentions and clusterings.
//!
//! Token offsets are document-global, 0-based, and mention spans are
//! inclusive on both ends. Everything here is immutable once built.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub doc_id: String,
    pub sentence_index: usize,
    /// Document-global position.
    pub token_index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub topic_id: String,
    pub subtopic_id: String,
    pub tokens: Vec<Token>,
}

impl Document {
    /// Builds a document from sentences of token texts, numbering tokens
    /// document-globally.
    pub fn from_sentences<S: AsRef<str>>(
        doc_id: &str,
        topic_id: &str,
        subtopic_id: &str,
        sentences: &[Vec<S>],
    ) -> Self {
        let mut tokens = Vec::new();
        for (sentence_index, sentence) in sentences.iter().enumerate() {
            for text in sentence {
                tokens.push(Token {
                    doc_id: doc_id.to_string(),
                    sentence_index,
                    token_index: tokens.len(),
                    text: text.as_ref().to_string(),
                });
            }
        }
        Document {
            doc_id: doc_id.to_string(),
            topic_id: topic_id.to_string(),
            subtopic_id: subtopic_id.to_string(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token texts grouped by sentence. Sentence indices with no tokens are
    /// kept as empty groups so that indices survive a round trip.
    pub fn sentences(&self) -> Vec<Vec<String>> {
        let count = self
            .tokens
            .iter()
            .map(|t| t.sentence_index + 1)
            .max()
            .unwrap_or(0);
        let mut out = vec![Vec::new(); count];
        for t in &self.tokens {
            out[t.sentence_index].push(t.text.clone());
        }
        out
    }

    /// Space-joined token texts for an inclusive span, or `None` if the span
    /// is inverted or out of range.
    pub fn span_text(&self, start: usize, end: usize) -> Option<String> {
        if start > end || end >= self.tokens.len() {
            return None;
        }
        let texts: Vec<&str> = self.tokens[start..=end]
            .iter()
            .map(|t| t.text.as_str())
            .collect();
        Some(texts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("no documents")]
    NoDocuments,
    #[error("duplicate doc_id {0:?}")]
    DuplicateDocument(String),
    #[error("subtopic {subtopic:?} assigned to topics {first:?} and {second:?}")]
    SubtopicConflict {
        subtopic: String,
        first: String,
        second: String,
    },
    #[error("document {doc_id:?}: {reason}")]
    BadDocument { doc_id: String, reason: String },
}

/// A collection of documents grouped into topics and subtopics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, usize>,
    topics: BTreeMap<String, Vec<String>>,
    subtopics: BTreeMap<String, Vec<String>>,
}

impl Corpus {
    /// Builds a corpus, enforcing unique doc ids, contiguous non-empty tokens
    /// and a consistent subtopic → topic mapping. An empty document list is
    /// accepted here; file parsing rejects it.
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut index = HashMap::new();
        let mut topics: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut subtopics: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut subtopic_topic: HashMap<&str, &str> = HashMap::new();

        for (i, doc) in documents.iter().enumerate() {
            if index.insert(doc.doc_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateDocument(doc.doc_id.clone()));
            }
            for (pos, tok) in doc.tokens.iter().enumerate() {
                let bad = |reason: String| CorpusError::BadDocument {
                    doc_id: doc.doc_id.clone(),
                    reason,
                };
                if tok.token_index != pos {
                    return Err(bad(format!(
                        "token index {} at position {pos}",
                        tok.token_index
                    )));
                }
                if tok.text.is_empty() {
                    return Err(bad(format!("empty token text at {pos}")));
                }
                if tok.doc_id != doc.doc_id {
                    return Err(bad(format!("token {pos} belongs to {:?}", tok.doc_id)));
                }
            }
            match subtopic_topic.get(doc.subtopic_id.as_str()) {
                Some(&topic) if topic != doc.topic_id => {
                    return Err(CorpusError::SubtopicConflict {
                        subtopic: doc.subtopic_id.clone(),
                        first: topic.to_string(),
                        second: doc.topic_id.clone(),
                    });
                }
                Some(_) => {}
                None => {
                    subtopic_topic.insert(&doc.subtopic_id, &doc.topic_id);
                }
            }
            topics
                .entry(doc.topic_id.clone())
                .or_default()
                .push(doc.doc_id.clone());
            subtopics
                .entry(doc.subtopic_id.clone())
                .or_default()
                .push(doc.doc_id.clone());
        }

        Ok(Corpus {
            documents,
            index,
            topics,
            subtopics,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.index.get(doc_id).map(|&i| &self.documents[i])
    }

    /// topic_id → doc_ids, in document order.
    pub fn topics(&self) -> &BTreeMap<String, Vec<String>> {
        &self.topics
    }

    /// subtopic_id → doc_ids, in document order.
    pub fn subtopics(&self) -> &BTreeMap<String, Vec<String>> {
        &self.subtopics
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Event,
    Entity,
}

impl fmt::Display for MentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MentionKind::Event => f.write_str("event"),
            MentionKind::Entity => f.write_str("entity"),
        }
    }
}

impl std::str::FromStr for MentionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "event" => Ok(MentionKind::Event),
            "entity" => Ok(MentionKind::Entity),
            other => Err(format!("unknown mention kind {other:?}")),
        }
    }
}

/// The alignment key of a mention: two mentions are span-equal iff their
/// keys are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanKey {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub mention_id: String,
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub kind: MentionKind,
    pub surface: String,
}

impl Mention {
    pub fn new(
        mention_id: &str,
        doc_id: &str,
        start: usize,
        end: usize,
        kind: MentionKind,
    ) -> Self {
        Mention {
            mention_id: mention_id.to_string(),
            doc_id: doc_id.to_string(),
            start,
            end,
            kind,
            surface: String::new(),
        }
    }

    pub fn with_surface(mut self, surface: &str) -> Self {
        self.surface = surface.to_string();
        self
    }

    pub fn span(&self) -> SpanKey {
        SpanKey {
            doc_id: self.doc_id.clone(),
            start: self.start,
            end: self.end,
        }
    }

    pub fn span_equal(&self, other: &Mention) -> bool {
        self.doc_id == other.doc_id && self.start == other.start && self.end == other.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub cluster_id: String,
    /// Indices into the owning clustering's mention list.
    pub members: Vec<usize>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusteringError {
    #[error("duplicate mention_id {0:?}")]
    DuplicateMentionId(String),
}

/// A partition of a mention set into disjoint non-empty clusters.
///
/// Mentions keep their insertion order and clusters are ordered by first
/// appearance, so a clustering built from a file is reproducible byte for
/// byte on write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    kind: MentionKind,
    mentions: Vec<Mention>,
    clusters: Vec<Cluster>,
}

impl Clustering {
    pub fn empty(kind: MentionKind) -> Self {
        Clustering {
            kind,
            mentions: Vec::new(),
            clusters: Vec::new(),
        }
    }

    /// Builds a clustering from `(mention, cluster_id)` pairs. Mentions that
    /// share a cluster_id form one cluster, so the result is a partition by
    /// construction. Corpus-relative checks live in [`validate_clustering`].
    pub fn from_labeled<I, S>(kind: MentionKind, labeled: I) -> Result<Self, ClusteringError>
    where
        I: IntoIterator<Item = (Mention, S)>,
        S: Into<String>,
    {
        let mut mentions = Vec::new();
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut by_label: HashMap<String, usize> = HashMap::new();
        let mut ids = HashSet::new();
        for (mention, label) in labeled {
            if !ids.insert(mention.mention_id.clone()) {
                return Err(ClusteringError::DuplicateMentionId(mention.mention_id));
            }
            let label = label.into();
            let idx = mentions.len();
            mentions.push(mention);
            match by_label.get(&label) {
                Some(&c) => clusters[c].members.push(idx),
                None => {
                    by_label.insert(label.clone(), clusters.len());
                    clusters.push(Cluster {
                        cluster_id: label,
                        members: vec![idx],
                    });
                }
            }
        }
        Ok(Clustering {
            kind,
            mentions,
            clusters,
        })
    }

    /// Builds a clustering from groups of mentions; cluster ids are `c0`, `c1`, ...
    pub fn from_groups(
        kind: MentionKind,
        groups: Vec<Vec<Mention>>,
    ) -> Result<Self, ClusteringError> {
        let labeled = groups
            .into_iter()
            .enumerate()
            .flat_map(|(i, g)| g.into_iter().map(move |m| (m, format!("c{i}"))));
        Self::from_labeled(kind, labeled)
    }

    pub fn kind(&self) -> MentionKind {
        self.kind
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_mentions<'a>(
        &'a self,
        cluster: &'a Cluster,
    ) -> impl Iterator<Item = &'a Mention> + 'a {
        cluster.members.iter().map(move |&i| &self.mentions[i])
    }

    /// Clusters as lists of span keys, the form every metric works on.
    pub fn span_clusters(&self) -> Vec<Vec<SpanKey>> {
        self.clusters
            .iter()
            .map(|c| c.members.iter().map(|&i| self.mentions[i].span()).collect())
            .collect()
    }

    /// `(mention, cluster_id)` pairs in mention order.
    pub fn labeled(&self) -> Vec<(&Mention, &str)> {
        let mut label = vec![""; self.mentions.len()];
        for c in &self.clusters {
            for &i in &c.members {
                label[i] = &c.cluster_id;
            }
        }
        self.mentions.iter().zip(label).collect()
    }

    pub fn singleton_count(&self) -> usize {
        self.clusters.iter().filter(|c| c.is_singleton()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.mentions.is_empty()
    }
}

/// One violated invariant, with enough location to find it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InvertedSpan {
        mention_id: String,
        start: usize,
        end: usize,
    },
    SpanOutOfRange {
        mention_id: String,
        end: usize,
        doc_len: usize,
    },
    DuplicateSpan {
        mention_id: String,
        other: String,
    },
    UnknownDocument {
        mention_id: String,
        doc_id: String,
    },
    KindMismatch {
        mention_id: String,
        expected: MentionKind,
        found: MentionKind,
    },
}

impl Violation {
    pub fn mention_id(&self) -> &str {
        match self {
            Violation::InvertedSpan { mention_id, .. }
            | Violation::SpanOutOfRange { mention_id, .. }
            | Violation::DuplicateSpan { mention_id, .. }
            | Violation::UnknownDocument { mention_id, .. }
            | Violation::KindMismatch { mention_id, .. } => mention_id,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvertedSpan {
                mention_id,
                start,
                end,
            } => {
                write!(f, "{mention_id}: inverted span ({start} > {end})")
            }
            Violation::SpanOutOfRange {
                mention_id,
                end,
                doc_len,
            } => {
                write!(
                    f,
                    "{mention_id}: span out of range (end {end}, document has {doc_len} tokens)"
                )
            }
            Violation::DuplicateSpan { mention_id, other } => {
                write!(f, "{mention_id}: duplicate span (same as {other})")
            }
            Violation::UnknownDocument { mention_id, doc_id } => {
                write!(f, "{mention_id}: unknown document {doc_id:?}")
            }
            Violation::KindMismatch {
                mention_id,
                expected,
                found,
            } => {
                write!(f, "{mention_id}: kind {found} in a {expected} clustering")
            }
        }
    }
}

/// Checks a clustering against a corpus and returns every violation found.
/// An empty list means the clustering is valid.
pub fn validate_clustering(c: &Clustering, corpus: &Corpus) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen: HashMap<SpanKey, &str> = HashMap::new();
    for m in c.mentions() {
        if m.kind != c.kind() {
            violations.push(Violation::KindMismatch {
                mention_id: m.mention_id.clone(),
                expected: c.kind(),
                found: m.kind,
            });
        }
        if m.start > m.end {
            violations.push(Violation::InvertedSpan {
                mention_id: m.mention_id.clone(),
                start: m.start,
                end: m.end,
            });
        }
        match corpus.document(&m.doc_id) {
            None => violations.push(Violation::UnknownDocument {
                mention_id: m.mention_id.clone(),
                doc_id: m.doc_id.clone(),
            }),
            Some(doc) => {
                if m.end >= doc.len() || m.start >= doc.len() {
                    violations.push(Violation::SpanOutOfRange {
                        mention_id: m.mention_id.clone(),
                        end: m.end.max(m.start),
                        doc_len: doc.len(),
                    });
                }
            }
        }
        if let Some(other) = seen.insert(m.span(), &m.mention_id) {
            violations.push(Violation::DuplicateSpan {
                mention_id: m.mention_id.clone(),
                other: other.to_string(),
            });
        }
    }
    violations
}
