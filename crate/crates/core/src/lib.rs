//! Cross-document coreference evaluation.
//!
//! Mention detection is scored separately from coreference linking, the
//! coreference metrics (MUC, B³, CEAFm, CEAFe, LEA and CoNLL F1) can be run
//! with or without singleton clusters, and system clusters can be confined
//! to topics or subtopics to measure how much a system leans on document
//! grouping. Deterministic baselines produce system clusterings to score.

pub mod baselines;
pub mod cli;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod protocol;

pub use ingest::ScoreMatrix;
pub use metrics::{Metric, Prf};
pub use model::{Clustering, Corpus, Document, Mention, MentionKind};
pub use protocol::{evaluate, EvalConfig, EvalReport};
