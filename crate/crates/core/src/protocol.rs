//! Evaluation protocol: singleton filtering, topic/subtopic scoping and
//! assembly of full reports.
//!
//! Mention detection is always scored on the unfiltered mention sets, so
//! singletons are judged there and nowhere else when `singletons = exclude`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::metrics::{self, conll_f1, mention_detection_prf, Metric, Prf};
use crate::model::{validate_clustering, Clustering, Corpus, MentionKind, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SingletonMode {
    Include,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionSource {
    Gold,
    Predicted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Corpus,
    Topic,
    Subtopic,
}

macro_rules! lowercase_enum_str {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self { $(<$ty>::$variant => f.write_str($name)),+ }
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(format!("unexpected value {other:?}")),
                }
            }
        }
    };
}

lowercase_enum_str!(SingletonMode { Include => "include", Exclude => "exclude" });
lowercase_enum_str!(MentionSource { Gold => "gold", Predicted => "predicted" });
lowercase_enum_str!(Scope { Corpus => "corpus", Topic => "topic", Subtopic => "subtopic" });

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("no metrics selected")]
    NoMetrics,
    #[error("CoNLL F1 needs muc, b3 and ceafe")]
    ConllWithoutConstituents,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalConfig {
    pub singletons: SingletonMode,
    pub mention_source: MentionSource,
    pub scope: Scope,
    pub metrics: Vec<Metric>,
    pub conll: bool,
    pub kind: MentionKind,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            singletons: SingletonMode::Exclude,
            mention_source: MentionSource::Gold,
            scope: Scope::Corpus,
            metrics: Metric::ALL.to_vec(),
            conll: true,
            kind: MentionKind::Event,
        }
    }
}

impl EvalConfig {
    pub fn with_singletons(mut self, mode: SingletonMode) -> Self {
        self.singletons = mode;
        self
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn with_kind(mut self, kind: MentionKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.metrics.is_empty() {
            return Err(ConfigError::NoMetrics);
        }
        if self.conll && !self.has_conll_constituents() {
            return Err(ConfigError::ConllWithoutConstituents);
        }
        Ok(())
    }

    pub fn has_conll_constituents(&self) -> bool {
        [Metric::Muc, Metric::B3, Metric::CeafE]
            .iter()
            .all(|m| self.metrics.contains(m))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SideCounts {
    pub mentions: usize,
    pub clusters: usize,
    pub singletons: usize,
}

impl SideCounts {
    fn of(c: &Clustering) -> Self {
        SideCounts {
            mentions: c.mentions().len(),
            clusters: c.clusters().len(),
            singletons: c.singleton_count(),
        }
    }
}

/// Mention and cluster counts as supplied and as scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub gold_input: SideCounts,
    pub gold_scored: SideCounts,
    pub system_input: SideCounts,
    pub system_scored: SideCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub counts: Counts,
    pub mention_detection: Prf,
    pub metrics: BTreeMap<Metric, Prf>,
    pub conll: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("kind mismatch: config is {expected}, {side} clustering is {found}")]
    KindMismatch {
        side: &'static str,
        expected: MentionKind,
        found: MentionKind,
    },
    #[error("invalid {side} clustering: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        side: &'static str,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Drops every size-1 cluster and its mention.
pub fn filter_singletons(c: &Clustering) -> Clustering {
    let labeled = c
        .clusters()
        .iter()
        .filter(|cl| cl.len() > 1)
        .flat_map(|cl| {
            c.cluster_mentions(cl)
                .map(move |m| (m.clone(), cl.cluster_id.clone()))
        });
    Clustering::from_labeled(c.kind(), labeled).expect("subset of a valid clustering")
}

/// Splits every cluster at topic or subtopic boundaries. Pieces keep the
/// original id when the cluster is not split, otherwise get `<id>@<group>`.
/// Mentions in documents unknown to the corpus stay with their group `?`.
pub fn scope_partition(c: &Clustering, corpus: &Corpus, scope: Scope) -> Clustering {
    if scope == Scope::Corpus {
        return c.clone();
    }
    let group_of = |doc_id: &str| -> String {
        match corpus.document(doc_id) {
            Some(d) if scope == Scope::Topic => d.topic_id.clone(),
            Some(d) => d.subtopic_id.clone(),
            None => "?".to_string(),
        }
    };
    let mut label: HashMap<usize, String> = HashMap::new();
    for cl in c.clusters() {
        let mut groups: Vec<String> = Vec::new();
        let per_member: Vec<String> = cl
            .members
            .iter()
            .map(|&i| {
                let g = group_of(&c.mentions()[i].doc_id);
                if !groups.contains(&g) {
                    groups.push(g.clone());
                }
                g
            })
            .collect();
        for (&i, g) in cl.members.iter().zip(per_member) {
            let id = if groups.len() == 1 {
                cl.cluster_id.clone()
            } else {
                format!("{}@{}", cl.cluster_id, g)
            };
            label.insert(i, id);
        }
    }
    let labeled = c.mentions().iter().enumerate().map(|(i, m)| {
        (
            m.clone(),
            label.remove(&i).expect("every mention is clustered"),
        )
    });
    Clustering::from_labeled(c.kind(), labeled).expect("same mentions as input")
}

/// Scores `sys` against `gold`.
///
/// Steps: validate both sides, score mention detection on the unfiltered
/// mention sets, split system clusters at scope boundaries, drop singletons
/// from both sides when excluding them, then run each selected metric.
pub fn evaluate(
    gold: &Clustering,
    sys: &Clustering,
    corpus: &Corpus,
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    config.validate()?;
    for (side, c) in [("gold", gold), ("system", sys)] {
        if c.kind() != config.kind {
            return Err(EvalError::KindMismatch {
                side,
                expected: config.kind,
                found: c.kind(),
            });
        }
        let violations = validate_clustering(c, corpus);
        if !violations.is_empty() {
            return Err(EvalError::Invalid { side, violations });
        }
    }

    let mention_detection = mention_detection_prf(gold.mentions(), sys.mentions());

    let scoped = scope_partition(sys, corpus, config.scope);
    let (gold_scored, sys_scored) = match config.singletons {
        SingletonMode::Include => (gold.clone(), scoped),
        SingletonMode::Exclude => (filter_singletons(gold), filter_singletons(&scoped)),
    };

    let mut per_metric = BTreeMap::new();
    for &metric in &config.metrics {
        per_metric.insert(metric, metrics::score(metric, &gold_scored, &sys_scored));
    }
    let conll = if config.conll {
        Some(conll_f1(
            &per_metric[&Metric::Muc],
            &per_metric[&Metric::B3],
            &per_metric[&Metric::CeafE],
        ))
    } else {
        None
    };

    Ok(EvalReport {
        config: config.clone(),
        counts: Counts {
            gold_input: SideCounts::of(gold),
            gold_scored: SideCounts::of(&gold_scored),
            system_input: SideCounts::of(sys),
            system_scored: SideCounts::of(&sys_scored),
        },
        mention_detection,
        metrics: per_metric,
        conll,
    })
}

/// Percentage rounded half-up to one decimal.
pub fn percent(x: f64) -> f64 {
    (x * 1000.0).round() / 10.0
}

fn pct(x: f64) -> String {
    format!("{:.1}", percent(x))
}

impl EvalReport {
    /// Fixed-width table: R, P, F1 per metric, CoNLL F1 last.
    pub fn to_table(&self, row_label: &str) -> String {
        let c = &self.config;
        let mut out = format!(
            "kind={} singletons={} mentions={} scope={}\n",
            c.kind, c.singletons, c.mention_source, c.scope
        );
        let md = &self.mention_detection;
        out.push_str(&format!(
            "mention detection: R {} P {} F1 {}\n\n",
            pct(md.recall),
            pct(md.precision),
            pct(md.f1)
        ));

        let label_width = row_label.len().max(8);
        let mut head1 = format!("{:<label_width$}", "");
        let mut head2 = format!("{:<label_width$}", "");
        let mut row = format!("{row_label:<label_width$}");
        for (metric, prf) in &self.metrics {
            head1.push_str(&format!(" | {:<20}", metric.label()));
            head2.push_str(&format!(" | {:>6} {:>6} {:>6}", "R", "P", "F1"));
            row.push_str(&format!(
                " | {:>6} {:>6} {:>6}",
                pct(prf.recall),
                pct(prf.precision),
                pct(prf.f1)
            ));
        }
        if let Some(conll) = self.conll {
            head1.push_str(&format!(" | {:>6}", "CoNLL"));
            head2.push_str(&format!(" | {:>6}", "F1"));
            row.push_str(&format!(" | {:>6}", pct(conll)));
        }
        for line in [head1, head2, row] {
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
