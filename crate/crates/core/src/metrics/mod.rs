//! Coreference metrics over two clusterings aligned by exact span.
//!
//! Every metric is a recall function of `(key, response)`; precision is the
//! same function with the roles swapped. Mentions present on only one side
//! are handled as follows:
//!
//! * MUC: a mention missing from the other side counts as its own part.
//! * B³: it contributes 0 but stays in the denominator.
//! * CEAF, LEA: it simply has no intersection.
//!
//! Quotients with a zero denominator are 0. Two empty clusterings score
//! (1, 1, 1).

mod assignment;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::model::{Clustering, Mention, SpanKey};

pub use assignment::{solve_assignment, Assignment};

/// Recall, precision and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(recall: f64, precision: f64) -> Self {
        let f1 = if recall + precision > 0.0 {
            2.0 * recall * precision / (recall + precision)
        } else {
            0.0
        };
        Prf {
            recall,
            precision,
            f1,
        }
    }

    pub fn perfect() -> Self {
        Prf::new(1.0, 1.0)
    }

    pub fn zero() -> Self {
        Prf::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Metric {
    #[serde(rename = "muc")]
    Muc,
    #[serde(rename = "b3")]
    B3,
    #[serde(rename = "ceafm")]
    CeafM,
    #[serde(rename = "ceafe")]
    CeafE,
    #[serde(rename = "lea")]
    Lea,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Muc,
        Metric::B3,
        Metric::CeafM,
        Metric::CeafE,
        Metric::Lea,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Muc => "muc",
            Metric::B3 => "b3",
            Metric::CeafM => "ceafm",
            Metric::CeafE => "ceafe",
            Metric::Lea => "lea",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Muc => "MUC",
            Metric::B3 => "B3",
            Metric::CeafM => "CEAFm",
            Metric::CeafE => "CEAFe",
            Metric::Lea => "LEA",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "muc" => Ok(Metric::Muc),
            "b3" | "bcub" | "b-cubed" => Ok(Metric::B3),
            "ceafm" => Ok(Metric::CeafM),
            "ceafe" => Ok(Metric::CeafE),
            "lea" => Ok(Metric::Lea),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phi {
    /// Shared mention count.
    Mention,
    /// Dice overlap of the two clusters.
    Entity,
}

/// Both sides of an evaluation with spans interned to dense ids.
struct Aligned {
    gold: Side,
    sys: Side,
}

struct Side {
    clusters: Vec<Vec<usize>>,
    /// span id → cluster index on this side
    owner: Vec<Option<usize>>,
}

impl Side {
    fn mention_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

impl Aligned {
    fn new(gold: &Clustering, sys: &Clustering) -> Self {
        let mut ids: HashMap<SpanKey, usize> = HashMap::new();
        let mut intern = |c: &Clustering| -> Vec<Vec<usize>> {
            c.span_clusters()
                .into_iter()
                .map(|cl| {
                    cl.into_iter()
                        .map(|k| {
                            let next = ids.len();
                            *ids.entry(k).or_insert(next)
                        })
                        .collect()
                })
                .collect()
        };
        let g = intern(gold);
        let s = intern(sys);
        let n = ids.len();
        Aligned {
            gold: Side::build(g, n),
            sys: Side::build(s, n),
        }
    }

    fn both_empty(&self) -> bool {
        self.gold.mention_count() == 0 && self.sys.mention_count() == 0
    }

    fn swapped(&self) -> (&Side, &Side) {
        (&self.sys, &self.gold)
    }
}

impl Side {
    fn build(clusters: Vec<Vec<usize>>, universe: usize) -> Self {
        let mut owner = vec![None; universe];
        for (ci, c) in clusters.iter().enumerate() {
            for &m in c {
                owner[m] = Some(ci);
            }
        }
        Side { clusters, owner }
    }

    /// Sizes of the non-empty intersections of `cluster` with `other`'s
    /// clusters, plus the number of members `other` lacks.
    fn overlaps(cluster: &[usize], other: &Side) -> (HashMap<usize, usize>, usize) {
        let mut counts = HashMap::new();
        let mut missing = 0;
        for &m in cluster {
            match other.owner[m] {
                Some(c) => *counts.entry(c).or_insert(0) += 1,
                None => missing += 1,
            }
        }
        (counts, missing)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn symmetric(gold: &Clustering, sys: &Clustering, recall: fn(&Side, &Side) -> f64) -> Prf {
    let a = Aligned::new(gold, sys);
    if a.both_empty() {
        return Prf::perfect();
    }
    let (k, r) = a.swapped();
    Prf::new(recall(&a.gold, &a.sys), recall(k, r))
}

fn muc_recall(key: &Side, response: &Side) -> f64 {
    let mut num = 0usize;
    let mut den = 0usize;
    for k in &key.clusters {
        let (counts, missing) = Side::overlaps(k, response);
        let parts = counts.len() + missing;
        num += k.len() - parts;
        den += k.len() - 1;
    }
    ratio(num as f64, den as f64)
}

pub fn muc_score(gold: &Clustering, sys: &Clustering) -> Prf {
    symmetric(gold, sys, muc_recall)
}

fn b3_recall(key: &Side, response: &Side) -> f64 {
    let mut num = 0.0;
    let mut den = 0usize;
    for k in &key.clusters {
        let (counts, _) = Side::overlaps(k, response);
        let shared: usize = counts.values().map(|&c| c * c).sum();
        num += shared as f64 / k.len() as f64;
        den += k.len();
    }
    ratio(num, den as f64)
}

pub fn b3_score(gold: &Clustering, sys: &Clustering) -> Prf {
    symmetric(gold, sys, b3_recall)
}

fn phi(kind: Phi, shared: usize, a: usize, b: usize) -> f64 {
    match kind {
        Phi::Mention => shared as f64,
        Phi::Entity => 2.0 * shared as f64 / (a + b) as f64,
    }
}

/// Maximum total φ over one-to-one system → gold cluster mappings. Solved per
/// connected component of the non-zero overlap graph.
fn ceaf_total(a: &Aligned, kind: Phi) -> f64 {
    let ns = a.sys.clusters.len();
    let ng = a.gold.clusters.len();
    let mut overlap: Vec<HashMap<usize, usize>> = Vec::with_capacity(ns);
    for r in &a.sys.clusters {
        overlap.push(Side::overlaps(r, &a.gold).0);
    }

    // union-find over sys clusters 0..ns and gold clusters ns..ns+ng
    let mut parent: Vec<usize> = (0..ns + ng).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while p[root] != root {
            root = p[root];
        }
        let mut cur = x;
        while p[cur] != root {
            let next = p[cur];
            p[cur] = root;
            cur = next;
        }
        root
    }
    for (ri, row) in overlap.iter().enumerate() {
        for &gi in row.keys() {
            let (x, y) = (find(&mut parent, ri), find(&mut parent, ns + gi));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let mut components: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (ri, row) in overlap.iter().enumerate() {
        if !row.is_empty() {
            let root = find(&mut parent, ri);
            components.entry(root).or_default().0.push(ri);
        }
    }
    for gi in 0..ng {
        let root = find(&mut parent, ns + gi);
        if let Some(c) = components.get_mut(&root) {
            c.1.push(gi);
        }
    }

    let mut roots: Vec<usize> = components.keys().copied().collect();
    roots.sort_unstable();
    let mut total = 0.0;
    for root in roots {
        let (sys_idx, gold_idx) = &components[&root];
        let matrix: Vec<Vec<f64>> = sys_idx
            .iter()
            .map(|&ri| {
                gold_idx
                    .iter()
                    .map(|&gi| {
                        let shared = overlap[ri].get(&gi).copied().unwrap_or(0);
                        phi(
                            kind,
                            shared,
                            a.sys.clusters[ri].len(),
                            a.gold.clusters[gi].len(),
                        )
                    })
                    .collect()
            })
            .collect();
        total += solve_assignment(&matrix).total_score;
    }
    total
}

pub fn ceaf_score(gold: &Clustering, sys: &Clustering, kind: Phi) -> Prf {
    let a = Aligned::new(gold, sys);
    if a.both_empty() {
        return Prf::perfect();
    }
    let total = ceaf_total(&a, kind);
    let self_sim = |side: &Side| -> f64 {
        side.clusters
            .iter()
            .map(|c| phi(kind, c.len(), c.len(), c.len()))
            .sum()
    };
    Prf::new(
        ratio(total, self_sim(&a.gold)),
        ratio(total, self_sim(&a.sys)),
    )
}

fn links(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn lea_recall(key: &Side, response: &Side) -> f64 {
    let mut num = 0.0;
    let mut den = 0usize;
    for k in &key.clusters {
        let resolved = if k.len() == 1 {
            // self-link: resolved only by a singleton on the other side
            match response.owner[k[0]] {
                Some(r) if response.clusters[r].len() == 1 => 1.0,
                _ => 0.0,
            }
        } else {
            let (counts, _) = Side::overlaps(k, response);
            let found: usize = counts.values().map(|&c| links(c)).sum();
            found as f64 / links(k.len()) as f64
        };
        num += k.len() as f64 * resolved;
        den += k.len();
    }
    ratio(num, den as f64)
}

pub fn lea_score(gold: &Clustering, sys: &Clustering) -> Prf {
    symmetric(gold, sys, lea_recall)
}

pub fn score(metric: Metric, gold: &Clustering, sys: &Clustering) -> Prf {
    match metric {
        Metric::Muc => muc_score(gold, sys),
        Metric::B3 => b3_score(gold, sys),
        Metric::CeafM => ceaf_score(gold, sys, Phi::Mention),
        Metric::CeafE => ceaf_score(gold, sys, Phi::Entity),
        Metric::Lea => lea_score(gold, sys),
    }
}

/// Mean of the MUC, B³ and CEAFe F1 values.
pub fn conll_f1(muc: &Prf, b3: &Prf, ceafe: &Prf) -> f64 {
    (muc.f1 + b3.f1 + ceafe.f1) / 3.0
}

/// Span-level detection scores: a system mention is correct iff some gold
/// mention has exactly the same span.
pub fn mention_detection_prf(gold: &[Mention], sys: &[Mention]) -> Prf {
    if gold.is_empty() && sys.is_empty() {
        return Prf::perfect();
    }
    let gold_spans: std::collections::HashSet<SpanKey> = gold.iter().map(Mention::span).collect();
    let tp = sys
        .iter()
        .filter(|m| gold_spans.contains(&m.span()))
        .count() as f64;
    Prf::new(ratio(tp, gold.len() as f64), ratio(tp, sys.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MentionKind;

    fn m(i: usize) -> Mention {
        Mention::new(&format!("m{i}"), "d", i, i, MentionKind::Event)
    }

    fn clustering(groups: &[&[usize]]) -> Clustering {
        Clustering::from_groups(
            MentionKind::Event,
            groups
                .iter()
                .map(|g| g.iter().map(|&i| m(i)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn prf_f1() {
        assert!(close(Prf::new(1.0, 0.6).f1, 0.75));
        assert_eq!(Prf::new(0.0, 0.0).f1, 0.0);
    }

    #[test]
    fn identity_is_perfect() {
        let c = clustering(&[&[0, 1, 2], &[3], &[4, 5]]);
        for metric in Metric::ALL {
            assert_eq!(score(metric, &c, &c), Prf::perfect(), "{metric}");
        }
    }

    #[test]
    fn empty_vs_empty_is_perfect_and_empty_vs_nonempty_zero() {
        let e = Clustering::empty(MentionKind::Event);
        let c = clustering(&[&[0, 1]]);
        for metric in Metric::ALL {
            assert_eq!(score(metric, &e, &e), Prf::perfect());
            assert_eq!(score(metric, &c, &e), Prf::zero());
            assert_eq!(score(metric, &e, &c), Prf::zero());
        }
    }

    #[test]
    fn muc_all_singleton_gold_has_zero_recall() {
        let g = clustering(&[&[0], &[1], &[2]]);
        let s = clustering(&[&[0, 1], &[2]]);
        let p = muc_score(&g, &s);
        assert_eq!(p.recall, 0.0);
        assert_eq!(p.precision, 0.0);
    }

    #[test]
    fn muc_counts_missing_mentions_as_parts() {
        // gold {0,1,2}; system knows only {0,1}
        let p = muc_score(&clustering(&[&[0, 1, 2]]), &clustering(&[&[0, 1]]));
        assert!(close(p.recall, 0.5));
        assert!(close(p.precision, 1.0));
    }

    #[test]
    fn b3_twinless_mentions_count_in_denominator() {
        let p = b3_score(&clustering(&[&[0, 1]]), &clustering(&[&[0, 1, 9]]));
        assert!(close(p.recall, 1.0));
        // system: 0 and 1 score 2/3 each, 9 scores 0
        assert!(close(p.precision, 4.0 / 9.0));
    }

    #[test]
    fn ceafm_brute_force_example() {
        // gold {0,1},{2,3,4}; system {0,1,5},{2,3,4}
        let g = clustering(&[&[0, 1], &[2, 3, 4]]);
        let s = clustering(&[&[0, 1, 5], &[2, 3, 4]]);
        let p = ceaf_score(&g, &s, Phi::Mention);
        assert!(close(p.recall, 1.0));
        assert!(close(p.precision, 5.0 / 6.0));
    }

    #[test]
    fn lea_singletons_need_singleton_partner() {
        let g = clustering(&[&[0], &[1]]);
        let merged = clustering(&[&[0, 1]]);
        let split = clustering(&[&[0], &[1]]);
        assert_eq!(lea_score(&g, &merged).recall, 0.0);
        assert_eq!(lea_score(&g, &split), Prf::perfect());
    }

    #[test]
    fn conll_is_mean_of_three() {
        let p = |f: f64| Prf {
            recall: f,
            precision: f,
            f1: f,
        };
        assert!(close(
            conll_f1(&p(0.75), &p(0.531), &p(0.444)),
            (0.75 + 0.531 + 0.444) / 3.0
        ));
        assert_eq!(
            conll_f1(&Prf::perfect(), &Prf::perfect(), &Prf::perfect()),
            1.0
        );
    }

    #[test]
    fn mention_detection() {
        let gold: Vec<Mention> = (0..10).map(m).collect();
        let sys: Vec<Mention> = (4..12).map(m).collect();
        let p = mention_detection_prf(&gold, &sys);
        assert!(close(p.recall, 0.6));
        assert!(close(p.precision, 0.75));
        assert_eq!(mention_detection_prf(&gold, &[]), Prf::zero());
    }

    #[test]
    fn metric_names_round_trip() {
        for metric in Metric::ALL {
            assert_eq!(metric.name().parse::<Metric>().unwrap(), metric);
        }
        assert!("blanc".parse::<Metric>().is_err());
    }
}
