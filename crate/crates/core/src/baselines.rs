//! Deterministic reference systems: the singleton baseline, a lexical pair
//! scorer, threshold agglomerative clustering over pair scores, and TF-IDF
//! document clustering.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use crate::ingest::ScoreMatrix;
use crate::model::{Clustering, Corpus, Mention, MentionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(format!("unknown linkage {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("threshold must be in [0, 1], got {0}")]
    ThresholdOutOfRange(f64),
    #[error("k must be between 1 and {documents}, got {k}")]
    KOutOfRange { k: usize, documents: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggloConfig {
    threshold: f64,
    pub linkage: Linkage,
}

impl AggloConfig {
    pub fn new(threshold: f64, linkage: Linkage) -> Result<Self, BaselineError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(BaselineError::ThresholdOutOfRange(threshold));
        }
        Ok(AggloConfig { threshold, linkage })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Every mention in a cluster of its own.
pub fn singleton_baseline(kind: MentionKind, mentions: &[Mention]) -> Clustering {
    let labeled = mentions
        .iter()
        .map(|m| (m.clone(), format!("singleton:{}", m.mention_id)));
    Clustering::from_labeled(kind, labeled).expect("mention ids are unique")
}

fn normalize(surface: &str) -> Vec<char> {
    surface
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
        .chars()
        .collect()
}

fn trigrams(chars: &[char]) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    for w in chars.windows(3) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Dice coefficient over character-trigram multisets of the normalized
/// surfaces; strings shorter than three characters only match exactly.
pub fn surface_similarity(a: &str, b: &str) -> f64 {
    let (a, b) = (normalize(a), normalize(b));
    if a.len() < 3 || b.len() < 3 {
        return if a == b { 1.0 } else { 0.0 };
    }
    let (ta, tb) = (trigrams(&a), trigrams(&b));
    let shared: usize = ta
        .iter()
        .map(|(g, &c)| c.min(tb.get(g).copied().unwrap_or(0)))
        .sum();
    2.0 * shared as f64 / (a.len() - 2 + b.len() - 2) as f64
}

/// Scores every mention pair by [`surface_similarity`]; zero scores are
/// left implicit.
pub fn lexical_pair_scorer(mentions: &[Mention]) -> ScoreMatrix {
    let mut scores = ScoreMatrix::new();
    for (i, a) in mentions.iter().enumerate() {
        for b in &mentions[i + 1..] {
            let s = surface_similarity(&a.surface, &b.surface);
            if s > 0.0 {
                scores
                    .insert(&a.mention_id, &b.mention_id, s)
                    .expect("dice is in [0, 1] and ids are distinct");
            }
        }
    }
    scores
}

/// Bottom-up merging over a dense similarity matrix. `rank[i]` orders items
/// for tie-breaking: a cluster is represented by its smallest member rank,
/// and among equally similar pairs the one with the smallest
/// `(min rep, max rep)` merges first. `stop(best, active)` is checked before
/// each merge.
fn merge_loop(
    mut sim: Vec<Vec<f64>>,
    rank: &[usize],
    linkage: Linkage,
    stop: impl Fn(f64, usize) -> bool,
) -> Vec<Vec<usize>> {
    let n = sim.len();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut rep: Vec<usize> = rank.to_vec();
    let mut active = vec![true; n];
    let mut remaining = n;

    let key = |rep: &[usize], i: usize, j: usize| (rep[i].min(rep[j]), rep[i].max(rep[j]));
    // (score, key) ordering: higher score first, then smaller key
    let better =
        |a: (f64, (usize, usize)), b: (f64, (usize, usize))| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);

    let best_for =
        |i: usize, sim: &[Vec<f64>], active: &[bool], rep: &[usize]| -> Option<(f64, usize)> {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..sim.len() {
                if j == i || !active[j] {
                    continue;
                }
                let cand = (sim[i][j], key(rep, i, j));
                if best.is_none_or(|(s, b)| better(cand, (s, key(rep, i, b)))) {
                    best = Some((sim[i][j], j));
                }
            }
            best
        };
    let mut best: Vec<Option<(f64, usize)>> =
        (0..n).map(|i| best_for(i, &sim, &active, &rep)).collect();

    while remaining > 1 {
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            if let Some((s, j)) = best[i] {
                if pick.is_none_or(|(ps, pi, pj)| {
                    better((s, key(&rep, i, j)), (ps, key(&rep, pi, pj)))
                }) {
                    pick = Some((s, i, j));
                }
            }
        }
        let Some((score, i, j)) = pick else { break };
        if stop(score, remaining) {
            break;
        }
        let (a, b) = (i.min(j), i.max(j));
        let (size_a, size_b) = (members[a].len() as f64, members[b].len() as f64);
        for c in 0..n {
            if !active[c] || c == a || c == b {
                continue;
            }
            let merged = match linkage {
                Linkage::Average => (size_a * sim[a][c] + size_b * sim[b][c]) / (size_a + size_b),
                Linkage::Single => sim[a][c].max(sim[b][c]),
                Linkage::Complete => sim[a][c].min(sim[b][c]),
            };
            sim[a][c] = merged;
            sim[c][a] = merged;
        }
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        rep[a] = rep[a].min(rep[b]);
        active[b] = false;
        best[b] = None;
        remaining -= 1;

        best[a] = best_for(a, &sim, &active, &rep);
        for c in 0..n {
            if !active[c] || c == a {
                continue;
            }
            match best[c] {
                Some((_, partner)) if partner == a || partner == b => {
                    best[c] = best_for(c, &sim, &active, &rep);
                }
                Some((s, partner)) => {
                    if better((sim[c][a], key(&rep, c, a)), (s, key(&rep, c, partner))) {
                        best[c] = Some((sim[c][a], a));
                    }
                }
                None => best[c] = best_for(c, &sim, &active, &rep),
            }
        }
    }

    let mut clusters: Vec<Vec<usize>> = (0..n)
        .filter(|&i| active[i])
        .map(|i| members[i].clone())
        .collect();
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_unstable_by_key(|c| c[0]);
    clusters
}

/// Ranks of items under the ordering of their string keys.
fn ranks_by<'a>(keys: impl Iterator<Item = &'a str>) -> Vec<usize> {
    let keys: Vec<&str> = keys.collect();
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(keys[b]));
    let mut rank = vec![0; keys.len()];
    for (r, i) in order.into_iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Threshold agglomerative clustering: starting from singletons, merge the
/// pair with the highest linkage score until that score drops below the
/// threshold. Ties go to the lexicographically smallest mention-id pair.
pub fn agglomerative_cluster(
    kind: MentionKind,
    mentions: &[Mention],
    scores: &ScoreMatrix,
    cfg: &AggloConfig,
) -> Clustering {
    let groups = agglomerative_groups(mentions, scores, cfg);
    let labeled = groups
        .into_iter()
        .enumerate()
        .flat_map(|(ci, g)| g.into_iter().map(move |i| (i, ci)))
        .collect::<BTreeMap<usize, usize>>();
    let labeled = mentions
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), format!("c{}", labeled[&i])));
    Clustering::from_labeled(kind, labeled).expect("mention ids are unique")
}

fn agglomerative_groups(
    mentions: &[Mention],
    scores: &ScoreMatrix,
    cfg: &AggloConfig,
) -> Vec<Vec<usize>> {
    let n = mentions.len();
    let index: HashMap<&str, usize> = mentions
        .iter()
        .enumerate()
        .map(|(i, m)| (m.mention_id.as_str(), i))
        .collect();
    let mut sim = vec![vec![0.0; n]; n];
    for (a, b, s) in scores.iter() {
        if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let rank = ranks_by(mentions.iter().map(|m| m.mention_id.as_str()));
    let tau = cfg.threshold;
    merge_loop(sim, &rank, cfg.linkage, |best, _| best < tau)
}

/// Runs [`agglomerative_cluster`] separately inside each group of mentions
/// (for example each subtopic), so no cluster crosses a group boundary.
pub fn agglomerative_cluster_grouped(
    kind: MentionKind,
    mentions: &[Mention],
    scores: &ScoreMatrix,
    cfg: &AggloConfig,
    group_of: impl Fn(&Mention) -> String,
) -> Clustering {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, m) in mentions.iter().enumerate() {
        groups.entry(group_of(m)).or_default().push(i);
    }
    let mut label: Vec<String> = vec![String::new(); mentions.len()];
    for (name, idx) in &groups {
        let subset: Vec<Mention> = idx.iter().map(|&i| mentions[i].clone()).collect();
        for (ci, cluster) in agglomerative_groups(&subset, scores, cfg)
            .into_iter()
            .enumerate()
        {
            for local in cluster {
                label[idx[local]] = format!("{name}/c{ci}");
            }
        }
    }
    let labeled = mentions.iter().cloned().zip(label);
    Clustering::from_labeled(kind, labeled).expect("mention ids are unique")
}

fn is_content_token(text: &str) -> bool {
    text.chars().any(char::is_alphanumeric)
}

/// TF-IDF vectors per document: raw counts of lowercased tokens that
/// contain at least one alphanumeric character, weighted by ln(N / df).
pub fn tfidf_vectors(corpus: &Corpus) -> Vec<BTreeMap<String, f64>> {
    let counts: Vec<BTreeMap<String, f64>> = corpus
        .documents()
        .iter()
        .map(|d| {
            let mut c = BTreeMap::new();
            for t in d.tokens.iter().filter(|t| is_content_token(&t.text)) {
                *c.entry(t.text.to_lowercase()).or_insert(0.0) += 1.0;
            }
            c
        })
        .collect();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for c in &counts {
        for term in c.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let n = counts.len() as f64;
    counts
        .iter()
        .map(|c| {
            c.iter()
                .map(|(term, &tf)| (term.clone(), tf * (n / df[term.as_str()] as f64).ln()))
                .collect()
        })
        .collect()
}

pub fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na > 0.0 && nb > 0.0 {
        dot / (na * nb)
    } else {
        0.0
    }
}

/// Partitions documents into exactly `k` groups by average-linkage merging
/// of TF-IDF cosine similarities. Groups list doc_ids in corpus order and
/// are ordered by their first document.
pub fn cluster_documents(corpus: &Corpus, k: usize) -> Result<Vec<Vec<String>>, BaselineError> {
    let n = corpus.documents().len();
    if k == 0 || k > n {
        return Err(BaselineError::KOutOfRange { k, documents: n });
    }
    let vectors = tfidf_vectors(corpus);
    let sim: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        cosine(&vectors[i], &vectors[j])
                    }
                })
                .collect()
        })
        .collect();
    let rank = ranks_by(corpus.documents().iter().map(|d| d.doc_id.as_str()));
    let groups = merge_loop(sim, &rank, Linkage::Average, |_, remaining| remaining <= k);
    Ok(groups
        .into_iter()
        .map(|g| {
            g.into_iter()
                .map(|i| corpus.documents()[i].doc_id.clone())
                .collect()
        })
        .collect())
}
