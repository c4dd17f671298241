#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cdcoref::ingest;
use cdcoref::{Clustering, Corpus, Document, Mention, MentionKind};
use rand::Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
}

pub struct WorkedExample {
    pub corpus: Corpus,
    pub gold: Clustering,
    pub s1: Clustering,
    pub s2: Clustering,
}

pub fn worked_example() -> WorkedExample {
    let dir = data_dir().join("table1");
    let corpus = ingest::parse_corpus(dir.join("corpus.jsonl")).unwrap();
    let load =
        |name: &str| ingest::parse_clustering(dir.join(name), &corpus, MentionKind::Event).unwrap();
    let (gold, s1, s2) = (load("gold.tsv"), load("s1.tsv"), load("s2.tsv"));
    WorkedExample {
        corpus,
        gold,
        s1,
        s2,
    }
}

/// A corpus of `docs` documents, each `len` tokens long, spread over two
/// topics with two subtopics each.
pub fn synthetic_corpus(docs: usize, len: usize) -> Corpus {
    let documents = (0..docs)
        .map(|d| {
            let sub = d % 4;
            let tokens: Vec<String> = (0..len).map(|t| format!("w{}", (d * 7 + t) % 11)).collect();
            Document::from_sentences(
                &format!("d{d}"),
                &format!("t{}", sub / 2),
                &format!("s{sub}"),
                &[tokens],
            )
        })
        .collect();
    Corpus::new(documents).unwrap()
}

/// Span `i` of the synthetic universe: document `i % docs`, token `i / docs`.
pub fn span_mention(i: usize, docs: usize) -> Mention {
    Mention::new(
        &format!("m{i}"),
        &format!("d{}", i % docs),
        i / docs,
        i / docs,
        MentionKind::Event,
    )
}

pub fn clustering_from_labels(labels: &[(usize, usize)], docs: usize) -> Clustering {
    Clustering::from_labeled(
        MentionKind::Event,
        labels
            .iter()
            .map(|&(i, l)| (span_mention(i, docs), format!("c{l}"))),
    )
    .unwrap()
}

/// Random labels over a subset of `0..universe`.
pub fn random_labels<R: Rng>(
    rng: &mut R,
    universe: usize,
    max_clusters: usize,
    keep: f64,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..universe {
        if rng.gen_bool(keep) {
            out.push((i, rng.gen_range(0..max_clusters.max(1))));
        }
    }
    out
}

/// A gold/system pair over at most `max_mentions` spans in `docs` documents.
pub fn random_pair<R: Rng>(
    rng: &mut R,
    max_mentions: usize,
    docs: usize,
) -> (Clustering, Clustering) {
    let universe = rng.gen_range(1..=max_mentions);
    let k = rng.gen_range(1..=universe);
    let gold = random_labels(rng, universe, k, 0.85);
    let sys = if rng.gen_bool(0.3) {
        // perturb gold: relabel a few mentions, drop some, add some
        let mut s: Vec<(usize, usize)> = Vec::new();
        for &(i, l) in &gold {
            if rng.gen_bool(0.9) {
                let l = if rng.gen_bool(0.2) {
                    rng.gen_range(0..k)
                } else {
                    l
                };
                s.push((i, l));
            }
        }
        for i in universe..universe + rng.gen_range(0..3) {
            s.push((i, rng.gen_range(0..k + 1)));
        }
        s
    } else {
        let k2 = rng.gen_range(1..=universe);
        random_labels(rng, universe, k2, 0.85)
    };
    (
        clustering_from_labels(&gold, docs),
        clustering_from_labels(&sys, docs),
    )
}

/// Exhaustive maximum over all one-to-one partial matchings. Returns the
/// best total and the lexicographically smallest optimal row → column
/// vector (unmatched rows sort after every column).
pub fn brute_force_assignment(matrix: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    let mut current = vec![None; rows];
    let mut used = vec![false; cols];
    fn key(v: &[Option<usize>]) -> Vec<usize> {
        v.iter().map(|c| c.unwrap_or(usize::MAX)).collect()
    }
    fn rec(
        row: usize,
        total: f64,
        m: &[Vec<f64>],
        current: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut Option<(f64, Vec<Option<usize>>)>,
    ) {
        if row == m.len() {
            let replace = match best {
                None => true,
                Some((b, v)) => {
                    total > *b + 1e-9 || ((total - *b).abs() <= 1e-9 && key(current) < key(v))
                }
            };
            if replace {
                *best = Some((total, current.clone()));
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                current[row] = Some(c);
                rec(row + 1, total + m[row][c], m, current, used, best);
                used[c] = false;
            }
        }
        current[row] = None;
        rec(row + 1, total, m, current, used, best);
    }
    rec(0, 0.0, matrix, &mut current, &mut used, &mut best);
    let (total, v) = best.unwrap();
    (total, v)
}

/// φ matrix (system rows × gold columns) computed directly from member
/// spans, independent of the metric implementation.
pub fn phi_matrix(gold: &Clustering, sys: &Clustering, entity: bool) -> Vec<Vec<f64>> {
    let g = gold.span_clusters();
    let s = sys.span_clusters();
    s.iter()
        .map(|r| {
            g.iter()
                .map(|k| {
                    let shared = r.iter().filter(|x| k.contains(x)).count() as f64;
                    if entity {
                        2.0 * shared / (r.len() + k.len()) as f64
                    } else {
                        shared
                    }
                })
                .collect()
        })
        .collect()
}
