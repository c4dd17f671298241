//! The nomination example: four documents in two subtopics, gold G and
//! systems S1 and S2.

mod common;

use cdcoref::baselines::{cluster_documents, cosine, tfidf_vectors};
use cdcoref::metrics::{self, b3_score, ceaf_score, lea_score, muc_score, Phi};
use cdcoref::model::validate_clustering;
use cdcoref::protocol::{filter_singletons, scope_partition, Scope};
use common::worked_example;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn ids(c: &cdcoref::Clustering) -> Vec<Vec<&str>> {
    c.clusters()
        .iter()
        .map(|cl| {
            c.cluster_mentions(cl)
                .map(|m| m.mention_id.as_str())
                .collect()
        })
        .collect()
}

#[test]
fn fixture_shape() {
    let ex = worked_example();
    assert_eq!(ex.corpus.topics().len(), 1);
    assert_eq!(ex.corpus.subtopics().len(), 2);
    assert_eq!(ex.corpus.documents().len(), 4);
    assert!(validate_clustering(&ex.gold, &ex.corpus).is_empty());
    assert_eq!(
        (
            ex.gold.clusters().len(),
            ex.gold.singleton_count(),
            ex.gold.mentions().len()
        ),
        (7, 5, 10)
    );
    assert_eq!((ex.s2.clusters().len(), ex.s2.mentions().len()), (4, 8));
    let gold_spans: Vec<_> = ex.gold.mentions().iter().map(|m| m.span()).collect();
    let twinless = ex
        .s2
        .mentions()
        .iter()
        .filter(|m| !gold_spans.contains(&m.span()))
        .count();
    assert_eq!(twinless, 2);
    let surfaces: Vec<&str> = ex
        .gold
        .mentions()
        .iter()
        .map(|m| m.surface.as_str())
        .collect();
    assert_eq!(surfaces[..3], ["News", "Emory University", "confirmed"]);
}

#[test]
fn singleton_filtering() {
    let ex = worked_example();
    let g = filter_singletons(&ex.gold);
    assert_eq!((g.clusters().len(), g.mentions().len()), (2, 5));
    let s2 = filter_singletons(&ex.s2);
    assert_eq!(s2.clusters().len(), 2);
    assert!(s2
        .mentions()
        .iter()
        .all(|m| m.mention_id != "news_that" && m.mention_id != "emory"));
}

#[test]
fn excluded_singleton_components() {
    let ex = worked_example();
    let g = filter_singletons(&ex.gold);
    let s1 = filter_singletons(&ex.s1);
    let s2 = filter_singletons(&ex.s2);

    let muc = muc_score(&g, &s1);
    assert!(close(muc.recall, 1.0) && close(muc.precision, 0.6));
    let muc = muc_score(&g, &s2);
    assert!(close(muc.recall, 1.0) && close(muc.precision, 0.75));

    let b3 = b3_score(&g, &s1);
    assert!(close(b3.recall, 1.0) && close(b3.precision, 13.0 / 36.0));

    let ceafe = ceaf_score(&g, &s1, Phi::Entity);
    assert!(close(ceafe.recall, 1.0 / 3.0) && close(ceafe.precision, 2.0 / 3.0));

    let ceafm = ceaf_score(&g, &s2, Phi::Mention);
    assert!(close(ceafm.recall, 1.0) && close(ceafm.precision, 5.0 / 6.0));
    assert!(close(ceafm.f1, 10.0 / 11.0));

    let lea = lea_score(&g, &s1);
    assert!(close(lea.recall, 1.0) && close(lea.precision, 4.0 / 15.0));
}

#[test]
fn included_singleton_components() {
    let ex = worked_example();
    let b3 = b3_score(&ex.gold, &ex.s2);
    assert!(close(b3.recall, 0.6) && close(b3.precision, 14.0 / 24.0));

    let ceafe = ceaf_score(&ex.gold, &ex.s2, Phi::Entity);
    assert!(close(ceafe.recall, 1.8 / 7.0) && close(ceafe.precision, 1.8 / 4.0));

    let lea = lea_score(&ex.gold, &ex.s1);
    assert!(close(lea.recall, 0.9) && close(lea.precision, 0.56));
    let lea = lea_score(&ex.gold, &ex.s2);
    assert!(close(lea.recall, 0.5) && close(lea.precision, 0.5));
}

#[test]
fn s2_is_penalized_only_for_announcement() {
    let ex = worked_example();
    let g = filter_singletons(&ex.gold);
    let s2 = filter_singletons(&ex.s2);
    let without: Vec<_> = s2
        .labeled()
        .into_iter()
        .filter(|(m, _)| m.mention_id != "announcement")
        .map(|(m, l)| (m.clone(), l.to_string()))
        .collect();
    let s2_clean = cdcoref::Clustering::from_labeled(s2.kind(), without).unwrap();
    for metric in [
        metrics::Metric::B3,
        metrics::Metric::CeafE,
        metrics::Metric::Lea,
    ] {
        assert!(metrics::score(metric, &g, &s2).precision < 1.0, "{metric}");
        assert_eq!(
            metrics::score(metric, &g, &s2_clean).precision,
            1.0,
            "{metric}"
        );
    }
}

#[test]
fn mention_detection() {
    let ex = worked_example();
    let p = metrics::mention_detection_prf(ex.gold.mentions(), ex.s1.mentions());
    assert_eq!(p.f1, 1.0);
    let p = metrics::mention_detection_prf(ex.gold.mentions(), ex.s2.mentions());
    assert!(close(p.recall, 0.6) && close(p.precision, 0.75));
    assert!(close(p.f1, 2.0 / 3.0));
}

#[test]
fn subtopic_scoping_leaves_gold_unchanged() {
    let ex = worked_example();
    assert_eq!(
        scope_partition(&ex.gold, &ex.corpus, Scope::Subtopic),
        ex.gold
    );
    // S1 links the two "name" predicates across subtopics; scoping cuts it
    let s1 = scope_partition(&ex.s1, &ex.corpus, Scope::Subtopic);
    let groups = ids(&s1);
    assert!(groups.contains(&vec!["name", "approached"]));
    assert!(groups.contains(&vec!["announcement", "names", "nominates", "decision"]));
    assert_eq!(scope_partition(&ex.s1, &ex.corpus, Scope::Topic), ex.s1);
}

#[test]
fn document_clustering_separates_subtopics() {
    let ex = worked_example();
    // cosine matrix computed here from raw counts and ln(N/df)
    let docs: Vec<Vec<String>> = ex
        .corpus
        .documents()
        .iter()
        .map(|d| {
            d.tokens
                .iter()
                .filter(|t| t.text.chars().any(|c| c.is_alphanumeric()))
                .map(|t| t.text.to_lowercase())
                .collect()
        })
        .collect();
    let vocab: std::collections::BTreeSet<&String> = docs.iter().flatten().collect();
    let vecs: Vec<Vec<f64>> = docs
        .iter()
        .map(|d| {
            vocab
                .iter()
                .map(|w| {
                    let tf = d.iter().filter(|t| t == w).count() as f64;
                    let df = docs.iter().filter(|o| o.contains(w)).count() as f64;
                    tf * (4.0 / df).ln()
                })
                .collect()
        })
        .collect();
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt()
            * b.iter().map(|x| x * x).sum::<f64>().sqrt())
    };
    let m: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| cos(&vecs[i], &vecs[j])).collect())
        .collect();

    let lib = tfidf_vectors(&ex.corpus);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!((cosine(&lib[i], &lib[j]) - m[i][j]).abs() < 1e-12);
            }
        }
    }
    // first merge is {1,2}; then {3,4} beats either average link to {1,2}
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let top = pairs
        .iter()
        .max_by(|a, b| m[a.0][a.1].total_cmp(&m[b.0][b.1]))
        .unwrap();
    assert_eq!(*top, (0, 1));
    assert!(m[2][3] > (m[0][2] + m[1][2]) / 2.0);
    assert!(m[2][3] > (m[0][3] + m[1][3]) / 2.0);

    let groups = cluster_documents(&ex.corpus, 2).unwrap();
    assert_eq!(groups, vec![vec!["doc1", "doc2"], vec!["doc3", "doc4"]]);
    assert_eq!(cluster_documents(&ex.corpus, 4).unwrap().len(), 4);
    assert_eq!(
        cluster_documents(&ex.corpus, 1).unwrap(),
        vec![vec!["doc1", "doc2", "doc3", "doc4"]]
    );
}
