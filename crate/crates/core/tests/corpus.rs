use std::path::PathBuf;

use linkspam::detector::{self, DetectorConfig};
use linkspam::linkrank::{self, RankConfig};
use linkspam::synthcorpus::{self, CorpusSpec, FarmKind, FarmSpec};
use linkspam::{DomainClustering, Error, Label, WebGraph};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn bipartite_authorities_outrank_honest_pages() {
    let spec = CorpusSpec {
        honest_domains: 50,
        farms: vec![FarmSpec {
            kind: FarmKind::Bipartite {
                hubs: 10,
                authorities: 10,
            },
            pages_per_domain: 1,
            boost_edges: 0,
        }],
        seed: 3,
        ..CorpusSpec::default()
    };
    let c = synthcorpus::generate(&spec).unwrap();
    let hits = linkrank::hits(&c.graph, &RankConfig::default()).unwrap();
    let score_of = |pred: &dyn Fn(&str) -> bool| -> Vec<f64> {
        (0..c.graph.node_count())
            .filter(|&p| pred(c.graph.node(p)))
            .map(|p| hits.authority[p])
            .collect()
    };
    // Authorities are the last ten farm domains, farm0n10 .. farm0n19.
    let farm_auth = score_of(&|p: &str| {
        p.strip_prefix("http://farm0n")
            .and_then(|r| r.split('.').next()?.parse::<usize>().ok())
            .is_some_and(|i| i >= 10)
    });
    let honest = score_of(&|p: &str| p.starts_with("http://site"));
    assert_eq!(farm_auth.len(), 10);
    let weakest = farm_auth.iter().cloned().fold(f64::INFINITY, f64::min);
    let strongest = honest.iter().cloned().fold(0.0, f64::max);
    assert!(weakest > strongest, "{weakest} vs {strongest}");
}

#[test]
fn clique_members_marked_at_limit_zero() {
    let spec = CorpusSpec {
        honest_domains: 30,
        farms: vec![FarmSpec {
            kind: FarmKind::Clique { domains: 4 },
            pages_per_domain: 3,
            boost_edges: 2,
        }],
        seed: 1,
        ..CorpusSpec::default()
    };
    let c = synthcorpus::generate(&spec).unwrap();
    let config = DetectorConfig {
        traversal_limit: 0,
        threshold: 3,
    };
    for d in c.spam_domains() {
        let v = detector::mark(&c.clustering, d, &config).unwrap();
        assert_eq!(v.label, Label::Spam, "{d}");
        assert!(v.intersection_size >= 3);
    }
}

#[test]
fn ten_line_fixture_loads_eight_edges() {
    let g = WebGraph::load_edge_list(std::fs::read(fixture("ten_lines.tsv")).unwrap().as_slice()).unwrap();
    assert_eq!(g.edge_count(), 8);
    let c = DomainClustering::build(&g);
    assert_eq!(c.domains(), ["a.com", "b.com", "c.org", "d.net"]);
}

#[test]
fn crlf_and_comment_only_fixtures() {
    let g = WebGraph::parse_edge_list(&std::fs::read_to_string(fixture("crlf.tsv")).unwrap()).unwrap();
    assert_eq!(g.edge_count(), 2);
    assert!(g.nodes().iter().all(|n| !n.ends_with('\r')));
    let empty = WebGraph::parse_edge_list(&std::fs::read_to_string(fixture("empty.tsv")).unwrap()).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn malformed_line_is_reported() {
    let text = "a\tb\n# note\n\nb\tc\nc\td\nd\te\njust-one-field\n";
    match WebGraph::parse_edge_list(text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
        other => panic!("expected parse error, got {other:?}"),
    }
}
