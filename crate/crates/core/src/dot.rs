//! Graphviz export of the domain graph.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::label::Label;
use crate::webgraph::DomainClustering;

const SPAM_STYLE: &str = "style=filled, fillcolor=\"#e06666\", color=\"#990000\"";

fn quote(id: &str) -> String {
    let mut out = String::with_capacity(id.len() + 2);
    out.push('"');
    for c in id.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Domain graph as a `digraph`. Nodes appear in domain order, edges by source
/// then target; domains labelled spam in `labels` are filled red.
pub fn domain_graph_dot(clustering: &DomainClustering, labels: &BTreeMap<String, Label>) -> String {
    let mut out = String::new();
    out.push_str("digraph domains {\n");
    if clustering.domain_count() > 0 {
        out.push_str("  node [shape=box];\n");
    }
    for d in clustering.domains() {
        match labels.get(d) {
            Some(Label::Spam) => writeln!(out, "  {} [{SPAM_STYLE}];", quote(d)),
            _ => writeln!(out, "  {};", quote(d)),
        }
        .unwrap();
    }
    for s in 0..clustering.domain_count() {
        for &t in clustering.out_ids(s) {
            writeln!(
                out,
                "  {} -> {};",
                quote(clustering.domain(s)),
                quote(clustering.domain(t))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::webgraph::WebGraph;

    #[test]
    fn two_domains() {
        let c = DomainClustering::build(&WebGraph::from_edges([("http://a.com/x", "http://b.com/y")]));
        let dot = domain_graph_dot(&c, &BTreeMap::new());
        assert_eq!(
            dot,
            "digraph domains {\n  node [shape=box];\n  \"a.com\";\n  \"b.com\";\n  \"a.com\" -> \"b.com\";\n}\n"
        );
    }

    #[test]
    fn empty_is_valid() {
        let c = DomainClustering::build(&WebGraph::from_edges(Vec::<(&str, &str)>::new()));
        assert_eq!(domain_graph_dot(&c, &BTreeMap::new()), "digraph domains {\n}\n");
    }

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(quote(r#"a"b\c"#), r#""a\"b\\c""#);
    }
}
