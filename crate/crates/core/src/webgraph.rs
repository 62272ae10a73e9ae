//! Page-level web graph, edge-list I/O, and the domain-cluster collapse.
//!
//! Pages are opaque identifiers (usually URLs) interned to dense `usize` ids in
//! order of first appearance. Adjacency lists are sorted and deduplicated, and
//! the reverse lists are the exact transpose of the forward lists.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Incremental builder; the finished [`WebGraph`] is immutable.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(&ix) = self.index.get(id) {
            return ix;
        }
        let ix = self.nodes.len();
        self.nodes.push(id.to_string());
        self.index.insert(id.to_string(), ix);
        ix
    }

    pub fn add_edge(&mut self, source: &str, target: &str) {
        let s = self.add_node(source);
        let t = self.add_node(target);
        self.edges.push((s, t));
    }

    pub fn build(self) -> WebGraph {
        let n = self.nodes.len();
        let mut forward = vec![Vec::new(); n];
        let mut reverse = vec![Vec::new(); n];
        for &(s, t) in &self.edges {
            forward[s].push(t);
        }
        let mut edge_count = 0;
        for (s, outs) in forward.iter_mut().enumerate() {
            outs.sort_unstable();
            outs.dedup();
            edge_count += outs.len();
            for &t in outs.iter() {
                reverse[t].push(s);
            }
        }
        // sources are visited in increasing order, so reverse lists are already sorted
        WebGraph {
            nodes: self.nodes,
            index: self.index,
            forward,
            reverse,
            edge_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WebGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    forward: Vec<Vec<usize>>,
    reverse: Vec<Vec<usize>>,
    edge_count: usize,
}

impl WebGraph {
    pub fn from_edges<I, S, T>(edges: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut b = GraphBuilder::new();
        for (s, t) in edges {
            b.add_edge(s.as_ref(), t.as_ref());
        }
        b.build()
    }

    /// Parses the tab-separated edge-list format. Lines starting with `#` and
    /// blank lines are ignored; any other line must hold exactly two fields.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(t), None) if !s.is_empty() && !t.is_empty() => b.add_edge(s, t),
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!(
                            "expected `source<TAB>target`, found {} field(s)",
                            line.split('\t').filter(|f| !f.is_empty()).count()
                        ),
                    })
                }
            }
        }
        Ok(b.build())
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Self::load_edge_list(text.as_bytes())
    }

    /// Writes every edge as `source<TAB>target`, sorted by source then target
    /// identifier, so saving is independent of load order.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (s, t) in self.edge_set() {
            writeln!(w, "{s}\t{t}")?;
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &str {
        &self.nodes[id]
    }

    pub fn node_id(&self, page: &str) -> Option<usize> {
        self.index.get(page).copied()
    }

    pub(crate) fn require(&self, page: &str) -> Result<usize> {
        self.node_id(page)
            .ok_or_else(|| Error::NotFound(format!("page {page:?}")))
    }

    pub fn out_neighbors(&self, id: usize) -> &[usize] {
        &self.forward[id]
    }

    pub fn in_neighbors(&self, id: usize) -> &[usize] {
        &self.reverse[id]
    }

    /// O(v)
    pub fn out_degree(&self, id: usize) -> usize {
        self.forward[id].len()
    }

    /// I(v)
    pub fn in_degree(&self, id: usize) -> usize {
        self.reverse[id].len()
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.forward[source].binary_search(&target).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.forward
            .iter()
            .enumerate()
            .flat_map(|(s, outs)| outs.iter().map(move |&t| (s, t)))
    }

    /// Edge set as identifier pairs, independent of internal numbering.
    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .map(|(s, t)| (self.nodes[s].clone(), self.nodes[t].clone()))
            .collect()
    }
}

/// Maps a page identifier to its domain cluster key.
///
/// The scheme, userinfo, port, path, query and fragment are stripped, the host
/// is lowercased, a leading `www.` is dropped, and the last two dot-separated
/// labels are kept. Single-label hosts and IPv4 literals are kept whole. When
/// no host can be extracted the whole identifier is returned lowercased.
pub fn domain_of(page: &str) -> String {
    let lowered = page.trim().to_ascii_lowercase();
    let rest = match lowered.find("://") {
        Some(pos) => &lowered[pos + 3..],
        None => lowered.as_str(),
    };
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host_port = authority.rsplit('@').next().unwrap_or("");
    let host = match host_port.rfind(':') {
        Some(pos) if host_port[pos + 1..].bytes().all(|b| b.is_ascii_digit()) => &host_port[..pos],
        _ => host_port,
    };
    let host = host.trim_end_matches('.');
    let host = host.strip_prefix("www.").unwrap_or(host);
    if host.is_empty() {
        return lowered;
    }
    if host.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return host.to_string();
    }
    let labels: Vec<&str> = host.split('.').filter(|l| !l.is_empty()).collect();
    match labels.len() {
        0 => lowered,
        1 => labels[0].to_string(),
        n => format!("{}.{}", labels[n - 2], labels[n - 1]),
    }
}

/// CLUS(·): assignment of pages to domains plus the collapsed domain graph.
///
/// Domains are numbered in sorted identifier order. The domain graph holds an
/// edge `(d1, d2)` iff some page of `d1` links to some page of `d2` and
/// `d1 != d2`.
#[derive(Debug, Clone)]
pub struct DomainClustering {
    domains: Vec<String>,
    index: HashMap<String, usize>,
    page_domain: Vec<usize>,
    members: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl DomainClustering {
    pub fn build(graph: &WebGraph) -> Self {
        Self::build_with(graph, domain_of)
    }

    /// Clusters with a caller-supplied page → domain rule.
    pub fn build_with<F: Fn(&str) -> String>(graph: &WebGraph, rule: F) -> Self {
        let keys: Vec<String> = graph.nodes().iter().map(|p| rule(p)).collect();
        let mut members_by_name: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (page, key) in keys.iter().enumerate() {
            members_by_name.entry(key.as_str()).or_default().push(page);
        }
        let domains: Vec<String> = members_by_name.keys().map(|k| k.to_string()).collect();
        let index: HashMap<String, usize> = domains.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        let page_domain: Vec<usize> = keys.iter().map(|k| index[k]).collect();
        let members: Vec<Vec<usize>> = members_by_name.into_values().collect();

        let nd = domains.len();
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nd];
        for (s, t) in graph.edges() {
            let (ds, dt) = (page_domain[s], page_domain[t]);
            if ds != dt {
                out[ds].insert(dt);
            }
        }
        let mut inn = vec![Vec::new(); nd];
        for (ds, targets) in out.iter().enumerate() {
            for &dt in targets {
                inn[dt].push(ds);
            }
        }
        DomainClustering {
            domains,
            index,
            page_domain,
            members,
            out: out.into_iter().map(|s| s.into_iter().collect()).collect(),
            inn,
        }
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domain_edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn domain(&self, id: usize) -> &str {
        &self.domains[id]
    }

    pub fn domain_id(&self, domain: &str) -> Option<usize> {
        self.index.get(domain).copied()
    }

    pub fn require(&self, domain: &str) -> Result<usize> {
        self.domain_id(domain)
            .ok_or_else(|| Error::NotFound(format!("domain {domain:?}")))
    }

    /// CLUS(page) as a domain id.
    pub fn cluster_of(&self, page: usize) -> usize {
        self.page_domain[page]
    }

    pub fn members(&self, domain: usize) -> &[usize] {
        &self.members[domain]
    }

    /// Domain ids with an edge out of `domain`, sorted.
    pub fn out_ids(&self, domain: usize) -> &[usize] {
        &self.out[domain]
    }

    /// Domain ids with an edge into `domain`, sorted.
    pub fn in_ids(&self, domain: usize) -> &[usize] {
        &self.inn[domain]
    }

    /// IN(CLUS(w)) at depth one.
    pub fn in_domains(&self, domain: &str) -> Result<BTreeSet<&str>> {
        let d = self.require(domain)?;
        Ok(self.inn[d].iter().map(|&x| self.domains[x].as_str()).collect())
    }

    /// OUT(CLUS(w)) at depth one.
    pub fn out_domains(&self, domain: &str) -> Result<BTreeSet<&str>> {
        let d = self.require(domain)?;
        Ok(self.out[d].iter().map(|&x| self.domains[x].as_str()).collect())
    }

    /// The collapsed domain graph as a [`WebGraph`] whose node ids coincide
    /// with domain ids (isolated domains included).
    pub fn domain_graph(&self) -> WebGraph {
        let mut b = GraphBuilder::new();
        for d in &self.domains {
            b.add_node(d);
        }
        for (s, targets) in self.out.iter().enumerate() {
            for &t in targets {
                b.edges.push((s, t));
            }
        }
        b.build()
    }
}
