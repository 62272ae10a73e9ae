//! Labelled synthetic web graphs: a preferential-attachment honest background
//! with planted link farms.
//!
//! Honest domains are named `siteNNNN.com`, farm domains `farmFnD.net` (farm
//! `F`, member `D`). Pages are `http://<domain>/pN`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{self, Label};
use crate::webgraph::{DomainClustering, WebGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FarmKind {
    /// Every ordered pair of farm domains linked.
    Clique { domains: usize },
    /// Each hub domain links to every authority domain.
    Bipartite { hubs: usize, authorities: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarmSpec {
    pub kind: FarmKind,
    pub pages_per_domain: usize,
    /// Links from random farm pages to random honest pages.
    pub boost_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub honest_domains: usize,
    /// Inclusive range of pages per honest domain.
    pub pages_per_domain: (usize, usize),
    /// Attachment edges per new honest domain.
    pub attachment: usize,
    pub farms: Vec<FarmSpec>,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            honest_domains: 500,
            pages_per_domain: (1, 5),
            attachment: 2,
            farms: Vec::new(),
            seed: 0,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.pages_per_domain;
        if self.honest_domains < 2 {
            return Err(Error::invalid("need at least 2 honest domains"));
        }
        if lo == 0 || lo > hi {
            return Err(Error::invalid(format!("bad pages-per-domain range {lo}..={hi}")));
        }
        if self.attachment == 0 {
            return Err(Error::invalid("attachment must be >= 1"));
        }
        for f in &self.farms {
            if f.pages_per_domain == 0 {
                return Err(Error::invalid("farm pages per domain must be >= 1"));
            }
            match f.kind {
                FarmKind::Clique { domains } if domains < 2 => {
                    return Err(Error::invalid("clique farms need at least 2 domains"))
                }
                FarmKind::Bipartite { hubs, authorities } if hubs == 0 || authorities == 0 => {
                    return Err(Error::invalid("bipartite farms need hubs and authorities"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub graph: WebGraph,
    pub clustering: DomainClustering,
    pub truth: BTreeMap<String, Label>,
}

impl LabeledCorpus {
    fn assemble(edges: &[(String, String)], truth: BTreeMap<String, Label>) -> Self {
        let graph = WebGraph::from_edges(edges.iter().map(|(s, t)| (s.as_str(), t.as_str())));
        let clustering = DomainClustering::build(&graph);
        LabeledCorpus {
            graph,
            clustering,
            truth,
        }
    }

    fn edge_list(&self) -> Vec<(String, String)> {
        self.graph
            .edges()
            .map(|(s, t)| (self.graph.node(s).to_string(), self.graph.node(t).to_string()))
            .collect()
    }

    fn farm_count(&self) -> usize {
        self.truth
            .keys()
            .filter_map(|d| d.strip_prefix("farm"))
            .filter_map(|rest| rest.split('n').next()?.parse::<usize>().ok())
            .collect::<BTreeSet<_>>()
            .len()
    }

    fn honest_pages(&self) -> Vec<usize> {
        (0..self.graph.node_count())
            .filter(|&p| {
                let d = self.clustering.domain(self.clustering.cluster_of(p));
                self.truth.get(d) == Some(&Label::NonSpam)
            })
            .collect()
    }

    pub fn spam_domains(&self) -> BTreeSet<&str> {
        self.truth
            .iter()
            .filter(|(_, l)| l.is_spam())
            .map(|(d, _)| d.as_str())
            .collect()
    }

    pub fn write_edges<W: Write>(&self, w: W) -> std::io::Result<()> {
        self.graph.write_edge_list(w)
    }

    pub fn write_labels<W: Write>(&self, w: W) -> std::io::Result<()> {
        label::write_labels(w, self.truth.iter().map(|(d, l)| (d.as_str(), *l)))
    }
}

fn page(domain: &str, i: usize) -> String {
    format!("http://{domain}/p{i}")
}

fn honest_name(i: usize) -> String {
    format!("site{i:04}.com")
}

/// Preferential-attachment background, all domains labelled non-spam.
///
/// Domain `i` links to `min(k, i)` distinct earlier domains drawn with
/// probability proportional to their in-degree + 1. Each domain then gets a
/// random page count, its pages are chained `p0 -> p1 -> ...`, and every
/// domain-level link is realized between random member pages.
pub fn gen_honest<R: Rng>(spec: &CorpusSpec, rng: &mut R) -> Result<LabeledCorpus> {
    spec.validate()?;
    let n = spec.honest_domains;
    let mut in_degree = vec![0usize; n];
    let mut domain_edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < spec.attachment.min(i) {
            let total: usize = (0..i).filter(|j| !chosen.contains(j)).map(|j| in_degree[j] + 1).sum();
            let mut r = rng.random_range(0..total);
            for j in (0..i).filter(|j| !chosen.contains(j)) {
                let w = in_degree[j] + 1;
                if r < w {
                    chosen.insert(j);
                    break;
                }
                r -= w;
            }
        }
        for &j in &chosen {
            in_degree[j] += 1;
            domain_edges.push((i, j));
        }
    }

    let (lo, hi) = spec.pages_per_domain;
    let page_counts: Vec<usize> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let names: Vec<String> = (0..n).map(honest_name).collect();
    let mut edges = Vec::new();
    for (d, &count) in page_counts.iter().enumerate() {
        for p in 1..count {
            edges.push((page(&names[d], p - 1), page(&names[d], p)));
        }
    }
    for &(s, t) in &domain_edges {
        let sp = rng.random_range(0..page_counts[s]);
        let tp = rng.random_range(0..page_counts[t]);
        edges.push((page(&names[s], sp), page(&names[t], tp)));
    }
    let truth = names.into_iter().map(|d| (d, Label::NonSpam)).collect();
    Ok(LabeledCorpus::assemble(&edges, truth))
}

fn add_farm_domains(
    corpus: &LabeledCorpus,
    count: usize,
    offset: usize,
    truth: &mut BTreeMap<String, Label>,
) -> Vec<String> {
    let farm = corpus.farm_count();
    (0..count)
        .map(|j| {
            let name = format!("farm{farm}n{}.net", offset + j);
            truth.insert(name.clone(), Label::Spam);
            name
        })
        .collect()
}

fn chain_pages(domain: &str, pages: usize, edges: &mut Vec<(String, String)>) {
    for p in 1..pages {
        edges.push((page(domain, p - 1), page(domain, p)));
    }
}

fn add_boosts<R: Rng>(
    corpus: &LabeledCorpus,
    farm_domains: &[String],
    pages_per_domain: usize,
    boost_edges: usize,
    rng: &mut R,
    edges: &mut Vec<(String, String)>,
) {
    let honest = corpus.honest_pages();
    if honest.is_empty() {
        return;
    }
    for _ in 0..boost_edges {
        let d = &farm_domains[rng.random_range(0..farm_domains.len())];
        let source = page(d, rng.random_range(0..pages_per_domain));
        let target = honest[rng.random_range(0..honest.len())];
        edges.push((source, corpus.graph.node(target).to_string()));
    }
}

/// Adds `f` mutually linked spam domains. Each ordered pair of farm domains
/// gets one page-level link between random member pages.
pub fn plant_clique_farm<R: Rng>(
    corpus: &LabeledCorpus,
    f: usize,
    pages_per_domain: usize,
    boost_edges: usize,
    rng: &mut R,
) -> Result<LabeledCorpus> {
    if f < 2 || pages_per_domain == 0 {
        return Err(Error::invalid(
            "clique farm needs f >= 2 and at least one page per domain",
        ));
    }
    let mut truth = corpus.truth.clone();
    let mut edges = corpus.edge_list();
    let domains = add_farm_domains(corpus, f, 0, &mut truth);
    for d in &domains {
        chain_pages(d, pages_per_domain, &mut edges);
    }
    for a in &domains {
        for b in &domains {
            if a != b {
                let sp = rng.random_range(0..pages_per_domain);
                let tp = rng.random_range(0..pages_per_domain);
                edges.push((page(a, sp), page(b, tp)));
            }
        }
    }
    add_boosts(corpus, &domains, pages_per_domain, boost_edges, rng, &mut edges);
    Ok(LabeledCorpus::assemble(&edges, truth))
}

/// Adds `hubs` + `authorities` spam domains with every hub linking to every
/// authority and no links in the reverse direction.
pub fn plant_bipartite_farm<R: Rng>(
    corpus: &LabeledCorpus,
    hubs: usize,
    authorities: usize,
    pages_per_domain: usize,
    boost_edges: usize,
    rng: &mut R,
) -> Result<LabeledCorpus> {
    if hubs == 0 || authorities == 0 || pages_per_domain == 0 {
        return Err(Error::invalid("bipartite farm needs hubs, authorities and pages"));
    }
    let mut truth = corpus.truth.clone();
    let mut edges = corpus.edge_list();
    let hub_domains = add_farm_domains(corpus, hubs, 0, &mut truth);
    let auth_domains = add_farm_domains(corpus, authorities, hubs, &mut truth);
    for d in hub_domains.iter().chain(&auth_domains) {
        chain_pages(d, pages_per_domain, &mut edges);
    }
    for h in &hub_domains {
        for a in &auth_domains {
            let sp = rng.random_range(0..pages_per_domain);
            let tp = rng.random_range(0..pages_per_domain);
            edges.push((page(h, sp), page(a, tp)));
        }
    }
    add_boosts(corpus, &hub_domains, pages_per_domain, boost_edges, rng, &mut edges);
    Ok(LabeledCorpus::assemble(&edges, truth))
}

/// Builds the whole corpus described by `spec` from its seed.
pub fn generate(spec: &CorpusSpec) -> Result<LabeledCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut corpus = gen_honest(spec, &mut rng)?;
    for farm in &spec.farms {
        corpus = match farm.kind {
            FarmKind::Clique { domains } => {
                plant_clique_farm(&corpus, domains, farm.pages_per_domain, farm.boost_edges, &mut rng)?
            }
            FarmKind::Bipartite { hubs, authorities } => plant_bipartite_farm(
                &corpus,
                hubs,
                authorities,
                farm.pages_per_domain,
                farm.boost_edges,
                &mut rng,
            )?,
        };
    }
    Ok(corpus)
}
