//! PageRank and HITS by fixed-point iteration.
//!
//! PageRank follows
//!
//! ```text
//! PR(u) = (1 - alpha) * sum_{v -> u} PR(v) / O(v) + alpha / N
//! ```
//!
//! where pages without out-links spread their mass uniformly over all N pages,
//! so the vector stays a probability distribution after every sweep.
//!
//! HITS alternates `A(u) = sum_{v -> u} H(v)` and `H(v) = sum_{v -> u} A(u)`,
//! normalizing both vectors to unit Euclidean length after each sweep.

use std::io::Write;

use crate::error::{Error, Result};
use crate::webgraph::WebGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    /// Random-jump probability.
    pub alpha: f64,
    /// L1 tolerance between successive iterates.
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            alpha: 0.15,
            epsilon: 1e-8,
            max_iterations: 100,
        }
    }
}

impl RankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PageRankScores {
    /// Indexed by page id.
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iterations` was hit before the tolerance.
    pub converged: bool,
}

impl PageRankScores {
    pub fn get(&self, graph: &WebGraph, page: &str) -> Option<f64> {
        graph.node_id(page).map(|i| self.scores[i])
    }
}

#[derive(Debug, Clone)]
pub struct HitsScores {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the graph has no edges; both vectors are then all zero.
    pub edgeless: bool,
}

pub fn pagerank(graph: &WebGraph, config: &RankConfig) -> Result<PageRankScores> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::invalid("pagerank of an empty graph"));
    }
    let nf = n as f64;
    let damping = 1.0 - config.alpha;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&v| graph.out_degree(v) == 0).map(|v| rank[v]).sum();
        let base = config.alpha / nf + damping * dangling / nf;
        for (u, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = graph
                .in_neighbors(u)
                .iter()
                .map(|&v| rank[v] / graph.out_degree(v) as f64)
                .sum();
            *slot = base + damping * inflow;
        }
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta <= config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(PageRankScores {
        scores: rank,
        iterations,
        converged,
    })
}

pub fn hits(graph: &WebGraph, config: &RankConfig) -> Result<HitsScores> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::invalid("hits of an empty graph"));
    }
    if graph.edge_count() == 0 {
        return Ok(HitsScores {
            hub: vec![0.0; n],
            authority: vec![0.0; n],
            iterations: 0,
            converged: true,
            edgeless: true,
        });
    }

    let mut hub = vec![1.0; n];
    let mut auth = vec![1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        let mut new_auth: Vec<f64> = (0..n)
            .map(|u| graph.in_neighbors(u).iter().map(|&v| hub[v]).sum())
            .collect();
        normalize(&mut new_auth);
        let mut new_hub: Vec<f64> = (0..n)
            .map(|v| graph.out_neighbors(v).iter().map(|&u| new_auth[u]).sum())
            .collect();
        normalize(&mut new_hub);

        let delta = l1(&auth, &new_auth) + l1(&hub, &new_hub);
        auth = new_auth;
        hub = new_hub;
        if delta <= config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(HitsScores {
        hub,
        authority: auth,
        iterations,
        converged,
        edgeless: false,
    })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Writes `page<TAB>score` sorted by descending score, ties by page identifier.
pub fn write_scores_tsv<W: Write>(mut w: W, graph: &WebGraph, scores: &[f64]) -> std::io::Result<()> {
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| graph.node(a).cmp(graph.node(b)))
    });
    for i in order {
        writeln!(w, "{}\t{}", graph.node(i), scores[i])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn three_cycle_is_uniform() {
        let g = WebGraph::from_edges([("a", "b"), ("b", "c"), ("c", "a")]);
        let pr = pagerank(&g, &RankConfig::default()).unwrap();
        for s in &pr.scores {
            assert_close(*s, 1.0 / 3.0, 1e-12);
        }
        assert!(pr.converged);
    }

    #[test]
    fn lone_node_gets_all_mass() {
        let mut b = crate::webgraph::GraphBuilder::new();
        b.add_node("solo");
        let pr = pagerank(&b.build(), &RankConfig::default()).unwrap();
        assert_eq!(pr.scores, vec![1.0]);
    }

    #[test]
    fn empty_graph_rejected() {
        let g = WebGraph::from_edges(Vec::<(&str, &str)>::new());
        assert!(matches!(
            pagerank(&g, &RankConfig::default()),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(hits(&g, &RankConfig::default()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn bad_config_rejected() {
        let g = WebGraph::from_edges([("a", "b")]);
        for cfg in [
            RankConfig {
                alpha: 0.0,
                ..Default::default()
            },
            RankConfig {
                alpha: 1.0,
                ..Default::default()
            },
            RankConfig {
                epsilon: -1.0,
                ..Default::default()
            },
            RankConfig {
                max_iterations: 0,
                ..Default::default()
            },
        ] {
            assert!(pagerank(&g, &cfg).is_err());
        }
    }

    #[test]
    fn mass_conserved_every_iteration_with_dangling() {
        let g = WebGraph::from_edges([("a", "b"), ("a", "c"), ("b", "c"), ("d", "a")]);
        for iters in 1..30 {
            let cfg = RankConfig {
                epsilon: 0.0,
                max_iterations: iters,
                ..Default::default()
            };
            let pr = pagerank(&g, &cfg).unwrap();
            assert_close(pr.scores.iter().sum(), 1.0, 1e-12);
            let floor = cfg.alpha / 4.0;
            assert!(pr.scores.iter().all(|&s| s >= floor - 1e-15));
        }
    }

    #[test]
    fn hits_bipartite_k22() {
        let g = WebGraph::from_edges([("s1", "t1"), ("s1", "t2"), ("s2", "t1"), ("s2", "t2")]);
        let h = hits(&g, &RankConfig::default()).unwrap();
        let id = |p| g.node_id(p).unwrap();
        assert_eq!(h.hub[id("s1")], h.hub[id("s2")]);
        assert_eq!(h.authority[id("t1")], h.authority[id("t2")]);
        assert_eq!(h.authority[id("s1")], 0.0);
        assert_eq!(h.hub[id("t1")], 0.0);
        assert_close(h.hub[id("s1")], std::f64::consts::FRAC_1_SQRT_2, 1e-15);
    }

    #[test]
    fn hits_star() {
        let g = WebGraph::from_edges((0..5).map(|i| (format!("leaf{i}"), "center".to_string())));
        let h = hits(&g, &RankConfig::default()).unwrap();
        let c = g.node_id("center").unwrap();
        assert_close(h.authority[c], 1.0, 1e-15);
        for i in 0..5 {
            let l = g.node_id(&format!("leaf{i}")).unwrap();
            assert_eq!(h.authority[l], 0.0);
            assert_close(h.hub[l], 1.0 / 5f64.sqrt(), 1e-15);
        }
        assert_eq!(h.hub[c], 0.0);
    }

    #[test]
    fn hits_edgeless_flags() {
        let mut b = crate::webgraph::GraphBuilder::new();
        b.add_node("x");
        b.add_node("y");
        let h = hits(&b.build(), &RankConfig::default()).unwrap();
        assert!(h.edgeless);
        assert!(h.hub.iter().chain(&h.authority).all(|&x| x == 0.0));
    }

    #[test]
    fn scores_tsv_order() {
        let g = WebGraph::from_edges([("b", "a"), ("c", "a")]);
        let mut out = Vec::new();
        write_scores_tsv(&mut out, &g, &[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "b\t0.5\na\t0.25\nc\t0.25\n");
    }
}
