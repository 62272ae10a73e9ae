//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library code paths being checked; graphs are handled as
//! dense matrices built straight from edge lists.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use linkspam::{domain_of, Label, WebGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi style directed graph over `n` nodes named `n0..`, no self loops.
pub fn random_edges(n: usize, p: f64, seed: u64) -> Vec<(String, String)> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && r.random::<f64>() < p {
                edges.push((format!("n{u}"), format!("n{v}")));
            }
        }
    }
    edges
}

/// Dense adjacency in the graph's own node numbering.
pub fn dense_adjacency(g: &WebGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (s, t) in g.edge_set() {
        a[g.node_id(&s).unwrap()][g.node_id(&t).unwrap()] = 1.0;
    }
    a
}

/// PageRank by power iteration on the explicit Google matrix.
pub fn dense_pagerank(g: &WebGraph, alpha: f64) -> Vec<f64> {
    let a = dense_adjacency(g);
    let n = a.len();
    let nf = n as f64;
    let mut m = vec![vec![0.0; n]; n];
    for v in 0..n {
        let out: f64 = a[v].iter().sum();
        for u in 0..n {
            let link = if out == 0.0 { 1.0 / nf } else { a[v][u] / out };
            m[u][v] = (1.0 - alpha) * link + alpha / nf;
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..5000 {
        let y: Vec<f64> = (0..n).map(|u| (0..n).map(|v| m[u][v] * x[v]).sum()).collect();
        let diff: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if diff < 1e-15 {
            break;
        }
    }
    x
}

/// Principal eigenvector of `A^T A` by long power iteration.
pub fn dense_authority(g: &WebGraph) -> Vec<f64> {
    let a = dense_adjacency(g);
    let n = a.len();
    let mut ata = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            ata[i][j] = (0..n).map(|k| a[k][i] * a[k][j]).sum();
        }
    }
    let mut x = vec![1.0; n];
    for _ in 0..20000 {
        let mut y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| ata[i][j] * x[j]).sum()).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
    }
    x
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// All-pairs hop distances by Floyd–Warshall (`usize::MAX` = unreachable).
pub fn hop_distances(g: &WebGraph) -> Vec<Vec<usize>> {
    let a = dense_adjacency(g);
    let n = a.len();
    let inf = usize::MAX;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] > 0.0 && i != j {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != inf && d[k][j] != inf && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Brute-force DBSpam-style verdicts computed from the raw page edge list.
pub struct BruteDetector {
    pub domains: Vec<String>,
    adj: Vec<Vec<bool>>,
}

impl BruteDetector {
    pub fn new(edges: &[(String, String)]) -> Self {
        let domains: Vec<String> = edges
            .iter()
            .flat_map(|(s, t)| [domain_of(s), domain_of(t)])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = domains.len();
        let pos = |d: &str| domains.binary_search_by(|x| x.as_str().cmp(d)).unwrap();
        let mut adj = vec![vec![false; n]; n];
        for (s, t) in edges {
            let (a, b) = (pos(&domain_of(s)), pos(&domain_of(t)));
            if a != b {
                adj[a][b] = true;
            }
        }
        BruteDetector { domains, adj }
    }

    pub fn in_set(&self, w: usize) -> BTreeSet<usize> {
        (0..self.domains.len()).filter(|&x| x != w && self.adj[x][w]).collect()
    }

    /// Domains reachable from `w` in at most `limit + 1` hops, by repeated
    /// boolean matrix products.
    pub fn out_set(&self, w: usize, limit: usize) -> BTreeSet<usize> {
        let n = self.domains.len();
        let mut reach = self.adj[w].clone();
        for _ in 0..limit {
            let mut next = reach.clone();
            for k in 0..n {
                if reach[k] {
                    for j in 0..n {
                        next[j] |= self.adj[k][j];
                    }
                }
            }
            reach = next;
        }
        (0..n).filter(|&j| j != w && reach[j]).collect()
    }

    pub fn intersection(&self, w: usize, limit: usize) -> usize {
        self.in_set(w).intersection(&self.out_set(w, limit)).count()
    }

    pub fn spam_set(&self, limit: usize, threshold: usize) -> BTreeSet<String> {
        (0..self.domains.len())
            .filter(|&w| self.intersection(w, limit) >= threshold)
            .map(|w| self.domains[w].clone())
            .collect()
    }
}

/// Plain count-based Gini CART with the same split rules as the library.
#[derive(Debug, PartialEq)]
pub enum PlainTree {
    Leaf(Label, [usize; 2]),
    Split(usize, f64, Box<PlainTree>, Box<PlainTree>),
}

fn plain_gini(neg: usize, pos: usize) -> f64 {
    let t = (neg + pos) as f64;
    if t == 0.0 {
        return 0.0;
    }
    let (a, b) = (neg as f64 / t, pos as f64 / t);
    1.0 - a * a - b * b
}

pub fn plain_cart(
    data: &[Vec<f64>],
    labels: &[Label],
    idx: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> PlainTree {
    let pos = idx.iter().filter(|&&i| labels[i] == Label::Spam).count();
    let neg = idx.len() - pos;
    let leaf = PlainTree::Leaf(if pos >= neg { Label::Spam } else { Label::NonSpam }, [neg, pos]);
    if pos == 0 || neg == 0 || depth >= max_depth || idx.len() < 2 * min_leaf.max(1) {
        return leaf;
    }
    let total = idx.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..data[idx[0]].len() {
        let mut order = idx.to_vec();
        order.sort_by(|&a, &b| data[a][f].total_cmp(&data[b][f]).then(a.cmp(&b)));
        for split in 1..order.len() {
            let (lo, hi) = (data[order[split - 1]][f], data[order[split]][f]);
            if lo == hi || split < min_leaf || order.len() - split < min_leaf {
                continue;
            }
            let lp = order[..split].iter().filter(|&&i| labels[i] == Label::Spam).count();
            let ln = split - lp;
            let (rp, rn) = (pos - lp, neg - ln);
            let score = ((ln + lp) as f64 * plain_gini(ln, lp) + (rn + rp) as f64 * plain_gini(rn, rp)) / total;
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, f, lo + (hi - lo) / 2.0));
            }
        }
    }
    match best {
        Some((score, f, thr)) if score < plain_gini(neg, pos) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| data[i][f] <= thr);
            PlainTree::Split(
                f,
                thr,
                Box::new(plain_cart(data, labels, &l, depth + 1, max_depth, min_leaf)),
                Box::new(plain_cart(data, labels, &r, depth + 1, max_depth, min_leaf)),
            )
        }
        _ => leaf,
    }
}

/// Converts a library tree (via its JSON form) into the oracle's shape.
pub fn tree_from_json(v: &serde_json::Value) -> PlainTree {
    match v["type"].as_str().unwrap() {
        "leaf" => {
            let label = match v["label"].as_str().unwrap() {
                "spam" => Label::Spam,
                _ => Label::NonSpam,
            };
            let c = v["counts"].as_array().unwrap();
            PlainTree::Leaf(
                label,
                [c[0].as_u64().unwrap() as usize, c[1].as_u64().unwrap() as usize],
            )
        }
        "split" => PlainTree::Split(
            v["feature"].as_u64().unwrap() as usize,
            v["threshold"].as_f64().unwrap(),
            Box::new(tree_from_json(&v["left"])),
            Box::new(tree_from_json(&v["right"])),
        ),
        other => panic!("unknown node type {other}"),
    }
}

/// Walks the serialized tree rule by rule.
pub fn interpret_json(v: &serde_json::Value, x: &[f64]) -> Label {
    let mut node = v;
    loop {
        match node["type"].as_str().unwrap() {
            "leaf" => {
                return if node["label"] == "spam" {
                    Label::Spam
                } else {
                    Label::NonSpam
                };
            }
            _ => {
                let f = node["feature"].as_u64().unwrap() as usize;
                let t = node["threshold"].as_f64().unwrap();
                node = if x[f] <= t { &node["left"] } else { &node["right"] };
            }
        }
    }
}

/// Textbook fuzzy c-means with explicit per-entry loops.
pub fn naive_fcm(data: &[f64], init: &[Vec<f64>], m: f64, iters: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = init[0].len();
    let mut u = init.to_vec();
    let mut c = vec![0.0; k];
    for _ in 0..iters {
        for j in 0..k {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..data.len() {
                num += u[i][j].powf(m) * data[i];
                den += u[i][j].powf(m);
            }
            c[j] = num / den;
        }
        for i in 0..data.len() {
            for j in 0..k {
                let dj = (data[i] - c[j]).abs();
                let mut s = 0.0;
                for l in 0..k {
                    s += (dj / (data[i] - c[l]).abs()).powf(2.0 / (m - 1.0));
                }
                u[i][j] = 1.0 / s;
            }
        }
    }
    (c, u)
}
