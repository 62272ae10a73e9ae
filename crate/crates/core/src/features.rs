//! Per-domain link features: degrees, rank sums, supporters, reciprocity,
//! intra-domain path length and degree-distribution shape.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linkrank::{HitsScores, PageRankScores};
use crate::webgraph::{DomainClustering, WebGraph};

/// Default hop limit for [`supporters`].
pub const DEFAULT_SUPPORTER_DEPTH: usize = 3;

/// Deviation reported when a distribution has fewer than two distinct
/// positive degrees and no line can be fitted.
pub const DEGENERATE_DEVIATION: f64 = f64::MAX;

/// Column order used by [`FeatureVector::to_row`] and the CSV export.
pub const FEATURE_NAMES: [&str; 9] = [
    "in_degree",
    "out_degree",
    "pagerank",
    "authority",
    "hub",
    "supporters",
    "reciprocity",
    "avg_path_length",
    "powerlaw_deviation",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub in_degree: usize,
    pub out_degree: usize,
    pub pagerank: f64,
    pub authority: f64,
    pub hub: f64,
    pub supporters: usize,
    pub reciprocity: f64,
    /// `None` when no intra-domain pair is connected.
    pub avg_path_length: Option<f64>,
    /// [`DEGENERATE_DEVIATION`] when no fit was possible.
    pub powerlaw_deviation: f64,
}

impl FeatureVector {
    /// Numeric row in [`FEATURE_NAMES`] order. Undefined path lengths and
    /// degenerate power-law fits both encode as 0.
    pub fn to_row(&self) -> Vec<f64> {
        vec![
            self.in_degree as f64,
            self.out_degree as f64,
            self.pagerank,
            self.authority,
            self.hub,
            self.supporters as f64,
            self.reciprocity,
            self.avg_path_length.unwrap_or(0.0),
            if self.powerlaw_deviation == DEGENERATE_DEVIATION {
                0.0
            } else {
                self.powerlaw_deviation
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeKind {
    In,
    Out,
    Total,
}

/// Empirical P(K).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pub histogram: BTreeMap<usize, f64>,
    pub sample_size: usize,
}

impl DegreeDistribution {
    /// Builds P(K) from raw degree samples.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::invalid("degree distribution of an empty scope"));
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &k in degrees {
            *counts.entry(k).or_default() += 1;
        }
        let n = degrees.len() as f64;
        Ok(DegreeDistribution {
            histogram: counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect(),
            sample_size: degrees.len(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.histogram.iter().map(|(&k, &p)| k as f64 * p).sum()
    }
}

/// Least-squares fit of `ln P(K) = c - gamma * ln K` over the K >= 1 bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub deviation: f64,
    pub degenerate: bool,
}

/// Number of distinct pages that reach `page` within `depth` hops.
pub fn supporters(graph: &WebGraph, page: &str, depth: usize) -> Result<usize> {
    if depth == 0 {
        return Err(Error::invalid("supporter depth must be >= 1"));
    }
    let id = graph.require(page)?;
    Ok(supporters_of(graph, id, depth))
}

pub(crate) fn supporters_of(graph: &WebGraph, target: usize, depth: usize) -> usize {
    let mut seen = vec![false; graph.node_count()];
    seen[target] = true;
    let mut frontier = vec![target];
    let mut count = 0;
    for _ in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in graph.in_neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    count
}

/// Mean shortest-path length over connected ordered pairs of pages inside
/// `domain`, following intra-domain edges only.
pub fn avg_path_length(graph: &WebGraph, clustering: &DomainClustering, domain: &str) -> Result<Option<f64>> {
    let d = clustering.require(domain)?;
    Ok(avg_path_length_of(graph, clustering, d))
}

pub(crate) fn avg_path_length_of(graph: &WebGraph, clustering: &DomainClustering, domain: usize) -> Option<f64> {
    let members = clustering.members(domain);
    let mut dist = vec![usize::MAX; graph.node_count()];
    let mut total = 0usize;
    let mut pairs = 0usize;
    let mut queue = VecDeque::new();
    for &src in members {
        for &m in members {
            dist[m] = usize::MAX;
        }
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in graph.out_neighbors(u) {
                if clustering.cluster_of(v) == domain && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    total += dist[v];
                    pairs += 1;
                    queue.push_back(v);
                }
            }
        }
    }
    (pairs > 0).then(|| total as f64 / pairs as f64)
}

/// Fraction of edges inside `scope` whose reverse edge also exists; 0 when
/// the scope holds no edges.
pub fn reciprocity(graph: &WebGraph, scope: &[usize]) -> f64 {
    let mask = scope_mask(graph, scope);
    let mut edges = 0usize;
    let mut mutual = 0usize;
    for u in dedup(scope) {
        for &v in graph.out_neighbors(u) {
            if mask[v] {
                edges += 1;
                if graph.has_edge(v, u) {
                    mutual += 1;
                }
            }
        }
    }
    if edges == 0 {
        0.0
    } else {
        mutual as f64 / edges as f64
    }
}

fn dedup(scope: &[usize]) -> Vec<usize> {
    let mut pages = scope.to_vec();
    pages.sort_unstable();
    pages.dedup();
    pages
}

fn scope_mask(graph: &WebGraph, scope: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; graph.node_count()];
    for &p in scope {
        mask[p] = true;
    }
    mask
}

/// P(K) over `scope`, counting only edges with both endpoints in scope.
pub fn degree_distribution(graph: &WebGraph, scope: &[usize], kind: DegreeKind) -> Result<DegreeDistribution> {
    if scope.is_empty() {
        return Err(Error::invalid("degree distribution of an empty scope"));
    }
    let mask = scope_mask(graph, scope);
    let degrees: Vec<usize> = dedup(scope)
        .iter()
        .map(|&p| {
            let inside = |xs: &[usize]| xs.iter().filter(|&&x| mask[x]).count();
            match kind {
                DegreeKind::In => inside(graph.in_neighbors(p)),
                DegreeKind::Out => inside(graph.out_neighbors(p)),
                DegreeKind::Total => inside(graph.in_neighbors(p)) + inside(graph.out_neighbors(p)),
            }
        })
        .collect();
    DegreeDistribution::from_degrees(&degrees)
}

/// Fits a power law to the positive-degree bins of `dist` and reports how far
/// the data departs from it.
pub fn powerlaw_deviation(dist: &DegreeDistribution) -> PowerLawFit {
    let points: Vec<(f64, f64)> = dist
        .histogram
        .iter()
        .filter(|(&k, &p)| k >= 1 && p > 0.0)
        .map(|(&k, &p)| ((k as f64).ln(), p.ln()))
        .collect();
    if points.len() < 2 {
        return PowerLawFit {
            exponent: 0.0,
            intercept: 0.0,
            deviation: DEGENERATE_DEVIATION,
            degenerate: true,
        };
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = points.iter().map(|&(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    PowerLawFit {
        exponent: -slope,
        intercept,
        deviation: (rss / n).sqrt(),
        degenerate: false,
    }
}

/// Discrete maximum-likelihood power-law exponent over the `K >= k_min`
/// bins, using the continuity-corrected approximation
/// `gamma = 1 + n / sum ln(K / (k_min - 1/2))`.
///
/// Unlike the log-log least-squares fit this is not dragged towards zero by
/// the sparse single-count bins in the tail. Returns `None` when no mass sits
/// at or above `k_min` or `k_min` is 0.
pub fn powerlaw_mle(dist: &DegreeDistribution, k_min: usize) -> Option<f64> {
    if k_min == 0 {
        return None;
    }
    let shift = k_min as f64 - 0.5;
    let (mass, log_sum) = dist
        .histogram
        .range(k_min..)
        .fold((0.0, 0.0), |(m, s), (&k, &p)| (m + p, s + p * (k as f64 / shift).ln()));
    (mass > 0.0 && log_sum > 0.0).then(|| 1.0 + mass / log_sum)
}

/// One [`FeatureVector`] per domain, keyed and ordered by domain identifier.
///
/// Page-level counts and scores are summed over each domain's members;
/// reciprocity, path length and power-law deviation are computed on the
/// member set (total degree, intra-domain edges).
pub fn extract_features(
    graph: &WebGraph,
    clustering: &DomainClustering,
    pagerank: &PageRankScores,
    hits: &HitsScores,
    depth: usize,
) -> Result<BTreeMap<String, FeatureVector>> {
    let n = graph.node_count();
    if pagerank.scores.len() != n || hits.hub.len() != n || hits.authority.len() != n {
        return Err(Error::invalid(format!(
            "score vectors do not cover the graph ({n} pages; pagerank {}, hub {}, authority {})",
            pagerank.scores.len(),
            hits.hub.len(),
            hits.authority.len()
        )));
    }
    if depth == 0 {
        return Err(Error::invalid("supporter depth must be >= 1"));
    }

    let mut out = BTreeMap::new();
    for d in 0..clustering.domain_count() {
        let members = clustering.members(d);
        let sum = |xs: &[f64]| members.iter().map(|&p| xs[p]).sum::<f64>();
        let dist = degree_distribution(graph, members, DegreeKind::Total)?;
        let fv = FeatureVector {
            in_degree: members.iter().map(|&p| graph.in_degree(p)).sum(),
            out_degree: members.iter().map(|&p| graph.out_degree(p)).sum(),
            pagerank: sum(&pagerank.scores),
            authority: sum(&hits.authority),
            hub: sum(&hits.hub),
            supporters: members.iter().map(|&p| supporters_of(graph, p, depth)).sum(),
            reciprocity: reciprocity(graph, members),
            avg_path_length: avg_path_length_of(graph, clustering, d),
            powerlaw_deviation: powerlaw_deviation(&dist).deviation,
        };
        out.insert(clustering.domain(d).to_string(), fv);
    }
    Ok(out)
}

/// CSV with header `domain,<FEATURE_NAMES...>`; undefined path lengths and
/// degenerate deviations are written as `NA`.
pub fn write_features_csv<W: Write>(mut w: W, features: &BTreeMap<String, FeatureVector>) -> std::io::Result<()> {
    writeln!(w, "domain,{}", FEATURE_NAMES.join(","))?;
    for (domain, f) in features {
        let apl = f.avg_path_length.map_or("NA".to_string(), |v| v.to_string());
        let dev = if f.powerlaw_deviation == DEGENERATE_DEVIATION {
            "NA".to_string()
        } else {
            f.powerlaw_deviation.to_string()
        };
        writeln!(
            w,
            "{domain},{},{},{},{},{},{},{},{apl},{dev}",
            f.in_degree, f.out_degree, f.pagerank, f.authority, f.hub, f.supporters, f.reciprocity
        )?;
    }
    Ok(())
}

/// Parses [`write_features_csv`] output back into numeric rows
/// (`NA` → 0, matching [`FeatureVector::to_row`]).
pub fn read_feature_rows(text: &str) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.split(',').skip(1).eq(FEATURE_NAMES.iter().copied()) => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "unexpected feature header".into(),
            })
        }
    }
    let mut out = BTreeMap::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let domain = fields.next().unwrap_or_default().to_string();
        let row: Vec<f64> = fields
            .map(|f| if f == "NA" { Ok(0.0) } else { f.parse::<f64>() })
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
        if row.len() != FEATURE_NAMES.len() {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} feature values, found {}", FEATURE_NAMES.len(), row.len()),
            });
        }
        out.insert(domain, row);
    }
    Ok(out)
}
