//! Python bindings. Graph handles wrap the core types; everything else
//! crosses the boundary as plain lists, dicts and strings, with labels as
//! `"spam"` / `"nonspam"`.

use std::collections::BTreeMap;

use linkspam::classifier::{self, ConfusionMatrix, TreeParams};
use linkspam::detector::{self, DetectorConfig, SpamVerdict};
use linkspam::fcmclust::{self, FcmConfig, MembershipMatrix};
use linkspam::features;
use linkspam::linkrank::{self, RankConfig};
use linkspam::synthcorpus::{self, CorpusSpec, FarmKind, FarmSpec};
use linkspam::{DomainClustering, Error, Label};
use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::NotFound(m) => PyKeyError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_label(s: &str) -> PyResult<Label> {
    s.parse().map_err(py_err)
}

fn parse_labels(labels: BTreeMap<String, String>) -> PyResult<BTreeMap<String, Label>> {
    labels.into_iter().map(|(d, l)| Ok((d, parse_label(&l)?))).collect()
}

fn rank_config(alpha: f64, epsilon: f64, max_iterations: usize) -> PyResult<RankConfig> {
    let c = RankConfig {
        alpha,
        epsilon,
        max_iterations,
    };
    c.validate().map_err(py_err)?;
    Ok(c)
}

/// A directed page graph with its domain clustering.
#[pyclass(name = "WebGraph", frozen)]
struct PyWebGraph {
    graph: linkspam::WebGraph,
    clustering: DomainClustering,
}

impl PyWebGraph {
    fn wrap(graph: linkspam::WebGraph) -> Self {
        let clustering = DomainClustering::build(&graph);
        PyWebGraph { graph, clustering }
    }

    fn by_page(&self, scores: &[f64]) -> BTreeMap<String, f64> {
        self.graph.nodes().iter().cloned().zip(scores.iter().copied()).collect()
    }

    fn page(&self, page: &str) -> PyResult<usize> {
        self.graph
            .node_id(page)
            .ok_or_else(|| PyKeyError::new_err(format!("unknown page {page}")))
    }
}

#[pymethods]
impl PyWebGraph {
    #[new]
    fn new(edges: Vec<(String, String)>) -> Self {
        Self::wrap(linkspam::WebGraph::from_edges(edges))
    }

    /// Parses tab-separated `source<TAB>target` text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        linkspam::WebGraph::parse_edge_list(text)
            .map(Self::wrap)
            .map_err(py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        Self::parse(&text)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    fn nodes(&self) -> Vec<String> {
        self.graph.nodes().to_vec()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.graph.edge_set().into_iter().collect()
    }

    fn out_neighbors(&self, page: &str) -> PyResult<Vec<String>> {
        let id = self.page(page)?;
        Ok(self
            .graph
            .out_neighbors(id)
            .iter()
            .map(|&v| self.graph.node(v).to_string())
            .collect())
    }

    fn in_neighbors(&self, page: &str) -> PyResult<Vec<String>> {
        let id = self.page(page)?;
        Ok(self
            .graph
            .in_neighbors(id)
            .iter()
            .map(|&v| self.graph.node(v).to_string())
            .collect())
    }

    fn domains(&self) -> Vec<String> {
        self.clustering.domains().to_vec()
    }

    /// Domain → list of domains it links to.
    fn domain_edges(&self) -> BTreeMap<String, Vec<String>> {
        (0..self.clustering.domain_count())
            .map(|d| {
                let outs = self
                    .clustering
                    .out_ids(d)
                    .iter()
                    .map(|&t| self.clustering.domain(t).to_string())
                    .collect();
                (self.clustering.domain(d).to_string(), outs)
            })
            .collect()
    }

    fn to_edge_list(&self) -> String {
        let mut buf = Vec::new();
        self.graph.write_edge_list(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("identifiers are UTF-8")
    }

    #[pyo3(signature = (labels=None))]
    fn to_dot(&self, labels: Option<BTreeMap<String, String>>) -> PyResult<String> {
        let labels = parse_labels(labels.unwrap_or_default())?;
        Ok(linkspam::dot::domain_graph_dot(&self.clustering, &labels))
    }

    fn __repr__(&self) -> String {
        format!(
            "WebGraph(pages={}, edges={}, domains={})",
            self.graph.node_count(),
            self.graph.edge_count(),
            self.clustering.domain_count()
        )
    }
}

#[pyfunction]
fn domain_of(page: &str) -> String {
    linkspam::domain_of(page)
}

/// PageRank score per page.
#[pyfunction]
#[pyo3(signature = (graph, alpha=0.15, epsilon=1e-8, max_iterations=100))]
fn pagerank(graph: &PyWebGraph, alpha: f64, epsilon: f64, max_iterations: usize) -> PyResult<BTreeMap<String, f64>> {
    let pr = linkrank::pagerank(&graph.graph, &rank_config(alpha, epsilon, max_iterations)?).map_err(py_err)?;
    Ok(graph.by_page(&pr.scores))
}

/// `(hub, authority)` score dicts.
#[pyfunction]
#[pyo3(signature = (graph, epsilon=1e-8, max_iterations=100))]
fn hits(
    graph: &PyWebGraph,
    epsilon: f64,
    max_iterations: usize,
) -> PyResult<(BTreeMap<String, f64>, BTreeMap<String, f64>)> {
    let h = linkrank::hits(&graph.graph, &rank_config(0.15, epsilon, max_iterations)?).map_err(py_err)?;
    Ok((graph.by_page(&h.hub), graph.by_page(&h.authority)))
}

/// Per-domain feature dicts; an undefined path length or power-law
/// deviation is `None`.
#[pyfunction]
#[pyo3(signature = (graph, depth=features::DEFAULT_SUPPORTER_DEPTH))]
fn domain_features(
    graph: &PyWebGraph,
    depth: usize,
) -> PyResult<BTreeMap<String, BTreeMap<&'static str, Option<f64>>>> {
    let config = RankConfig::default();
    let pr = linkrank::pagerank(&graph.graph, &config).map_err(py_err)?;
    let hits = linkrank::hits(&graph.graph, &config).map_err(py_err)?;
    let table = features::extract_features(&graph.graph, &graph.clustering, &pr, &hits, depth).map_err(py_err)?;
    Ok(table
        .into_iter()
        .map(|(d, f)| {
            let deviation = (f.powerlaw_deviation != features::DEGENERATE_DEVIATION).then_some(f.powerlaw_deviation);
            let values = [
                Some(f.in_degree as f64),
                Some(f.out_degree as f64),
                Some(f.pagerank),
                Some(f.authority),
                Some(f.hub),
                Some(f.supporters as f64),
                Some(f.reciprocity),
                f.avg_path_length,
                deviation,
            ];
            (d, features::FEATURE_NAMES.iter().copied().zip(values).collect())
        })
        .collect())
}

#[pyclass(name = "Verdict", frozen, get_all)]
struct PyVerdict {
    domain: String,
    label: String,
    intersection_size: usize,
    in_set: Vec<String>,
    out_set: Vec<String>,
}

#[pymethods]
impl PyVerdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict({:?}, {}, intersection={})",
            self.domain, self.label, self.intersection_size
        )
    }
}

impl From<SpamVerdict> for PyVerdict {
    fn from(v: SpamVerdict) -> Self {
        PyVerdict {
            domain: v.domain,
            label: v.label.to_string(),
            intersection_size: v.intersection_size,
            in_set: v.in_set,
            out_set: v.out_set,
        }
    }
}

/// Domain-cluster traversal verdict for every domain, in domain order.
#[pyfunction]
#[pyo3(signature = (graph, traversal_limit=2, threshold=3))]
fn detect(graph: &PyWebGraph, traversal_limit: usize, threshold: usize) -> PyResult<Vec<PyVerdict>> {
    let config = DetectorConfig {
        traversal_limit,
        threshold,
    };
    let verdicts = detector::run_all(&graph.clustering, &config).map_err(py_err)?;
    Ok(verdicts.into_iter().map(PyVerdict::from).collect())
}

/// Relabels `labels` by the spam share of each point's dominant cluster.
#[pyfunction]
#[pyo3(signature = (labels, memberships, tau_hi=0.7, tau_lo=0.1))]
fn smooth_labels(labels: Vec<String>, memberships: Vec<Vec<f64>>, tau_hi: f64, tau_lo: f64) -> PyResult<Vec<String>> {
    let labels = labels.iter().map(|l| parse_label(l)).collect::<PyResult<Vec<_>>>()?;
    let u = MembershipMatrix::from_rows(memberships).map_err(py_err)?;
    let out = detector::smooth_labels(&labels, &u, tau_hi, tau_lo).map_err(py_err)?;
    Ok(out.into_iter().map(|l| l.to_string()).collect())
}

#[pyclass(name = "FcmResult", frozen, get_all)]
struct PyFcmResult {
    centroids: Vec<Vec<f64>>,
    memberships: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
    objective_trace: Vec<f64>,
}

/// Fuzzy c-means on the rows of `data`.
#[pyfunction]
#[pyo3(signature = (data, clusters=2, fuzzifier=2.0, epsilon=1e-6, max_iterations=300, seed=0, standardize=false))]
fn fcm_fit(
    data: Vec<Vec<f64>>,
    clusters: usize,
    fuzzifier: f64,
    epsilon: f64,
    max_iterations: usize,
    seed: u64,
    standardize: bool,
) -> PyResult<PyFcmResult> {
    let data = if standardize {
        fcmclust::standardize(&data)
    } else {
        data
    };
    let config = FcmConfig {
        clusters,
        fuzzifier,
        epsilon,
        max_iterations,
        seed,
    };
    let fit = fcmclust::fcm_fit(&data, &config).map_err(py_err)?;
    Ok(PyFcmResult {
        centroids: fit.centroids.0,
        memberships: fit.memberships.rows().to_vec(),
        iterations: fit.iterations,
        converged: fit.converged,
        objective_trace: fit.objective_trace,
    })
}

/// TPR, FPR, precision and F1 from confusion counts (truth non-spam row
/// `x, y`; truth spam row `z, w`). Undefined ratios are `None`.
#[pyfunction]
fn metrics(x: usize, y: usize, z: usize, w: usize) -> BTreeMap<&'static str, Option<f64>> {
    let m = classifier::metrics(&ConfusionMatrix { x, y, z, w });
    BTreeMap::from([("tpr", m.tpr), ("fpr", m.fpr), ("precision", m.precision), ("f1", m.f1)])
}

/// Cross-validated cost-sensitive tree for each cost ratio; one dict per ratio.
#[pyfunction]
#[pyo3(signature = (data, labels, cost_ratios=classifier::DEFAULT_COST_RATIOS.to_vec(), folds=5, seed=0, max_depth=8, min_leaf_size=5))]
fn cost_sweep(
    data: Vec<Vec<f64>>,
    labels: Vec<String>,
    cost_ratios: Vec<f64>,
    folds: usize,
    seed: u64,
    max_depth: usize,
    min_leaf_size: usize,
) -> PyResult<Vec<BTreeMap<&'static str, Option<f64>>>> {
    let labels = labels.iter().map(|l| parse_label(l)).collect::<PyResult<Vec<_>>>()?;
    let base = TreeParams {
        cost_ratio: 1.0,
        max_depth,
        min_leaf_size,
    };
    let rows = classifier::cost_sweep(&data, &labels, &cost_ratios, base, folds, seed).map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            BTreeMap::from([
                ("cost_ratio", Some(r.cost_ratio)),
                ("tpr", r.metrics.tpr),
                ("fpr", r.metrics.fpr),
                ("precision", r.metrics.precision),
                ("f1", r.metrics.f1),
            ])
        })
        .collect())
}

fn parse_farm(kind: &str, a: usize, b: usize, pages: usize, boost: usize) -> PyResult<FarmSpec> {
    let kind = match kind {
        "clique" => FarmKind::Clique { domains: a },
        "bipartite" => FarmKind::Bipartite {
            hubs: a,
            authorities: b,
        },
        other => return Err(PyValueError::new_err(format!("unknown farm kind {other:?}"))),
    };
    Ok(FarmSpec {
        kind,
        pages_per_domain: pages,
        boost_edges: boost,
    })
}

/// Synthetic corpus as `(graph, labels)`. Each farm is
/// `(kind, a, b, pages_per_domain, boost_edges)`: `a` domains for a clique
/// (`b` ignored), `a` hubs and `b` authorities for a bipartite farm.
#[pyfunction]
#[pyo3(signature = (honest_domains=500, pages=(1, 5), attachment=2, farms=Vec::new(), seed=0))]
fn synth(
    honest_domains: usize,
    pages: (usize, usize),
    attachment: usize,
    farms: Vec<(String, usize, usize, usize, usize)>,
    seed: u64,
) -> PyResult<(PyWebGraph, BTreeMap<String, String>)> {
    let farms = farms
        .into_iter()
        .map(|(k, a, b, p, boost)| parse_farm(&k, a, b, p, boost))
        .collect::<PyResult<Vec<_>>>()?;
    let spec = CorpusSpec {
        honest_domains,
        pages_per_domain: pages,
        attachment,
        farms,
        seed,
    };
    let corpus = synthcorpus::generate(&spec).map_err(py_err)?;
    let labels = corpus.truth.iter().map(|(d, l)| (d.clone(), l.to_string())).collect();
    Ok((
        PyWebGraph {
            graph: corpus.graph,
            clustering: corpus.clustering,
        },
        labels,
    ))
}

#[pymodule]
fn _linkspam(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWebGraph>()?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyFcmResult>()?;
    m.add_function(wrap_pyfunction!(domain_of, m)?)?;
    m.add_function(wrap_pyfunction!(pagerank, m)?)?;
    m.add_function(wrap_pyfunction!(hits, m)?)?;
    m.add_function(wrap_pyfunction!(domain_features, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_labels, m)?)?;
    m.add_function(wrap_pyfunction!(fcm_fit, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(cost_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
