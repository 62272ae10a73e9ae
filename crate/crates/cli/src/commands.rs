use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use linkspam::classifier::{self, MetricsRow, TreeParams};
use linkspam::detector::{self, DetectorConfig};
use linkspam::dot::domain_graph_dot;
use linkspam::fcmclust::{self, FcmConfig, MembershipMatrix};
use linkspam::features::{self, FeatureVector};
use linkspam::label::{read_labels, write_labels};
use linkspam::linkrank::{self, RankConfig};
use linkspam::synthcorpus::{self, CorpusSpec};
use linkspam::{DomainClustering, Label, WebGraph};
use serde_json::json;

use crate::{DetectArgs, EvaluateArgs, RankArgs, SweepArgs, SynthArgs};

fn load_graph(path: &Path) -> Result<WebGraph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    WebGraph::load_edge_list(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn load_labels(path: &Path) -> Result<BTreeMap<String, Label>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_labels(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Creates `dir/name` and hands a buffered writer to `body`.
fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn write_manifest(dir: &Path, manifest: serde_json::Value) -> Result<()> {
    write_file(dir, "manifest.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    })
}

fn make_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn rank_config(args: &RankArgs) -> Result<RankConfig> {
    let config = RankConfig {
        alpha: args.alpha,
        epsilon: args.epsilon,
        max_iterations: args.max_iter,
    };
    config.validate()?;
    Ok(config)
}

fn rank_json(args: &RankArgs) -> serde_json::Value {
    json!({
        "alpha": args.alpha,
        "epsilon": args.epsilon,
        "max_iter": args.max_iter,
        "depth": args.depth,
    })
}

struct Ranked {
    pagerank: linkrank::PageRankScores,
    hits: linkrank::HitsScores,
    features: BTreeMap<String, FeatureVector>,
}

fn rank_and_extract(graph: &WebGraph, clustering: &DomainClustering, args: &RankArgs) -> Result<Ranked> {
    ensure!(!graph.is_empty(), "edge list holds no edges");
    let config = rank_config(args)?;
    let pagerank = linkrank::pagerank(graph, &config)?;
    let hits = linkrank::hits(graph, &config)?;
    if !pagerank.converged || !hits.converged {
        eprintln!("warning: ranking stopped at the iteration cap before reaching epsilon");
    }
    let features = features::extract_features(graph, clustering, &pagerank, &hits, args.depth)?;
    Ok(Ranked {
        pagerank,
        hits,
        features,
    })
}

pub fn ingest(edges: &Path) -> Result<()> {
    let graph = load_graph(edges)?;
    let clustering = DomainClustering::build(&graph);
    println!("pages\t{}", graph.node_count());
    println!("edges\t{}", graph.edge_count());
    println!("domains\t{}", clustering.domain_count());
    println!("domain_edges\t{}", clustering.domain_edge_count());
    Ok(())
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    let detector_config = DetectorConfig {
        traversal_limit: args.tra_lvl,
        threshold: args.tv,
    };
    detector_config.validate()?;
    let graph = load_graph(&args.edges)?;
    let clustering = DomainClustering::build(&graph);
    let ranked = rank_and_extract(&graph, &clustering, &args.rank)?;

    let domains: Vec<&String> = ranked.features.keys().collect();
    let rows: Vec<Vec<f64>> = ranked.features.values().map(FeatureVector::to_row).collect();
    let fcm_config = FcmConfig {
        clusters: args.clusters,
        fuzzifier: args.fuzzifier,
        epsilon: args.fcm_epsilon,
        max_iterations: args.fcm_max_iter,
        seed: args.seed,
    };
    let fit = fcmclust::fcm_fit(&fcmclust::standardize(&rows), &fcm_config).context("clustering")?;
    let verdicts = detector::run_all(&clustering, &detector_config)?;
    let grouped = if args.group {
        Some(detector::group_smooth(
            &verdicts,
            &fit.memberships,
            args.tau_hi,
            args.tau_lo,
        )?)
    } else {
        None
    };

    let out = &args.out;
    make_dir(out)?;
    write_file(out, "pagerank.tsv", |w| {
        linkrank::write_scores_tsv(w, &graph, &ranked.pagerank.scores)
    })?;
    write_file(out, "authority.tsv", |w| {
        linkrank::write_scores_tsv(w, &graph, &ranked.hits.authority)
    })?;
    write_file(out, "hub.tsv", |w| {
        linkrank::write_scores_tsv(w, &graph, &ranked.hits.hub)
    })?;
    write_file(out, "features.csv", |w| {
        features::write_features_csv(w, &ranked.features)
    })?;
    write_file(out, "memberships.csv", |w| fit.memberships.write_csv(w, &domains))?;
    write_file(out, "verdicts.json", |w| {
        detector::write_verdicts_json(&mut *w, &verdicts)?;
        writeln!(w)
    })?;
    write_file(out, "verdicts.tsv", |w| detector::write_verdicts_tsv(w, &verdicts))?;
    if let Some(g) = &grouped {
        write_file(out, "grouped.tsv", |w| {
            write_labels(w, g.iter().map(|(d, l)| (d.as_str(), *l)))
        })?;
    }
    write_manifest(
        out,
        json!({
            "command": "detect",
            "edges": args.edges,
            "rank": rank_json(&args.rank),
            "fcm": {
                "clusters": args.clusters,
                "fuzzifier": args.fuzzifier,
                "epsilon": args.fcm_epsilon,
                "max_iter": args.fcm_max_iter,
                "iterations": fit.iterations,
                "converged": fit.converged,
            },
            "detector": { "tra_lvl": args.tra_lvl, "tv": args.tv },
            "group": args.group.then(|| json!({ "tau_hi": args.tau_hi, "tau_lo": args.tau_lo })),
            "seed": args.seed,
            "pages": graph.node_count(),
            "domains": clustering.domain_count(),
        }),
    )?;

    let spam = verdicts.iter().filter(|v| v.label.is_spam()).count();
    print!("{} domains, {spam} marked spam", verdicts.len());
    if let Some(g) = &grouped {
        print!(", {} after grouping", g.values().filter(|l| l.is_spam()).count());
    }
    println!();
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let truth = load_labels(&args.labels)?;
    let verdicts = load_labels(&args.run.join("verdicts.tsv"))?;
    let features_path = args.run.join("features.csv");
    let features = features::read_feature_rows(&read_text(&features_path)?)
        .with_context(|| features_path.display().to_string())?;
    let memberships_path = args.run.join("memberships.csv");
    let (domains, memberships) = MembershipMatrix::read_csv(&read_text(&memberships_path)?)
        .with_context(|| memberships_path.display().to_string())?;
    if !domains.iter().eq(verdicts.keys()) || !domains.iter().eq(features.keys()) {
        bail!(
            "verdicts, features and memberships in {} cover different domains",
            args.run.display()
        );
    }

    let labeled: Vec<usize> = (0..domains.len())
        .filter(|&i| truth.contains_key(&domains[i]))
        .collect();
    let skipped = domains.len() - labeled.len();
    if skipped > 0 {
        eprintln!("warning: {skipped} domain(s) have no label and were skipped");
    }
    ensure!(!labeled.is_empty(), "no domain in the run has a label");

    let truth_of: Vec<Option<Label>> = labeled.iter().map(|&i| truth.get(&domains[i]).copied()).collect();
    let labels: Vec<Label> = truth_of.iter().map(|l| l.expect("labeled")).collect();
    let rows: Vec<Vec<f64>> = labeled.iter().map(|&i| features[&domains[i]].clone()).collect();
    let params = TreeParams {
        cost_ratio: args.cost_ratio,
        ..TreeParams::default()
    };
    let base = classifier::cross_val_predict(&rows, &labels, params, args.folds, args.seed).context("base model")?;
    let sub_memberships = MembershipMatrix::from_rows(labeled.iter().map(|&i| memberships.row(i).to_vec()).collect())?;
    let base_grouped = detector::smooth_labels(&base, &sub_memberships, args.tau_hi, args.tau_lo)?;

    let cluster_all: Vec<Label> = domains.iter().map(|d| verdicts[d]).collect();
    let cluster_grouped_all = detector::smooth_labels(&cluster_all, &memberships, args.tau_hi, args.tau_lo)?;
    let pick = |all: &[Label]| -> Vec<Label> { labeled.iter().map(|&i| all[i]).collect() };

    let score = |grouping: &str, model: &str, preds: &[Label]| -> Result<MetricsRow> {
        let cm = classifier::evaluate(preds, &truth_of)?;
        Ok(MetricsRow {
            grouping: grouping.into(),
            model: model.into(),
            metrics: Some(classifier::metrics(&cm)),
        })
    };
    let table = vec![
        score("without", "base", &base)?,
        score("without", "cluster", &pick(&cluster_all))?,
        score("with", "base", &base_grouped)?,
        score("with", "cluster", &pick(&cluster_grouped_all))?,
    ];

    let out = args.out.clone().unwrap_or_else(|| args.run.clone());
    make_dir(&out)?;
    write_file(&out, "metrics.csv", |w| classifier::write_metrics_csv(w, &table))?;
    classifier::write_metrics_csv(std::io::stdout().lock(), &table)?;
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    ensure!(!args.cost_ratios.is_empty(), "no cost ratios given");
    let graph = load_graph(&args.edges)?;
    let truth = load_labels(&args.labels)?;
    let clustering = DomainClustering::build(&graph);
    let ranked = rank_and_extract(&graph, &clustering, &args.rank)?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (domain, f) in &ranked.features {
        if let Some(&l) = truth.get(domain) {
            rows.push(f.to_row());
            labels.push(l);
        }
    }
    let skipped = ranked.features.len() - rows.len();
    if skipped > 0 {
        eprintln!("warning: {skipped} domain(s) have no label and were skipped");
    }
    ensure!(!rows.is_empty(), "no domain in the graph has a label");

    let base = TreeParams {
        cost_ratio: 1.0,
        max_depth: args.max_depth,
        min_leaf_size: args.min_leaf,
    };
    let table = classifier::cost_sweep(&rows, &labels, &args.cost_ratios, base, args.folds, args.seed)?;
    make_dir(&args.out)?;
    write_file(&args.out, "sweep.csv", |w| classifier::write_sweep_csv(w, &table))?;
    write_manifest(
        &args.out,
        json!({
            "command": "sweep",
            "edges": args.edges,
            "labels": args.labels,
            "rank": rank_json(&args.rank),
            "cost_ratios": args.cost_ratios,
            "folds": args.folds,
            "max_depth": args.max_depth,
            "min_leaf": args.min_leaf,
            "seed": args.seed,
            "instances": rows.len(),
        }),
    )?;
    classifier::write_sweep_csv(std::io::stdout().lock(), &table)?;
    Ok(())
}

pub fn export_dot(edges: &Path, labels: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let graph = load_graph(edges)?;
    let labels = labels.map(load_labels).transpose()?.unwrap_or_default();
    let dot = domain_graph_dot(&DomainClustering::build(&graph), &labels);
    match out {
        Some(path) => fs::write(path, dot).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}

fn page_range(s: &str) -> Result<(usize, usize)> {
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .with_context(|| format!("bad page range `{s}`"))
    };
    match s.split_once(':') {
        Some((lo, hi)) => Ok((parse(lo)?, parse(hi)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let spec = CorpusSpec {
        honest_domains: args.honest,
        pages_per_domain: page_range(&args.pages)?,
        attachment: args.attachment,
        farms: args.farms.iter().map(|f| f.0).collect(),
        seed: args.seed,
    };
    let corpus = synthcorpus::generate(&spec)?;
    let out: &PathBuf = &args.out;
    make_dir(out)?;
    write_file(out, "edges.tsv", |w| corpus.write_edges(w))?;
    write_file(out, "labels.tsv", |w| corpus.write_labels(w))?;
    write_manifest(out, json!({ "command": "synth", "spec": spec }))?;
    println!(
        "{} pages, {} edges, {} domains ({} spam)",
        corpus.graph.node_count(),
        corpus.graph.edge_count(),
        corpus.clustering.domain_count(),
        corpus.spam_domains().len()
    );
    Ok(())
}
