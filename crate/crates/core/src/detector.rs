//! Domain-cluster link-farm detection.
//!
//! For a probed domain `w` the detector gathers IN(w), the external domains
//! linking into `w`, and OUT(w), the external domains reachable from `w` by a
//! breadth-first walk over the domain graph that continues for
//! `traversal_limit` levels past the first hop. A domain whose IN and OUT sets
//! share at least `threshold` members sits in a densely reciprocating
//! neighbourhood and is marked spam.
//!
//! [`group_smooth`] optionally propagates verdicts through fuzzy clusters: a
//! cluster that is mostly spam pulls all of its members to spam, and a cluster
//! that is almost entirely clean clears them.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fcmclust::MembershipMatrix;
use crate::label::Label;
use crate::webgraph::DomainClustering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DetectorConfig {
    /// Extra traversal levels past the first outgoing hop.
    pub traversal_limit: usize,
    /// Minimum IN ∩ OUT size for a spam verdict, at least 1.
    pub threshold: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            traversal_limit: 2,
            threshold: 3,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold == 0 {
            return Err(Error::invalid("threshold must be >= 1"));
        }
        Ok(())
    }
}

/// Cursor state of the outgoing traversal.
#[derive(Debug, Clone)]
pub struct TraversalState {
    pub cursor: usize,
    pub current_level: usize,
    pub visited: BTreeSet<usize>,
    pub collected_out: BTreeSet<usize>,
}

impl TraversalState {
    pub fn start(origin: usize) -> Self {
        TraversalState {
            cursor: origin,
            current_level: 0,
            visited: BTreeSet::from([origin]),
            collected_out: BTreeSet::new(),
        }
    }

    /// Expands one level from `frontier`, returning the newly reached domains.
    fn expand(&mut self, clustering: &DomainClustering, frontier: &[usize]) -> Vec<usize> {
        let mut next = Vec::new();
        for &d in frontier {
            self.cursor = d;
            for &y in clustering.out_ids(d) {
                if self.visited.insert(y) {
                    self.collected_out.insert(y);
                    next.push(y);
                }
            }
        }
        next
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpamVerdict {
    pub domain: String,
    pub label: Label,
    pub intersection_size: usize,
    pub in_set: Vec<String>,
    pub out_set: Vec<String>,
}

pub(crate) fn collect_in_ids(clustering: &DomainClustering, w: usize) -> BTreeSet<usize> {
    clustering.in_ids(w).iter().copied().collect()
}

pub(crate) fn collect_out_ids(clustering: &DomainClustering, w: usize, traversal_limit: usize) -> BTreeSet<usize> {
    let mut state = TraversalState::start(w);
    let mut frontier = vec![w];
    while state.current_level <= traversal_limit && !frontier.is_empty() {
        frontier = state.expand(clustering, &frontier);
        state.current_level += 1;
    }
    state.collected_out
}

fn names(clustering: &DomainClustering, ids: &BTreeSet<usize>) -> BTreeSet<String> {
    ids.iter().map(|&d| clustering.domain(d).to_string()).collect()
}

/// IN(CLUS(w)): external domains with a link into `domain`.
pub fn collect_in(clustering: &DomainClustering, domain: &str) -> Result<BTreeSet<String>> {
    let w = clustering.require(domain)?;
    Ok(names(clustering, &collect_in_ids(clustering, w)))
}

/// OUT(CLUS(w)) up to `traversal_limit` extra levels; `domain` itself is
/// never included.
pub fn collect_out(clustering: &DomainClustering, domain: &str, traversal_limit: usize) -> Result<BTreeSet<String>> {
    let w = clustering.require(domain)?;
    Ok(names(clustering, &collect_out_ids(clustering, w, traversal_limit)))
}

fn mark_id(clustering: &DomainClustering, w: usize, config: &DetectorConfig) -> SpamVerdict {
    let ins = collect_in_ids(clustering, w);
    let outs = collect_out_ids(clustering, w, config.traversal_limit);
    let intersection_size = ins.intersection(&outs).count();
    let label = if intersection_size >= config.threshold {
        Label::Spam
    } else {
        Label::NonSpam
    };
    SpamVerdict {
        domain: clustering.domain(w).to_string(),
        label,
        intersection_size,
        in_set: names(clustering, &ins).into_iter().collect(),
        out_set: names(clustering, &outs).into_iter().collect(),
    }
}

pub fn mark(clustering: &DomainClustering, domain: &str, config: &DetectorConfig) -> Result<SpamVerdict> {
    config.validate()?;
    let w = clustering.require(domain)?;
    Ok(mark_id(clustering, w, config))
}

/// Verdicts for every domain, in domain-identifier order.
pub fn run_all(clustering: &DomainClustering, config: &DetectorConfig) -> Result<Vec<SpamVerdict>> {
    config.validate()?;
    Ok((0..clustering.domain_count())
        .map(|w| mark_id(clustering, w, config))
        .collect())
}

/// Per-cluster spam share `s_k` weighted by membership, followed by the
/// relabelling rule: argmax cluster with `s_k >= tau_hi` → spam, with
/// `s_k <= tau_lo` → non-spam, otherwise the verdict stands.
///
/// Row `i` of `memberships` belongs to `verdicts[i]`.
pub fn group_smooth(
    verdicts: &[SpamVerdict],
    memberships: &MembershipMatrix,
    tau_hi: f64,
    tau_lo: f64,
) -> Result<BTreeMap<String, Label>> {
    let labels: Vec<Label> = verdicts.iter().map(|v| v.label).collect();
    let smoothed = smooth_labels(&labels, memberships, tau_hi, tau_lo)?;
    Ok(verdicts
        .iter()
        .zip(smoothed)
        .map(|(v, l)| (v.domain.clone(), l))
        .collect())
}

/// [`group_smooth`] over a bare label vector aligned with `memberships`.
pub fn smooth_labels(labels: &[Label], memberships: &MembershipMatrix, tau_hi: f64, tau_lo: f64) -> Result<Vec<Label>> {
    if !(0.0 <= tau_lo && tau_lo <= tau_hi && tau_hi <= 1.0) {
        return Err(Error::invalid(format!(
            "need 0 <= tau_lo <= tau_hi <= 1, got tau_lo={tau_lo} tau_hi={tau_hi}"
        )));
    }
    if memberships.n_points() != labels.len() {
        return Err(Error::invalid(format!(
            "membership matrix has {} rows for {} verdicts",
            memberships.n_points(),
            labels.len()
        )));
    }
    let shares = spam_shares(labels, memberships);
    Ok(labels
        .iter()
        .enumerate()
        .map(|(i, &own)| match shares[memberships.argmax(i)] {
            Some(s) if s >= tau_hi => Label::Spam,
            Some(s) if s <= tau_lo => Label::NonSpam,
            _ => own,
        })
        .collect())
}

/// `s_k` per cluster; `None` for a cluster carrying no membership mass.
pub fn spam_shares(labels: &[Label], memberships: &MembershipMatrix) -> Vec<Option<f64>> {
    let k = memberships.n_clusters();
    let mut mass = vec![0.0; k];
    let mut spam = vec![0.0; k];
    for (row, label) in memberships.rows().iter().zip(labels) {
        for (c, &v) in row.iter().enumerate() {
            mass[c] += v;
            if label.is_spam() {
                spam[c] += v;
            }
        }
    }
    mass.iter()
        .zip(&spam)
        .map(|(&m, &s)| (m > 0.0).then(|| s / m))
        .collect()
}

pub fn write_verdicts_json<W: Write>(w: W, verdicts: &[SpamVerdict]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(w, verdicts).map_err(std::io::Error::other)
}

pub fn write_verdicts_tsv<W: Write>(w: W, verdicts: &[SpamVerdict]) -> std::io::Result<()> {
    crate::label::write_labels(w, verdicts.iter().map(|v| (v.domain.as_str(), v.label)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::webgraph::WebGraph;

    fn clustering(edges: &[(&str, &str)]) -> DomainClustering {
        DomainClustering::build(&WebGraph::from_edges(edges.iter().copied()))
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn clique(n: usize) -> DomainClustering {
        let names: Vec<String> = (0..n).map(|i| format!("d{i}.com")).collect();
        let edges: Vec<(String, String)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| (names[i].clone(), names[j].clone()))
            .collect();
        DomainClustering::build(&WebGraph::from_edges(edges))
    }

    #[test]
    fn chain_in_and_out() {
        let c = clustering(&[("d1.com", "d2.com"), ("d2.com", "d3.com"), ("d3.com", "d4.com")]);
        assert_eq!(collect_in(&c, "d2.com").unwrap(), set(&["d1.com"]));
        assert_eq!(collect_out(&c, "d1.com", 0).unwrap(), set(&["d2.com"]));
        assert_eq!(collect_out(&c, "d1.com", 1).unwrap(), set(&["d2.com", "d3.com"]));
        assert_eq!(
            collect_out(&c, "d1.com", 9).unwrap(),
            set(&["d2.com", "d3.com", "d4.com"])
        );
        assert!(matches!(collect_out(&c, "zz.com", 0), Err(Error::NotFound(_))));
    }

    #[test]
    fn out_excludes_origin_on_cycle() {
        let c = clustering(&[("a.com", "b.com"), ("b.com", "a.com")]);
        assert_eq!(collect_out(&c, "a.com", 5).unwrap(), set(&["b.com"]));
    }

    #[test]
    fn clique_verdicts() {
        let c = clique(4);
        let cfg = DetectorConfig {
            traversal_limit: 0,
            threshold: 2,
        };
        for d in c.domains() {
            assert_eq!(collect_in(&c, d).unwrap().len(), 3);
            assert_eq!(collect_out(&c, d, 0).unwrap().len(), 3);
            let v = mark(&c, d, &cfg).unwrap();
            assert_eq!(v.intersection_size, 3);
            assert_eq!(v.label, Label::Spam);
        }
    }

    #[test]
    fn chain_middle_is_clean() {
        let c = clustering(&[("d1.com", "d2.com"), ("d2.com", "d3.com")]);
        for threshold in 1..4 {
            let v = mark(
                &c,
                "d2.com",
                &DetectorConfig {
                    traversal_limit: 2,
                    threshold,
                },
            )
            .unwrap();
            assert_eq!(v.intersection_size, 0);
            assert_eq!(v.label, Label::NonSpam);
            assert_eq!(v.in_set, vec!["d1.com"]);
            assert_eq!(v.out_set, vec!["d3.com"]);
        }
    }

    #[test]
    fn mutual_pair_is_spam_at_threshold_one() {
        let c = clustering(&[("a.com", "b.com"), ("b.com", "a.com")]);
        let cfg = DetectorConfig {
            traversal_limit: 0,
            threshold: 1,
        };
        let all = run_all(&c, &cfg).unwrap();
        assert!(all.iter().all(|v| v.label == Label::Spam && v.intersection_size == 1));
    }

    #[test]
    fn honest_chain_and_empty() {
        let edges: Vec<(String, String)> = (0..4)
            .map(|i| (format!("h{i}.com"), format!("h{}.com", i + 1)))
            .collect();
        let c = DomainClustering::build(&WebGraph::from_edges(edges));
        let all = run_all(&c, &DetectorConfig::default()).unwrap();
        assert_eq!(all.len(), 5);
        assert!(all.iter().all(|v| v.label == Label::NonSpam));

        let empty = clustering(&[]);
        assert!(run_all(&empty, &DetectorConfig::default()).unwrap().is_empty());
        assert!(run_all(
            &empty,
            &DetectorConfig {
                traversal_limit: 0,
                threshold: 0
            }
        )
        .is_err());
    }

    fn verdicts(labels: &[Label]) -> Vec<SpamVerdict> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &label)| SpamVerdict {
                domain: format!("d{i}.com"),
                label,
                intersection_size: 0,
                in_set: vec![],
                out_set: vec![],
            })
            .collect()
    }

    #[test]
    fn smoothing_all_spam_stays_spam() {
        let v = verdicts(&[Label::Spam; 3]);
        let u = MembershipMatrix::from_rows(vec![vec![0.6, 0.4], vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        for (hi, lo) in [(1.0, 1.0), (0.0, 0.0), (0.5, 0.2)] {
            let out = group_smooth(&v, &u, hi, lo).unwrap();
            assert!(out.values().all(|l| l.is_spam()));
        }
    }

    #[test]
    fn smoothing_pulls_stragglers_into_spam_cluster() {
        use Label::*;
        let v = verdicts(&[Spam, Spam, Spam, Spam, NonSpam]);
        let u = MembershipMatrix::from_rows(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.9, 0.1],
            vec![0.6, 0.4],
        ])
        .unwrap();
        // s_0 = 3.9 / 4.5, s_1 = 0.1 / 0.5
        let labels: Vec<Label> = v.iter().map(|x| x.label).collect();
        let shares = spam_shares(&labels, &u);
        assert!((shares[0].unwrap() - 3.9 / 4.5).abs() < 1e-15);
        assert!((shares[1].unwrap() - 0.2).abs() < 1e-15);
        let out = group_smooth(&v, &u, 0.7, 0.1).unwrap();
        assert!(out.values().all(|l| l.is_spam()));
        // below tau_hi nothing moves
        let out = group_smooth(&v, &u, 0.9, 0.1).unwrap();
        assert_eq!(out["d4.com"], NonSpam);
    }

    #[test]
    fn smoothing_clears_and_passes_through() {
        use Label::*;
        let v = verdicts(&[Spam, NonSpam, NonSpam, NonSpam]);
        let u = MembershipMatrix::from_rows(vec![vec![1.0, 0.0]; 4]).unwrap();
        // s_0 = 0.25
        let cleared = group_smooth(&v, &u, 0.9, 0.3).unwrap();
        assert_eq!(cleared["d0.com"], NonSpam);
        let kept = group_smooth(&v, &u, 0.9, 0.2).unwrap();
        assert_eq!(kept["d0.com"], Spam);
        assert_eq!(kept["d1.com"], NonSpam);
    }

    #[test]
    fn smoothing_input_checks() {
        let v = verdicts(&[Label::Spam, Label::NonSpam]);
        let u = MembershipMatrix::from_rows(vec![vec![1.0]]).unwrap();
        assert!(group_smooth(&v, &u, 0.7, 0.2).is_err());
        let u = MembershipMatrix::from_rows(vec![vec![1.0], vec![1.0]]).unwrap();
        assert!(group_smooth(&v, &u, 0.2, 0.7).is_err());
    }

    #[test]
    fn verdict_exports() {
        let c = clustering(&[("a.com", "b.com"), ("b.com", "a.com")]);
        let all = run_all(
            &c,
            &DetectorConfig {
                traversal_limit: 0,
                threshold: 1,
            },
        )
        .unwrap();
        let mut tsv = Vec::new();
        write_verdicts_tsv(&mut tsv, &all).unwrap();
        assert_eq!(String::from_utf8(tsv).unwrap(), "a.com\tspam\nb.com\tspam\n");
        let mut json = Vec::new();
        write_verdicts_json(&mut json, &all).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed[0]["domain"], "a.com");
        assert_eq!(parsed[0]["label"], "spam");
        assert_eq!(parsed[0]["intersection_size"], 1);
        assert_eq!(parsed[0]["in_set"][0], "b.com");
    }
}
