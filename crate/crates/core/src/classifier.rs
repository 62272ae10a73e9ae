//! Cost-sensitive decision tree and confusion-matrix metrics.
//!
//! The tree is a greedy binary CART over numeric features. Spam instances
//! carry weight `cost_ratio` and non-spam instances weight 1, so raising the
//! ratio makes missed spam more expensive both in the Gini split criterion and
//! in the leaf vote.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Cost ratios swept by default.
pub const DEFAULT_COST_RATIOS: [f64; 5] = [1.0, 10.0, 20.0, 30.0, 50.0];

/// Counts with rows = truth, columns = prediction:
///
/// ```text
///               predicted non-spam   predicted spam
/// non-spam              x                  y
/// spam                  z                  w
/// ```
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub w: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.x + self.y + self.z + self.w
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::NonSpam, Label::NonSpam) => self.x += 1,
            (Label::NonSpam, Label::Spam) => self.y += 1,
            (Label::Spam, Label::NonSpam) => self.z += 1,
            (Label::Spam, Label::Spam) => self.w += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.x += other.x;
        self.y += other.y;
        self.z += other.z;
        self.w += other.w;
    }
}

/// Each field is `None` when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let tpr = ratio(cm.w, cm.z + cm.w);
    let fpr = ratio(cm.y, cm.y + cm.x);
    let precision = ratio(cm.w, cm.y + cm.w);
    let f1 = match (precision, tpr) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Metrics {
        tpr,
        fpr,
        precision,
        f1,
    }
}

/// Tallies predictions against truth; `None` truth entries are skipped.
pub fn evaluate(predictions: &[Label], truth: &[Option<Label>]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} truth labels",
            predictions.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, t) in predictions.iter().zip(truth) {
        if let Some(t) = *t {
            cm.record(t, p);
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub cost_ratio: f64,
    pub max_depth: usize,
    pub min_leaf_size: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            cost_ratio: 1.0,
            max_depth: 8,
            min_leaf_size: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        label: Label,
        /// Raw instance counts `[non-spam, spam]`.
        counts: [usize; 2],
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTree {
    pub params: TreeParams,
    pub n_features: usize,
    pub root: TreeNode,
}

impl CostTree {
    pub fn predict(&self, features: &[f64]) -> Result<Label> {
        if features.len() != self.n_features {
            return Err(Error::invalid(format!(
                "tree expects {} features, got {}",
                self.n_features,
                features.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return Ok(*label),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if features[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }
}

/// Weighted Gini impurity of a node holding `neg` non-spam weight and `pos`
/// spam weight.
fn gini(neg: f64, pos: f64) -> f64 {
    let total = neg + pos;
    if total == 0.0 {
        return 0.0;
    }
    let (pn, pp) = (neg / total, pos / total);
    1.0 - pn * pn - pp * pp
}

fn leaf_label(neg_w: f64, pos_w: f64) -> Label {
    if pos_w >= neg_w {
        Label::Spam
    } else {
        Label::NonSpam
    }
}

struct Trainer<'a> {
    data: &'a [Vec<f64>],
    labels: &'a [Label],
    params: TreeParams,
}

impl Trainer<'_> {
    fn weight(&self, i: usize) -> f64 {
        if self.labels[i].is_spam() {
            self.params.cost_ratio
        } else {
            1.0
        }
    }

    fn build(&self, idx: &[usize], depth: usize) -> TreeNode {
        let (mut neg_w, mut pos_w) = (0.0, 0.0);
        let mut counts = [0usize; 2];
        for &i in idx {
            if self.labels[i].is_spam() {
                pos_w += self.weight(i);
                counts[1] += 1;
            } else {
                neg_w += self.weight(i);
                counts[0] += 1;
            }
        }
        let leaf = TreeNode::Leaf {
            label: leaf_label(neg_w, pos_w),
            counts,
        };
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf_size.max(1) {
            return leaf;
        }

        let parent = gini(neg_w, pos_w);
        let total_w = neg_w + pos_w;
        let mut best: Option<(f64, usize, f64)> = None;
        let n_features = self.data[idx[0]].len();
        for f in 0..n_features {
            let mut order: Vec<usize> = idx.to_vec();
            order.sort_by(|&a, &b| self.data[a][f].total_cmp(&self.data[b][f]).then(a.cmp(&b)));
            let (mut l_neg, mut l_pos) = (0.0, 0.0);
            for split in 1..order.len() {
                let prev = order[split - 1];
                if self.labels[prev].is_spam() {
                    l_pos += self.weight(prev);
                } else {
                    l_neg += self.weight(prev);
                }
                let (lo, hi) = (self.data[prev][f], self.data[order[split]][f]);
                if lo == hi {
                    continue;
                }
                if split < self.params.min_leaf_size || order.len() - split < self.params.min_leaf_size {
                    continue;
                }
                let (r_neg, r_pos) = (neg_w - l_neg, pos_w - l_pos);
                let score = ((l_neg + l_pos) * gini(l_neg, l_pos) + (r_neg + r_pos) * gini(r_neg, r_pos)) / total_w;
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, f, lo + (hi - lo) / 2.0));
                }
            }
        }

        match best {
            Some((score, feature, threshold)) if score < parent => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| self.data[i][feature] <= threshold);
                TreeNode::Split {
                    feature,
                    threshold,
                    left: Box::new(self.build(&left, depth + 1)),
                    right: Box::new(self.build(&right, depth + 1)),
                }
            }
            _ => leaf,
        }
    }
}

/// Grows a cost-sensitive tree.
///
/// Candidate thresholds are midpoints between consecutive distinct values;
/// features are scanned in index order and thresholds in ascending order, and
/// the first strictly best split wins. A split must leave at least
/// `min_leaf_size` instances on each side and strictly lower the weighted Gini
/// impurity. Leaves vote by total weight, ties going to spam.
pub fn train(data: &[Vec<f64>], labels: &[Label], params: TreeParams) -> Result<CostTree> {
    if data.is_empty() {
        return Err(Error::invalid("no training instances"));
    }
    if data.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} rows for {} labels",
            data.len(),
            labels.len()
        )));
    }
    let n_features = data[0].len();
    if data.iter().any(|r| r.len() != n_features) {
        return Err(Error::invalid("rows have differing feature counts"));
    }
    if !(params.cost_ratio >= 1.0 && params.cost_ratio.is_finite()) {
        return Err(Error::invalid(format!(
            "cost_ratio must be >= 1, got {}",
            params.cost_ratio
        )));
    }
    let trainer = Trainer { data, labels, params };
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(CostTree {
        params,
        n_features,
        root: trainer.build(&idx, 0),
    })
}

/// Like [`train`], but labels arrive as raw integers and must be 0 or 1.
pub fn train_binary(data: &[Vec<f64>], labels: &[u8], params: TreeParams) -> Result<CostTree> {
    let labels = labels
        .iter()
        .map(|&l| match l {
            0 => Ok(Label::NonSpam),
            1 => Ok(Label::Spam),
            other => Err(Error::invalid(format!("non-binary label {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    train(data, &labels, params)
}

/// Stratified fold ids: each class is shuffled with the seed and dealt
/// round-robin over `k` folds.
pub fn fold_assignment(labels: &[Label], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut dealt = 0;
    for class in [Label::NonSpam, Label::Spam] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = dealt % k;
            dealt += 1;
        }
    }
    folds
}

/// Out-of-fold predictions from `k`-fold cross-validation.
pub fn cross_val_predict(
    data: &[Vec<f64>],
    labels: &[Label],
    params: TreeParams,
    k: usize,
    seed: u64,
) -> Result<Vec<Label>> {
    if k < 2 {
        return Err(Error::invalid("need at least 2 folds"));
    }
    if data.len() < k {
        return Err(Error::invalid(format!("{} instances for {k} folds", data.len())));
    }
    if data.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} rows for {} labels",
            data.len(),
            labels.len()
        )));
    }
    let folds = fold_assignment(labels, k, seed);
    let mut predictions = vec![Label::NonSpam; data.len()];
    for fold in 0..k {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| folds[i] != fold);
        if test_idx.is_empty() {
            continue;
        }
        let rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| data[i].clone()).collect();
        let ys: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
        let tree = train(&rows, &ys, params)?;
        for i in test_idx {
            predictions[i] = tree.predict(&data[i])?;
        }
    }
    Ok(predictions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cost_ratio: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Cross-validated metrics for each cost ratio, in the order given.
pub fn cost_sweep(
    data: &[Vec<f64>],
    labels: &[Label],
    ratios: &[f64],
    base: TreeParams,
    k: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let truth: Vec<Option<Label>> = labels.iter().copied().map(Some).collect();
    ratios
        .iter()
        .map(|&cost_ratio| {
            let params = TreeParams { cost_ratio, ..base };
            let preds = cross_val_predict(data, labels, params, k, seed)?;
            let confusion = evaluate(&preds, &truth)?;
            Ok(SweepRow {
                cost_ratio,
                confusion,
                metrics: metrics(&confusion),
            })
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or("NA".to_string(), |x| format!("{x:.6}"))
}

/// `cost_ratio,tpr,fpr,precision,f1,x,y,z,w`, undefined metrics as `NA`.
pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "cost_ratio,tpr,fpr,precision,f1,x,y,z,w")?;
    for r in rows {
        let m = &r.metrics;
        let c = &r.confusion;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.cost_ratio,
            cell(m.tpr),
            cell(m.fpr),
            cell(m.precision),
            cell(m.f1),
            c.x,
            c.y,
            c.z,
            c.w
        )?;
    }
    Ok(())
}

/// One metrics row of a grouped/ungrouped comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub grouping: String,
    pub model: String,
    pub metrics: Option<Metrics>,
}

/// `grouping,model,tpr,fpr,precision,f1`; a missing row prints `NA` cells.
pub fn write_metrics_csv<W: Write>(mut w: W, rows: &[MetricsRow]) -> std::io::Result<()> {
    writeln!(w, "grouping,model,tpr,fpr,precision,f1")?;
    for r in rows {
        let m = r.metrics.unwrap_or(Metrics {
            tpr: None,
            fpr: None,
            precision: None,
            f1: None,
        });
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.grouping,
            r.model,
            cell(m.tpr),
            cell(m.fpr),
            cell(m.precision),
            cell(m.f1)
        )?;
    }
    Ok(())
}

/// Aligns a domain → label map with truth, for [`evaluate`].
pub fn align<'a>(
    predictions: impl IntoIterator<Item = (&'a String, &'a Label)>,
    truth: &BTreeMap<String, Label>,
) -> (Vec<Label>, Vec<Option<Label>>) {
    predictions
        .into_iter()
        .map(|(d, &l)| (l, truth.get(d).copied()))
        .unzip()
}
