//! Fuzzy c-means clustering.
//!
//! Each point `y` carries a membership `V_k(y)` in every cluster `k`, with
//! rows summing to one. Centres are membership-weighted means
//!
//! ```text
//! center_k = sum_y V_k(y)^m * y / sum_y V_k(y)^m
//! ```
//!
//! and memberships are recomputed from centre distances as
//!
//! ```text
//! V_k(y) = 1 / sum_j (d(center_k, y) / d(center_j, y))^(2 / (m - 1))
//! ```
//!
//! The fit alternates the two updates from a seeded random membership matrix
//! until no membership moves by more than `epsilon`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmConfig {
    pub clusters: usize,
    /// Fuzzifier `m`, strictly greater than 1.
    pub fuzzifier: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        FcmConfig {
            clusters: 2,
            fuzzifier: 2.0,
            epsilon: 1e-6,
            max_iterations: 300,
            seed: 0,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self, points: usize) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::invalid("cluster count must be >= 1"));
        }
        if self.clusters > points {
            return Err(Error::invalid(format!(
                "cluster count {} exceeds the number of points {points}",
                self.clusters
            )));
        }
        check_fuzzifier(self.fuzzifier)?;
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

fn check_fuzzifier(m: f64) -> Result<()> {
    if m > 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("fuzzifier must be a finite value > 1, got {m}")))
    }
}

/// Row `y`, column `k` holds `V_k(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    rows: Vec<Vec<f64>>,
}

impl MembershipMatrix {
    /// Validates shape, range and the unit row-sum constraint (to 1e-9).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::invalid(format!(
                    "membership row {i} has {} columns, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid(format!("membership row {i} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("membership row {i} sums to {s}")));
            }
        }
        Ok(MembershipMatrix { rows })
    }

    /// Uniform draws per entry, each row normalized.
    pub fn random<R: Rng>(points: usize, clusters: usize, rng: &mut R) -> Self {
        let rows = (0..points)
            .map(|_| {
                let raw: Vec<f64> = (0..clusters).map(|_| rng.random::<f64>() + f64::EPSILON).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / s).collect()
            })
            .collect();
        MembershipMatrix { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, point: usize) -> &[f64] {
        &self.rows[point]
    }

    pub fn n_points(&self) -> usize {
        self.rows.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Cluster with the largest membership; the lowest index wins ties.
    pub fn argmax(&self, point: usize) -> usize {
        let row = &self.rows[point];
        let mut best = 0;
        for k in 1..row.len() {
            if row[k] > row[best] {
                best = k;
            }
        }
        best
    }

    pub fn max_abs_change(&self, other: &MembershipMatrix) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV: `domain,c0,c1,...`, one row per label in order.
    pub fn write_csv<W: Write, S: AsRef<str>>(&self, mut w: W, labels: &[S]) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.n_clusters()).map(|k| format!("c{k}")).collect();
        writeln!(w, "domain,{}", header.join(","))?;
        for (label, row) in labels.iter().zip(&self.rows) {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(w, "{},{}", label.as_ref(), cells.join(","))?;
        }
        Ok(())
    }

    /// Parses [`MembershipMatrix::write_csv`] output.
    pub fn read_csv(text: &str) -> Result<(Vec<String>, Self)> {
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            labels.push(fields.next().unwrap_or_default().to_string());
            let row = fields
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            rows.push(row);
        }
        Ok((labels, MembershipMatrix::from_rows(rows)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centroids(pub Vec<Vec<f64>>);

impl Centroids {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct CenterUpdate {
    pub centroids: Centroids,
    /// Clusters whose weight vanished and were re-seeded on a random data point.
    pub reseeded: Vec<usize>,
}

fn check_data(data: &[Vec<f64>]) -> Result<usize> {
    let dim = data
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("no data points"))?;
    if data.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("data points have differing dimensions"));
    }
    Ok(dim)
}

/// Membership-weighted centroids.
pub fn update_centers<R: Rng>(
    data: &[Vec<f64>],
    memberships: &MembershipMatrix,
    fuzzifier: f64,
    rng: &mut R,
) -> Result<CenterUpdate> {
    check_fuzzifier(fuzzifier)?;
    let dim = check_data(data)?;
    if memberships.n_points() != data.len() {
        return Err(Error::invalid(format!(
            "membership matrix has {} rows for {} points",
            memberships.n_points(),
            data.len()
        )));
    }
    let k = memberships.n_clusters();
    let mut centroids = vec![vec![0.0; dim]; k];
    let mut weights = vec![0.0; k];
    for (point, row) in data.iter().zip(memberships.rows()) {
        for (c, &v) in row.iter().enumerate() {
            let w = v.powf(fuzzifier);
            weights[c] += w;
            for (acc, &x) in centroids[c].iter_mut().zip(point) {
                *acc += w * x;
            }
        }
    }
    let mut reseeded = Vec::new();
    for (c, centre) in centroids.iter_mut().enumerate() {
        if weights[c] > 0.0 {
            centre.iter_mut().for_each(|x| *x /= weights[c]);
        } else {
            *centre = data[rng.random_range(0..data.len())].clone();
            reseeded.push(c);
        }
    }
    Ok(CenterUpdate {
        centroids: Centroids(centroids),
        reseeded,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Memberships from centroid distances. A point sitting exactly on one or
/// more centroids splits its membership evenly among them.
pub fn update_memberships(data: &[Vec<f64>], centroids: &Centroids, fuzzifier: f64) -> Result<MembershipMatrix> {
    check_fuzzifier(fuzzifier)?;
    if centroids.0.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("centroids must be finite"));
    }
    let exponent = 2.0 / (fuzzifier - 1.0);
    let k = centroids.len();
    let rows = data
        .iter()
        .map(|y| {
            let dist: Vec<f64> = centroids.0.iter().map(|c| euclidean(c, y)).collect();
            let hits = dist.iter().filter(|&&d| d == 0.0).count();
            if hits > 0 {
                let share = 1.0 / hits as f64;
                return dist.iter().map(|&d| if d == 0.0 { share } else { 0.0 }).collect();
            }
            (0..k)
                .map(|c| {
                    let denom: f64 = dist.iter().map(|&dj| (dist[c] / dj).powf(exponent)).sum();
                    1.0 / denom
                })
                .collect()
        })
        .collect();
    Ok(MembershipMatrix { rows })
}

/// J = sum_y sum_k V_k(y)^m * d(center_k, y)^2
pub fn objective(data: &[Vec<f64>], centroids: &Centroids, memberships: &MembershipMatrix, fuzzifier: f64) -> f64 {
    data.iter()
        .zip(memberships.rows())
        .map(|(y, row)| {
            row.iter()
                .zip(&centroids.0)
                .map(|(&v, c)| v.powf(fuzzifier) * euclidean(c, y).powi(2))
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct FcmFit {
    pub centroids: Centroids,
    pub memberships: MembershipMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each iteration.
    pub objective_trace: Vec<f64>,
    /// Total number of centroid re-seeds across the run.
    pub reseeds: usize,
}

pub fn fcm_fit(data: &[Vec<f64>], config: &FcmConfig) -> Result<FcmFit> {
    check_data(data)?;
    config.validate(data.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut memberships = MembershipMatrix::random(data.len(), config.clusters, &mut rng);
    let mut trace = Vec::new();
    let mut reseeds = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut centroids = Centroids(Vec::new());

    while iterations < config.max_iterations {
        iterations += 1;
        let update = update_centers(data, &memberships, config.fuzzifier, &mut rng)?;
        reseeds += update.reseeded.len();
        centroids = update.centroids;
        let next = update_memberships(data, &centroids, config.fuzzifier)?;
        trace.push(objective(data, &centroids, &next, config.fuzzifier));
        let change = next.max_abs_change(&memberships);
        memberships = next;
        if change <= config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(FcmFit {
        centroids,
        memberships,
        iterations,
        converged,
        objective_trace: trace,
        reseeds,
    })
}

/// Column-wise z-scores; constant columns become all zero.
pub fn standardize(data: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(dim) = data.first().map(Vec::len) else {
        return Vec::new();
    };
    let n = data.len() as f64;
    let mut out = data.to_vec();
    for j in 0..dim {
        let mean = data.iter().map(|r| r[j]).sum::<f64>() / n;
        let sd = (data.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
        for row in out.iter_mut() {
            row[j] = if sd > 0.0 { (row[j] - mean) / sd } else { 0.0 };
        }
    }
    out
}
