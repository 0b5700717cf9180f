//! Lloyd's k-means over equal-length series with Euclidean distance.
//!
//! Initial centroids are copies of the series at caller-chosen indices, so two
//! different representations of the same dataset can be clustered from the
//! same starting members.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::parallel::Execution;

pub const DEFAULT_MAX_ITERATIONS: usize = 100;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between two equal-length series.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Draws `k` distinct indices out of `0..n` from a seeded ChaCha stream.
pub fn select_initial_centroids(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, n, k).into_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringConfig {
    pub k: usize,
    pub init_indices: Vec<usize>,
    pub max_iterations: usize,
    /// Stop once the relative inertia decrease drops to this value or below.
    pub tolerance: f64,
}

impl ClusteringConfig {
    pub fn new(init_indices: Vec<usize>) -> Self {
        Self {
            k: init_indices.len(),
            init_indices,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::KTooLarge { k: self.k, n });
        }
        if self.init_indices.len() != self.k {
            return Err(Error::InvalidInit(format!(
                "{} indices for k={}",
                self.init_indices.len(),
                self.k
            )));
        }
        let mut seen = vec![false; n];
        for &i in &self.init_indices {
            if i >= n {
                return Err(Error::InvalidInit(format!(
                    "index {i} out of range for {n} series"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInit(format!("duplicate index {i}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidConfig(
                "tolerance must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after every (assign, update) pass.
    pub inertia_trace: Vec<f64>,
}

impl ClusteringResult {
    /// `series_no,cluster_id`, series numbered from 1.
    pub fn labels_csv(&self) -> String {
        let mut out = String::from("series_no,cluster_id\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, l);
        }
        out
    }

    pub fn write_labels_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.labels_csv()).map_err(|e| Error::ReportWriteFailure {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Nearest centroid and squared distance to it; ties go to the lowest id.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn total_inertia(series: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    series
        .iter()
        .zip(labels)
        .map(|(x, &l)| squared_distance(x, &centroids[l]))
        .sum()
}

/// Recomputes centroids as member means. An empty cluster takes over the
/// series farthest from its own (updated) centroid, one cluster at a time.
fn update_centroids(series: &[Vec<f64>], labels: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = series[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &l) in series.iter().zip(labels.iter()) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(x) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let n = counts[j] as f64;
            centroids[j] = sums[j].iter().map(|s| s / n).collect();
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut far = None;
        for (i, x) in series.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = squared_distance(x, &centroids[labels[i]]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            counts[labels[i]] -= 1;
            labels[i] = j;
            counts[j] = 1;
            centroids[j] = series[i].clone();
        }
    }
}

/// Runs Lloyd's algorithm from the series at `cfg.init_indices`.
///
/// Each iteration assigns every series to its nearest centroid and then
/// recomputes centroids. The loop stops when the inertia reaches zero, the
/// assignment stops changing, or the relative inertia decrease is at most
/// `cfg.tolerance`.
pub fn kmeans(
    series: &[Vec<f64>],
    cfg: &ClusteringConfig,
    exec: Execution,
) -> Result<ClusteringResult> {
    let n = series.len();
    cfg.validate(n)?;
    let dim = series[0].len();
    for s in series {
        if s.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: s.len(),
            });
        }
        ensure_finite(s)?;
    }

    let mut centroids: Vec<Vec<f64>> = cfg
        .init_indices
        .iter()
        .map(|&i| series[i].clone())
        .collect();
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iterations {
        let mut assigned: Vec<usize> = exec.map(series, |_, x| nearest(x, &centroids).0);
        let unchanged = assigned == labels;
        update_centroids(series, &mut assigned, &mut centroids);
        labels = assigned;
        let inertia = total_inertia(series, &labels, &centroids);
        let previous = trace.last().copied();
        trace.push(inertia);

        let small_step = previous.is_some_and(|p: f64| p - inertia <= cfg.tolerance * p);
        if inertia == 0.0 || unchanged || small_step {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        inertia: *trace.last().expect("at least one iteration"),
        iterations: trace.len(),
        labels,
        centroids,
        converged,
        inertia_trace: trace,
    })
}
