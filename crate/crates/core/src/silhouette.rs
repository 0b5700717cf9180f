//! Silhouette scores over a Euclidean distance table.
//!
//! For series `i` with cluster `A`, `a(i)` is its mean distance to the other
//! members of `A` and `b(i)` the smallest mean distance to the members of any
//! other cluster; `s(i) = (b - a) / max(a, b)`. Members of singleton clusters
//! score 0. The overall score is the mean of `s(i)`.
//!
//! Callers pass the *raw* series here regardless of which representation
//! produced the labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kmeans::euclidean;
use crate::parallel::Execution;

/// Symmetric `n x n` distance table stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Pairwise Euclidean distances; rows are filled independently.
    pub fn euclidean(series: &[Vec<f64>], exec: Execution) -> Result<Self> {
        let n = series.len();
        if let Some(first) = series.first() {
            for s in series {
                if s.len() != first.len() {
                    return Err(Error::LengthMismatch {
                        left: first.len(),
                        right: s.len(),
                    });
                }
            }
        }
        let rows = exec.map(series, |_, a| {
            series
                .iter()
                .map(|b| euclidean(a, b).expect("lengths checked"))
                .collect::<Vec<_>>()
        });
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    /// Wraps a precomputed row-major table.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: r.len(),
                });
            }
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteReport {
    pub per_series: Vec<f64>,
    pub overall: f64,
}

impl SilhouetteReport {
    /// `series_no,cluster_id,silhouette` rows plus a trailing `overall,<value>`.
    pub fn to_csv(&self, labels: &[usize]) -> String {
        let mut out = String::from("series_no,cluster_id,silhouette\n");
        for (i, (l, s)) in labels.iter().zip(&self.per_series).enumerate() {
            let _ = writeln!(out, "{},{},{:.6}", i + 1, l, s);
        }
        let _ = writeln!(out, "overall,{:.6}", self.overall);
        out
    }

    pub fn write_csv(&self, labels: &[usize], path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv(labels)).map_err(|e| Error::ReportWriteFailure {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

fn distinct_labels(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn sample(i: usize, labels: &[usize], dist: &DistanceMatrix) -> f64 {
    // (sum, count) per cluster, excluding i itself
    let mut per_cluster: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (j, &l) in labels.iter().enumerate() {
        let e = per_cluster.entry(l).or_insert((0.0, 0));
        if j != i {
            e.0 += dist.get(i, j);
            e.1 += 1;
        }
    }
    let (own_sum, own_count) = per_cluster[&labels[i]];
    if own_count == 0 {
        return 0.0;
    }
    let a = own_sum / own_count as f64;
    let b = per_cluster
        .iter()
        .filter(|(&l, _)| l != labels[i])
        .map(|(_, &(sum, count))| sum / count as f64)
        .fold(f64::INFINITY, f64::min);
    let denom = a.max(b);
    if denom > 0.0 {
        (b - a) / denom
    } else {
        0.0
    }
}

/// Silhouette of series `i` under `labels`.
pub fn silhouette_sample(i: usize, labels: &[usize], dist: &DistanceMatrix) -> Result<f64> {
    if labels.len() != dist.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: dist.len(),
        });
    }
    if i >= labels.len() {
        return Err(Error::InvalidConfig(format!(
            "series index {i} out of range"
        )));
    }
    if distinct_labels(labels) < 2 {
        return Err(Error::SingleCluster);
    }
    Ok(sample(i, labels, dist))
}

/// Scores every series from a precomputed distance table.
pub fn silhouette_from_distances(
    labels: &[usize],
    dist: &DistanceMatrix,
    exec: Execution,
) -> Result<SilhouetteReport> {
    if labels.len() != dist.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: dist.len(),
        });
    }
    if distinct_labels(labels) < 2 {
        return Err(Error::SingleCluster);
    }
    let per_series = exec.map_range(labels.len(), |i| sample(i, labels, dist));
    let overall = per_series.iter().sum::<f64>() / per_series.len() as f64;
    Ok(SilhouetteReport {
        per_series,
        overall,
    })
}

/// Builds the Euclidean table over `raw_series` and scores every series.
pub fn silhouette_overall(
    raw_series: &[Vec<f64>],
    labels: &[usize],
    exec: Execution,
) -> Result<SilhouetteReport> {
    if labels.len() != raw_series.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: raw_series.len(),
        });
    }
    if distinct_labels(labels) < 2 {
        return Err(Error::SingleCluster);
    }
    let dist = DistanceMatrix::euclidean(raw_series, exec)?;
    silhouette_from_distances(labels, &dist, exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![10.0, 10.0],
            vec![10.1, 10.0],
        ]
    }

    #[test]
    fn hand_computed_sample() {
        let d = DistanceMatrix::euclidean(&four(), Execution::Sequential).unwrap();
        let s = silhouette_sample(0, &[0, 0, 1, 1], &d).unwrap();
        let a = 0.1;
        let b = (200.0f64.sqrt() + (10.1f64 * 10.1 + 100.0).sqrt()) / 2.0;
        assert!((b - 14.1776).abs() < 1e-4);
        assert!((s - (b - a) / b).abs() < 1e-15);
        assert!((s - 0.99295).abs() < 1e-5);
    }

    #[test]
    fn overall_on_four_series() {
        let r = silhouette_overall(&four(), &[0, 0, 1, 1], Execution::Parallel).unwrap();
        assert!((r.overall - 0.9929).abs() < 1e-4);
        let relabeled = silhouette_overall(&four(), &[7, 7, 3, 3], Execution::Sequential).unwrap();
        assert_eq!(r, relabeled);
    }

    #[test]
    fn duplicates_score_one() {
        let s = vec![vec![1.0], vec![1.0], vec![5.0], vec![5.0]];
        let r = silhouette_overall(&s, &[0, 0, 1, 1], Execution::Sequential).unwrap();
        assert_eq!(r.per_series, vec![1.0; 4]);
    }

    #[test]
    fn equal_a_and_b_scores_zero() {
        // i = 0 sits halfway: a = b = 1
        let s = vec![vec![0.0], vec![1.0], vec![-1.0]];
        let d = DistanceMatrix::euclidean(&s, Execution::Sequential).unwrap();
        assert_eq!(silhouette_sample(0, &[0, 0, 1], &d).unwrap(), 0.0);
    }

    #[test]
    fn singletons_score_zero() {
        let r = silhouette_overall(&four(), &[0, 1, 2, 3], Execution::Sequential).unwrap();
        assert_eq!(r.overall, 0.0);
        assert!(r.per_series.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn errors() {
        assert_eq!(
            silhouette_overall(&four(), &[0, 0, 0, 0], Execution::Sequential),
            Err(Error::SingleCluster)
        );
        assert!(matches!(
            silhouette_overall(&four(), &[0, 1], Execution::Sequential),
            Err(Error::LengthMismatch { .. })
        ));
        let d = DistanceMatrix::euclidean(&four(), Execution::Sequential).unwrap();
        assert_eq!(
            silhouette_sample(0, &[1, 1, 1, 1], &d),
            Err(Error::SingleCluster)
        );
    }

    #[test]
    fn csv_layout() {
        let r = SilhouetteReport {
            per_series: vec![0.5, -0.25],
            overall: 0.125,
        };
        assert_eq!(
            r.to_csv(&[0, 1]),
            "series_no,cluster_id,silhouette\n1,0,0.500000\n2,1,-0.250000\noverall,0.125000\n"
        );
    }
}
