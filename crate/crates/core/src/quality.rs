//! Silhouette coefficients and per-run quality reports.

use std::time::Duration;

use rayon::prelude::*;

use crate::datamodel::{distance, recompute_sse, Clustering, DataMatrix};
use crate::error::{arg_err, ClusterError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteResult {
    pub per_point: Vec<f64>,
    pub mean: f64,
    /// Mean silhouette of each cluster's members (0 for an empty cluster).
    pub per_cluster_mean: Vec<f64>,
}

/// Rousseeuw silhouette over all pairwise Euclidean distances.
///
/// Points in singleton clusters score 0, as do points whose `a` and `b` are
/// both 0.
pub fn silhouette(data: &DataMatrix, clustering: &Clustering) -> Result<SilhouetteResult> {
    let k = clustering.k();
    let labels = &clustering.labels;
    if labels.len() != data.n_rows() {
        return arg_err(format!(
            "{} labels for {} rows",
            labels.len(),
            data.n_rows()
        ));
    }
    let mut counts = vec![0usize; k];
    for &l in labels {
        if l >= k {
            return arg_err(format!("label {l} out of range for k={k}"));
        }
        counts[l] += 1;
    }
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    if occupied < 2 {
        return Err(ClusterError::SilhouetteUndefined { k: occupied });
    }

    let per_point: Vec<f64> = (0..data.n_rows())
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if counts[own] == 1 {
                return 0.0;
            }
            let xi = data.row(i);
            let mut sums = vec![0.0; k];
            for (j, row) in data.rows().enumerate() {
                if j != i {
                    sums[labels[j]] += distance(xi, row);
                }
            }
            let a = sums[own] / (counts[own] - 1) as f64;
            let b = (0..k)
                .filter(|&l| l != own && counts[l] > 0)
                .map(|l| sums[l] / counts[l] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();

    let mean = per_point.iter().sum::<f64>() / per_point.len() as f64;
    let mut cluster_sums = vec![0.0; k];
    for (s, &l) in per_point.iter().zip(labels) {
        cluster_sums[l] += s;
    }
    let per_cluster_mean = cluster_sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    Ok(SilhouetteResult {
        per_point,
        mean,
        per_cluster_mean,
    })
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub final_k: usize,
    pub sse: f64,
    /// `None` when fewer than two clusters exist.
    pub silhouette_mean: Option<f64>,
    pub silhouette_mean_x100: Option<f64>,
    pub iterations: usize,
    pub elapsed: Duration,
}

pub fn quality_report(
    data: &DataMatrix,
    clustering: &Clustering,
    elapsed: Duration,
) -> Result<QualityReport> {
    let sse = recompute_sse(data, clustering)?;
    let silhouette_mean = match silhouette(data, clustering) {
        Ok(s) => Some(s.mean),
        Err(ClusterError::SilhouetteUndefined { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(QualityReport {
        final_k: clustering.k(),
        sse,
        silhouette_mean,
        silhouette_mean_x100: silhouette_mean.map(|s| 100.0 * s),
        iterations: clustering.iterations,
        elapsed,
    })
}
