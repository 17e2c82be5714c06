//! Lloyd's K-Means with an optional distance-pruned reassignment step.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datamodel::{distance, squared_distance, sse_of, AlgoParams, Clustering, DataMatrix};
use crate::error::{arg_err, ClusterError, Result};

/// Working state of a K-Means run.
///
/// `nearest_dist[i]` is the distance from point `i` to `centroids[labels[i]]`
/// as of the last assignment step.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansState {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub nearest_dist: Vec<f64>,
    pub iteration: usize,
}

/// A finished run plus the SSE recorded after every centroid update.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub clustering: Clustering,
    pub sse_trace: Vec<f64>,
}

#[inline]
fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, squared_distance(row, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn check_centroids(data: &DataMatrix, centroids: &[Vec<f64>]) -> Result<()> {
    if centroids.is_empty() {
        return arg_err("at least one centroid is required");
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != data.n_cols()) {
        return arg_err(format!(
            "centroid dimension {} != data dimension {}",
            c.len(),
            data.n_cols()
        ));
    }
    Ok(())
}

/// Assigns each point to its nearest centroid (lowest index on ties).
/// Returns the labels and the distance to the chosen centroid.
pub fn assign_points(data: &DataMatrix, centroids: &[Vec<f64>]) -> Result<(Vec<usize>, Vec<f64>)> {
    check_centroids(data, centroids)?;
    Ok(assign_unchecked(data, centroids))
}

fn assign_unchecked(data: &DataMatrix, centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    (0..data.n_rows())
        .into_par_iter()
        .map(|i| {
            let (j, d2) = nearest(data.row(i), centroids);
            (j, d2.sqrt())
        })
        .unzip()
}

fn cluster_mean(data: &DataMatrix, labels: &[usize], j: usize) -> (Vec<f64>, usize) {
    let mut sum = vec![0.0; data.n_cols()];
    let mut count = 0;
    for (row, _) in data.rows().zip(labels).filter(|(_, &l)| l == j) {
        for (s, x) in sum.iter_mut().zip(row) {
            *s += x;
        }
        count += 1;
    }
    if count > 0 {
        let n = count as f64;
        sum.iter_mut().for_each(|s| *s /= n);
    }
    (sum, count)
}

/// Recomputes every centroid as the mean of its members.
///
/// An empty cluster takes over the point that lies farthest from its own
/// centroid (among clusters with more than one member); the donor's mean is
/// then recomputed. `labels` is updated in place when that happens.
pub fn update_centroids(
    data: &DataMatrix,
    labels: &mut [usize],
    k: usize,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if labels.len() != data.n_rows() {
        return arg_err(format!(
            "{} labels for {} rows",
            labels.len(),
            data.n_rows()
        ));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= k) {
        return arg_err(format!("label {l} out of range for k={k}"));
    }
    if k > data.n_rows() {
        return arg_err(format!("k={k} exceeds the {} rows", data.n_rows()));
    }

    let d = data.n_cols();
    let mut sums = vec![vec![0.0; d]; k];
    let mut sizes = vec![0usize; k];
    for (row, &l) in data.rows().zip(labels.iter()) {
        for (s, x) in sums[l].iter_mut().zip(row) {
            *s += x;
        }
        sizes[l] += 1;
    }
    let mut centroids: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&sizes)
        .map(|(mut s, &n)| {
            if n > 0 {
                let n = n as f64;
                s.iter_mut().for_each(|v| *v /= n);
            }
            s
        })
        .collect();

    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, row) in data.rows().enumerate() {
            let l = labels[i];
            if sizes[l] < 2 {
                continue;
            }
            let dist = squared_distance(row, &centroids[l]);
            if far.is_none_or(|(_, best)| dist > best) {
                far = Some((i, dist));
            }
        }
        let (i, _) = far
            .ok_or_else(|| ClusterError::Argument(format!("cannot fill empty cluster {empty}")))?;
        let donor = labels[i];
        labels[i] = empty;
        sizes[donor] -= 1;
        sizes[empty] = 1;
        centroids[empty] = data.row(i).to_vec();
        centroids[donor] = cluster_mean(data, labels, donor).0;
    }
    Ok((centroids, sizes))
}

/// Reassignment that keeps a point in its cluster without scanning all
/// centroids when its distance to the updated centroid has not grown and the
/// centroid is certified nearest by the half-separation bound.
fn assign_pruned(data: &DataMatrix, state: &KMeansState) -> (Vec<usize>, Vec<f64>) {
    let k = state.centroids.len();
    let half_sep: Vec<f64> = (0..k)
        .map(|j| {
            let mut min = f64::INFINITY;
            for l in (0..k).filter(|&l| l != j) {
                min = min.min(distance(&state.centroids[j], &state.centroids[l]));
            }
            0.5 * min
        })
        .collect();

    (0..data.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = data.row(i);
            let own = state.labels[i];
            let d = distance(row, &state.centroids[own]);
            if d <= state.nearest_dist[i] && d * (1.0 + 1e-12) < half_sep[own] {
                (own, d)
            } else {
                let (j, d2) = nearest(row, &state.centroids);
                (j, d2.sqrt())
            }
        })
        .unzip()
}

/// Runs K-Means from `init` and returns the finalized clustering.
pub fn run_kmeans(
    data: &DataMatrix,
    init: &[Vec<f64>],
    params: &AlgoParams,
    pruned: bool,
) -> Result<Clustering> {
    run_kmeans_traced(data, init, params, pruned).map(|r| r.clustering)
}

/// Like [`run_kmeans`], also returning the per-iteration SSE.
///
/// Stops when an assignment step changes no label, when no centroid moves
/// more than `convergence_tol`, or after `max_kmeans_iterations` updates.
pub fn run_kmeans_traced(
    data: &DataMatrix,
    init: &[Vec<f64>],
    params: &AlgoParams,
    pruned: bool,
) -> Result<KMeansRun> {
    params.validate()?;
    check_centroids(data, init)?;
    let k = init.len();
    if k > data.n_rows() {
        return arg_err(format!("k={k} exceeds the {} rows", data.n_rows()));
    }
    if let Some(c) = init.iter().find(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(ClusterError::Numeric(format!(
            "non-finite initial centroid {c:?}"
        )));
    }

    let (labels, nearest_dist) = assign_unchecked(data, init);
    let mut state = KMeansState {
        centroids: init.to_vec(),
        labels,
        nearest_dist,
        iteration: 0,
    };
    let mut sse_trace = Vec::new();
    loop {
        state.iteration += 1;
        let (centroids, _) = update_centroids(data, &mut state.labels, k)?;
        let shift = state
            .centroids
            .iter()
            .zip(&centroids)
            .map(|(a, b)| distance(a, b))
            .fold(0.0, f64::max);
        state.centroids = centroids;
        let sse = sse_of(data, &state.labels, &state.centroids)?;
        if !sse.is_finite() {
            return Err(ClusterError::Numeric(format!(
                "sse became {sse} at iteration {}",
                state.iteration
            )));
        }
        sse_trace.push(sse);
        if state.iteration >= params.max_kmeans_iterations || shift < params.convergence_tol {
            break;
        }
        let (labels, nearest_dist) = if pruned {
            assign_pruned(data, &state)
        } else {
            assign_unchecked(data, &state.centroids)
        };
        state.nearest_dist = nearest_dist;
        if labels == state.labels {
            break;
        }
        state.labels = labels;
    }

    let clustering = Clustering::from_parts(data, state.labels, state.centroids, state.iteration)?;
    Ok(KMeansRun {
        clustering,
        sse_trace,
    })
}

/// Picks `k` distinct rows uniformly at random (ChaCha8 seeded by `seed`).
pub fn random_init(data: &DataMatrix, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = data.n_rows();
    if k == 0 {
        return arg_err("k must be at least 1");
    }
    if k > n {
        return arg_err(format!("k={k} exceeds the {n} available rows"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| data.row(i).to_vec())
        .collect())
}
