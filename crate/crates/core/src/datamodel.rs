//! Core numeric types and the Euclidean distance kernel.
//!
//! Every algorithm in the crate works on a [`DataMatrix`] (rows are genes or
//! points, columns are conditions) and produces a [`Clustering`].

use crate::error::{arg_err, ClusterError, Result};

/// Dense row-major matrix of finite `f64` values with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
}

impl DataMatrix {
    /// Builds a matrix, checking shape, label counts and finiteness.
    pub fn new(
        values: Vec<f64>,
        n_rows: usize,
        n_cols: usize,
        row_ids: Vec<String>,
        col_ids: Vec<String>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(ClusterError::EmptyData(format!(
                "matrix shape {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return arg_err(format!(
                "{} values do not fill a {n_rows}x{n_cols} matrix",
                values.len()
            ));
        }
        if row_ids.len() != n_rows {
            return arg_err(format!("{} row ids for {n_rows} rows", row_ids.len()));
        }
        if col_ids.len() != n_cols {
            return arg_err(format!("{} column ids for {n_cols} columns", col_ids.len()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(ClusterError::Numeric(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            values,
            n_rows,
            n_cols,
            row_ids,
            col_ids,
        })
    }

    /// Builds a matrix from rows with synthesized labels (`r<i>`, `c<j>`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != n_cols) {
            return arg_err(format!(
                "row {i} has {} entries, expected {n_cols}",
                rows[i].len()
            ));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(
            values,
            n_rows,
            n_cols,
            (0..n_rows).map(|i| format!("r{i}")).collect(),
            (0..n_cols).map(|j| format!("c{j}")).collect(),
        )
    }

    /// One-dimensional convenience constructor.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::from_rows(&rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    /// Same labels, new values. `values` must have the same length.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(
            values,
            self.n_rows,
            self.n_cols,
            self.row_ids.clone(),
            self.col_ids.clone(),
        )
    }
}

/// Output of every clustering algorithm in the crate.
///
/// A finalized clustering has `k = centroids.len()` non-empty clusters, labels
/// dense in `[0, k)`, and `sse` computed against the stored centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub sse: f64,
    pub iterations: usize,
}

impl Clustering {
    /// Assembles a clustering from labels and centroids, computing sizes and SSE.
    pub fn from_parts(
        data: &DataMatrix,
        labels: Vec<usize>,
        centroids: Vec<Vec<f64>>,
        iterations: usize,
    ) -> Result<Self> {
        let k = centroids.len();
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            if l >= k {
                return arg_err(format!("label {l} out of range for k={k}"));
            }
            sizes[l] += 1;
        }
        let sse = sse_of(data, &labels, &centroids)?;
        Ok(Self {
            labels,
            centroids,
            sizes,
            sse,
            iterations,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Checks the partition invariants against `data`.
    pub fn validate(&self, data: &DataMatrix) -> Result<()> {
        let k = self.k();
        if self.labels.len() != data.n_rows() {
            return arg_err(format!(
                "{} labels for {} rows",
                self.labels.len(),
                data.n_rows()
            ));
        }
        if self.sizes.len() != k {
            return arg_err(format!("{} sizes for k={k}", self.sizes.len()));
        }
        let mut counts = vec![0usize; k];
        for &l in &self.labels {
            if l >= k {
                return arg_err(format!("label {l} out of range for k={k}"));
            }
            counts[l] += 1;
        }
        if counts != self.sizes {
            return arg_err("sizes disagree with labels");
        }
        if let Some(j) = self.sizes.iter().position(|&s| s == 0) {
            return arg_err(format!("cluster {j} is empty"));
        }
        let sse = recompute_sse(data, self)?;
        let scale = sse.abs().max(self.sse.abs()).max(1.0);
        if (sse - self.sse).abs() > 1e-9 * scale {
            return arg_err(format!("stored sse {} != recomputed {sse}", self.sse));
        }
        Ok(())
    }
}

/// K-Means and outer-loop parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoParams {
    /// Desired (initial) cluster count.
    pub k_init: usize,
    /// Clusters smaller than this are discarded by the outer loop.
    pub min_cluster_size: usize,
    /// Outer split/merge iterations.
    pub max_outer_iterations: usize,
    /// A cluster splits when its spread exceeds this multiple of the data spread.
    pub split_multiplier: f64,
    /// Split centroids are offset by this fraction of the cluster's standard deviation.
    pub split_offset_fraction: f64,
    /// K-Means stops once no centroid moves farther than this.
    pub convergence_tol: f64,
    pub max_kmeans_iterations: usize,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            k_init: 2,
            min_cluster_size: 2,
            max_outer_iterations: 20,
            split_multiplier: 1.0,
            split_offset_fraction: 0.5,
            convergence_tol: 1e-6,
            max_kmeans_iterations: 100,
        }
    }
}

impl AlgoParams {
    pub fn with_k(k_init: usize) -> Self {
        Self {
            k_init,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_init < 1 {
            return arg_err("k_init must be at least 1");
        }
        if self.min_cluster_size < 1 {
            return arg_err("min_cluster_size must be at least 1");
        }
        if self.max_outer_iterations < 1 {
            return arg_err("max_outer_iterations must be at least 1");
        }
        if self.max_kmeans_iterations < 1 {
            return arg_err("max_kmeans_iterations must be at least 1");
        }
        if !(self.split_multiplier > 0.0 && self.split_multiplier.is_finite()) {
            return arg_err("split_multiplier must be positive");
        }
        if !(self.split_offset_fraction > 0.0 && self.split_offset_fraction < 1.0) {
            return arg_err("split_offset_fraction must lie in (0, 1)");
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return arg_err("convergence_tol must be positive");
        }
        Ok(())
    }
}

/// Squared Euclidean distance; callers guarantee equal lengths.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

#[inline]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Euclidean distance between two points of equal dimension.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return arg_err(format!("dimension mismatch: {} vs {}", a.len(), b.len()));
    }
    if a.is_empty() {
        return arg_err("points must have at least one dimension");
    }
    Ok(distance(a, b))
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn recompute_sse(data: &DataMatrix, clustering: &Clustering) -> Result<f64> {
    sse_of(data, &clustering.labels, &clustering.centroids)
}

pub(crate) fn sse_of(data: &DataMatrix, labels: &[usize], centroids: &[Vec<f64>]) -> Result<f64> {
    if labels.len() != data.n_rows() {
        return arg_err(format!(
            "{} labels for {} rows",
            labels.len(),
            data.n_rows()
        ));
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != data.n_cols()) {
        return arg_err(format!(
            "centroid dimension {} != data dimension {}",
            c.len(),
            data.n_cols()
        ));
    }
    let mut sse = 0.0;
    for (row, &l) in data.rows().zip(labels) {
        let c = centroids
            .get(l)
            .ok_or_else(|| ClusterError::Argument(format!("label {l} out of range")))?;
        sse += squared_distance(row, c);
    }
    Ok(sse)
}
