//! Deterministic centroid seeding by distance from the origin.
//!
//! Points are shifted so that no coordinate is negative, sorted by their
//! distance from the origin, split into `k` consecutive groups, and the middle
//! point of each group becomes a seed. Seeds are returned in the original
//! (unshifted) coordinates.

use crate::datamodel::DataMatrix;
use crate::error::{arg_err, Result};

/// Seeds chosen by [`init_centroids`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitCentroids {
    pub centroids: Vec<Vec<f64>>,
    /// Original row index of each seed.
    pub source_rows: Vec<usize>,
}

/// Subtracts the global minimum entry from every entry when any entry is
/// negative. Returns the (possibly unchanged) matrix and the subtracted value.
pub fn shift_nonnegative(data: &DataMatrix) -> Result<(DataMatrix, f64)> {
    let min = data.values().iter().copied().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        return Ok((data.clone(), 0.0));
    }
    let shifted = data.values().iter().map(|v| v - min).collect();
    Ok((data.with_values(shifted)?, min))
}

/// Picks `k` seeds: the lower median of each of `k` near-equal groups of
/// points ordered by distance from the origin (after the non-negative shift).
///
/// The first `n % k` groups receive the extra point. Equal distances keep the
/// original row order.
pub fn init_centroids(data: &DataMatrix, k: usize) -> Result<InitCentroids> {
    let n = data.n_rows();
    if k == 0 {
        return arg_err("k must be at least 1");
    }
    if k > n {
        return arg_err(format!("k={k} exceeds the {n} available rows"));
    }
    let (shifted, _) = shift_nonnegative(data)?;
    let norms: Vec<f64> = shifted
        .rows()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));

    let base = n / k;
    let extra = n % k;
    let mut source_rows = Vec::with_capacity(k);
    let mut start = 0;
    for group in 0..k {
        let size = base + usize::from(group < extra);
        source_rows.push(order[start + (size - 1) / 2]);
        start += size;
    }
    let centroids = source_rows.iter().map(|&i| data.row(i).to_vec()).collect();
    Ok(InitCentroids {
        centroids,
        source_rows,
    })
}
