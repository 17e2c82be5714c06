//! ISODATA-style outer loop whose merge threshold is generated from the
//! current centroids instead of being supplied by the user.
//!
//! Each outer iteration reruns K-Means from the current centroids, discards
//! undersized clusters, then applies either a split pass or a merge pass.
//! Splitting happens on odd iterations and merging on even ones, except that
//! merging is forced once `k >= 2 * k_init` and splitting once
//! `k <= ceil(k_init / 2)`.

use std::fmt;

use crate::datamodel::{distance, squared_distance, AlgoParams, Clustering, DataMatrix};
use crate::enhanced_init::init_centroids;
use crate::error::{arg_err, Result};
use crate::kmeans::{random_init, run_kmeans};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterAction {
    /// K-Means run from the current centroids.
    Seed,
    Split,
    Merge,
    Discard,
    /// The scheduled pass changed nothing.
    Stable,
}

impl fmt::Display for OuterAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OuterAction::Seed => "seed",
            OuterAction::Split => "split",
            OuterAction::Merge => "merge",
            OuterAction::Discard => "discard",
            OuterAction::Stable => "stable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub iteration: usize,
    /// Cluster count after the action.
    pub k: usize,
    pub sse: f64,
    pub action: OuterAction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterState {
    pub clustering: Clustering,
    pub outer_iteration: usize,
    /// Threshold used by the most recent merge pass (0 before any merge pass).
    pub merge_factor: f64,
    pub history: Vec<HistoryRecord>,
}

/// Merge threshold: the smallest, over all centroids, of the mean distance
/// from that centroid to every other centroid.
pub fn compute_merge_factor(centroids: &[Vec<f64>]) -> Result<f64> {
    let k = centroids.len();
    if k < 2 {
        return arg_err(format!("merge factor needs at least 2 centroids, got {k}"));
    }
    let mut best = f64::INFINITY;
    for (i, ci) in centroids.iter().enumerate() {
        let mut sum = 0.0;
        for (j, cj) in centroids.iter().enumerate() {
            if i != j {
                sum += distance(ci, cj);
            }
        }
        best = best.min(sum / (k - 1) as f64);
    }
    Ok(best)
}

/// Relabels clusters so that the surviving indices are dense, keeping their
/// relative order. `keep[j]` is false for clusters that no longer exist.
fn compact(
    data: &DataMatrix,
    labels: &[usize],
    centroids: Vec<Vec<f64>>,
    keep: &[bool],
    iterations: usize,
) -> Result<Clustering> {
    let mut remap = vec![usize::MAX; keep.len()];
    let mut next = 0;
    for (j, &k) in keep.iter().enumerate() {
        if k {
            remap[j] = next;
            next += 1;
        }
    }
    let labels = labels.iter().map(|&l| remap[l]).collect();
    let centroids = centroids
        .into_iter()
        .zip(keep)
        .filter_map(|(c, &k)| k.then_some(c))
        .collect();
    Clustering::from_parts(data, labels, centroids, iterations)
}

fn member_mean(data: &DataMatrix, labels: &[usize], j: usize) -> Vec<f64> {
    let mut sum = vec![0.0; data.n_cols()];
    let mut n = 0usize;
    for (row, _) in data.rows().zip(labels).filter(|(_, &l)| l == j) {
        for (s, x) in sum.iter_mut().zip(row) {
            *s += x;
        }
        n += 1;
    }
    let n = n.max(1) as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    sum
}

/// Merges centroid pairs closer than `merge_factor`, closest first.
///
/// Each cluster takes part in at most one merge per pass and at most
/// `k_init / 2` merges happen. The merged centroid is the size-weighted mean.
pub fn merge_pass(
    data: &DataMatrix,
    clustering: &Clustering,
    merge_factor: f64,
    params: &AlgoParams,
) -> Result<Clustering> {
    let k = clustering.k();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let d = distance(&clustering.centroids[i], &clustering.centroids[j]);
            if d < merge_factor {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let cap = params.k_init / 2;
    let mut centroids = clustering.centroids.clone();
    let mut touched = vec![false; k];
    let mut keep = vec![true; k];
    let mut target: Vec<usize> = (0..k).collect();
    let mut merges = 0;
    for (_, i, j) in pairs {
        if merges >= cap {
            break;
        }
        if touched[i] || touched[j] {
            continue;
        }
        let (si, sj) = (clustering.sizes[i] as f64, clustering.sizes[j] as f64);
        centroids[i] = centroids[i]
            .iter()
            .zip(&clustering.centroids[j])
            .map(|(a, b)| (si * a + sj * b) / (si + sj))
            .collect();
        touched[i] = true;
        touched[j] = true;
        keep[j] = false;
        target[j] = i;
        merges += 1;
    }
    if merges == 0 {
        return Ok(clustering.clone());
    }
    let labels: Vec<usize> = clustering.labels.iter().map(|&l| target[l]).collect();
    compact(data, &labels, centroids, &keep, clustering.iterations)
}

fn population_sd(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Splits clusters whose spread is large relative to the whole data set.
///
/// A cluster splits when, in some dimension, its standard deviation exceeds
/// `split_multiplier` times the data set's, and it has more than
/// `2 * (min_cluster_size + 1)` members. The two halves start at the centroid
/// shifted by `±split_offset_fraction · σ` along the widest dimension; members
/// go to the nearer half and each half's centroid becomes its members' mean.
/// Dimensions with zero spread over the data set are ignored.
pub fn split_pass(
    data: &DataMatrix,
    clustering: &Clustering,
    params: &AlgoParams,
) -> Result<Clustering> {
    let d = data.n_cols();
    let k = clustering.k();
    let data_sd: Vec<f64> = (0..d)
        .map(|j| population_sd(&data.rows().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();

    let mut candidates = Vec::new();
    for c in 0..k {
        if clustering.sizes[c] <= 2 * (params.min_cluster_size + 1) {
            continue;
        }
        let members: Vec<&[f64]> = data
            .rows()
            .zip(&clustering.labels)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect();
        let mut widest: Option<(f64, usize, f64)> = None;
        for j in (0..d).filter(|&j| data_sd[j] > 0.0) {
            let sd = population_sd(&members.iter().map(|r| r[j]).collect::<Vec<_>>());
            let ratio = sd / data_sd[j];
            if widest.is_none_or(|(best, _, _)| ratio > best) {
                widest = Some((ratio, j, sd));
            }
        }
        if let Some((ratio, j, sd)) = widest {
            if ratio > params.split_multiplier {
                candidates.push((ratio, c, j, sd));
            }
        }
    }
    if candidates.is_empty() {
        return Ok(clustering.clone());
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut labels = clustering.labels.clone();
    let mut centroids = clustering.centroids.clone();
    for (_, c, j, sd) in candidates {
        let offset = params.split_offset_fraction * sd;
        let mut minus = centroids[c].clone();
        let mut plus = centroids[c].clone();
        minus[j] -= offset;
        plus[j] += offset;
        let new_index = centroids.len();
        let mut moved = Vec::new();
        let mut stayed = 0;
        for (i, row) in data.rows().enumerate() {
            if labels[i] != c {
                continue;
            }
            if squared_distance(row, &plus) < squared_distance(row, &minus) {
                moved.push(i);
            } else {
                stayed += 1;
            }
        }
        if moved.is_empty() || stayed == 0 {
            continue;
        }
        for &i in &moved {
            labels[i] = new_index;
        }
        centroids.push(Vec::new());
        centroids[c] = member_mean(data, &labels, c);
        centroids[new_index] = member_mean(data, &labels, new_index);
    }
    Clustering::from_parts(data, labels, centroids, clustering.iterations)
}

/// Deletes clusters with fewer than `min_cluster_size` members and hands
/// their points to the nearest surviving centroid, smallest clusters first.
/// At least two clusters always survive.
pub fn discard_small(
    data: &DataMatrix,
    clustering: &Clustering,
    params: &AlgoParams,
) -> Result<Clustering> {
    let k = clustering.k();
    let mut small: Vec<usize> = (0..k)
        .filter(|&j| clustering.sizes[j] < params.min_cluster_size)
        .collect();
    small.sort_by_key(|&j| (clustering.sizes[j], j));
    small.truncate(k.saturating_sub(2));
    if small.is_empty() {
        return Ok(clustering.clone());
    }

    let mut keep = vec![true; k];
    for &j in &small {
        keep[j] = false;
    }
    let survivors: Vec<usize> = (0..k).filter(|&j| keep[j]).collect();
    let mut labels = clustering.labels.clone();
    let mut receivers = vec![false; k];
    for (i, row) in data.rows().enumerate() {
        if keep[labels[i]] {
            continue;
        }
        let mut best = (survivors[0], f64::INFINITY);
        for &s in &survivors {
            let d = squared_distance(row, &clustering.centroids[s]);
            if d < best.1 {
                best = (s, d);
            }
        }
        labels[i] = best.0;
        receivers[best.0] = true;
    }
    let mut centroids = clustering.centroids.clone();
    for j in (0..k).filter(|&j| receivers[j]) {
        centroids[j] = member_mean(data, &labels, j);
    }
    compact(data, &labels, centroids, &keep, clustering.iterations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Split,
    Merge,
}

#[allow(clippy::if_same_then_else)]
fn phase_for(k: usize, iteration: usize, k_init: usize) -> Phase {
    if k >= 2 * k_init {
        Phase::Merge
    } else if k <= k_init.div_ceil(2) {
        Phase::Split
    } else if iteration % 2 == 1 {
        Phase::Split
    } else {
        Phase::Merge
    }
}

/// Runs the split/merge outer loop from `init`.
///
/// Stops after `max_outer_iterations`, when an iteration leaves both the
/// cluster count and every label unchanged, or when merging leaves a single
/// cluster. Unless merging ended at one cluster, the result is refined by a
/// final K-Means run. The returned clustering's `iterations` counts outer
/// iterations.
pub fn run_agmfi(
    data: &DataMatrix,
    init: &[Vec<f64>],
    params: &AlgoParams,
) -> Result<(Clustering, OuterState)> {
    params.validate()?;
    let mut centroids = init.to_vec();
    let mut history = Vec::new();
    let mut merge_factor = 0.0;
    let mut previous: Option<Clustering> = None;
    let mut t = 0;

    let record = |history: &mut Vec<HistoryRecord>, t: usize, c: &Clustering, action| {
        history.push(HistoryRecord {
            iteration: t,
            k: c.k(),
            sse: c.sse,
            action,
        });
    };

    let current = loop {
        t += 1;
        let mut c = run_kmeans(data, &centroids, params, false)?;
        record(&mut history, t, &c, OuterAction::Seed);

        let before = c.k();
        c = discard_small(data, &c, params)?;
        if c.k() != before {
            record(&mut history, t, &c, OuterAction::Discard);
        }

        let before = c.k();
        let phase = phase_for(before, t, params.k_init);
        match phase {
            Phase::Split => c = split_pass(data, &c, params)?,
            Phase::Merge if before >= 2 => {
                merge_factor = compute_merge_factor(&c.centroids)?;
                c = merge_pass(data, &c, merge_factor, params)?;
            }
            Phase::Merge => {}
        }
        let action = match (phase, c.k() != before) {
            (Phase::Split, true) => OuterAction::Split,
            (Phase::Merge, true) => OuterAction::Merge,
            _ => OuterAction::Stable,
        };
        record(&mut history, t, &c, action);

        if action == OuterAction::Merge && c.k() == 1 {
            c.iterations = t;
            return Ok((
                c.clone(),
                OuterState {
                    clustering: c,
                    outer_iteration: t,
                    merge_factor,
                    history,
                },
            ));
        }

        let unchanged = previous
            .as_ref()
            .is_some_and(|p| p.k() == c.k() && p.labels == c.labels);
        if unchanged || t >= params.max_outer_iterations {
            break c;
        }
        centroids = c.centroids.clone();
        previous = Some(c);
    };

    let mut clustering = run_kmeans(data, &current.centroids, params, false)?;
    clustering.iterations = t;
    record(&mut history, t, &clustering, OuterAction::Seed);
    Ok((
        clustering.clone(),
        OuterState {
            clustering,
            outer_iteration: t,
            merge_factor,
            history,
        },
    ))
}

/// Outer loop seeded with `k_init` random rows.
pub fn run_agmfi_random(
    data: &DataMatrix,
    params: &AlgoParams,
    seed: u64,
) -> Result<(Clustering, OuterState)> {
    let init = random_init(data, params.k_init, seed)?;
    run_agmfi(data, &init, params)
}

/// Outer loop seeded by the deterministic distance-from-origin initializer.
pub fn run_eagmfi(data: &DataMatrix, params: &AlgoParams) -> Result<(Clustering, OuterState)> {
    params.validate()?;
    let init = init_centroids(data, params.k_init)?;
    run_agmfi(data, &init.centroids, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_blobs, BlobSpec};
    use proptest::prelude::*;

    fn col(v: &[f64]) -> DataMatrix {
        DataMatrix::from_column(v).unwrap()
    }

    fn finalize(data: &DataMatrix, labels: Vec<usize>, k: usize) -> Clustering {
        let centroids = (0..k).map(|j| member_mean(data, &labels, j)).collect();
        Clustering::from_parts(data, labels, centroids, 1).unwrap()
    }

    fn blobs(centers: &[f64], n: usize, sigma: f64, seed: u64) -> DataMatrix {
        generate_blobs(&BlobSpec {
            centers: centers.iter().map(|&c| vec![c]).collect(),
            points_per_center: n,
            sigma,
            seed,
        })
        .unwrap()
        .0
    }

    #[test]
    fn merge_factor_examples() {
        assert_eq!(
            compute_merge_factor(&[vec![0.0], vec![10.0]]).unwrap(),
            10.0
        );
        assert_eq!(
            compute_merge_factor(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap(),
            5.0
        );
        let t = 2.5;
        let triangle = [
            vec![0.0, 0.0],
            vec![t, 0.0],
            vec![t / 2.0, t * 3f64.sqrt() / 2.0],
        ];
        assert!((compute_merge_factor(&triangle).unwrap() - t).abs() < 1e-12);
        assert!(compute_merge_factor(&[vec![1.0]]).is_err());
    }

    #[test]
    fn merge_pass_examples() {
        let mut v = vec![0.0; 5];
        v.extend([0.5; 5]);
        v.extend([10.0; 5]);
        let data = col(&v);
        let labels = (0..15).map(|i| i / 5).collect();
        let c = finalize(&data, labels, 3);
        let params = AlgoParams::with_k(3);

        let merged = merge_pass(&data, &c, 5.0, &params).unwrap();
        assert_eq!(merged.k(), 2);
        assert_eq!(merged.centroids, vec![vec![0.25], vec![10.0]]);
        assert_eq!(merged.sizes, vec![10, 5]);
        merged.validate(&data).unwrap();

        assert_eq!(merge_pass(&data, &c, 0.0, &params).unwrap(), c);
        assert_eq!(merge_pass(&data, &c, 0.4, &params).unwrap(), c);
    }

    #[test]
    fn merge_pass_respects_cap_and_single_participation() {
        // four clusters on a line, all pairwise within the threshold
        let data = col(&[0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let c = finalize(&data, vec![0, 0, 1, 1, 2, 2, 3, 3], 4);
        let merged = merge_pass(&data, &c, 100.0, &AlgoParams::with_k(4)).unwrap();
        // closest pair (0,1) first, then (2,3)
        assert_eq!(merged.k(), 2);
        assert_eq!(merged.centroids, vec![vec![0.5], vec![2.5]]);

        let capped = merge_pass(&data, &c, 100.0, &AlgoParams::with_k(2)).unwrap();
        assert_eq!(capped.k(), 3);

        let two = finalize(&data, vec![0, 0, 0, 0, 1, 1, 1, 1], 2);
        let one = merge_pass(&data, &two, 100.0, &AlgoParams::with_k(2)).unwrap();
        assert_eq!(one.k(), 1);
        assert_eq!(one.labels, vec![0; 8]);
    }

    #[test]
    fn split_pass_separates_mixed_cluster() {
        // cluster 0 mixes the blobs at 0 and 10; cluster 1 is a tight blob at 5
        let data = blobs(&[0.0, 10.0, 5.0], 20, 0.1, 3);
        let labels: Vec<usize> = (0..60).map(|i| usize::from(i >= 40)).collect();
        let c = finalize(&data, labels, 2);
        let params = AlgoParams::with_k(2);
        let split = split_pass(&data, &c, &params).unwrap();
        assert_eq!(split.k(), 3);
        split.validate(&data).unwrap();
        let first = split.labels[0];
        let second = split.labels[20];
        assert_ne!(first, second);
        assert!(split.labels[..20].iter().all(|&l| l == first));
        assert!(split.labels[20..40].iter().all(|&l| l == second));
        assert!(split.labels[40..].iter().all(|&l| l == 1));
    }

    #[test]
    fn split_pass_guards() {
        let mut v = vec![4.0; 10];
        v.extend((0..10).map(|i| i as f64 * 100.0));
        let data = col(&v);
        let labels: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let c = finalize(&data, labels, 2);
        // cluster 0 has zero spread; cluster 1 is as wide as the data but m forbids splitting
        let params = AlgoParams {
            min_cluster_size: 4,
            ..AlgoParams::with_k(2)
        };
        assert_eq!(split_pass(&data, &c, &params).unwrap(), c);

        let constant = col(&[1.0; 12]);
        let c = finalize(&constant, vec![0; 12], 1);
        assert_eq!(
            split_pass(&constant, &c, &AlgoParams::with_k(1)).unwrap(),
            c
        );
    }

    #[test]
    fn discard_examples() {
        let mut v = vec![0.0; 10];
        v.push(4.0);
        v.extend([10.0; 10]);
        let data = col(&v);
        let labels: Vec<usize> = (0..21)
            .map(|i| {
                if i < 10 {
                    0
                } else if i == 10 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let c = finalize(&data, labels, 3);
        let out = discard_small(&data, &c, &AlgoParams::default()).unwrap();
        assert_eq!(out.k(), 2);
        assert_eq!(out.sizes, vec![11, 10]);
        assert_eq!(out.labels[10], 0);
        assert!((out.centroids[0][0] - 4.0 / 11.0).abs() < 1e-15);
        out.validate(&data).unwrap();

        let fine = discard_small(
            &data,
            &c,
            &AlgoParams {
                min_cluster_size: 1,
                ..AlgoParams::default()
            },
        )
        .unwrap();
        assert_eq!(fine, c);

        let data = col(&[0.0, 0.0, 0.0, 9.0]);
        let c = finalize(&data, vec![0, 0, 0, 1], 2);
        assert_eq!(discard_small(&data, &c, &AlgoParams::default()).unwrap(), c);
    }

    #[test]
    fn three_blobs_collapse_to_three() {
        let data = blobs(&[0.0, 10.0, 20.0], 30, 0.1, 1);
        let (c, state) = run_eagmfi(&data, &AlgoParams::with_k(10)).unwrap();
        assert_eq!(c.k(), 3);
        assert_eq!(c.sizes, vec![30, 30, 30]);
        assert_eq!(state.history.first().unwrap().k, 10);
        assert_eq!(state.history.last().unwrap().k, 3);
        assert_eq!(state.clustering, c);
        assert!(state.merge_factor > 0.0);
    }

    #[test]
    fn stable_input_stops_on_second_iteration() {
        let data = blobs(&[0.0, 10.0], 20, 0.1, 5);
        let params = AlgoParams::with_k(2);
        let truth: Vec<usize> = (0..40).map(|i| i / 20).collect();
        let init = [member_mean(&data, &truth, 0), member_mean(&data, &truth, 1)];
        let (c, state) = run_agmfi(&data, &init, &params).unwrap();
        assert_eq!(state.outer_iteration, 2);
        assert_eq!(c.k(), 2);
        assert!(state
            .history
            .iter()
            .all(|h| matches!(h.action, OuterAction::Seed | OuterAction::Stable)));
    }

    #[test]
    fn single_outer_iteration() {
        let data = blobs(&[0.0, 10.0, 20.0], 30, 0.1, 1);
        let params = AlgoParams {
            max_outer_iterations: 1,
            ..AlgoParams::with_k(10)
        };
        let (c, state) = run_eagmfi(&data, &params).unwrap();
        assert_eq!(state.outer_iteration, 1);
        assert_eq!(c.iterations, 1);
        assert!(state.history.iter().all(|h| h.iteration == 1));
        // t = 1 is a split iteration and none of the fragments is wide enough
        assert_eq!(c.k(), 10);
    }

    #[test]
    fn eagmfi_is_repeatable() {
        let data = generate_blobs(&BlobSpec {
            centers: vec![vec![0.0, 0.0], vec![4.0, 1.0], vec![-3.0, 5.0]],
            points_per_center: 25,
            sigma: 1.0,
            seed: 9,
        })
        .unwrap()
        .0;
        let params = AlgoParams::with_k(6);
        let a = run_eagmfi(&data, &params).unwrap();
        let b = run_eagmfi(&data, &params).unwrap();
        assert_eq!(a, b);
    }

    fn instance() -> impl Strategy<Value = (DataMatrix, usize, u64)> {
        (1usize..4, 4usize..40).prop_flat_map(|(d, n)| {
            (
                proptest::collection::vec(proptest::collection::vec(-10.0..10.0f64, d), n)
                    .prop_map(|rows| DataMatrix::from_rows(&rows).unwrap()),
                2..=n.min(8),
                any::<u64>(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn passes_preserve_partition((data, k, seed) in instance()) {
            let params = AlgoParams::with_k(k);
            let init = random_init(&data, k, seed).unwrap();
            let c = run_kmeans(&data, &init, &params, false).unwrap();

            let d = discard_small(&data, &c, &params).unwrap();
            d.validate(&data).unwrap();
            prop_assert!(d.k() <= c.k());

            let s = split_pass(&data, &c, &params).unwrap();
            s.validate(&data).unwrap();
            prop_assert!(s.k() >= c.k());

            let mf = compute_merge_factor(&c.centroids).unwrap();
            let m = merge_pass(&data, &c, mf, &params).unwrap();
            m.validate(&data).unwrap();
            prop_assert!(m.k() <= c.k());

            let (out, state) = run_agmfi(&data, &init, &params).unwrap();
            out.validate(&data).unwrap();
            prop_assert!(state.outer_iteration <= params.max_outer_iterations);
            prop_assert_eq!(state.history.last().unwrap().k, out.k());
        }

        #[test]
        fn merge_factor_ignores_centroid_order(
            mut cs in proptest::collection::vec(proptest::collection::vec(-50.0..50.0f64, 3), 2..10),
            rot in 0usize..10,
        ) {
            let a = compute_merge_factor(&cs).unwrap();
            let r = rot % cs.len();
            cs.rotate_left(r);
            cs.reverse();
            let b = compute_merge_factor(&cs).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            prop_assert!(a >= 0.0);
        }
    }
}
