use isoclust_core::ingest::{drop_missing_rows, parse_table, write_tsv, zscore_rows, ParseOptions};
use isoclust_core::isodata::{run_agmfi_random, run_eagmfi, OuterAction};
use isoclust_core::quality::{quality_report, silhouette};
use isoclust_core::synth::{generate_blobs, BlobSpec};
use isoclust_core::{AlgoParams, Algorithm, Clustering, DataMatrix};
use std::time::Duration;

fn blobs(centers: Vec<Vec<f64>>, per: usize, sigma: f64, seed: u64) -> DataMatrix {
    generate_blobs(&BlobSpec {
        centers,
        points_per_center: per,
        sigma,
        seed,
    })
    .unwrap()
    .0
}

#[test]
fn text_to_report() {
    let text = "gene,a,b,c\n\
                g1,0.0,0.1,0.0\n\
                g2,0.1,0.0,0.1\n\
                g3,NA,1.0,2.0\n\
                g4,9.9,10.0,10.1\n\
                g5,10.0,10.1,9.9\n\
                g6,0.0,0.0,0.2\n";
    let raw = parse_table(text, &ParseOptions::default()).unwrap();
    let (data, dropped) = drop_missing_rows(&raw).unwrap();
    assert_eq!(dropped, 1);
    assert_eq!(data.row_ids(), ["g1", "g2", "g4", "g5", "g6"]);

    let (c, state) = run_eagmfi(&data, &AlgoParams::with_k(2)).unwrap();
    c.validate(&data).unwrap();
    assert_eq!(c.labels, [0, 0, 1, 1, 0]);
    assert_eq!(state.history.last().unwrap().action, OuterAction::Seed);

    let report = quality_report(&data, &c, Duration::from_millis(3)).unwrap();
    assert_eq!(report.final_k, 2);
    let mean = report.silhouette_mean.unwrap();
    assert!(mean > 0.95);
    assert!((report.silhouette_mean_x100.unwrap() - 100.0 * mean).abs() < 1e-12);
}

#[test]
fn tsv_output_reparses_to_same_matrix() {
    let data = blobs(vec![vec![1.0, -2.0, 3.5]], 20, 0.7, 9);
    let z = zscore_rows(&data).unwrap();
    let raw = parse_table(&write_tsv(&z), &ParseOptions::default()).unwrap();
    let (back, dropped) = drop_missing_rows(&raw).unwrap();
    assert_eq!(dropped, 0);
    assert_eq!(back, z);
}

#[test]
fn standardizing_keeps_profile_shape_clusters() {
    // rising and falling profiles at different scales collapse to two shapes
    let mut rows = Vec::new();
    for s in 1..=6 {
        let s = s as f64;
        rows.push(vec![s, 2.0 * s, 3.0 * s, 4.0 * s]);
        rows.push(vec![4.0 * s, 3.0 * s, 2.0 * s, s]);
    }
    let data = zscore_rows(&DataMatrix::from_rows(&rows).unwrap()).unwrap();
    let c = Algorithm::KMeansEnhanced
        .run(&data, &AlgoParams::with_k(2), 0)
        .unwrap();
    let rising: Vec<usize> = (0..12).step_by(2).map(|i| c.labels[i]).collect();
    let falling: Vec<usize> = (1..12).step_by(2).map(|i| c.labels[i]).collect();
    assert!(rising.iter().all(|&l| l == rising[0]));
    assert!(falling.iter().all(|&l| l == falling[0]));
    assert_ne!(rising[0], falling[0]);
}

#[test]
fn silhouette_ignores_row_order() {
    let data = blobs(
        vec![vec![0.0, 0.0], vec![3.0, 3.0], vec![0.0, 4.0]],
        15,
        1.0,
        4,
    );
    let c = Algorithm::Eagmfi
        .run(&data, &AlgoParams::with_k(3), 0)
        .unwrap();
    let s = silhouette(&data, &c).unwrap();

    let order: Vec<usize> = (0..data.n_rows()).rev().collect();
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| data.row(i).to_vec()).collect();
    let shuffled = DataMatrix::from_rows(&rows).unwrap();
    let labels = order.iter().map(|&i| c.labels[i]).collect();
    let d = Clustering::from_parts(&shuffled, labels, c.centroids.clone(), 1).unwrap();
    let t = silhouette(&shuffled, &d).unwrap();
    for (pos, &i) in order.iter().enumerate() {
        assert!((t.per_point[pos] - s.per_point[i]).abs() < 1e-12);
    }
    assert!((t.mean - s.mean).abs() < 1e-12);
}

#[test]
fn far_apart_tight_blobs_score_near_one() {
    let three = blobs(
        vec![
            vec![100.0, 0.0, 0.0],
            vec![0.0, 100.0, 0.0],
            vec![0.0, 0.0, 100.0],
        ],
        25,
        0.01,
        2,
    );
    let c = Algorithm::KMeansEnhanced
        .run(&three, &AlgoParams::with_k(3), 0)
        .unwrap();
    assert_eq!(c.sizes, [25, 25, 25]);
    assert!(silhouette(&three, &c).unwrap().mean > 0.999);

    let two = blobs(vec![vec![0.0; 3], vec![100.0; 3]], 25, 0.01, 2);
    let (c, state) = run_eagmfi(&two, &AlgoParams::with_k(2)).unwrap();
    assert_eq!(c.sizes, [25, 25]);
    assert_eq!(state.outer_iteration, 2);
    assert!(silhouette(&two, &c).unwrap().mean > 0.999);
}

#[test]
fn three_cluster_start_alternates_until_the_iteration_cap() {
    // the closest pair always sits below the mean-distance threshold, and at
    // k = 2 a split is forced, so the loop alternates until it runs out
    let data = blobs(
        vec![
            vec![100.0, 0.0, 0.0],
            vec![0.0, 100.0, 0.0],
            vec![0.0, 0.0, 100.0],
        ],
        25,
        0.01,
        2,
    );
    let params = AlgoParams::with_k(3);
    let (c, state) = run_eagmfi(&data, &params).unwrap();
    assert_eq!(state.outer_iteration, params.max_outer_iterations);
    let passes: Vec<OuterAction> = state
        .history
        .iter()
        .filter(|h| h.action != OuterAction::Seed)
        .map(|h| h.action)
        .collect();
    assert_eq!(
        passes[..3],
        [OuterAction::Stable, OuterAction::Merge, OuterAction::Split]
    );
    assert_eq!(c.sizes.len(), 2);
    assert!(c.sizes.contains(&50));
}

#[test]
fn random_and_enhanced_outer_loops_share_invariants() {
    let data = blobs(
        vec![
            vec![0.0, 0.0],
            vec![6.0, 0.0],
            vec![3.0, 5.0],
            vec![9.0, 6.0],
        ],
        40,
        0.8,
        11,
    );
    let params = AlgoParams::with_k(8);
    let (e, es) = run_eagmfi(&data, &params).unwrap();
    for seed in 1..=5 {
        let (r, rs) = run_agmfi_random(&data, &params, seed).unwrap();
        r.validate(&data).unwrap();
        assert!(rs.outer_iteration <= params.max_outer_iterations);
        assert_eq!(rs.history[0].action, OuterAction::Seed);
    }
    e.validate(&data).unwrap();
    assert_eq!(e.iterations, es.outer_iteration);
    assert!(es.history.iter().all(|h| h.k >= 1 && h.sse >= 0.0));
}
