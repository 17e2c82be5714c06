//! Loads the input matrix and runs every (algorithm, seed) job.

use std::path::Path;
use std::time::Instant;

use isoclust_core::ingest::{drop_missing_rows, parse_table, zscore_rows, ParseOptions};
use isoclust_core::quality::{quality_report, QualityReport};
use isoclust_core::{Algorithm, DataMatrix};
use rayon::prelude::*;

use crate::config::RunSpec;
use crate::error::CliError;
use crate::report::{aggregate, ComparisonReport};

pub const THREADS_ENV: &str = "ISOCLUST_THREADS";

/// Worker count from `ISOCLUST_THREADS`; 0 or unset lets rayon decide.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got '{v}'"
            ))
        }),
    }
}

pub fn load(path: &Path, spec: &RunSpec) -> Result<(DataMatrix, usize), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let options = ParseOptions {
        delimiter: spec.delimiter,
        ..ParseOptions::default()
    };
    let raw = parse_table(&text, &options).map_err(CliError::from_ingest)?;
    let (data, dropped) = drop_missing_rows(&raw).map_err(CliError::from_ingest)?;
    let data = if spec.normalize {
        zscore_rows(&data).map_err(CliError::from_ingest)?
    } else {
        data
    };
    Ok((data, dropped))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs the benchmark described by `spec`. Notices go to `notice`.
pub fn execute(spec: &RunSpec, notice: &mut dyn FnMut(&str)) -> Result<ComparisonReport, CliError> {
    let (data, dropped) = load(&spec.input, spec)?;
    if dropped > 0 {
        notice(&format!("dropped {dropped} row(s) with missing values"));
    }
    if spec.params.k_init > data.n_rows() {
        return Err(CliError::Config(format!(
            "k={} exceeds the {} rows left after filtering",
            spec.params.k_init,
            data.n_rows()
        )));
    }

    let mut jobs: Vec<(Algorithm, u64)> = Vec::new();
    for &algo in &spec.algorithms {
        if algo.is_deterministic() {
            if spec.seeds_explicit {
                notice(&format!(
                    "{algo} is deterministic; seeds ignored, one run executed"
                ));
            }
            jobs.push((algo, 0));
        } else {
            jobs.extend(spec.seeds.iter().map(|&s| (algo, s)));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Run(e.to_string()))?;
    let results: Vec<Result<QualityReport, CliError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(algo, seed)| {
                let start = Instant::now();
                let clustering = algo
                    .run(&data, &spec.params, seed)
                    .map_err(CliError::from_run)?;
                quality_report(&data, &clustering, start.elapsed()).map_err(CliError::from_run)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let name = dataset_name(&spec.input);
    for &algo in &spec.algorithms {
        let runs = jobs
            .iter()
            .zip(&results)
            .filter(|((a, _), _)| *a == algo)
            .map(|(_, r)| r.clone())
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(aggregate(
            &name,
            algo,
            spec.params.k_init,
            &runs,
            spec.timing,
        ));
    }
    Ok(ComparisonReport {
        dataset: name,
        initial_k: spec.params.k_init,
        rows,
    })
}
