use std::path::PathBuf;

use clap::Args;
use isoclust_core::ingest::write_tsv;
use isoclust_core::synth::{generate_blobs, BlobSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Blob centers: points separated by ';', coordinates by ','.
    #[arg(long, default_value = "0;10;20")]
    pub centers: String,
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// TSV destination (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Ground-truth labels destination.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

pub fn parse_centers(s: &str) -> Result<Vec<Vec<f64>>, CliError> {
    s.split(';')
        .map(|p| {
            p.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("invalid center coordinate '{v}'")))
                })
                .collect()
        })
        .collect()
}

/// Returns the matrix TSV and the labels TSV.
pub fn synth(args: &SynthArgs) -> Result<(String, String), CliError> {
    let spec = BlobSpec {
        centers: parse_centers(&args.centers)?,
        points_per_center: args.points,
        sigma: args.sigma,
        seed: args.seed,
    };
    let (data, labels) = generate_blobs(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let mut truth = String::from("id\tlabel\n");
    for (id, l) in data.row_ids().iter().zip(&labels) {
        truth.push_str(&format!("{id}\t{l}\n"));
    }
    Ok((write_tsv(&data), truth))
}
