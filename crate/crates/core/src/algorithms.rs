//! The four benchmarked algorithms behind one entry point.

use std::fmt;
use std::str::FromStr;

use crate::datamodel::{AlgoParams, Clustering, DataMatrix};
use crate::enhanced_init::init_centroids;
use crate::error::{ClusterError, Result};
use crate::isodata::{run_agmfi_random, run_eagmfi};
use crate::kmeans::{random_init, run_kmeans};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Lloyd's K-Means from random rows.
    KMeans,
    /// K-Means from the deterministic initializer, with pruned reassignment.
    KMeansEnhanced,
    /// Split/merge outer loop from random rows.
    Agmfi,
    /// Split/merge outer loop from the deterministic initializer.
    Eagmfi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::KMeans,
        Algorithm::KMeansEnhanced,
        Algorithm::Agmfi,
        Algorithm::Eagmfi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::KMeansEnhanced => "kmeans-enhanced",
            Algorithm::Agmfi => "agmfi",
            Algorithm::Eagmfi => "eagmfi",
        }
    }

    /// Whether the result ignores the seed.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Algorithm::KMeansEnhanced | Algorithm::Eagmfi)
    }

    pub fn run(self, data: &DataMatrix, params: &AlgoParams, seed: u64) -> Result<Clustering> {
        params.validate()?;
        match self {
            Algorithm::KMeans => {
                let init = random_init(data, params.k_init, seed)?;
                run_kmeans(data, &init, params, false)
            }
            Algorithm::KMeansEnhanced => {
                let init = init_centroids(data, params.k_init)?;
                run_kmeans(data, &init.centroids, params, true)
            }
            Algorithm::Agmfi => run_agmfi_random(data, params, seed).map(|r| r.0),
            Algorithm::Eagmfi => run_eagmfi(data, params).map(|r| r.0),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ClusterError::Argument(format!("unknown algorithm '{s}'")))
    }
}
