//! Clustering engine: K-Means, deterministic seeding, ISODATA-style
//! split/merge with an automatically generated merge factor, silhouette
//! scoring, and the ingest/synthetic-data plumbing around them.

pub mod algorithms;
pub mod datamodel;
pub mod enhanced_init;
pub mod error;
pub mod ingest;
pub mod isodata;
pub mod kmeans;
pub mod quality;
pub mod synth;

pub use algorithms::Algorithm;
pub use datamodel::{euclidean_distance, recompute_sse, AlgoParams, Clustering, DataMatrix};
pub use error::{ClusterError, Result};
