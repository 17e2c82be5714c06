//! Resolves command-line flags, an optional `key=value` config file and
//! built-in defaults into a [`RunSpec`]. Flags win over the file, the file
//! wins over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use isoclust_core::ingest::Delimiter;
use isoclust_core::{AlgoParams, Algorithm};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(CliError::Config(format!("unknown format '{s}'"))),
        }
    }
}

fn parse_delimiter(s: &str) -> Result<Delimiter, CliError> {
    match s {
        "auto" => Ok(Delimiter::Auto),
        "tab" => Ok(Delimiter::Tab),
        "comma" => Ok(Delimiter::Comma),
        "semicolon" => Ok(Delimiter::Semicolon),
        _ => Err(CliError::Config(format!("unknown delimiter '{s}'"))),
    }
}

/// Flags shared by `run` and `compare`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Delimited expression matrix (TSV/CSV).
    #[arg(long)]
    pub input: PathBuf,
    /// Optional key=value file with defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// tab, comma, semicolon or auto.
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Z-score every row after removing rows with missing values.
    #[arg(long)]
    pub normalize: bool,
    /// Initial number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "min-cluster-size")]
    pub min_cluster_size: Option<usize>,
    #[arg(long = "max-outer-iter")]
    pub max_outer_iter: Option<usize>,
    #[arg(long = "max-kmeans-iter")]
    pub max_kmeans_iter: Option<usize>,
    #[arg(long = "split-multiplier")]
    pub split_multiplier: Option<f64>,
    #[arg(long = "split-offset")]
    pub split_offset: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated seeds for the randomized algorithms.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// table, csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Leave the runtime column empty so output is reproducible byte for byte.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub input: PathBuf,
    pub delimiter: Delimiter,
    pub normalize: bool,
    pub algorithms: Vec<Algorithm>,
    pub params: AlgoParams,
    pub seeds: Vec<u64>,
    /// Seeds came from the user rather than the default list.
    pub seeds_explicit: bool,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub timing: bool,
}

const CONFIG_KEYS: &[&str] = &[
    "algo",
    "delimiter",
    "normalize",
    "k",
    "min-cluster-size",
    "max-outer-iter",
    "max-kmeans-iter",
    "split-multiplier",
    "split-offset",
    "tol",
    "seeds",
    "format",
    "no-timing",
];

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected key=value", n + 1))
        })?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Config(format!(
                "config line {}: unknown key '{key}'",
                n + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("invalid value '{v}' for {key}"))),
        }
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }

    fn seeds(&self, flag: Option<Vec<u64>>) -> Result<Option<Vec<u64>>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get("seeds")
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| CliError::Config(format!("invalid seed '{s}'")))
                    })
                    .collect()
            })
            .transpose()
    }
}

/// Which subcommand is being resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// One algorithm, named by `--algo` or the config file.
    Run(Option<String>),
    /// All four algorithms in fixed order.
    Compare,
}

pub fn resolve(args: RunArgs, mode: Mode) -> Result<RunSpec, CliError> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let layer = Layer { file: &file };
    let algorithms = match mode {
        Mode::Compare => Algorithm::ALL.to_vec(),
        Mode::Run(algo) => {
            let name: String = layer
                .pick(algo, "algo")?
                .ok_or_else(|| CliError::Config("--algo is required".into()))?;
            let algo = name
                .parse::<Algorithm>()
                .map_err(|e| CliError::Config(e.to_string()))?;
            vec![algo]
        }
    };

    let defaults = AlgoParams::default();
    let k_init = layer
        .pick(args.k, "k")?
        .ok_or_else(|| CliError::Config("--k is required".into()))?;
    let params = AlgoParams {
        k_init,
        min_cluster_size: layer
            .pick(args.min_cluster_size, "min-cluster-size")?
            .unwrap_or(defaults.min_cluster_size),
        max_outer_iterations: layer
            .pick(args.max_outer_iter, "max-outer-iter")?
            .unwrap_or(defaults.max_outer_iterations),
        split_multiplier: layer
            .pick(args.split_multiplier, "split-multiplier")?
            .unwrap_or(defaults.split_multiplier),
        split_offset_fraction: layer
            .pick(args.split_offset, "split-offset")?
            .unwrap_or(defaults.split_offset_fraction),
        convergence_tol: layer
            .pick(args.tol, "tol")?
            .unwrap_or(defaults.convergence_tol),
        max_kmeans_iterations: layer
            .pick(args.max_kmeans_iter, "max-kmeans-iter")?
            .unwrap_or(defaults.max_kmeans_iterations),
    };
    params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let explicit_seeds = layer.seeds(args.seeds)?;
    let seeds_explicit = explicit_seeds.is_some();
    let seeds = explicit_seeds.unwrap_or_else(|| (1..=5).collect());
    if seeds.is_empty() {
        return Err(CliError::Config("seed list is empty".into()));
    }

    let delimiter = match layer.pick::<String>(args.delimiter, "delimiter")? {
        Some(s) => parse_delimiter(&s)?,
        None => Delimiter::Auto,
    };
    let format = layer
        .pick::<String>(args.format, "format")?
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(OutputFormat::Table);

    Ok(RunSpec {
        input: args.input,
        delimiter,
        normalize: layer.switch(args.normalize, "normalize")?,
        algorithms,
        params,
        seeds,
        seeds_explicit,
        format,
        output: args.output,
        timing: !layer.switch(args.no_timing, "no-timing")?,
    })
}
