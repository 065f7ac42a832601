use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "seedscan",
    version,
    about = "Seed and prompt-modifier recovery for CPU-seeded latent diffusion"
)]
pub struct Cli {
    /// Worker threads for searches and fitness evaluation.
    #[arg(long, global = true, env = "SEEDSCAN_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the initial noise for a seed as NPY.
    GenNoise(GenNoiseArgs),
    /// Find the seed whose noise best matches a target latent.
    RecoverSeed(RecoverSeedArgs),
    /// Search for the prompt modifiers behind a target latent.
    GaRecover(GaRecoverArgs),
    /// Paired-loss test or seed-magnitude histogram from CSV.
    Stats(StatsArgs),
    /// Answer oracle requests on stdin with mock latents.
    #[command(hide = true)]
    ServeMockOracle(ServeMockArgs),
}

#[derive(Debug, Args)]
pub struct GenNoiseArgs {
    #[arg(long, required_unless_present = "secure", conflicts_with = "secure")]
    pub seed: Option<u64>,
    /// Dimensions such as `4x64x64`.
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Use the ChaCha20 generator keyed by `--key`.
    #[arg(long, requires = "key")]
    pub secure: bool,
    /// 256-bit key as 64 hex characters.
    #[arg(long, requires = "secure")]
    pub key: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Range,
    Full32,
}

#[derive(Debug, Args)]
pub struct RecoverSeedArgs {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// First seed of the range (range mode).
    #[arg(long)]
    pub lo: Option<u64>,
    /// One past the last seed (range mode).
    #[arg(long)]
    pub hi: Option<u64>,
    /// Restrict full32 mode to seeds `0..2^B` for timing runs.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=32))]
    pub subrange_bits: Option<u32>,
    #[arg(long)]
    pub report: PathBuf,
    /// Exit with status 3 when the z-score of the best seed is below this.
    #[arg(long, default_value_t = 8.0)]
    pub min_z: f64,
    #[arg(long)]
    pub chunk_size: Option<u64>,
    #[arg(long)]
    pub stage1_len: Option<usize>,
    #[arg(long)]
    pub stage1_keep: Option<usize>,
    #[arg(long)]
    pub stage2_len: Option<usize>,
    #[arg(long)]
    pub finalists: Option<usize>,
    #[arg(long)]
    pub baseline_sample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GaRecoverArgs {
    #[arg(long)]
    pub target: PathBuf,
    /// Subject part of the prompt.
    #[arg(long)]
    pub prefix: String,
    /// Generation seed of the target.
    #[arg(long)]
    pub seed: u64,
    /// CSV with `modifier,frequency` columns.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Minimum frequency for a modifier to be usable.
    #[arg(long, default_value_t = seedscan::ga::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// `mock` or `exec:COMMAND`.
    #[arg(long)]
    pub oracle: String,
    /// Seconds to wait for each exec oracle response.
    #[arg(long, default_value_t = 600.0)]
    pub oracle_timeout: f64,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub tournament_size: Option<usize>,
    #[arg(long)]
    pub p_replace: Option<f64>,
    #[arg(long)]
    pub p_insert: Option<f64>,
    #[arg(long)]
    pub p_delete: Option<f64>,
    #[arg(long)]
    pub elite_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false)]
pub struct StatsInput {
    /// CSV with `label,ssdm,dssm` columns.
    #[arg(long, group = "input")]
    pub pairs: Option<PathBuf>,
    /// CSV with a `seed` column and an optional `cpu` column.
    #[arg(long, group = "input")]
    pub seeds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: StatsInput,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeMockArgs {
    #[arg(long)]
    pub shape: String,
    /// Directory for the latent files.
    #[arg(long)]
    pub out_dir: PathBuf,
}
