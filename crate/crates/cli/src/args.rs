use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "meibo",
    version,
    about = "Segmentation and quantitative analysis of meibography images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment ROI and glands and write per-image reports plus a batch summary.
    Analyze(AnalyzeArgs),
    /// Score an automatic mask against a manual one.
    Eval(EvalArgs),
    /// Render a synthetic image with its truth masks and metrics.
    Phantom(PhantomArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Image files (PNG or BMP) or directories holding them.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Image resolution in millimetres per pixel.
    #[arg(long = "r-mm-per-px", default_value_t = 0.03)]
    pub r_mm_per_px: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the image with ROI and gland contours drawn on it.
    #[arg(long)]
    pub overlay: bool,
    /// Also write every intermediate ROI stage.
    #[arg(long)]
    pub trace: bool,
    /// Images analyzed at once; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub auto: PathBuf,
    #[arg(long)]
    pub manual: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["spec", "corpus"])))]
pub struct PhantomArgs {
    /// TOML phantom spec; absent fields take their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Generate this many varied phantoms instead of one spec.
    #[arg(long)]
    pub corpus: Option<usize>,
    /// Seed of the corpus generator.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
