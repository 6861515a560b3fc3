mod commands;
mod manifest;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "texseg",
    version,
    about = "Texture segmentation with patch autocovariance features"
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "TEXSEG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a multi-texture mosaic and its ground-truth mask.
    Generate(GenerateArgs),
    /// Compute per-pixel autocovariance features.
    Features(FeaturesArgs),
    /// Segment an image into texture regions.
    Segment(SegmentArgs),
    /// Score a label map against a ground-truth mask.
    Evaluate(EvaluateArgs),
    /// Rerun one of the accuracy tables.
    Reproduce(ReproduceArgs),
    /// Run a Monte-Carlo experiment on the consistency theory.
    Theory(TheoryArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PaddingArg {
    Reflect,
    Wrap,
    Shrink,
}

impl From<PaddingArg> for texseg::features::Padding {
    fn from(p: PaddingArg) -> Self {
        match p {
            PaddingArg::Reflect => Self::Reflect,
            PaddingArg::Wrap => Self::Wrap,
            PaddingArg::Shrink => Self::Shrink,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MetricArg {
    Linf,
    L2,
}

impl From<MetricArg> for texseg::clustering::Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Linf => Self::Linf,
            MetricArg::L2 => Self::L2,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AlgoArg {
    Kmeans,
    SlinkThreshold,
    SlinkK,
    Ward,
}

impl From<AlgoArg> for texseg::pipeline::Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Kmeans => Self::KMeans,
            AlgoArg::SlinkThreshold => Self::SingleLinkThreshold,
            AlgoArg::SlinkK => Self::SingleLinkK,
            AlgoArg::Ward => Self::Ward,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Experiment {
    Concentration,
    Consistency,
    Theorem2,
    Lemma3,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Comma-separated sources, one per region: ma1..ma4, kernel:<v>,
    /// kernel:<a>:<b>:<c>:<d> or image:<path>.
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<String>,
    /// vsplit, hsplit, disk, quadrants or mask:<path>.
    #[arg(long, default_value = "vsplit")]
    geom: String,
    /// Side of a square mosaic.
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Overrides the row count from `--size`.
    #[arg(long)]
    rows: Option<usize>,
    /// Overrides the column count from `--size`.
    #[arg(long)]
    cols: Option<usize>,
    /// Half-width of the moving-average models.
    #[arg(long, default_value_t = 2)]
    ma_width: usize,
    /// Coordinate scale of kernel sources; defaults to 1/n.
    #[arg(long)]
    kernel_scale: Option<f64>,
    /// Keep each source's raw scale instead of standardizing it.
    #[arg(long)]
    no_standardize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    /// TEXF or PGM image.
    #[arg(long)]
    input: PathBuf,
    /// Patch half-width; defaults to round(sqrt(max(rows, cols))).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value_t = PaddingArg::Reflect)]
    padding: PaddingArg,
    /// Append normalized (row, col) to every feature.
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    with_location: bool,
    /// Also print the feature of one pixel, given as `row,col`.
    #[arg(long, value_delimiter = ',')]
    at: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    /// TEXF or PGM image.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    algo: AlgoArg,
    /// Cluster count; required except for slink-threshold.
    #[arg(long)]
    k: Option<usize>,
    /// Patch half-width; defaults to round(sqrt(max(rows, cols))).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    with_location: bool,
    /// Linkage threshold for slink-threshold; defaults to the theoretical value.
    #[arg(long)]
    b: Option<f64>,
    /// Exponent of the theoretical threshold.
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    /// Minimum cluster size; defaults to a quarter of the balanced size.
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PaddingArg::Reflect)]
    padding: PaddingArg,
    #[arg(long, value_enum, default_value_t = MetricArg::Linf)]
    metric: MetricArg,
    /// Pixel budget of the linkage sample.
    #[arg(long, default_value_t = 1024)]
    linkage_points: usize,
    /// Ground-truth mask; when given, accuracy is printed.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Estimated label map (PGM or TEXF).
    #[arg(long)]
    labels: PathBuf,
    /// Ground-truth mask (PGM or TEXF).
    #[arg(long)]
    truth: PathBuf,
    /// Directory for match.csv and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// 1: synthetic; 2: Brodatz split; 3: Brodatz disk; 4: Brodatz quadrants.
    #[arg(long)]
    table: u8,
    /// One or more comma-separated seeds; accuracies are averaged over them.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seed: Vec<u64>,
    /// Directory holding D4, D6, D20, D21, D34, D52, D55 and D77 as PGM.
    #[arg(long)]
    brodatz_dir: Option<PathBuf>,
    /// Mosaic side; defaults to 128 (table 1) or 160.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 11)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    ma_width: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    with_location: bool,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 1024)]
    linkage_points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Image sides; defaults depend on the experiment.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Model for concentration (default ma3) or a comma-separated pair for
    /// consistency (default ma1,ma2).
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Half-width of the moving-average models; defaults to 1 for
    /// concentration and 2 otherwise.
    #[arg(long)]
    ma_width: Option<usize>,
    /// Deviation level for concentration.
    #[arg(long, default_value_t = 0.3)]
    a: f64,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    /// Patch half-width; defaults to round(sqrt(n)).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    with_location: bool,
    /// k-means restarts for consistency.
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    /// Kernel sizes of the two regions for theorem2, as kernel:<v> or kernel:<a>:<b>:<c>:<d>.
    #[arg(long, value_delimiter = ',', default_value = "kernel:1,kernel:9")]
    kernels: Vec<String>,
    /// Kernel coordinate scale for theorem2.
    #[arg(long, default_value_t = 3.0)]
    kernel_scale: f64,
    /// Linkage threshold for theorem2; defaults to the tuned 0.04.
    #[arg(long, default_value_t = 0.04)]
    b: f64,
    /// Sampled pixel pairs per size for lemma3.
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    manifest::mark_start();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("usage error");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Features(a) => commands::features(a),
        Command::Segment(a) => commands::segment(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Reproduce(a) => commands::reproduce(a),
        Command::Theory(a) => commands::theory(a),
    }
}
