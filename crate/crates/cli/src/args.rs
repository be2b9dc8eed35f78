use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpca::{KernelSpec, Normalization};

#[derive(Debug, Parser)]
#[command(name = "dpca", version, about = "Discriminative PCA and its kernel and multi-background variants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PCA of the target alone
    Pca(LinearArgs),
    /// Contrastive PCA: eigenvectors of C_xx - alpha C_yy
    Cpca {
        #[command(flatten)]
        common: LinearArgs,
        #[arg(long)]
        alpha: f64,
    },
    /// Discriminative PCA against one background
    Dpca(LinearArgs),
    /// Discriminative PCA against a weighted pool of backgrounds
    Mdpca {
        #[command(flatten)]
        common: LinearArgs,
        /// Comma-separated, one per background (default: uniform)
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Kernel PCA of the target alone
    Kpca(KernelArgs),
    /// Kernel dPCA against one background
    Kdpca(KernelArgs),
    /// Kernel dPCA against a weighted pool of backgrounds
    Kmdpca {
        #[command(flatten)]
        common: KernelArgs,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Write a synthetic protocol to CSV files
    Synth(SynthArgs),
    /// Time every fitter over a size grid and print CSV
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub target: PathBuf,
    /// Repeat for several backgrounds
    #[arg(long)]
    pub background: Vec<PathBuf>,
    #[arg(short = 'd', long = "components", default_value_t = 2)]
    pub d: usize,
    /// Ground-truth labels for the target; enables metrics.json
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Seed for k-means in the metrics
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NormArg::Background)]
    pub normalization: NormArg,
}

#[derive(Debug, Clone, Args)]
pub struct LinearArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Relative ridge delta: adds delta * trace(C_yy) / D to the diagonal
    #[arg(long)]
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// linear | poly2 | poly:DEGREE,OFFSET | gauss:BANDWIDTH
    #[arg(long, default_value = "poly2", value_parser = parse_kernel)]
    pub kernel: KernelSpec,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    /// Scale each direction to unit variance on the background
    Background,
    /// Unit Euclidean norm
    Euclidean,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Background => Normalization::Background,
            NormArg::Euclidean => Normalization::Euclidean,
        }
    }
}

pub fn parse_kernel(s: &str) -> Result<KernelSpec, String> {
    let bad = |msg: &str| format!("invalid kernel {s:?}: {msg}");
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    let spec = match kind {
        "linear" if params.is_empty() => KernelSpec::Linear,
        "poly2" if params.is_empty() => KernelSpec::poly2(),
        "poly" => {
            let (deg, off) = params.split_once(',').ok_or_else(|| bad("expected poly:DEGREE,OFFSET"))?;
            KernelSpec::Polynomial {
                degree: deg.trim().parse().map_err(|_| bad("degree must be a positive integer"))?,
                offset: off.trim().parse().map_err(|_| bad("offset must be a number"))?,
            }
        }
        "gauss" | "gaussian" => KernelSpec::Gaussian {
            bandwidth: params.trim().parse().map_err(|_| bad("expected gauss:BANDWIDTH"))?,
        },
        _ => return Err(bad("expected linear, poly2, poly:DEGREE,OFFSET or gauss:BANDWIDTH")),
    };
    spec.validate().map_err(|e| bad(&e.to_string()))?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Circles,
    Clusters,
    Generative,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("protocol").required(true).args(["paper_vii_b", "paper_vii_c", "paper_vii_d", "generative"])))]
pub struct SynthArgs {
    /// Optional family name; must agree with the protocol flag
    #[arg(value_enum)]
    pub kind: Option<SynthKind>,
    /// 4-D two-ring target with one background
    #[arg(long)]
    pub paper_vii_b: bool,
    /// 15-D Gaussian clusters with two backgrounds
    #[arg(long)]
    pub paper_vii_c: bool,
    /// 6-D three-ring target with two backgrounds
    #[arg(long)]
    pub paper_vii_d: bool,
    /// Factor model with a planted target-specific direction
    #[arg(long)]
    pub generative: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Ring noise variance
    #[arg(long, default_value_t = dpca::synth::RING_NOISE)]
    pub noise: f64,
    /// Read the Gaussian-cluster spreads as variances instead of standard deviations
    #[arg(long)]
    pub variance: bool,
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', default_value = "8,6,4")]
    pub sigma_b: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "12,9,6,2")]
    pub sigma_x: Vec<f64>,
    #[arg(short = 'm', long, default_value_t = 2000)]
    pub target_samples: usize,
    #[arg(short = 'n', long, default_value_t = 2000)]
    pub background_samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Total sample counts N = m + n (split evenly)
    #[arg(long, value_delimiter = ',', default_value = "200,400,800")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "pca,dpca,mdpca,kdpca,kmdpca")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write to a file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}
