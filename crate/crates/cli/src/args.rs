use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sobolev_ricci::pruning::DetourGraph;
use sobolev_ricci::{MeasureSpec, Method, Norm, TreeMode};

pub const OUT_DIR_ENV: &str = "SOBOLEV_RICCI_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "sobolev-ricci",
    version,
    about = "Sobolev–Ricci curvature, flow, clustering and pruning"
)]
pub struct Cli {
    /// Worker threads (default: all cores). `--threads 1` is bit-reproducible.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON file supplying flag values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Per-edge curvature of a graph.
    Curvature(CurvatureCmd),
    /// Ricci flow on edge weights.
    Flow(FlowCmd),
    /// Louvain communities on flowed (or raw) weights.
    Cluster(ClusterCmd),
    /// Curvature-guided shortcut pruning.
    Prune(PruneCmd),
    /// Consistency and robustness diagnostics.
    #[command(subcommand)]
    Diag(DiagCommand),
    /// Per-iteration flow timing.
    Bench(BenchCmd),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Stochastic block model with equal blocks.
    Sbm(GenSbm),
    /// Sampled manifold point cloud with its kNN graph.
    Manifold(GenManifold),
}

#[derive(Debug, Subcommand)]
pub enum DiagCommand {
    /// Curvature change between shortest-path trees from different roots.
    RootSensitivity(RootSensitivityCmd),
    /// Curvature magnitudes as measures approach Diracs.
    DiracSweep(DiracSweepCmd),
    /// Histogram of a curvature field file.
    Histogram(HistogramCmd),
    /// SRC under shortest-path, minimum and random spanning trees.
    TreeRobustness(TreeRobustnessCmd),
}

#[derive(Debug, Args, Serialize)]
pub struct GenSbm {
    #[arg(long)]
    pub n: usize,
    /// Number of blocks.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub p_intra: f64,
    /// Inter/intra probability ratio.
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldArg {
    #[value(name = "concentric_circles")]
    ConcentricCircles,
    #[value(name = "moons")]
    Moons,
    #[value(name = "s_curve")]
    SCurve,
    #[value(name = "swiss_roll_3d", alias = "3D_swiss_roll")]
    SwissRoll3d,
}

#[derive(Debug, Args, Serialize)]
pub struct GenManifold {
    #[arg(long, value_enum)]
    pub kind: ManifoldArg,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inner circle radius.
    #[arg(long, default_value_t = 1.0)]
    pub r1: f64,
    /// Outer circle radius.
    #[arg(long, default_value_t = 2.0)]
    pub r2: f64,
    /// Neighbors per point in the kNN graph.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Intrinsic/ambient distance ratio above which an edge is a shortcut.
    #[arg(long, default_value_t = 3.0)]
    pub shortcut_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    SrcSpt,
    SrcMst,
    SrcRandom,
    Orc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureArg {
    Lazy,
    Gaussian,
    Dirac,
}

/// Method and measure flags shared by every curvature-computing command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvatureOpts {
    #[arg(long, value_enum, default_value = "src-spt")]
    pub method: MethodArg,
    /// Root of the shortest-path tree.
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    /// Seed of the random spanning tree.
    #[arg(long, default_value_t = 0)]
    pub tree_seed: u64,
    /// Sobolev exponent.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "lazy")]
    pub measure: MeasureArg,
    /// Mass kept at the node by the lazy random walk.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Gaussian bandwidth.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Neighborhood size of Gaussian measures.
    #[arg(long, default_value_t = 10)]
    pub k_nn: usize,
    /// Norm of Gaussian measures: a number >= 1 or `inf`.
    #[arg(long, default_value = "2")]
    pub p_norm: String,
}

impl CurvatureOpts {
    pub fn tree_mode(&self) -> TreeMode {
        match self.method {
            MethodArg::SrcMst => TreeMode::Mst,
            MethodArg::SrcRandom => TreeMode::Random { seed: self.tree_seed },
            _ => TreeMode::Spt { root: self.root },
        }
    }

    pub fn method(&self) -> Method {
        match self.method {
            MethodArg::Orc => Method::Orc,
            _ => Method::Src {
                tree: self.tree_mode(),
                p: self.p,
            },
        }
    }

    pub fn measure(&self) -> sobolev_ricci::Result<MeasureSpec> {
        let spec = match self.measure {
            MeasureArg::Lazy => MeasureSpec::LazyRw { alpha: self.alpha },
            MeasureArg::Dirac => MeasureSpec::Dirac,
            MeasureArg::Gaussian => MeasureSpec::GaussianKnn {
                sigma: self.sigma,
                k: self.k_nn,
                p_norm: Norm::parse(&self.p_norm)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CurvatureCmd {
    /// Edge-list file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Point cloud whose rows match the graph's node order (Gaussian measures).
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
}

#[derive(Debug, Args, Serialize)]
pub struct FlowCmd {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
    /// Maximum number of flow iterations.
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Stop once the largest curvature change falls below this.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterCmd {
    #[arg(long)]
    pub graph: PathBuf,
    /// `u,v,weight` file from `flow`; the graph's lengths are used otherwise.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Similarity scale in exp(-beta * w).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    /// Search resolutions {0.5, 0.75, 1, 1.5, 2} and keep the best modularity.
    #[arg(long)]
    pub grid: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ground-truth `node,label` file; enables ARI.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneMode {
    Manl,
    CurvatureOnly,
    DistanceOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetourArg {
    WithoutEdge,
    WithoutCandidates,
}

impl From<DetourArg> for DetourGraph {
    fn from(d: DetourArg) -> Self {
        match d {
            DetourArg::WithoutEdge => DetourGraph::WithoutEdge,
            DetourArg::WithoutCandidates => DetourGraph::WithoutCandidates,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PruneCmd {
    /// Point cloud; its kNN graph is pruned.
    #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
    pub cloud: Option<PathBuf>,
    /// Intrinsic coordinates of the cloud; enables shortcut labels.
    #[arg(long, requires = "cloud")]
    pub intrinsic: Option<PathBuf>,
    /// Neighbors per point when building the kNN graph.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Intrinsic/ambient distance ratio above which an edge is a shortcut.
    #[arg(long, default_value_t = 3.0)]
    pub shortcut_ratio: f64,
    /// Edge-list file to prune instead of a point cloud.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// `u,v,shortcut` labels for `--graph`.
    #[arg(long, requires = "graph")]
    pub shortcuts: Option<PathBuf>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
    #[arg(long, value_enum, default_value = "manl")]
    pub mode: PruneMode,
    /// Candidates are edges with curvature <= -1 + 4 (1 - delta).
    #[arg(long, default_value_t = 0.75)]
    pub delta: f64,
    /// A candidate is removed when its detour exceeds length / lambda.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// Filter/confirm rounds, recomputing curvature after each.
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Graph in which the detour is measured.
    #[arg(long, value_enum, default_value = "without-edge")]
    pub detour: DetourArg,
    /// Length quantile for distance-only pruning.
    #[arg(long, default_value_t = 0.95)]
    pub quantile: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RootSensitivityCmd {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
    /// Number of random root pairs.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Alpha,
    Sigma,
}

#[derive(Debug, Args, Serialize)]
pub struct DiracSweepCmd {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
    #[arg(long, value_enum, default_value = "alpha")]
    pub family: FamilyArg,
    /// Schedule values, monotone toward the limit.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99,0.999,1")]
    pub values: Vec<f64>,
    /// Evaluate a random sample of this many edges (all edges by default).
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct HistogramCmd {
    /// Curvature field CSV.
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Explicit range `lo,hi` (default: data range).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub range: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct TreeRobustnessCmd {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
    /// Random spanning tree seeds.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchCmd {
    /// Edge-list files to time; an SBM is generated when none are given.
    #[arg(long)]
    pub graph: Vec<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub sbm_n: usize,
    #[arg(long, default_value_t = 0.15)]
    pub p_intra: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "src-spt,src-mst,orc")]
    pub methods: Vec<MethodArg>,
    #[command(flatten)]
    pub opts: CurvatureOpts,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Flow steps per repetition.
    #[arg(long, default_value_t = 1)]
    pub iters: usize,
}
