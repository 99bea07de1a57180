//! `disc`: generators, embedders, factor drivers, verifiers and oracles.

mod commands;
mod config;
mod experiment;
mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "disc", version, about = "Discrepancy of spanning subgraphs in 2-edge-colored complete graphs")]
struct Cli {
    /// Base seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Config file (default: $DISCLAB_CONFIG, else built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate guests, colorings and 2-factor shapes.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Embed a guest into a colored K_n.
    Embed(EmbedArgs),
    /// Extremal bisection of a graph.
    Bisect(BisectArgs),
    /// Table of the extremal K_k-factor constants.
    Lambda(LambdaArgs),
    /// K_k-factor with many edges of one color.
    Factor(FactorArgs),
    /// 2-factor embedding with many edges of one color.
    Twofactor(TwoFactorArgs),
    /// Exact and Monte-Carlo checks of the probability lemmas.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Brute-force ground truth at small n.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Run an experiment spec file.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
pub enum GenCmd {
    /// A guest graph.
    Graph(GenGraphArgs),
    /// A 2-coloring of K_n.
    Coloring(GenColoringArgs),
    /// A 2-factor from its cycle lengths.
    Twofactor(GenTwoFactorArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GraphKind {
    Cycle,
    Path,
    Matching,
    Complete,
    Cliques,
    Regular,
    Circulant,
    Random,
    Star,
}

#[derive(Args)]
pub struct GenGraphArgs {
    pub kind: GraphKind,
    #[arg(long)]
    pub n: usize,
    /// Degree for regular/circulant.
    #[arg(long)]
    pub d: Option<usize>,
    /// Clique size for cliques/star.
    #[arg(long)]
    pub k: Option<usize>,
    /// Edge probability for random, as a/b.
    #[arg(long, default_value = "1/2")]
    pub p: String,
    /// Leaf deficit for star, as a/b.
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ColoringKind {
    /// Ratio construction: edges touching X red.
    Bipartite,
    /// Same, with |X| given directly.
    Side,
    TwoCliques,
    /// Red graph is the balanced complete bipartite graph.
    CompleteBipartite,
    Random,
    Red,
    Blue,
}

#[derive(Args)]
pub struct GenColoringArgs {
    pub kind: ColoringKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "1/3")]
    pub rho: String,
    #[arg(long)]
    pub x: Option<usize>,
    /// Clique size for two-cliques (n = 2m).
    #[arg(long)]
    pub m: Option<usize>,
    /// Two-cliques with blue cliques and red cross edges.
    #[arg(long)]
    pub blue_cliques: bool,
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenTwoFactorArgs {
    /// Cycle lengths, e.g. 3,3,4.
    #[arg(long)]
    pub lengths: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedStrategy {
    /// Derandomized random embedding (or best of --sample uniform draws).
    Random,
    /// Biased-bisection cut embedding.
    Cut,
    /// Best of all applicable strategies for the guest.
    Auto,
    /// Pair-switching with guest and host certificates.
    Switch,
    SinglePair,
    GreedySwitch,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GbisMode {
    Auto,
    File,
}

#[derive(Args)]
pub struct EmbedArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: EmbedStrategy,
    #[arg(long)]
    pub guest: PathBuf,
    #[arg(long)]
    pub coloring: PathBuf,
    /// Host bisection source for the cut strategy.
    #[arg(long, value_enum, default_value = "auto")]
    pub gbis: GbisMode,
    /// Host bisection file (whitespace-separated X-side vertices) for --gbis file.
    #[arg(long)]
    pub gbis_file: Option<PathBuf>,
    #[arg(long, default_value = "1/10")]
    pub eps: String,
    /// Random strategy: best of this many uniform embeddings instead of derandomization.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BisectMode {
    Exact,
    Search,
}

#[derive(Args)]
pub struct BisectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "max")]
    pub direction: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: BisectMode,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Also report disc+/disc- (exact up to 24 vertices).
    #[arg(long)]
    pub disc: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LambdaArgs {
    /// A value, an inclusive range a..b, or a list.
    #[arg(long)]
    pub k: Option<String>,
    /// Table for k = 2..=max.
    #[arg(long)]
    pub max: Option<u64>,
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FactorArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub coloring: PathBuf,
    #[arg(long, default_value = "1/10")]
    pub eps: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TwoFactorArgs {
    /// 2-factor as {"n", "cycles"} JSON or a 2-regular graph file.
    #[arg(long)]
    pub guest: PathBuf,
    #[arg(long)]
    pub coloring: PathBuf,
    #[arg(long, default_value = "1/10")]
    pub eps: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PSide {
    Half,
    Eta,
}

#[derive(Args)]
pub struct HypergeomArgs {
    #[arg(long, default_value = "1/4")]
    pub eta: String,
    #[arg(long, value_enum, default_value = "half")]
    pub p: PSide,
    /// Sample sizes, e.g. 100..1000:100.
    #[arg(long, default_value = "100..1000:100")]
    pub k: String,
    /// Per-point margin curve as CSV.
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum VerifyCmd {
    /// Pointwise pmf lower bound on the central window.
    Anticoncentration(HypergeomArgs),
    /// Upper and lower tail bounds.
    Tails(HypergeomArgs),
    /// Exhaustive subset coupling for every n <= n-max.
    Coupling {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median of Bin(m, 1/2) for every m <= n-max.
    Binomial {
        #[arg(long, default_value_t = 2000)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossing edges of a uniform k-matching.
    Matching {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        p: usize,
        #[arg(long, default_value_t = 200)]
        k: usize,
        #[arg(long, default_value = "1/2")]
        eta: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Square-root deviation of the four-term sum.
    Sqrtdev {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        p: usize,
        #[arg(long, default_value_t = 500)]
        q: usize,
        #[arg(long, default_value_t = 400)]
        a: usize,
        #[arg(long, default_value_t = 200)]
        b: usize,
        #[arg(long, default_value = "1/4")]
        eta: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        /// Emit the tail curve as CSV.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum OracleCmd {
    /// Exact maximum discrepancy over all bijections.
    Maxdisc {
        #[arg(long)]
        guest: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact best K_k-factor (--k) or best embedding of a 2-factor shape (--guest).
    Factor {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        guest: Option<PathBuf>,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Spec file.
    pub spec: PathBuf,
    /// CSV destination (stdout by default).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock time per row (breaks byte-for-byte reproducibility).
    #[arg(long)]
    pub timing: bool,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let cfg = config::Config::load(cli.config.as_deref())?;
    let ctx = io::Ctx::new(cfg, cli.seed, cli.json);
    match cli.cmd {
        Cmd::Gen(g) => commands::gen(&ctx, g)?,
        Cmd::Embed(a) => commands::embed(&ctx, a)?,
        Cmd::Bisect(a) => commands::bisect(&ctx, a)?,
        Cmd::Lambda(a) => commands::lambda(&ctx, a)?,
        Cmd::Factor(a) => commands::factor(&ctx, a)?,
        Cmd::Twofactor(a) => commands::twofactor(&ctx, a)?,
        Cmd::Verify(v) => return commands::verify(&ctx, v),
        Cmd::Oracle(o) => commands::oracle(&ctx, o)?,
        Cmd::Experiment(a) => return experiment::run(&ctx, a),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
