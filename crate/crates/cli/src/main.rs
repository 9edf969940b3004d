//! `corrclust`: simulate block-correlated data, cluster variables with the
//! reversible-jump sampler or a classical baseline, and score the result.

mod commands;
mod config;
mod io;
mod manifest;

use clap::{Args, Parser, Subcommand};
use config::{Settings, UsageError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "corrclust",
    version,
    about = "Bayesian clustering of correlated variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset with known cluster structure.
    Simulate(SimulateArgs),
    /// Run the sampler on a data CSV and summarize the posterior.
    Fit(FitArgs),
    /// Cluster variables with K-means, PAM or hierarchical clustering.
    Baseline(BaselineArgs),
    /// Score labels against the truth, or run a simulation sweep.
    Evaluate(Box<EvaluateArgs>),
}

#[derive(Args)]
struct Common {
    /// File of `key = value` lines (or a previous manifest.json); flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: .]
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct DesignArgs {
    /// bunea or block (simulate defaults to bunea, sweeps to block)
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Within-block correlation for block designs [default: 0.7]
    #[arg(long)]
    r: Option<f64>,
    /// Block sizes, comma separated (block design).
    #[arg(long)]
    sizes: Option<String>,
    /// One correlation per block, comma separated (block design).
    #[arg(long)]
    rs: Option<String>,
}

impl DesignArgs {
    fn record(self, s: &mut Settings) {
        s.flag("design", self.design)
            .flag("k", self.k)
            .flag("m", self.m)
            .flag("r", self.r)
            .flag("sizes", self.sizes)
            .flag("rs", self.rs);
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    design: DesignArgs,
    /// Observations [default: 300]
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ChainArgs {
    /// [default: 5000]
    #[arg(long)]
    iterations: Option<usize>,
    /// [default: 1000]
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Birth probability per iteration [default: 0.25]
    #[arg(long)]
    birth: Option<f64>,
    /// Death probability per iteration [default: 0.25]
    #[arg(long)]
    death: Option<f64>,
    /// Cluster count of the initial state [default: 2]
    #[arg(long)]
    initial_m: Option<usize>,
    #[arg(long)]
    poisson_rate: Option<f64>,
    /// Symmetric Dirichlet concentration [default: 1]
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta_step: Option<f64>,
    #[arg(long)]
    lambda_step: Option<f64>,
    /// Check every acceptance ratio against full recomputation.
    #[arg(long)]
    verify: bool,
    /// Sample the prior (likelihood switched off).
    #[arg(long)]
    prior_only: bool,
    /// Use the data as given instead of centering and scaling each column.
    #[arg(long)]
    no_standardize: bool,
}

impl ChainArgs {
    fn record(self, s: &mut Settings) {
        s.flag("iterations", self.iterations)
            .flag("burn-in", self.burn_in)
            .flag("thin", self.thin)
            .flag("seed", self.seed)
            .flag("birth", self.birth)
            .flag("death", self.death)
            .flag("initial-m", self.initial_m)
            .flag("poisson-rate", self.poisson_rate)
            .flag("alpha", self.alpha)
            .flag("theta-step", self.theta_step)
            .flag("lambda-step", self.lambda_step)
            .flag("verify", self.verify.then_some(true))
            .flag("likelihood", self.prior_only.then_some(false))
            .flag("standardize", self.no_standardize.then_some(false));
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    /// Data CSV with a header row.
    #[arg(long)]
    data: Option<String>,
    /// Optional `variable,label` file; adds a recovery score to the summary.
    #[arg(long)]
    truth: Option<String>,
    /// Independent chains, run in parallel [default: 1]
    #[arg(long)]
    chains: Option<usize>,
    #[command(flatten)]
    chain: ChainArgs,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: Option<String>,
    /// kmeans, pam or hierarchical
    #[arg(long)]
    method: Option<String>,
    /// Number of clusters.
    #[arg(long)]
    m: Option<usize>,
    /// single, complete, average or ward [default: average]
    #[arg(long)]
    linkage: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// K-means restarts [default: 10]
    #[arg(long)]
    restarts: Option<usize>,
    /// Lloyd iterations or PAM swaps [default: 300]
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Estimated `variable,label` file.
    #[arg(long)]
    labels: Option<String>,
    /// True `variable,label` file.
    #[arg(long)]
    truth: Option<String>,
    /// Simulation sweep over one design setting, e.g. `n=100,300,600,900`.
    #[arg(long)]
    sweep: Option<String>,
    /// Datasets per sweep value [default: 5]
    #[arg(long)]
    reps: Option<usize>,
    /// Methods in the sweep [default: bvc,kmeans,pam,hierarchical]
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    linkage: Option<String>,
    /// Observations when `n` is not swept [default: 300]
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    chain: ChainArgs,
}

fn settings(common: Common, command: &str) -> anyhow::Result<Settings> {
    let mut s = Settings::load(common.config.as_deref(), command)?;
    s.flag("out", common.out);
    Ok(s)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let mut s = settings(a.common, "simulate")?;
            a.design.record(&mut s);
            s.flag("n", a.n).flag("seed", a.seed);
            commands::simulate::run(s)
        }
        Command::Fit(a) => {
            let mut s = settings(a.common, "fit")?;
            s.flag("data", a.data)
                .flag("truth", a.truth)
                .flag("chains", a.chains);
            a.chain.record(&mut s);
            commands::fit::run(s)
        }
        Command::Baseline(a) => {
            let mut s = settings(a.common, "baseline")?;
            s.flag("data", a.data)
                .flag("method", a.method)
                .flag("m", a.m)
                .flag("linkage", a.linkage)
                .flag("seed", a.seed)
                .flag("restarts", a.restarts)
                .flag("max-iter", a.max_iter)
                .flag("standardize", a.no_standardize.then_some(false));
            commands::baseline::run(s)
        }
        Command::Evaluate(a) => {
            let a = *a;
            let mut s = settings(a.common, "evaluate")?;
            s.flag("labels", a.labels)
                .flag("truth", a.truth)
                .flag("sweep", a.sweep)
                .flag("reps", a.reps)
                .flag("methods", a.methods)
                .flag("linkage", a.linkage)
                .flag("n", a.n);
            a.design.record(&mut s);
            a.chain.record(&mut s);
            commands::evaluate::run(s)
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<UsageError>()
            || matches!(
                c.downcast_ref::<corrclust_core::Error>(),
                Some(
                    corrclust_core::Error::Config(_) | corrclust_core::Error::LengthMismatch { .. }
                )
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
