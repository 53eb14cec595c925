//! Command-line runner for the Hecke L-function resonance experiments.

mod commands;
mod config;
mod manifest;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::{ExperimentConfig, Real};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "hecke-resonance",
    about = "Central values of Hecke L-functions to angular characters and \
             resonance searches for extreme values",
    version
)]
struct Cli {
    /// JSON configuration file; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Field parameter d (negative squarefree).
    #[arg(long, global = true, allow_hyphen_values = true)]
    d: Option<i64>,
    /// Dyadic anchor X of the frequency range [X, 2X].
    #[arg(long = "X", global = true)]
    x: Option<f64>,
    /// Global epsilon in (0, 0.2).
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Worker threads for the frequency sweeps (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampled probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path: a directory, or a primary output file for
    /// compute-l / search / moment.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump the field context (discriminant, class group, composition) as JSON.
    FieldInfo,
    /// Run the kernel verification suite and write one CSV row per check.
    VerifyKernels,
    /// Central values over a frequency range as CSV.
    ComputeL {
        /// Inclusive frequency range; defaults to [X, 2X].
        #[arg(long = "ell-range", num_args = 2, value_names = ["LO", "HI"])]
        ell_range: Option<Vec<i64>>,
    },
    /// Euler-product factorizations of the diagonal sums against brute force.
    EulerCheck,
    /// First-moment numerator and denominator in direct and diagonal form.
    Moment,
    /// Count near-diagonal lattice points in dyadic/angular windows.
    ProbeOffdiag {
        #[arg(long, default_value_t = 4)]
        nu_max: u32,
        #[arg(long, default_value_t = 8)]
        m_max: u32,
        /// Number of sampled (a, b) support-product pairs besides ((1),(1)).
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Full resonance search over [X, 2X] with JSON report and CSV sidecar.
    Search,
}

#[derive(Parser, Debug)]
#[command(name = "hecke-resonance")]
struct FullCli {
    #[clap(flatten)]
    common: Cli,
    #[clap(subcommand)]
    command: Command,
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = cli.d {
        cfg.d = d;
    }
    if let Some(x) = cli.x {
        cfg.x = Real(x);
    }
    if let Some(e) = cli.epsilon {
        cfg.epsilon = Real(e);
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() {
    let cli = FullCli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: FullCli) -> Result<i32> {
    let cfg = effective_config(&cli.common)?;
    #[cfg(feature = "parallel")]
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::FieldInfo => commands::field_info(&cfg),
        Command::VerifyKernels => commands::verify_kernels(&cfg),
        Command::ComputeL { ell_range } => commands::compute_l(&cfg, ell_range),
        Command::EulerCheck => commands::euler_check(&cfg),
        Command::Moment => commands::moment(&cfg),
        Command::ProbeOffdiag { nu_max, m_max, samples } => {
            commands::probe_offdiag(&cfg, nu_max, m_max, samples)
        }
        Command::Search => commands::search(&cfg),
    }
}
