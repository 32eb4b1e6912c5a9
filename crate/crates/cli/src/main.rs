//! `flagwalk`: run one stage of an experiment config, the sweep, the claim
//! audits or the whole verification suite.
//!
//! Every flag has an environment fallback with the `FLAGWALK_` prefix
//! (`FLAGWALK_CONFIG`, `FLAGWALK_SEED`, `FLAGWALK_OUT`, `FLAGWALK_THREADS`,
//! `FLAGWALK_STAGE`); an explicit flag wins over the environment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flagwalk::experiments::{verify_all, ExperimentConfig, Lab, Stage};
use flagwalk::tolerances;

#[derive(Debug, Parser)]
#[command(name = "flagwalk", version, about = "Random walks on SL(d,R): spectra, harmonic measures, entropies, dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Experiment config (JSON).
    #[arg(long, global = true, env = "FLAGWALK_CONFIG", default_value = "configs/default.json")]
    config: PathBuf,

    /// Overrides the seed of the config.
    #[arg(long, global = true, env = "FLAGWALK_SEED")]
    seed: Option<u64>,

    /// Overrides the output directory of the config.
    #[arg(long, global = true, env = "FLAGWALK_OUT")]
    out: Option<PathBuf>,

    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "FLAGWALK_THREADS")]
    threads: Option<usize>,

    /// Stage to run when no subcommand is given.
    #[arg(long, env = "FLAGWALK_STAGE", value_enum)]
    stage: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, ValueEnum)]
enum Command {
    /// Lyapunov spectrum and the reflected-walk identity.
    Spectrum,
    /// Limit-flag samples, banks and stationarity.
    Harmonic,
    /// Asymptotic and differential entropies.
    Entropy,
    /// Dimension proxies of the harmonic samples.
    Dimension,
    /// The mu_k singularity sweep.
    Sweep,
    /// Audits of the two claims about gamma.
    Claims,
    /// Every stage plus invariant checks; nonzero exit on any failure.
    Verify,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            Command::Spectrum => Stage::Spectrum,
            Command::Harmonic => Stage::Harmonic,
            Command::Entropy => Stage::Entropy,
            Command::Dimension => Stage::Dimension,
            Command::Sweep => Stage::Sweep,
            Command::Claims => Stage::Claims,
            Command::Verify => return None,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("FLAGWALK_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let command = match (cli.command, cli.stage) {
        (Some(c), Some(s)) if c != s => return Err(format!("subcommand {c:?} conflicts with --stage {s:?}").into()),
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err("no stage given: pass a subcommand or --stage".into()),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = std::env::current_dir()?.join(out);
    }
    if !tolerances::install(cfg.tolerances.clone()) {
        log::warn!("tolerance table was already installed; config overrides ignored");
    }
    match command.stage() {
        Some(stage) => {
            let summary = Lab::open(cfg)?.run_stage(stage)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        None => {
            let report = verify_all(&cfg)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
