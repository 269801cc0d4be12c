use clap::{Args, Parser, Subcommand};
use gyroflr::runner::{self, Model, RunConfig};
use gyroflr::{par, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gyroflr", version = gyroflr::VERSION, about = "Finite Larmor radius Vlasov-Poisson solvers")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "GYROFLR_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Snapshot cadence in steps, overrides the config.
    #[arg(long)]
    snapshot_every: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the eps model.
    RunEps {
        #[command(flatten)]
        run: RunArgs,
        /// Overrides `eps` (single value).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Integrate the weak-* limit model.
    RunLimit(RunArgs),
    /// Integrate the two-scale limit model.
    RunTwoScale(RunArgs),
    /// Convergence sweep of the eps model against both limits.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated eps values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Single-eps comparison against both limits.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Print derived physical scales.
    Scales {
        #[command(flatten)]
        common: Common,
    },
    /// Conservation summary of a run directory.
    Diag {
        /// Run directory holding diagnostics.csv.
        dir: PathBuf,
    },
}

fn load(common: &Common) -> gyroflr::Result<RunConfig> {
    let mut cfg = runner::load_config(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(v: &T) -> gyroflr::Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Domain(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn run_model(args: RunArgs, model: Model, eps: Option<f64>) -> gyroflr::Result<()> {
    let mut cfg = load(&args.common)?;
    cfg.model = model;
    if let Some(e) = eps {
        if !(e > 0.0) {
            return Err(Error::config("eps", "must be positive"));
        }
        cfg.eps = e;
    }
    if let Some(n) = args.snapshot_every {
        cfg.diagnostics.snapshot_every = n;
    }
    let out = runner::run(&cfg)?;
    log::info!("wrote {}", out.dir.display());
    print_json(&out.conservation)
}

fn dispatch(cmd: Cmd) -> gyroflr::Result<()> {
    match cmd {
        Cmd::RunEps { run, eps } => run_model(run, Model::Eps, eps),
        Cmd::RunLimit(run) => run_model(run, Model::LimitG, None),
        Cmd::RunTwoScale(run) => run_model(run, Model::TwoScale, None),
        Cmd::Sweep { common, eps } => {
            let cfg = load(&common)?;
            let report = runner::sweep(&cfg, eps.as_deref(), "sweep")?;
            print_json(&report)
        }
        Cmd::Compare { common, eps } => {
            let cfg = load(&common)?;
            let list = eps.unwrap_or_else(|| vec![cfg.eps]);
            let report = runner::sweep(&cfg, Some(&list), "compare")?;
            print_json(&report)
        }
        Cmd::Scales { common } => {
            let cfg = load(&common)?;
            let s = runner::scales(&cfg)?;
            if common.out.is_some() {
                std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
                runner::artifacts::write_json(&cfg.output.join("scales.json"), &s)?;
            }
            print_json(&s)
        }
        Cmd::Diag { dir } => print_json(&runner::diag(&dir)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match par::with_threads(cli.threads, || dispatch(cli.cmd)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
