use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfuq::pipeline::{
    fit_trends, replication_study, run_campaign, run_mc_baseline, run_plan, summary_text,
    write_outputs, CampaignConfig, CampaignReport, ReplicationSummary,
};
use mfuq::snapshot::snapshot_store_write;
use mfuq::testbed::QoiKind;
use mfuq::Error;

/// Budget-aware multi-fidelity uncertainty quantification campaigns.
#[derive(Parser)]
#[command(name = "mfuq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Preliminary samples, trend fits and the optimal training size.
    Plan(Common),
    /// Full campaign ending in the multi-fidelity estimate.
    Run(Common),
    /// Plain Monte Carlo on the FOM at the same budget.
    Baseline(Common),
    /// Repeats the sampling phase on the synthetic model.
    Replicate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        replications: usize,
        /// Fixed coupling instead of the estimated one.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Trend fits from an existing snapshot file.
    FitTrends {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshots: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON campaign config; the built-in oxygen campaign when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    qoi: Option<QoiKind>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also record wall-clock timings.
    #[arg(long)]
    measure: bool,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_FALLBACK: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        Error::Budget(_) | Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::Solver { .. } => EXIT_SOLVER,
        _ => EXIT_FAILURE,
    }
}

impl Common {
    fn load(&self) -> Result<CampaignConfig, Error> {
        let mut c = match &self.config {
            Some(path) => CampaignConfig::load(path).map_err(|e| match e {
                Error::Io { path, source } => {
                    Error::Config(format!("cannot read {}: {source}", path.display()))
                }
                other => other,
            })?,
            None => CampaignConfig::oxygen(800.0, 60, 0),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(b) = self.budget {
            c.budget = b;
        }
        if let Some(q) = self.qoi {
            c.qoi = q;
        }
        if let Some(g) = self.gamma {
            c.gamma = g;
        }
        if let Some(w) = self.workers {
            c.workers = w;
        }
        if let Some(o) = &self.out {
            c.output_dir = Some(o.clone());
        }
        c.measure |= self.measure;
        Ok(c)
    }
}

fn emit(report: &CampaignReport) -> Result<(), Error> {
    print!("{}", summary_text(report));
    if let Some(dir) = &report.config.output_dir {
        let paths = write_outputs(report, dir)?;
        println!("\nwrote {}", paths.json.display());
    }
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &ReplicationSummary) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)?).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Plan(common) => {
            let c = common.load()?;
            let (report, snapshots) = run_plan(&c)?;
            emit(&report)?;
            if let Some(dir) = &c.output_dir {
                let path = dir.join("snapshots.bin");
                snapshot_store_write(&snapshots, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Run(common) => {
            let report = run_campaign(&common.load()?)?;
            emit(&report)?;
            Ok(if report.fallback_taken() { EXIT_FALLBACK } else { 0 })
        }
        Command::Baseline(common) => {
            emit(&run_mc_baseline(&common.load()?)?)?;
            Ok(0)
        }
        Command::Replicate {
            common,
            replications,
            lambda,
        } => {
            let c = common.load()?;
            let summary = replication_study(&c, replications, lambda)?;
            print!("{}", summary.to_text());
            if let Some(dir) = &c.output_dir {
                let path = write_json(dir, "replication.json", &summary)?;
                println!("\nwrote {}", path.display());
            }
            Ok(0)
        }
        Command::FitTrends { common, snapshots } => {
            emit(&fit_trends(&common.load()?, &snapshots)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
