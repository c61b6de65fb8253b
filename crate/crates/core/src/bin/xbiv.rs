use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use xbiv::compute::{compute, ComputeArgs, Target};
use xbiv::problem::{ProblemFile, Resolved};
use xbiv::scalar::Mode;
use xbiv::suites::{run_suite, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "xbiv", version, about = "Invariant suites and computations for noncommutative forms, JLO cocycles and bivariant Chern characters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
    /// Also write the JSON result here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites.
    Run {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        /// Monte-Carlo samples for the simplex-integral oracle.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one quantity.
    Compute {
        #[arg(long, value_parser = parse_target)]
        target: Target,
        #[arg(long)]
        algebra: Option<String>,
        /// Algebra element in text notation, e.g. "E11".
        #[arg(long)]
        element: Option<String>,
        #[arg(long)]
        idempotent: Option<String>,
        #[arg(long)]
        triple: Option<String>,
        /// Chain in text notation, e.g. "E11 d[E12] d[E21]".
        #[arg(long)]
        chain: Option<String>,
        /// Heat-kernel time for the index pairing.
        #[arg(long)]
        time: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: xbiv::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: xbiv::Error| e.to_string())
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: xbiv::Error| e.to_string())
}

fn load(common: &Common) -> xbiv::Result<Resolved> {
    match &common.config {
        Some(p) => ProblemFile::load(p)?.resolve(),
        None => Ok(Resolved::builtin()),
    }
}

fn emit(common: &Common, json: &str, text: &str) -> xbiv::Result<()> {
    if let Some(p) = &common.out {
        std::fs::write(p, format!("{json}\n"))?;
    }
    match common.report {
        ReportFormat::Json => println!("{json}"),
        ReportFormat::Text => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> xbiv::Result<bool> {
    match cli.command {
        Command::Run { suite, samples, common } => {
            let problem = load(&common)?;
            let f = &problem.file;
            let cfg = RunConfig {
                seed: common.seed.or(f.seed).unwrap_or(RunConfig::default().seed),
                mode: common.mode.or(f.mode).unwrap_or(Mode::Exact),
                tol: common.tol.or(f.tol),
                trunc: common.trunc.or(f.trunc),
                mc_samples: samples,
            };
            let report = run_suite(&problem, suite, &cfg);
            emit(&common, &serde_json::to_string_pretty(&report)?, &report.render_text())?;
            Ok(report.passed)
        }
        Command::Compute { target, algebra, element, idempotent, triple, chain, time, common } => {
            let problem = load(&common)?;
            let args = ComputeArgs { algebra, element, idempotent, triple, chain, trunc: common.trunc.or(problem.file.trunc), time };
            let result = compute(&problem, target, &args)?;
            emit(&common, &serde_json::to_string_pretty(&result)?, &result.render_text())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
