use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use transport_honesty::honesty::{DefectReport, DefectWindow};
use transport_honesty::scenario::{
    lambda_defect, resolve_output_dir, run_scenario, window_defect, write_reports,
    ScenarioConfig, OUT_DIR_ENV,
};

/// Honesty diagnostics for collisionless transport scenarios.
///
/// Exit status: 0 honest, 2 dishonest, 3 inconclusive, 1 on any error.
#[derive(Parser, Debug)]
#[command(name = "honesty", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Expansion tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Cap on the number of expansion orders.
    #[arg(long, global = true)]
    n_cap: Option<usize>,
    /// Seed for sampled ensembles.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write its report files.
    Run {
        /// Scenario file, or `builtin:NAME`.
        config: String,
        /// Output directory; beats the environment and the scenario file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Defect over one time window.
    Honesty {
        config: String,
        /// Window as `s,t`.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
    },
    /// Resolvent defect at one λ.
    Resolvent {
        config: String,
        #[arg(long)]
        lambda: f64,
    },
    /// List the built-in scenarios.
    List,
}

fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let (s, t) = text
        .split_once(',')
        .ok_or_else(|| format!("expected s,t but got {text:?}"))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("{x:?}: {e}"))
    };
    Ok((parse(s)?, parse(t)?))
}

fn load(spec: &str, o: &Overrides) -> transport_honesty::Result<ScenarioConfig> {
    let mut config = ScenarioConfig::load(spec)?;
    if let Some(tol) = o.tol {
        config.set_tol(tol)?;
    }
    if let Some(n) = o.n_cap {
        config.set_n_cap(n)?;
    }
    if let Some(seed) = o.seed {
        config.set_seed(seed)?;
    }
    Ok(config)
}

fn print_defect(d: &DefectReport) {
    match d.window {
        DefectWindow::Time { s, t } => println!("window      [{s}, {t}]"),
        DefectWindow::Resolvent { lambda } => println!("lambda      {lambda}"),
    }
    println!("orders      {}", d.sequence.len());
    if let Some(last) = d.sequence.last() {
        println!("last term   {last:.16e}");
    }
    println!("limit       {:.16e}", d.limit);
    println!("status      {}", d.status.as_str());
    println!("verdict     {}", d.verdict.as_str());
}

fn execute(cli: Cli) -> transport_honesty::Result<ExitCode> {
    let verdict = match &cli.command {
        Command::List => {
            for name in ScenarioConfig::builtin_names() {
                println!("builtin:{name}");
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Run { config, out } => {
            let config = load(config, &cli.overrides)?;
            let report = run_scenario(&config)?;
            let dir = resolve_output_dir(&report, out.as_deref());
            for path in write_reports(&report, &dir)? {
                println!("wrote {}", path.display());
            }
            println!("scenario    {}", config.name);
            println!("trajectory  {}", report.trajectory.verdict.as_str());
            if let Some(agrees) = report.resolvent_agrees {
                println!("resolvent   {}", if agrees { "agrees" } else { "disagrees" });
            }
            println!("verdict     {}", report.verdict.as_str());
            report.verdict
        }
        Command::Honesty { config, window } => {
            let config = load(config, &cli.overrides)?;
            let d = window_defect(&config, window.0, window.1)?;
            print_defect(&d);
            d.verdict
        }
        Command::Resolvent { config, lambda } => {
            let config = load(config, &cli.overrides)?;
            let d = lambda_defect(&config, *lambda)?;
            print_defect(&d);
            d.verdict
        }
    };
    Ok(ExitCode::from(verdict.exit_code() as u8))
}

fn main() -> ExitCode {
    // clap's own usage-error status 2 would read as a dishonest verdict
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, transport_honesty::Error::Io(_)) {
                eprintln!("(output directory can be set with --out or {OUT_DIR_ENV})");
            }
            ExitCode::from(1)
        }
    }
}
