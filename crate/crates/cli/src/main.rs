use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sflab::{config::parse_kappa, run_suite, write_trace, CliError, SuiteConfig, SuiteName};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run numerical verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write its JSON report (stdout unless --out is given).
    Run(Box<RunArgs>),
    /// Print the suite names.
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    suite: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    /// Moment-map level as R1,R2.
    #[arg(long, value_parser = parse_kappa_arg)]
    kappa: Option<(f64, f64)>,
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Replace the tolerance of every check.
    #[arg(long)]
    tol: Option<f64>,
    /// Support radius of the twist profile (model-twist).
    #[arg(long)]
    support: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record duration_s = 0 so that repeated runs give identical bytes.
    #[arg(long)]
    reproducible: bool,
}

fn parse_kappa_arg(s: &str) -> Result<(f64, f64), String> {
    parse_kappa(s).map_err(|e| e.to_string())
}

fn build_config(args: RunArgs) -> Result<SuiteConfig, CliError> {
    let suite: SuiteName = args.suite.parse()?;
    let mut cfg = match &args.config {
        Some(path) => SuiteConfig::from_file(path, Some(suite))?,
        None => SuiteConfig::new(suite),
    };
    cfg.n = args.n.or(cfg.n);
    cfg.mu = args.mu.or(cfg.mu);
    cfg.kappa = args.kappa.or(cfg.kappa);
    if !args.t.is_empty() {
        cfg.t = args.t;
    }
    cfg.step = args.step.or(cfg.step);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.samples = args.samples.or(cfg.samples);
    cfg.tol = args.tol.or(cfg.tol);
    cfg.support = args.support.or(cfg.support);
    cfg.out = args.out.or(cfg.out);
    cfg.trace = args.trace.or(cfg.trace);
    cfg.reproducible |= args.reproducible;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<bool, CliError> {
    let cfg = build_config(args)?;
    let out = run_suite(&cfg)?;
    let report = &out.report;
    match &cfg.out {
        Some(path) => report.write(path)?,
        None => print!("{}", report.to_json()?),
    }
    if let (Some(path), Some(trace)) = (&cfg.trace, &out.trace) {
        write_trace(path, trace)?;
    }
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        eprintln!("{}: pass ({} checks)", report.suite, report.checks.len());
    } else {
        eprintln!("{}: FAIL ({})", report.suite, failed.join(", "));
    }
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            for s in SuiteName::ALL {
                println!("{s}");
            }
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(*args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("lab: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
