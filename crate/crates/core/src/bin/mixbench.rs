use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixbench::config::{self, OutputFormat, RunConfig};
use mixbench::runner::{self, RunError, Status};

#[derive(Parser)]
#[command(
    name = "mixbench",
    version,
    about = "Four-wave-mixing amplitudes for bosons and fermions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate amplitudes at one point or over a grid
    Run(RunArgs),
    /// Same as `run`, defaulting to CSV output
    Sweep(RunArgs),
    /// List the scattering paths into a destination term
    Paths {
        #[command(flatten)]
        args: RunArgs,
        /// Destination term, e.g. "v v u" or "v(1) v(2) u(1)"
        destination: Option<String>,
    },
    /// Run the verification grid and write a JSON report
    Verify {
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, default_value_t = 8)]
        nmax: u32,
        #[arg(long, default_value = "verify_report.json")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key = value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    statistics: Option<String>,
    #[arg(long)]
    n1: Option<String>,
    #[arg(long)]
    n2: Option<String>,
    #[arg(long)]
    n3: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sb: Option<String>,
    /// Comma list of firstq, oracle, closed (or "all")
    #[arg(long)]
    engines: Option<String>,
    /// table, csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
}

impl RunArgs {
    fn into_config(self, default_format: OutputFormat) -> Result<RunConfig, RunError> {
        let mut cfg = RunConfig {
            output: default_format,
            ..RunConfig::default()
        };
        cfg.apply_env()?;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| config::ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            cfg.apply(&config::parse_assignments(&text)?)?;
        }
        let mut flags = BTreeMap::new();
        let pairs = [
            ("experiment", self.experiment),
            ("statistics", self.statistics),
            ("n1", self.n1),
            ("n2", self.n2),
            ("n3", self.n3),
            ("n", self.n),
            ("epsilon", self.epsilon),
            ("sa", self.sa),
            ("sb", self.sb),
            ("engines", self.engines),
            ("format", self.format),
            ("out", self.out.map(|p| p.display().to_string())),
            ("tolerance", self.tolerance),
            ("nmax", self.nmax),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.insert(key.to_string(), v);
            }
        }
        cfg.apply(&flags)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, RunError> {
    match cli.command {
        Command::Run(args) => run_records(args.into_config(OutputFormat::Table)?),
        Command::Sweep(args) => run_records(args.into_config(OutputFormat::Csv)?),
        Command::Paths { args, destination } => {
            let cfg = args.into_config(OutputFormat::Table)?;
            let destination = destination
                .or_else(|| cfg.destination.clone())
                .ok_or_else(|| RunError::Destination("missing destination".into()))?;
            emit(&runner::cmd_paths(&cfg, &destination)?, cfg.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { tolerance, nmax, out } => {
            let mut cfg = RunConfig::default();
            cfg.apply_env()?;
            let report = runner::cmd_verify(tolerance, nmax, cfg.fermion_cap)?;
            runner::write_report(&report, &out)?;
            let s = &report.summary;
            let group_divergent = report
                .group_checks
                .iter()
                .filter(|g| g.status == Status::KnownDivergence)
                .count();
            println!(
                "{} records: {} pass, {} known-divergence, {} fail; {} group checks ({} known-divergence); report written to {}",
                s.total,
                s.pass,
                s.known_divergence,
                s.fail,
                report.group_checks.len(),
                group_divergent,
                out.display()
            );
            Ok(ExitCode::from(report.exit_code() as u8))
        }
    }
}

fn run_records(cfg: RunConfig) -> Result<ExitCode, RunError> {
    let records = runner::cmd_run(&cfg)?;
    emit(&runner::render_records(&records, cfg.output)?, cfg.out.as_ref())?;
    let failed = records.iter().any(|r| r.status == Status::Fail);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("mixbench: {err}");
            ExitCode::from(2)
        }
    }
}
