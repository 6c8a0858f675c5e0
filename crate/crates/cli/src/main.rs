use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use taplink::config::{MatchInputs, PipelineConfig, StatsConfig};
use taplink::error::CliError;
use taplink::pipeline::{self, ReportFormat};

#[derive(Parser)]
#[command(name = "taplink", version, about = "Link travel-diary trips to smart-card journeys")]
struct Cli {
    /// Worker threads for matching and the statistics sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from the [synth] section of a config.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ingest inputs and match respondents to cards.
    Match {
        #[arg(long)]
        diary: PathBuf,
        #[arg(long)]
        transactions: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional config for the [matcher] section.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute error statistics from a matches file.
    Analyze {
        #[arg(long)]
        matches: PathBuf,
        #[arg(long)]
        diary: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional config for the [stats] section.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render the tables of an analysis directory.
    Report {
        #[arg(long)]
        analysis: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Defaults to `<analysis>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage as configured.
    All {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_or_default(config: Option<&PathBuf>) -> Result<PipelineConfig, CliError> {
    match config {
        Some(p) => PipelineConfig::load(p),
        None => PipelineConfig::parse(""),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Synth { config, out } => {
            let cfg = PipelineConfig::load(&config)?;
            let synth = cfg
                .synth
                .ok_or_else(|| CliError::Config(format!("{}: no [synth] section", config.display())))?;
            pipeline::run_synth(&synth, &out)?;
        }
        Command::Match {
            diary,
            transactions,
            tables,
            out,
            config,
        } => {
            let cfg = load_or_default(config.as_ref())?;
            let inputs = MatchInputs {
                transactions,
                diary,
                tables,
            };
            pipeline::run_match(&inputs, &cfg.matcher, &out)?;
        }
        Command::Analyze {
            matches,
            diary,
            tables,
            out,
            config,
        } => {
            let stats: StatsConfig = load_or_default(config.as_ref())?.stats;
            pipeline::run_analyze(&matches, &diary, &tables, &stats, &out)?;
        }
        Command::Report { analysis, format, out } => {
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            let out = out.unwrap_or_else(|| analysis.join(pipeline::REPORT_DIR));
            pipeline::run_report(&analysis, &[format], &out)?;
        }
        Command::All { config } => {
            pipeline::run_all(&PipelineConfig::load(&config)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
