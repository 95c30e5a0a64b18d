use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trs_cli::commands::{self, SweepDimension};
use trs_cli::config::RunMode;
use trs_cli::{CliError, CliResult, RunConfig};
use trs_core::optimize::Objective;
use trs_core::synth::CityParams;

#[derive(Parser)]
#[command(name = "trs", version, about = "Transit-based ridesharing: feasible matches, optimal assignment, rolling-horizon simulation")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set matching.objective=max-matches`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory (shorthand for `--set paths.output_dir=...`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Z1,
    Z2,
    Both,
}

impl ObjectiveArg {
    fn objectives(self) -> Vec<Objective> {
        match self {
            ObjectiveArg::Z1 => vec![Objective::MaxMatches],
            ObjectiveArg::Z2 => vec![Objective::MaxSavings],
            ObjectiveArg::Both => vec![Objective::MaxMatches, Objective::MaxSavings],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the time-expanded transit network and write its dump and counts.
    BuildNetwork,
    /// Static matching: feasible matches then the optimal assignment.
    Match {
        /// Objective to solve; default is the config's matching.objective.
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
    },
    /// Run whatever `matching.mode` names.
    Run,
    /// Rolling-horizon simulation.
    Simulate,
    /// Re-run static matching over one scenario dimension.
    Sweep {
        #[arg(long, value_enum)]
        dimension: SweepDimension,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Check every match in a file against the feasibility conditions.
    Validate {
        #[arg(long)]
        matches: PathBuf,
    },
    /// Generate requests from the [scenario] section.
    Scenario {
        /// Requests file; default `<output_dir>/requests.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic city (road tables, feed and run.toml).
    SynthCity {
        #[arg(long)]
        out: PathBuf,
        /// Intersections per side.
        #[arg(long)]
        grid: Option<u32>,
        /// Half-width of the transit-served core, in blocks.
        #[arg(long)]
        core_half_width: Option<u32>,
        /// Bus headway in seconds.
        #[arg(long)]
        headway: Option<i64>,
    },
}

fn load(g: &Global) -> CliResult<RunConfig> {
    let mut overrides = g.overrides.clone();
    if let Some(o) = &g.out_dir {
        let abs = std::path::absolute(o).map_err(|e| CliError::io(o, e))?;
        overrides.push(format!("paths.output_dir={}", toml::Value::String(abs.display().to_string())));
    }
    RunConfig::load(g.config.as_deref(), &overrides)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::SynthCity { out, grid, core_half_width, headway } => {
            let mut p = CityParams::default();
            if let Some(g) = grid {
                p.grid = g;
            }
            if let Some(c) = core_half_width {
                p.core_half_width = c;
            }
            if let Some(h) = headway {
                p.headway = h;
            }
            commands::synth_city_cmd(&p, &out)
        }
        cmd => {
            let cfg = load(&cli.global)?;
            match cmd {
                Command::BuildNetwork => commands::build_network(&cfg),
                Command::Match { objective } => {
                    let objs = objective.map(ObjectiveArg::objectives).unwrap_or_else(|| vec![cfg.matching.objective]);
                    commands::match_cmd(&cfg, &objs).map(drop)
                }
                Command::Run => match cfg.matching.mode {
                    RunMode::Dynamic => commands::simulate(&cfg).map(drop),
                    _ => commands::match_cmd(&cfg, &[cfg.matching.objective]).map(drop),
                },
                Command::Simulate => commands::simulate(&cfg).map(drop),
                Command::Sweep { dimension, values } => commands::sweep(&cfg, dimension, &values).map(drop),
                Command::Validate { matches } => commands::validate(&cfg, &matches).map(drop),
                Command::Scenario { out } => commands::scenario(&cfg, out).map(drop),
                Command::SynthCity { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
