use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bds_core::channel::{link_budget_csv, link_budget_report, LinkBudgetParams};
use bds_core::experiment::{run_experiment, summary_text, write_outputs, CoopMode, ExperimentConfig};
use bds_core::mobility::stationary_uniformity_check;
use bds_core::traffic::{aggregate_rate_check, rate_check_text, SMARTPHONE_MIX};
use bds_core::{Result, ScenarioConfig, SelectionStrategy};

#[derive(Parser)]
#[command(name = "bds-sim", version, about = "Battery deposit service D2D relay simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run paired cooperative / non-cooperative replications.
    Run(RunArgs),
    /// Print the cellular vs. D2D path-loss comparison table.
    LinkBudget(ConfigArg),
    /// Compare the burst generator rate with the smartphone traffic mix.
    TrafficCheck(ConfigArg),
    /// Radial KS distance of long-run positions against a uniform disk.
    MobilityCheck(MobilityArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    /// on, off or paired
    #[arg(long, default_value = "paired")]
    coop: String,
    /// Target usage times in hours, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![6.0, 8.0, 10.0])]
    targets: Vec<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// proximity or max-battery
    #[arg(long)]
    strategy: Option<String>,
    /// Horizon in hours; `inf` runs until every battery is empty.
    #[arg(long)]
    horizon: Option<String>,
    /// Histogram bin width in minutes.
    #[arg(long, default_value_t = 30.0)]
    bin_minutes: f64,
    /// Run replications one after another.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct MobilityArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 100.0)]
    interval_s: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn load(path: &Option<PathBuf>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::from_file(p),
        None => Ok(ScenarioConfig::default()),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut scenario = load(&args.config)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(s) = &args.strategy {
        scenario.strategy = s.parse::<SelectionStrategy>()?;
    }
    if let Some(h) = &args.horizon {
        let hours = if h == "inf" {
            f64::INFINITY
        } else {
            h.parse::<f64>()
                .map_err(|_| bds_core::Error::InvalidArgument(format!("bad --horizon `{h}`")))?
        };
        scenario.sim_end_s = hours * 3600.0;
    }
    scenario.validate()?;
    let mut exp = ExperimentConfig::new(scenario);
    exp.replications = args.replications;
    exp.mode = args.coop.parse::<CoopMode>()?;
    exp.targets_s = args.targets.iter().map(|h| h * 3600.0).collect();
    exp.parallel = !args.serial;
    exp.bin_width_s = args.bin_minutes * 60.0;
    let result = run_experiment(&exp)?;
    let files = write_outputs(&result, &args.out)?;
    print!("{}", summary_text(&result));
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a),
        Command::LinkBudget(a) => load(&a.config).map(|cfg| {
            print!("{}", link_budget_csv(&link_budget_report(&LinkBudgetParams::from_config(&cfg))));
        }),
        Command::TrafficCheck(a) => load(&a.config).map(|cfg| {
            print!("{}", rate_check_text(&aggregate_rate_check(&cfg, &SMARTPHONE_MIX), &SMARTPHONE_MIX));
        }),
        Command::MobilityCheck(a) => load(&a.config).map(|cfg| {
            let c = stationary_uniformity_check(&cfg, a.seed, a.samples, a.interval_s);
            println!("samples = {}", c.n_samples);
            println!("interval_s = {:.3}", c.interval_s);
            println!("random_duration_ks = {:.6}", c.random_duration_ks);
            println!("random_waypoint_ks = {:.6}", c.random_waypoint_ks);
        }),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
