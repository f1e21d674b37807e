//! Command-line front end: run an experiment from a scenario file or a
//! built-in preset and write plot-ready result files.
//!
//! Exit codes: 0 on success, 2 for configuration problems (unreadable or
//! invalid scenario, unknown preset, bad flag combinations), 3 for
//! runtime failures (estimation errors, unwritable output paths).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use risim::clusters::EvolutionMode;
use risim::experiments::{self, RunOptions};
use risim::output::{write_tables, OutputTable, RunStamp};
use risim::{Error, Scenario};

#[derive(Parser)]
#[command(
    name = "risim",
    version = risim::VERSION,
    about = "Seed-reproducible channel simulator for reflecting-surface-assisted links",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-autocorrelation curves (estimator and closed form).
    Acf(RunArgs),
    /// Spatial cross-correlation along the base-station array.
    Ccf(RunArgs),
    /// Empirical distribution of the cascaded RMS delay spread.
    DsCdf(RunArgs),
    /// Line-of-sight budget of the surface-assisted path.
    Pathloss(RunArgs),
    /// Parse and validate a scenario, print its configuration hash.
    Validate(SourceArgs),
}

/// Where the scenario comes from: exactly one of a file or a preset.
#[derive(Args)]
struct SourceArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario preset (fig5, fig6, fig7, fig8).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Master seed (default: the scenario's run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the result files.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Ensemble size of the correlation estimators (default:
    /// the scenario's run.ensemble).
    #[arg(long)]
    ensemble: Option<usize>,
    /// Worker threads; 0 means automatic.  Never changes results.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the configured cluster-evolution reading.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Survival-probability reading (stationary cluster counts).
    Corrected,
    /// Verbatim death-probability reading, kept for audit runs.
    PaperLiteral,
}

impl From<ModeArg> for EvolutionMode {
    fn from(m: ModeArg) -> EvolutionMode {
        match m {
            ModeArg::Corrected => EvolutionMode::Corrected,
            ModeArg::PaperLiteral => EvolutionMode::PaperLiteral,
        }
    }
}

fn load_scenario(source: &SourceArgs) -> Result<Scenario, Error> {
    match (&source.config, &source.preset) {
        (Some(path), None) => Scenario::from_file(path),
        (None, Some(name)) => Scenario::preset(name),
        (None, None) => Err(Error::scenario(
            "no scenario given; pass --config <path> or --preset <name>",
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects combined sources"),
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        // Problems with the configuration itself.
        Error::Io { .. } | Error::Parse(_) | Error::InvalidScenario(_) => 2,
        // Problems while computing or writing results.
        Error::InvalidArgument(_) | Error::IndexOutOfRange(_) | Error::Output { .. } => 3,
    }
}

fn run_experiment(
    args: &RunArgs,
    run: impl Fn(&Scenario, &RunOptions) -> Result<Vec<OutputTable>, Error>,
) -> Result<(), Error> {
    let scenario = load_scenario(&args.source)?;
    scenario.validate()?;
    let mut opts = RunOptions::from_scenario(&scenario);
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    if let Some(ensemble) = args.ensemble {
        opts.ensemble = ensemble;
    }
    if let Some(workers) = args.workers {
        opts.workers = workers;
    }
    if let Some(mode) = args.mode {
        opts.mode = Some(mode.into());
    }
    for warning in experiments::warnings(&scenario, &opts) {
        eprintln!("warning: {warning}");
    }
    let stamp: RunStamp = experiments::run_stamp(&scenario, &opts)?;
    let tables = run(&scenario, &opts)?;
    let paths = write_tables(&tables, &args.out, &stamp)?;
    println!(
        "{} [{}] seed {} -> {} file(s):",
        stamp.label, stamp.config_hash, stamp.seed, paths.len()
    );
    for path in paths {
        println!("  {}", path.display());
    }
    Ok(())
}

fn validate_command(source: &SourceArgs) -> Result<(), Error> {
    let scenario = load_scenario(source)?;
    scenario.validate()?;
    println!(
        "ok: {} (config hash {}, seed {}, ensemble {})",
        scenario.label,
        scenario.config_hash()?,
        scenario.run.seed,
        scenario.run.ensemble
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Acf(args) => run_experiment(args, experiments::run_acf),
        Command::Ccf(args) => run_experiment(args, experiments::run_ccf),
        Command::DsCdf(args) => run_experiment(args, experiments::run_ds_cdf),
        Command::Pathloss(args) => run_experiment(args, experiments::run_pathloss),
        Command::Validate(source) => validate_command(source),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
