//! `ncc-sim`: command-line runner for the platform-trial simulation engine.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncc_core::config::GridConfig;
use ncc_core::datagen::generate_trial;
use ncc_core::inference::ncc_weights;
use ncc_core::montecarlo::{run_grid, write_csv};
use ncc_core::randomization::assign_trial;
use ncc_core::rng::derive_seed;

const SEED_ENV: &str = "NCC_SIM_SEED";
const DEFAULT_SEED: u64 = 20231016;

const FIGURES: [(&str, &str); 4] = [
    ("3", include_str!("../../../configs/fig3.json")),
    ("4", include_str!("../../../configs/fig4.json")),
    ("5", include_str!("../../../configs/fig5.json")),
    ("6", include_str!("../../../configs/fig6.json")),
];

#[derive(Parser)]
#[command(
    name = "ncc-sim",
    version,
    about = "Simulate platform trials with non-concurrent controls"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario grid and write one summary row per grid point and model.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the weight matrix and rho for cell sizes n01 n02 n11 n12.
    Weights {
        #[arg(allow_negative_numbers = true)]
        n01: i64,
        #[arg(allow_negative_numbers = true)]
        n02: i64,
        #[arg(allow_negative_numbers = true)]
        n11: i64,
        #[arg(allow_negative_numbers = true)]
        n12: i64,
    },
    /// Run the bundled grid of a figure (3, 4, 5 or 6).
    Figure {
        id: String,
        #[command(flatten)]
        opts: RunOpts,
        /// Print the bundled configuration instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Write the dataset (or assignment sequence) of one replicate as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Grid point index.
        #[arg(long, default_value_t = 0)]
        point: usize,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the assignment sequence instead of the outcomes.
        #[arg(long)]
        assignments: bool,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Replicates per grid point; overrides the configuration.
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed; overrides the configuration and NCC_SIM_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn config_error(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_error(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Run { config, opts } => {
            let parsed = load_config(&config)?;
            run(parsed, &opts)
        }
        Command::Validate { config } => {
            let parsed = load_config(&config)?;
            check(&parsed)?;
            let points: usize = parsed.to_grid(0).map_err(config_error)?.points.len();
            println!("ok: {points} grid points, {} models", parsed.models.len());
            Ok(())
        }
        Command::Weights { n01, n02, n11, n12 } => {
            let count = |n: i64| usize::try_from(n).ok().filter(|&n| n > 0);
            let counts = [n01, n02, n11, n12].map(count);
            let [Some(a), Some(b), Some(c), Some(d)] = counts else {
                return Err(Failure::Config("cell sizes must be positive integers".into()));
            };
            let weights = ncc_weights(a, b, c, d).map_err(config_error)?;
            print!("{weights}");
            Ok(())
        }
        Command::Figure { id, opts, print_config } => {
            let Some((_, text)) = FIGURES.iter().find(|(name, _)| *name == id) else {
                return Err(Failure::Config(format!(
                    "unknown figure {id}; expected one of 3, 4, 5, 6"
                )));
            };
            if print_config {
                print!("{text}");
                return Ok(());
            }
            let parsed = GridConfig::from_json(text).map_err(config_error)?;
            run(parsed, &opts)
        }
        Command::Simulate {
            config,
            point,
            replicate,
            seed,
            out,
            assignments,
        } => {
            let parsed = load_config(&config)?;
            let master = resolve_seed(seed, &parsed)?.0;
            let grid = parsed.to_grid(master).map_err(config_error)?;
            let Some(grid_point) = grid.points.get(point) else {
                return Err(Failure::Config(format!(
                    "point {point} out of range; the grid has {} points",
                    grid.points.len()
                )));
            };
            let seed = derive_seed(master, &[point as u64, replicate]);
            let mut writer = open_output(out.as_deref())?;
            if assignments {
                let sequence = assign_trial(&grid.design, seed).map_err(runtime_error)?;
                sequence.write_csv(&mut writer).map_err(runtime_error)?;
            } else {
                let data = generate_trial(&grid_point.scenario, &grid.design, seed).map_err(runtime_error)?;
                data.write_csv(&mut writer).map_err(runtime_error)?;
            }
            writer.flush().map_err(runtime_error)
        }
    }
}

fn load_config(path: &Path) -> CliResult<GridConfig> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(Failure::Config(format!("config not found: {}", path.display())));
        }
        Err(e) => return Err(Failure::Config(format!("cannot read config {}: {e}", path.display()))),
    };
    GridConfig::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn check(config: &GridConfig) -> CliResult {
    let violations = config.validate();
    if violations.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
    Err(Failure::Config(format!("invalid configuration:\n{}", lines.join("\n"))))
}

/// Seed precedence: flag, then configuration, then environment, then the
/// built-in default.
fn resolve_seed(flag: Option<u64>, config: &GridConfig) -> CliResult<(u64, &'static str)> {
    if let Some(seed) = flag {
        return Ok((seed, "flag"));
    }
    if let Some(seed) = config.seed {
        return Ok((seed, "config"));
    }
    match std::env::var(SEED_ENV) {
        Ok(value) => value
            .trim()
            .parse()
            .map(|seed| (seed, "environment"))
            .map_err(|_| Failure::Config(format!("{SEED_ENV} is not an unsigned integer: {value:?}"))),
        Err(_) => Ok((DEFAULT_SEED, "default")),
    }
}

fn run(mut config: GridConfig, opts: &RunOpts) -> CliResult {
    if let Some(reps) = opts.reps {
        config.replicates = reps;
    }
    let (seed, source) = resolve_seed(opts.seed, &config)?;
    config.seed = Some(seed);
    check(&config)?;
    let grid = config.to_grid(seed).map_err(config_error)?;
    let summaries = run_grid(&grid, opts.workers).map_err(runtime_error)?;

    let mut writer = open_output(opts.out.as_deref())?;
    match opts.format {
        Format::Csv => write_csv(&summaries, &mut writer).map_err(runtime_error)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut writer, &summaries).map_err(runtime_error)?;
            writeln!(writer).map_err(runtime_error)?;
        }
    }
    writer.flush().map_err(runtime_error)?;

    if let Some(out) = &opts.out {
        config.provenance = Some(serde_json::json!({
            "tool": concat!("ncc-sim ", env!("CARGO_PKG_VERSION")),
            "seed_source": source,
            "output": out.display().to_string(),
            "format": opts.format.as_str(),
        }));
        let sidecar = sidecar_path(out);
        std::fs::write(&sidecar, config.to_json().map_err(runtime_error)?)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", sidecar.display())))?;
    }
    Ok(())
}

/// `results.csv` → `results.provenance.json`.
fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.provenance.json"))
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}
