use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gravcollapse::distribution::Weighting;
use gravcollapse::report::{emit_report, run_scenario, RunMode};
use gravcollapse::scenario::{
    parse_scenario, to_scenario_toml, OutputFormat, Preset, ScenarioConfig,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gravcollapse", version)]
#[command(about = "Self-interaction energies and collapse times of spatial superpositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file or preset
    Run(RunArgs),
    /// Run with every bilinear form evaluated by Monte Carlo
    Oracle(RunArgs),
    /// Validate a scenario without running it
    Check(Source),
    /// List the built-in presets
    Presets,
    /// Print the resolved scenario as a scenario file
    EchoConfig(RunArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Built-in preset name
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightingArg {
    Full,
    Born,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Energy prefactor (1 = bare G, 12.566... = literal 4πG)
    #[arg(long)]
    convention: Option<f64>,
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
    /// Write to this file instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Compute(String),
}

fn load(source: &Source) -> Result<ScenarioConfig, Failure> {
    if let Some(name) = &source.preset {
        let preset = Preset::from_name(name)
            .ok_or_else(|| Failure::Config(format!("unknown preset `{name}`")))?;
        return Ok(ScenarioConfig::from_preset(preset));
    }
    let path = source.scenario.as_ref().expect("clap enforces one source");
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn apply_flags(mut cfg: ScenarioConfig, args: &RunArgs) -> Result<ScenarioConfig, Failure> {
    if let Some(f) = args.format {
        cfg.output_format = match f {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        };
    }
    if let Some(n) = args.samples {
        if n < gravcollapse::kernel::MIN_MC_SAMPLES {
            return Err(Failure::Config(format!(
                "--samples must be at least {}",
                gravcollapse::kernel::MIN_MC_SAMPLES
            )));
        }
        cfg.mc_samples = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(c) = args.convention {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Failure::Config("--convention must be positive".into()));
        }
        cfg.convention_factor = c;
    }
    if let Some(w) = args.weighting {
        cfg.weighting_mode = match w {
            WeightingArg::Full => Weighting::Full,
            WeightingArg::Born => Weighting::Born,
        };
    }
    Ok(cfg)
}

fn write_out(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Compute(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Compute(e.to_string())),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => run(&args, RunMode::default()),
        Command::Oracle(args) => run(&args, RunMode { force_mc: true }),
        Command::Check(source) => {
            let cfg = load(&source)?;
            println!("ok: scenario `{}`", cfg.name);
            Ok(())
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<18} {}", p.name(), p.description());
            }
            Ok(())
        }
        Command::EchoConfig(args) => {
            let cfg = apply_flags(load(&args.source)?, &args)?;
            write_out(&to_scenario_toml(&cfg), args.output.as_ref())
        }
    }
}

fn run(args: &RunArgs, mode: RunMode) -> Result<(), Failure> {
    let cfg = apply_flags(load(&args.source)?, args)?;
    let report = run_scenario(&cfg, mode).map_err(|e| Failure::Compute(e.to_string()))?;
    write_out(
        &emit_report(&report, cfg.output_format),
        args.output.as_ref(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("computation error: {msg}");
            ExitCode::from(EXIT_COMPUTE)
        }
    }
}
