use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tubal_bench::presets::{preset, PRESET_NAMES};
use tubal_bench::{run_config, BenchError, Mode, RunConfig, Sweep, SweepAxis};

/// Runs low-tubal-rank estimation experiments and writes CSV traces.
#[derive(Parser)]
#[command(name = "tubal-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (run x repeat) of a config.
    Run(Source),
    /// Run every config entry over a grid of step sizes or damping values.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Overrides the config's sweep axis.
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Comma-separated values; damping accepts `f/c` or a number.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Run each APGD entry with and without rebalancing.
    Ablation(Source),
    /// Print a preset as TOML, or list presets when no name is given.
    DumpPreset { name: Option<String> },
}

#[derive(Args)]
struct Source {
    /// TOML config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Root output directory; a subdirectory named after the config is used.
    #[arg(long, env = "TUBAL_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Ground-truth seed; operator and init seeds move by the same offset.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Source {
    fn load(&self) -> Result<RunConfig, BenchError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
                RunConfig::from_toml(&text).map_err(|e| match e {
                    BenchError::Config(m) => BenchError::Config(format!("{}: {m}", path.display())),
                    other => other,
                })?
            }
            (None, Some(name)) => preset(name).ok_or_else(|| {
                BenchError::Config(format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", ")))
            })?,
            (None, None) => return Err(BenchError::Config("pass --config or --preset".into())),
        };
        if let Some(seed) = self.seed {
            cfg.reseed(seed);
        }
        Ok(cfg)
    }

    fn execute(&self, cfg: &RunConfig, mode: &Mode) -> Result<(), BenchError> {
        let rows = run_config(cfg, mode, self.out_dir.as_deref(), self.threads)?;
        let dir = tubal_bench::runner::output_dir(cfg, self.out_dir.as_deref());
        for r in &rows {
            eprintln!(
                "{:<14} {:<10} {:<12} rep {}  final rel err {:.3e}  {}",
                r.run, r.method, r.value, r.repeat, r.final_rel_err, r.status
            );
        }
        eprintln!("wrote {} traces and summary.csv to {}", rows.len(), dir.display());
        Ok(())
    }
}

fn dispatch(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run(src) => {
            let cfg = src.load()?;
            src.execute(&cfg, &Mode::Run)
        }
        Command::Sweep { source, axis, values } => {
            let cfg = source.load()?;
            let sweep = match (axis, values.is_empty(), &cfg.sweep) {
                (Some(axis), false, _) => Sweep { axis, values },
                (None, true, Some(s)) => s.clone(),
                (Some(axis), true, Some(s)) if s.axis == axis => s.clone(),
                (None, false, Some(s)) => Sweep { axis: s.axis, values },
                _ => return Err(BenchError::Config("sweep needs --axis and --values or a [sweep] section".into())),
            };
            source.execute(&cfg, &Mode::Sweep(sweep))
        }
        Command::Ablation(src) => {
            let cfg = src.load()?;
            src.execute(&cfg, &Mode::Ablation)
        }
        Command::DumpPreset { name: None } => {
            println!("{}", PRESET_NAMES.join("\n"));
            Ok(())
        }
        Command::DumpPreset { name: Some(name) } => {
            let cfg = preset(&name).ok_or_else(|| BenchError::Config(format!("unknown preset `{name}`")))?;
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
