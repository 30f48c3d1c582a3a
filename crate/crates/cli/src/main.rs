use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use floquet_landscape::experiment::{run, schema, write_outputs, Experiment, RunConfig};
use floquet_landscape::sweep::Workers;
use floquet_landscape::Error;

/// Localization landscape experiments.
#[derive(Parser, Debug)]
#[command(name = "landscape", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat TOML config, or a previous run's manifest.json.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory [default: out/<experiment>].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for the sweep [default: all cores].
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,

    /// Override one config key; repeatable, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Seed for random-matrix models (bounds only).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Print the resolved config as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Hatano-Nelson sweep over t_R / t_L.
    Hn,
    /// Monochromatic two-level drive: landscape peaks vs CDT.
    CdtMono,
    /// Bichromatic two-level drive: landscape vs min P_L on an (A, B) grid.
    CdtDuo,
    /// Driven Aubry-Andre-Harper chain over the drive frequency.
    Aah,
    /// SSH chains: midgap modes vs landscape peaks.
    Ssh,
    /// BBH lattice: corner modes vs landscape peaks.
    Bbh,
    /// Bound chain and reduction checks on one model.
    Bounds,
    /// List the config keys of an experiment with their defaults.
    Keys {
        /// Experiment name, e.g. cdt-mono.
        experiment: String,
    },
}

impl Command {
    fn experiment(&self) -> Option<Experiment> {
        Some(match self {
            Command::Hn => Experiment::Hn,
            Command::CdtMono => Experiment::CdtMono,
            Command::CdtDuo => Experiment::CdtDuo,
            Command::Aah => Experiment::Aah,
            Command::Ssh => Experiment::Ssh,
            Command::Bbh => Experiment::Bbh,
            Command::Bounds => Experiment::Bounds,
            Command::Keys { .. } => return None,
        })
    }
}

fn print_keys(name: &str) -> Result<(), Error> {
    let exp: Experiment = name.parse()?;
    for k in schema(exp) {
        println!("{} = {}  # {}", k.key, k.default, k.doc);
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    let exp = match cli.command {
        Command::Keys { ref experiment } => return print_keys(experiment),
        c => c.experiment().expect("experiment subcommand"),
    };
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        if !schema(exp).iter().any(|k| k.key == "seed") {
            return Err(Error::Config {
                message: format!("`{exp}` takes no random input; --seed applies to bounds"),
                key: Some("seed".into()),
                line: None,
            });
        }
        overrides.push(format!("seed={seed}"));
    }
    let cfg = RunConfig::load(exp, cli.config.as_deref(), &overrides)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let workers = Workers(cli.workers.map(|n| n as usize));
    let out_dir = cli.out.unwrap_or_else(|| PathBuf::from("out").join(exp.name()));

    let start = Instant::now();
    let output = run(&cfg, workers)?;
    let wall = start.elapsed().as_secs_f64();
    let manifest = write_outputs(&out_dir, &cfg, &output, workers, wall)?;

    println!("{exp}: {} grid points in {wall:.2} s", output.report.grid_size());
    for (k, v) in &output.report.summary {
        println!("  {k} = {v}");
    }
    println!("wrote {} files to {}", manifest.outputs.len() + 1, out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
