use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riclink::Scheme;
use riclink_cli::commands::{self, with_workers, workers_from_env};
use riclink_cli::config::{
    parse_axis, parse_int_axis, Axis, ConfigFile, KValue, ModelName, OneOrMany,
};
use riclink_cli::{CliError, SweepConfig};

/// BER of M-PSK and M-QAM over Rician fading with L-branch MRC diversity.
///
/// The SNR axis is Eb/N0 in dB throughout. Set RICLINK_WORKERS to choose the
/// worker count; results do not depend on it.
#[derive(Parser)]
#[command(name = "riclink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER over a grid of cells.
    Sweep(GridArgs),
    /// Semi-analytic reference BER over the same kind of grid.
    Theory(GridArgs),
    /// Print the points and bit labels of one constellation.
    Constellation {
        scheme: Scheme,
        m: u32,
        /// PSK rotation in radians.
        #[arg(allow_negative_numbers = true)]
        phase_offset: Option<f64>,
    },
}

#[derive(Args)]
struct GridArgs {
    /// JSON config file; flags given alongside override its fields.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Constellation sizes, e.g. `16` or `16,64`.
    #[arg(long)]
    m: Option<String>,
    /// Eb/N0 values in dB: `start:stop:step` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    /// Diversity orders: `1:5:1` or a comma list.
    #[arg(long)]
    diversity: Option<String>,
    /// Linear Rician K-factors, comma separated; `inf` means no fading.
    #[arg(long, conflicts_with = "k_db")]
    k: Option<String>,
    /// Rician K-factors in dB, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    k_db: Option<String>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    /// Scatterer count for the finite model.
    #[arg(long)]
    scatterers: Option<u32>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_bits: Option<u64>,
    #[arg(long)]
    batch_bits: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Add reference rows to a sweep.
    #[arg(long)]
    theory: bool,
    /// Gain draws per reference value.
    #[arg(long)]
    theory_draws: Option<usize>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

impl GridArgs {
    fn resolve(&self) -> Result<SweepConfig, CliError> {
        let base = match &self.config {
            Some(path) => ConfigFile::from_path(path)?,
            None => ConfigFile::default(),
        };
        let base_stop = base.stop.unwrap_or_default();
        let stop =
            (self.min_errors.is_some() || self.max_bits.is_some() || self.batch_bits.is_some())
                .then(|| riclink::StoppingRule {
                    min_bit_errors: self.min_errors.unwrap_or(base_stop.min_bit_errors),
                    max_bits: self.max_bits.unwrap_or(base_stop.max_bits),
                    batch_bits: self.batch_bits.unwrap_or(base_stop.batch_bits),
                });
        let flags = ConfigFile {
            scheme: self.scheme,
            m: self
                .m
                .as_deref()
                .map(|s| parse_int_axis(s, "m").map(OneOrMany::Many))
                .transpose()?,
            ebn0: self
                .ebn0
                .as_deref()
                .map(|s| parse_axis(s, "ebn0").map(Axis::List))
                .transpose()?,
            diversity: self
                .diversity
                .as_deref()
                .map(|s| parse_int_axis(s, "diversity").map(OneOrMany::Many))
                .transpose()?,
            k: self.k.as_deref().map(|s| {
                OneOrMany::Many(
                    s.split(',')
                        .map(|v| KValue::Text(v.trim().into()))
                        .collect(),
                )
            }),
            k_db: self
                .k_db
                .as_deref()
                .map(|s| parse_axis(s, "k_db").map(OneOrMany::Many))
                .transpose()?,
            model: self.model,
            scatterers: self.scatterers,
            stop,
            seed: self.seed,
            output: self.output.clone(),
            theory: self.theory.then_some(true),
            theory_draws: self.theory_draws,
            modulations: None,
        };
        base.overlay(flags).resolve()
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let workers = workers_from_env()?;
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            if args.print_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            let rows = with_workers(workers, || commands::sweep_rows(&cfg))??;
            commands::write_csv(cfg.output.as_deref(), &rows)
        }
        Command::Theory(args) => {
            let cfg = args.resolve()?;
            if args.print_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            let rows = with_workers(workers, || {
                commands::theory_rows(&cfg, &mut std::io::stderr())
            })??;
            commands::write_csv(cfg.output.as_deref(), &rows)
        }
        Command::Constellation {
            scheme,
            m,
            phase_offset,
        } => {
            let text = commands::constellation_csv(scheme, m, phase_offset)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
