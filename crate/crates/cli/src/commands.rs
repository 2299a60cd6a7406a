//! Subcommand implementations. Each returns its output as data so the binary
//! only decides where it goes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use riclink::theory::{curve_seed, ConditionalSer};
use riclink::{run_point, Modulation, RicianParams, Scheme, TheoryCurve};

use crate::config::SweepConfig;
use crate::error::CliError;
use crate::output::{render_rows, sort_rows, write_rows, Row};

pub const WORKERS_ENV: &str = "RICLINK_WORKERS";

/// Simulated rows for every cell, sorted.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for p in cfg.grid.cells()? {
        let est = run_point(&p).map_err(|e| CliError::Config(format!("cell {p}: {e}")))?;
        rows.push(Row::simulated(&p, &est));
    }
    if cfg.theory {
        rows.extend(theory_rows(cfg, &mut std::io::stderr())?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Reference rows for every supported curve of the grid. Unsupported
/// modulations are reported on `warn` and skipped.
pub fn theory_rows(cfg: &SweepConfig, warn: &mut dyn Write) -> Result<Vec<Row>, CliError> {
    let g = &cfg.grid;
    let mut rows = Vec::new();
    for &modulation in &g.modulations {
        if let Err(e) = ConditionalSer::new(modulation) {
            // Diagnostic stream only; a failing write there is not fatal.
            let _ = writeln!(warn, "warning: skipping {modulation} reference rows: {e}");
            continue;
        }
        for &k_factor in &g.k_factors {
            let rician = RicianParams {
                k_factor,
                model: g.model,
                los_phase: 0.0,
            };
            for &diversity in &g.diversity {
                let seed = curve_seed(g.seed, modulation, diversity, &rician);
                let curve = TheoryCurve::compute(
                    modulation,
                    &rician,
                    diversity,
                    &g.ebn0_db,
                    cfg.theory_draws,
                    seed,
                )?;
                rows.extend(curve.points.iter().map(|(ebn0, est)| {
                    Row::theory(modulation, &rician, diversity, *ebn0, est, seed)
                }));
            }
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Writes rows to `path`, or stdout when `path` is `None`.
pub fn write_csv(path: Option<&Path>, rows: &[Row]) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let io = |source| CliError::Io {
                path: path.to_owned(),
                source,
            };
            let file = File::create(path).map_err(io)?;
            let mut w = BufWriter::new(file);
            write_rows(&mut w, rows)?;
            w.flush().map_err(io)
        }
        None => write_rows(std::io::stdout().lock(), rows),
    }
}

pub fn render_sweep(cfg: &SweepConfig) -> Result<String, CliError> {
    render_rows(&sweep_rows(cfg)?)
}

/// Point table of one constellation: `index,bits,i,q,amp,phase`.
pub fn constellation_csv(
    scheme: Scheme,
    m: u32,
    phase_offset: Option<f64>,
) -> Result<String, CliError> {
    let modulation = Modulation { scheme, m };
    let c = match (scheme, phase_offset) {
        (Scheme::Psk, Some(offset)) => riclink::build_psk(m, offset)?,
        (Scheme::Qam, Some(_)) => {
            return Err(CliError::Config(
                "a phase offset only applies to PSK".into(),
            ))
        }
        (_, None) => modulation.build()?,
    };
    let n = c.bits_per_symbol() as usize;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["index", "bits", "i", "q", "amp", "phase"])?;
    for (index, p) in c.points().iter().enumerate() {
        w.write_record([
            index.to_string(),
            format!("{:0n$b}", c.label(index)),
            p.i.to_string(),
            p.q.to_string(),
            p.amp.to_string(),
            p.phase.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Worker count from `RICLINK_WORKERS`, if set.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Workers(v)),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(v)) => {
            Err(CliError::Workers(v.to_string_lossy().into()))
        }
    }
}

/// Runs `f` on a pool of `workers` threads, or on the global pool for `None`.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
