//! The versioned CSV result schema.

use std::cmp::Ordering;
use std::io::Write;

use riclink::channel::FadingModel;
use riclink::{BerEstimate, OracleEstimate, RicianParams, Scheme, SimPoint};

use crate::error::CliError;

pub const SCHEMA_LINE: &str = "# riclink-csv v1";

pub const COLUMNS: [&str; 13] = [
    "scheme",
    "m",
    "ebn0_db",
    "diversity",
    "k_factor",
    "model",
    "bits",
    "bit_errors",
    "ber",
    "ci_low",
    "ci_high",
    "seed",
    "source",
];

/// z-score of the two-sided 95% normal interval used for reference rows.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Sim,
    Theory,
}

impl Source {
    fn as_str(self) -> &'static str {
        match self {
            Source::Sim => "sim",
            Source::Theory => "theory",
        }
    }
}

/// One output row. `bits` and `bit_errors` are absent on reference rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scheme: Scheme,
    pub m: u32,
    pub ebn0_db: f64,
    pub diversity: u32,
    pub k_factor: f64,
    pub model: FadingModel,
    pub bits: Option<u64>,
    pub bit_errors: Option<u64>,
    pub ber: f64,
    pub ci: (f64, f64),
    pub seed: u64,
    pub source: Source,
}

impl Row {
    pub fn simulated(p: &SimPoint, est: &BerEstimate) -> Self {
        Self {
            scheme: p.modulation.scheme,
            m: p.modulation.m,
            ebn0_db: p.ebn0_db,
            diversity: p.diversity,
            k_factor: p.rician.k_factor,
            model: p.rician.model,
            bits: Some(est.bits_sent),
            bit_errors: Some(est.bit_errors),
            ber: est.ber,
            ci: est.ci95,
            seed: p.seed,
            source: Source::Sim,
        }
    }

    pub fn theory(
        modulation: riclink::Modulation,
        rician: &RicianParams,
        diversity: u32,
        ebn0_db: f64,
        est: &OracleEstimate,
        seed: u64,
    ) -> Self {
        let half = Z95 * est.ber_std_err;
        Self {
            scheme: modulation.scheme,
            m: modulation.m,
            ebn0_db,
            diversity,
            k_factor: rician.k_factor,
            model: rician.model,
            bits: None,
            bit_errors: None,
            ber: est.ber,
            ci: ((est.ber - half).max(0.0), (est.ber + half).min(1.0)),
            seed,
            source: Source::Theory,
        }
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        let model_key = |m: &FadingModel| match *m {
            FadingModel::GaussianLimit => (0, 0),
            FadingModel::FiniteScatterers { n } => (1, n),
        };
        (self.scheme, self.m, self.diversity)
            .cmp(&(other.scheme, other.m, other.diversity))
            .then(self.ebn0_db.total_cmp(&other.ebn0_db))
            .then(self.k_factor.total_cmp(&other.k_factor))
            .then(model_key(&self.model).cmp(&model_key(&other.model)))
            .then(self.source.cmp(&other.source))
    }

    fn fields(&self) -> [String; 13] {
        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        [
            self.scheme.to_string(),
            self.m.to_string(),
            self.ebn0_db.to_string(),
            self.diversity.to_string(),
            self.k_factor.to_string(),
            model_name(&self.model),
            opt(self.bits),
            opt(self.bit_errors),
            self.ber.to_string(),
            self.ci.0.to_string(),
            self.ci.1.to_string(),
            self.seed.to_string(),
            self.source.as_str().to_string(),
        ]
    }
}

pub fn model_name(model: &FadingModel) -> String {
    match model {
        FadingModel::GaussianLimit => "gaussian".into(),
        FadingModel::FiniteScatterers { n } => format!("finite-{n}"),
    }
}

/// Sorts by (scheme, m, diversity, ebn0_db), then K, model and source.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(Row::sort_key_cmp);
}

pub fn write_rows<W: Write>(mut out: W, rows: &[Row]) -> Result<(), CliError> {
    writeln!(out, "{SCHEMA_LINE}").map_err(csv::Error::from)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn render_rows(rows: &[Row]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}
