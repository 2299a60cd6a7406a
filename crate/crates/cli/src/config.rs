//! Sweep configuration: JSON file format, flag overlay and validation.
//!
//! Flags and config files share one intermediate form, [`ConfigFile`]. A file
//! is read first, flags override whatever they set, and
//! [`ConfigFile::resolve`] validates the result into a [`SweepConfig`].
//!
//! The Rician K-factor and the seed have no defaults. The stopping rule, the
//! fading model (Gaussian limit) and the reference draw count do.

use std::fmt;
use std::path::{Path, PathBuf};

use riclink::channel::FadingModel;
use riclink::montecarlo::StoppingRule;
use riclink::theory::DEFAULT_DRAWS;
use riclink::{Modulation, RicianParams, Scheme, SweepGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MISSING_K: &str =
    "k_factor required: no Rician K-factor is assumed by default; set `k` or `k_db` (--k / --k-db)";

/// Validated sweep: the simulation grid plus output options.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: SweepGrid,
    pub output: Option<PathBuf>,
    /// Append semi-analytic reference rows.
    pub theory: bool,
    /// Gain draws per reference value.
    pub theory_draws: usize,
}

impl SweepConfig {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        ConfigFile::from_json_str(text, "config")?.resolve()
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        ConfigFile::from_path(path)?.resolve()
    }

    /// The equivalent file form, with every axis spelled out.
    pub fn to_file(&self) -> ConfigFile {
        let g = &self.grid;
        let (model, scatterers) = match g.model {
            FadingModel::GaussianLimit => (ModelName::Gaussian, None),
            FadingModel::FiniteScatterers { n } => (ModelName::Finite, Some(n)),
        };
        ConfigFile {
            modulations: Some(g.modulations.clone()),
            ebn0: Some(Axis::List(g.ebn0_db.clone())),
            diversity: Some(OneOrMany::Many(g.diversity.clone())),
            k: Some(OneOrMany::Many(
                g.k_factors.iter().map(|&k| KValue::from(k)).collect(),
            )),
            model: Some(model),
            scatterers,
            stop: Some(g.stop),
            seed: Some(g.seed),
            output: self.output.clone(),
            theory: Some(self.theory),
            theory_draws: Some(self.theory_draws),
            ..ConfigFile::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("config serializes")
    }

    pub fn cell_count(&self) -> usize {
        let g = &self.grid;
        g.modulations.len() * g.ebn0_db.len() * g.diversity.len() * g.k_factors.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// A numeric axis: explicit list, `{start, stop, step}`, or `"start:stop:step"` / `"a,b,c"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Single(f64),
    Range { start: f64, stop: f64, step: f64 },
    Text(String),
}

impl Axis {
    fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        match self {
            Axis::List(v) => Ok(v.clone()),
            Axis::Single(v) => Ok(vec![*v]),
            &Axis::Range { start, stop, step } => expand_range(start, stop, step, field),
            Axis::Text(s) => parse_axis(s, field),
        }
    }
}

/// A linear K-factor; `"inf"` selects the non-fading channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KValue {
    Number(f64),
    Text(String),
}

impl From<f64> for KValue {
    fn from(k: f64) -> Self {
        if k.is_infinite() {
            KValue::Text("inf".into())
        } else {
            KValue::Number(k)
        }
    }
}

impl KValue {
    fn value(&self, field: &str) -> Result<f64, CliError> {
        match self {
            KValue::Number(v) => Ok(*v),
            KValue::Text(s) => parse_number(s, field),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    /// Complex Gaussian diffuse component.
    Gaussian,
    /// Finite sum of scatterers with random phases.
    Finite,
}

/// On-disk configuration. Every field is optional here; [`ConfigFile::resolve`]
/// enforces what is required.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulations: Option<Vec<Modulation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<OneOrMany<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ebn0: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diversity: Option<OneOrMany<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<OneOrMany<KValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_db: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterers: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StoppingRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory_draws: Option<usize>,
}

impl ConfigFile {
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!(
                "{origin}: line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: ConfigFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        if other.scheme.is_some() || other.m.is_some() || other.modulations.is_some() {
            self.modulations = None;
        }
        if other.k.is_some() {
            self.k_db = None;
        }
        if other.k_db.is_some() {
            self.k = None;
        }
        take!(
            modulations,
            scheme,
            m,
            ebn0,
            diversity,
            k,
            k_db,
            model,
            scatterers,
            stop,
            seed,
            output,
            theory,
            theory_draws
        );
        self
    }

    pub fn resolve(&self) -> Result<SweepConfig, CliError> {
        let modulations = match (&self.modulations, self.scheme, &self.m) {
            (Some(list), None, None) => list.clone(),
            (None, Some(scheme), Some(m)) => m
                .to_vec()
                .into_iter()
                .map(|m| Modulation { scheme, m })
                .collect(),
            (None, Some(_), None) => return Err(missing("m", "--m")),
            (None, None, Some(_)) => return Err(missing("scheme", "--scheme")),
            (None, None, None) => {
                return Err(missing("modulations (or scheme + m)", "--scheme/--m"))
            }
            _ => {
                return Err(CliError::Config(
                    "give either `modulations` or `scheme` + `m`, not both".into(),
                ))
            }
        };

        let ebn0_db = self
            .ebn0
            .as_ref()
            .ok_or_else(|| missing("ebn0", "--ebn0"))?
            .values("ebn0")?;
        let diversity = self
            .diversity
            .as_ref()
            .ok_or_else(|| missing("diversity", "--diversity"))?
            .to_vec();

        let k_factors = match (&self.k, &self.k_db) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "`k` and `k_db` are mutually exclusive".into(),
                ))
            }
            (Some(k), None) => k
                .to_vec()
                .iter()
                .map(|v| v.value("k"))
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(db)) => db
                .to_vec()
                .into_iter()
                .map(RicianParams::k_from_db)
                .collect(),
            (None, None) => return Err(CliError::Config(MISSING_K.into())),
        };

        let model = match (self.model.unwrap_or(ModelName::Gaussian), self.scatterers) {
            (ModelName::Gaussian, None) => FadingModel::GaussianLimit,
            (ModelName::Gaussian, Some(_)) => {
                return Err(CliError::Config(
                    "`scatterers` only applies to the finite model".into(),
                ))
            }
            (ModelName::Finite, Some(n)) => FadingModel::FiniteScatterers { n },
            (ModelName::Finite, None) => return Err(missing("scatterers", "--scatterers")),
        };

        let seed = self.seed.ok_or_else(|| missing("seed", "--seed"))?;
        let theory_draws = self.theory_draws.unwrap_or(DEFAULT_DRAWS);
        if theory_draws < 2 {
            return Err(CliError::Config("`theory_draws` must be at least 2".into()));
        }

        let config = SweepConfig {
            grid: SweepGrid {
                modulations,
                ebn0_db,
                diversity,
                k_factors,
                model,
                stop: self.stop.unwrap_or_default(),
                seed,
            },
            output: self.output.clone(),
            theory: self.theory.unwrap_or(false),
            theory_draws,
        };
        // Surfaces empty axes and invalid cells with the offending cell named.
        config.grid.cells()?;
        Ok(config)
    }
}

fn missing(field: &str, flag: &str) -> CliError {
    CliError::Config(format!("missing `{field}` ({flag})"))
}

fn parse_number(s: &str, field: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("{field}: `{s}` is not a number")))
}

fn expand_range(start: f64, stop: f64, step: f64, field: &str) -> Result<Vec<f64>, CliError> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Config(format!(
            "{field}: range needs finite bounds and step > 0, got {start}:{stop}:{step}"
        )));
    }
    if stop < start {
        return Err(CliError::Config(format!(
            "{field}: range stop {stop} is below start {start}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// `"start:stop:step"` or a comma-separated list.
pub fn parse_axis(s: &str, field: &str) -> Result<Vec<f64>, CliError> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!(
                "{field}: expected `start:stop:step`, got `{s}`"
            )));
        }
        let [a, b, c] = [parts[0], parts[1], parts[2]].map(|p| parse_number(p, field));
        return expand_range(a?, b?, c?, field);
    }
    s.split(',').map(|p| parse_number(p, field)).collect()
}

/// Integer axis: `"1:5:1"` or `"1,2,3"`.
pub fn parse_int_axis(s: &str, field: &str) -> Result<Vec<u32>, CliError> {
    parse_axis(s, field)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&v) {
                Ok(v as u32)
            } else {
                Err(CliError::Config(format!(
                    "{field}: `{v}` is not a non-negative integer"
                )))
            }
        })
        .collect()
}

impl fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> ConfigFile {
        ConfigFile {
            scheme: Some(Scheme::Psk),
            m: Some(OneOrMany::One(16)),
            ebn0: Some(Axis::Text("0:10:1".into())),
            diversity: Some(OneOrMany::One(5)),
            k: Some(OneOrMany::One(KValue::Number(5.0))),
            seed: Some(42),
            ..ConfigFile::default()
        }
    }

    #[test]
    fn flag_grid_has_eleven_cells() {
        let cfg = flags().resolve().unwrap();
        assert_eq!(cfg.cell_count(), 11);
        assert_eq!(cfg.grid.ebn0_db.last(), Some(&10.0));
        assert_eq!(cfg.grid.stop, StoppingRule::default());
    }

    #[test]
    fn missing_k_is_an_error() {
        let mut f = flags();
        f.k = None;
        match f.resolve() {
            Err(CliError::Config(msg)) => assert!(msg.starts_with("k_factor required")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_qam_sizes_make_22_cells() {
        let cfg = SweepConfig::from_json_str(
            r#"{"scheme": "qam", "m": [256, 512], "ebn0": [0,1,2,3,4,5,6,7,8,9,10],
                "diversity": [4], "k": 5, "seed": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.cell_count(), 22);
    }

    #[test]
    fn json_round_trip() {
        let mut f = flags();
        f.k = Some(OneOrMany::Many(vec![
            KValue::Number(0.5),
            KValue::Text("inf".into()),
        ]));
        f.model = Some(ModelName::Finite);
        f.scatterers = Some(32);
        f.theory = Some(true);
        let cfg = f.resolve().unwrap();
        let again = SweepConfig::from_json_str(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert!(again.grid.k_factors[1].is_infinite());
    }

    #[test]
    fn k_in_decibels() {
        let mut f = flags();
        f.k = None;
        f.k_db = Some(OneOrMany::Many(vec![0.0, 10.0]));
        let cfg = f.resolve().unwrap();
        assert_eq!(cfg.grid.k_factors, vec![1.0, 10.0]);
        let both = ConfigFile {
            k: Some(OneOrMany::One(KValue::Number(1.0))),
            ..cfg.to_file()
        };
        let mut both = both;
        both.k_db = Some(OneOrMany::One(3.0));
        assert!(both.resolve().is_err());
    }

    #[test]
    fn malformed_json_reports_location() {
        let err =
            SweepConfig::from_json_str("{\n  \"scheme\": \"psk\",\n  \"m\": [16,\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4"), "{msg}");
        let err = SweepConfig::from_json_str(r#"{"schem": "psk"}"#).unwrap_err();
        assert!(err.to_string().contains("schem"));
    }

    #[test]
    fn malformed_axes() {
        assert!(parse_axis("0:10", "ebn0").is_err());
        assert!(parse_axis("0:10:0", "ebn0").is_err());
        assert!(parse_axis("10:0:1", "ebn0").is_err());
        assert!(parse_axis("1,x", "ebn0").is_err());
        assert_eq!(
            parse_axis("0:1:0.25", "ebn0").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(
            parse_int_axis("1:5:1", "diversity").unwrap(),
            vec![1, 2, 3, 4, 5]
        );
        assert!(parse_int_axis("1.5", "diversity").is_err());
    }

    #[test]
    fn invalid_cell_is_named() {
        let mut f = flags();
        f.diversity = Some(OneOrMany::Many(vec![1, 0]));
        let msg = f.resolve().unwrap_err().to_string();
        assert!(msg.contains("L=0"), "{msg}");
    }

    #[test]
    fn overlay_replaces_modulation_source() {
        let base = ConfigFile {
            modulations: Some(vec![Modulation::qam(64)]),
            ..flags()
        };
        let mut base = base;
        base.scheme = None;
        base.m = None;
        let cfg = base
            .overlay(ConfigFile {
                scheme: Some(Scheme::Psk),
                m: Some(OneOrMany::One(8)),
                ..ConfigFile::default()
            })
            .resolve()
            .unwrap();
        assert_eq!(cfg.grid.modulations, vec![Modulation::psk(8)]);
    }
}
