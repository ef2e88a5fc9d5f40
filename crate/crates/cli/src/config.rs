//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

/// Experiment kinds understood by `run` and `sweep`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cap,
    Conformal,
    Flatten,
    Tube,
    Compat,
    Poincare,
    Freeproduct,
    Barycenter,
    Comparison,
    Algebraic,
    Jacobi,
    Minent,
}

impl Kind {
    pub const ALL: [Kind; 12] = [
        Kind::Cap,
        Kind::Conformal,
        Kind::Flatten,
        Kind::Tube,
        Kind::Compat,
        Kind::Poincare,
        Kind::Freeproduct,
        Kind::Barycenter,
        Kind::Comparison,
        Kind::Algebraic,
        Kind::Jacobi,
        Kind::Minent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Cap => "cap",
            Kind::Conformal => "conformal",
            Kind::Flatten => "flatten",
            Kind::Tube => "tube",
            Kind::Compat => "compat",
            Kind::Poincare => "poincare",
            Kind::Freeproduct => "freeproduct",
            Kind::Barycenter => "barycenter",
            Kind::Comparison => "comparison",
            Kind::Algebraic => "algebraic",
            Kind::Jacobi => "jacobi",
            Kind::Minent => "minent",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    #[serde(default)]
    seed: u64,
    grid: Option<usize>,
    out: Option<PathBuf>,
    #[serde(default)]
    params: toml::Table,
}

/// A parsed experiment configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Master seed for every random draw of the experiment.
    pub seed: u64,
    /// Grid resolution; each experiment documents its own default.
    pub grid: Option<usize>,
    /// Output directory.
    pub out: PathBuf,
    /// Kind-specific parameter table.
    pub params: toml::Table,
    /// Directory used to resolve relative paths inside `params`.
    pub base_dir: PathBuf,
}

/// Command-line overrides of config fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
}

impl ExperimentConfig {
    /// Parse config text; `base_dir` anchors relative paths.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(ExperimentConfig {
            kind: raw.kind,
            seed: raw.seed,
            grid: raw.grid,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out").join(raw.kind.name())),
            params: raw.params,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(grid) = o.grid {
            self.grid = Some(grid);
        }
    }

    pub fn grid_or(&self, default: usize) -> Result<usize, CliError> {
        match self.grid {
            Some(g) if g < 2 => Err(CliError::Config(format!("grid must be at least 2, got {g}"))),
            Some(g) => Ok(g),
            None => Ok(default),
        }
    }

    /// Deserialize the parameter table into the kind's parameter struct.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        T::deserialize(toml::Value::Table(self.params.clone()))
            .map_err(|e| CliError::Config(format!("[params] of {} experiment: {e}", self.kind)))
    }

    /// Set one parameter from its textual value, keeping the type of any existing entry.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        let bad = || CliError::Config(format!("value {value:?} does not fit parameter {name}"));
        match name {
            "seed" => {
                self.seed = value.parse().map_err(|_| bad())?;
                return Ok(());
            }
            "grid" => {
                self.grid = Some(value.parse().map_err(|_| bad())?);
                return Ok(());
            }
            _ => {}
        }
        let parsed = match self.params.get(name) {
            Some(toml::Value::Integer(_)) => toml::Value::Integer(value.parse().map_err(|_| bad())?),
            Some(toml::Value::Float(_)) => toml::Value::Float(value.parse().map_err(|_| bad())?),
            Some(toml::Value::Boolean(_)) => toml::Value::Boolean(value.parse().map_err(|_| bad())?),
            Some(toml::Value::String(_)) => toml::Value::String(value.to_string()),
            Some(_) => return Err(CliError::Config(format!("parameter {name} cannot be swept"))),
            None => {
                if let Ok(i) = value.parse::<i64>() {
                    toml::Value::Integer(i)
                } else if let Ok(f) = value.parse::<f64>() {
                    toml::Value::Float(f)
                } else {
                    toml::Value::String(value.to_string())
                }
            }
        };
        self.params.insert(name.to_string(), parsed);
        Ok(())
    }
}

/// Accept integers where reals are expected.
pub(crate) fn real<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        I(i64),
        F(f64),
    }
    Ok(match Num::deserialize(d)? {
        Num::I(i) => i as f64,
        Num::F(f) => f,
    })
}

pub(crate) fn real_opt<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    real(d).map(Some)
}

pub(crate) fn reals<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    struct W(#[serde(deserialize_with = "real")] f64);
    Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
}

pub(crate) fn reals_opt<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    reals(d).map(Some)
}

pub(crate) fn real_rows<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    struct W(#[serde(deserialize_with = "reals")] Vec<f64>);
    Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut c = ExperimentConfig::parse("kind = \"cap\"\nseed = 3\n[params]\ndelta = 0.1\n", Path::new(".")).unwrap();
        assert_eq!(c.kind, Kind::Cap);
        assert_eq!(c.out, PathBuf::from("out/cap"));
        c.apply(&Overrides { out: Some("x".into()), seed: Some(9), grid: Some(50) });
        assert_eq!((c.seed, c.grid), (9, Some(50)));
        c.set_param("delta", "0.2").unwrap();
        assert_eq!(c.params["delta"], toml::Value::Float(0.2));
        assert!(c.set_param("delta", "abc").is_err());
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = ExperimentConfig::parse("kind = \"cap\"\nsed = 3\n", Path::new(".")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2") && msg.contains("sed"), "{msg}");
        let e = ExperimentConfig::parse("kind = \"nope\"\n", Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("nope"));
    }
}
