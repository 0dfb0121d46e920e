//! TOML configuration. Every section and key is optional; unknown keys are
//! rejected so a typo in a physical parameter cannot pass silently.

use std::collections::BTreeMap;
use std::path::Path;

use decobound::optomech::{Material, OptomechParams, PhysicalConstants};
use serde::Deserialize;

use crate::CliError;

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "DECOBOUND_CONFIG";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub constants: PhysicalConstants,
    /// Densities in kg / m^3, by name.
    pub materials: BTreeMap<String, f64>,
    pub optomech: OptomechSection,
    pub grids: Grids,
    pub simulate: SimulateSection,
    pub certify: CertifySection,
    pub tolerances: Tolerances,
    pub seeds: Seeds,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptomechSection {
    pub g0: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Kelvin; one curve per (material, temperature).
    pub temperatures: Vec<f64>,
    pub materials: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// β samples on [2, 4].
    pub region: usize,
    /// Noise samples on [0, 1].
    pub channels: usize,
    /// Time samples over one mechanical period.
    pub optomech: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub rounds: u64,
    pub runs: u64,
    /// Bell-basis weights of the simulated state.
    pub bell_weights: [f64; 4],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySection {
    pub certificate_states: usize,
    pub oracle_states: usize,
    pub bound_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub certificate: f64,
    pub oracle: f64,
    pub tightness: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub simulate: u64,
    pub certify: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            constants: PhysicalConstants::CODATA,
            materials: Material::ALL
                .iter()
                .map(|m| (m.name().to_string(), m.density()))
                .collect(),
            optomech: OptomechSection::default(),
            grids: Grids::default(),
            simulate: SimulateSection::default(),
            certify: CertifySection::default(),
            tolerances: Tolerances::default(),
            seeds: Seeds::default(),
        }
    }
}

impl Default for OptomechSection {
    fn default() -> Self {
        OptomechSection {
            g0: 1.0,
            omega_m: 1.0,
            gamma_m: 1e-10,
            temperatures: vec![1e-9],
            materials: vec!["aluminum".into(), "rhenium".into()],
        }
    }
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            region: 65,
            channels: 21,
            optomech: 4096,
        }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            rounds: 1_000_000,
            runs: 100,
            bell_weights: [0.0, 0.0, 1.0, 0.0],
            confidence: 0.99,
        }
    }
}

impl Default for CertifySection {
    fn default() -> Self {
        CertifySection {
            certificate_states: 100,
            oracle_states: 50,
            bound_samples: 20,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            certificate: 1e-10,
            oracle: 1e-6,
            tightness: 1e-7,
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            simulate: 1,
            certify: 7,
        }
    }
}

/// One optomechanical case to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct OptomechCase {
    pub material: String,
    pub params: OptomechParams,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::new(text);
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config {
                path: if path == "." { String::new() } else { path },
                message: e.into_inner().message().trim().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |path: &str, message: String| CliError::Config {
            path: path.to_string(),
            message,
        };
        for (key, v) in [
            ("constants.g", self.constants.g),
            ("constants.k_b", self.constants.k_b),
            ("constants.hbar", self.constants.hbar),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, format!("must be positive, got {v}")));
            }
        }
        for (name, &d) in &self.materials {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(bad(&format!("materials.{name}"), format!("density must be nonnegative, got {d}")));
            }
        }
        for (i, name) in self.optomech.materials.iter().enumerate() {
            if !self.materials.contains_key(name) {
                return Err(bad(
                    &format!("optomech.materials[{i}]"),
                    format!("unknown material `{name}`"),
                ));
            }
        }
        for (i, &t) in self.optomech.temperatures.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(bad(&format!("optomech.temperatures[{i}]"), format!("must be nonnegative, got {t}")));
            }
        }
        if let Some(case) = self.optomech_cases().first() {
            case.params
                .validate()
                .map_err(|e| bad("optomech", e.to_string()))?;
        }
        for (key, n, min) in [
            ("grids.region", self.grids.region, 2),
            ("grids.channels", self.grids.channels, 2),
            ("grids.optomech", self.grids.optomech, 2),
        ] {
            if n < min {
                return Err(bad(key, format!("must be at least {min}, got {n}")));
            }
        }
        if self.simulate.rounds == 0 || self.simulate.runs == 0 {
            return Err(bad("simulate", "rounds and runs must be positive".into()));
        }
        if !(self.simulate.confidence > 0.0 && self.simulate.confidence < 1.0) {
            return Err(bad("simulate.confidence", format!("must lie in (0, 1), got {}", self.simulate.confidence)));
        }
        decobound::quantum::BellDiagonalState::new(self.simulate.bell_weights)
            .map_err(|e| bad("simulate.bell_weights", e.to_string()))?;
        for (key, v) in [
            ("tolerances.certificate", self.tolerances.certificate),
            ("tolerances.oracle", self.tolerances.oracle),
            ("tolerances.tightness", self.tolerances.tightness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Every (material, temperature) pair, materials outermost.
    pub fn optomech_cases(&self) -> Vec<OptomechCase> {
        let o = &self.optomech;
        o.materials
            .iter()
            .flat_map(|name| {
                o.temperatures.iter().map(move |&temperature| OptomechCase {
                    material: name.clone(),
                    params: OptomechParams {
                        g0: o.g0,
                        omega_m: o.omega_m,
                        gamma_m: o.gamma_m,
                        temperature,
                        density: self.materials[name],
                    },
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn shipped_default_matches_builtin() {
        let text = include_str!("../../../docs/decobound.toml");
        assert_eq!(Config::from_toml(text).unwrap(), Config::default());
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = Config::from_toml("[optomech]\ngamma = 1.0\n").unwrap_err();
        match err {
            CliError::Config { path, message } => {
                assert_eq!(path, "optomech.gamma");
                assert!(message.contains("gamma"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_reports_path() {
        let err = Config::from_toml("[grids]\nregion = \"many\"\n").unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "grids.region"), "{err:?}");
    }

    #[test]
    fn semantic_errors() {
        let err = Config::from_toml("[optomech]\nmaterials = [\"gold\"]\n").unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "optomech.materials[0]"));
        let err = Config::from_toml("[simulate]\nbell_weights = [0.5, 0.5, 0.5, 0.0]\n").unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "simulate.bell_weights"));
        let err = Config::from_toml("[optomech]\ngamma_m = 2.0\n").unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "optomech"));
    }

    #[test]
    fn custom_material() {
        let cfg = Config::from_toml("[materials]\ngold = 19300.0\n[optomech]\nmaterials = [\"gold\"]\ntemperatures = [0.0, 1e-9]\n").unwrap();
        let cases = cfg.optomech_cases();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[1].params.density, 19300.0);
    }
}
