//! Run configuration, read from TOML. Every section and key is optional;
//! missing ones take the defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{BrrtParams, PlannerKind};
use crate::benchmark::{GeneratorParams, TrialLimits};
use crate::mppi::{MonitorThresholds, MppiConfig};
use crate::physics::PhysicsParams;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "NAMO_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanningParams {
    /// Safety margin around obstacles, m.
    pub r: f64,
    /// Heaviest obstacle still considered pushable, kg.
    pub max_mass: f64,
    /// Waypoint spacing, m.
    pub spacing: f64,
}

impl Default for PlanningParams {
    fn default() -> Self {
        PlanningParams {
            r: 0.3,
            max_mass: 30.0,
            spacing: 0.5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub planner: PlannerKind,
    pub mppi: MppiConfig,
    pub monitor: MonitorThresholds,
    pub physics: PhysicsParams,
    pub planning: PlanningParams,
    pub brrt: BrrtParams,
    pub trial: TrialLimits,
    pub generator: GeneratorParams,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Config::from_toml(&text)
    }

    /// Loads `explicit` if given, else the file named by `NAMO_CONFIG`, else
    /// the defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Config, ConfigError> {
        match explicit {
            Some(p) => Config::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
                _ => Ok(Config::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.mppi.validate().map_err(ConfigError::Invalid)?;
        let p = &self.planning;
        if !(p.r > 0.0 && p.max_mass > 0.0 && p.spacing > 0.0) {
            return Err(ConfigError::Invalid(
                "planning.r, max_mass and spacing must be positive".into(),
            ));
        }
        let ph = &self.physics;
        if !(ph.mu_g >= 0.0 && ph.f_max >= 0.0 && ph.stiffness >= 0.0 && ph.max_substep > 0.0) {
            return Err(ConfigError::Invalid(
                "physics parameters must be non-negative".into(),
            ));
        }
        let m = &self.monitor;
        if !(m.eps >= 0.0 && m.lambda >= 0.0 && m.mu >= 0.0 && m.tau >= 0.0 && m.window > 0.0) {
            return Err(ConfigError::Invalid(
                "monitor thresholds must be non-negative".into(),
            ));
        }
        Ok(())
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
    fn documented_keys_parse() {
        let text = r#"
planner = "bvg"
[mppi]
K = 64
T = 20
dt = 0.1
sigma = [0.2, 0.2, 0.4]
beta = 0.3
[mppi.weights]
ctrl = [1.0, 1.0, 0.5]
dist = 2.0
prog = 0.5
rot = 0.1
force = 3.0
[monitor]
eps = 0.2
lambda = 0.5
mu = 0.05
tau = 10.0
[physics]
mu_g = 0.5
f_max = 100.0
stiffness = 5000.0
"#;
        let c = Config::from_toml(text).unwrap();
        assert_eq!(c.planner, PlannerKind::Bvg);
        assert_eq!((c.mppi.k, c.mppi.t), (64, 20));
        assert_eq!(c.mppi.weights.ctrl, [1.0, 1.0, 0.5]);
        assert_eq!(c.mppi.weights.force, 3.0);
        assert_eq!(c.monitor.lambda, 0.5);
        assert_eq!(c.physics.f_max, 100.0);
        // untouched keys keep defaults
        assert_eq!(c.mppi.alpha, 0.5);
        assert_eq!(c.monitor.window, 1.0);
    }

    #[test]
    fn round_trips() {
        let c = Config::default();
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_typos_and_bad_values() {
        assert!(Config::from_toml("[mppi]\nk = 3").is_err());
        assert!(Config::from_toml("planner = \"prm\"").is_err());
        assert!(Config::from_toml("[mppi]\nbeta = 0.0").is_err());
    }
}
