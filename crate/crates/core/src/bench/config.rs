//! Run configuration read from TOML.

use crate::timestepper::BetaMode;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    TranslatingSphere {
        #[serde(default = "default_velocity")]
        velocity: [f64; 3],
        #[serde(default = "one")]
        radius: f64,
    },
    PulsatingSphere {
        #[serde(default = "default_pulse_delta")]
        delta: f64,
        #[serde(default = "default_pulse_frequency")]
        frequency: f64,
    },
    Dziuk,
    StationarySphere {
        #[serde(default)]
        center: [f64; 3],
        #[serde(default = "one")]
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialChoice {
    #[default]
    Standard,
    Example3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant {
        value: f64,
    },
    /// Manufactured solution of the translating sphere at `t = 0`.
    Example1,
    /// `tanh(d/ε)` with `d` the geodesic distance to a latitude circle of radius
    /// `r0_fraction · R(0)` around the `z`-axis.
    Latitude {
        #[serde(default = "default_r0_fraction")]
        r0_fraction: f64,
    },
    /// Independent uniform draws per mesh vertex.
    Random {
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
    },
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingChoice {
    #[default]
    None,
    Example1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_diag_name")]
    pub diagnostics: String,
    /// Steps at which band and surface VTK files are written.
    #[serde(default)]
    pub vtk_steps: Vec<usize>,
    /// Write each step matrix in coordinate format.
    #[serde(default)]
    pub dump_matrices: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            diagnostics: default_diag_name(),
            vtk_steps: Vec::new(),
            dump_matrices: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    /// Half side of the cubic domain centred at the origin.
    #[serde(default = "default_domain")]
    pub domain: f64,
    pub h: f64,
    pub dt: f64,
    pub final_time: f64,
    pub eps: f64,
    #[serde(default)]
    pub potential: PotentialChoice,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_c_delta")]
    pub c_delta: f64,
    #[serde(default = "one")]
    pub c_rho: f64,
    #[serde(default = "default_beta_mode")]
    pub beta_mode: BetaMode,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub forcing: ForcingChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

fn one() -> f64 {
    1.0
}
fn default_velocity() -> [f64; 3] {
    [2.0, 0.0, 0.0]
}
fn default_pulse_delta() -> f64 {
    1.0 / 6.0
}
fn default_pulse_frequency() -> f64 {
    16.0 * std::f64::consts::PI
}
fn default_r0_fraction() -> f64 {
    0.75
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("output")
}
fn default_diag_name() -> String {
    "diagnostics.csv".into()
}
fn default_domain() -> f64 {
    2.0
}
fn default_m() -> f64 {
    2.0
}
fn default_c_delta() -> f64 {
    2.0
}
fn default_beta_mode() -> BetaMode {
    BetaMode::Experiment
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            h = 0.25
            dt = 0.001
            final_time = 0.01
            eps = 0.1
            [geometry]
            kind = "translating_sphere"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.domain, 2.0);
        assert_eq!(cfg.m, 2.0);
        assert_eq!(cfg.beta_mode, BetaMode::Experiment);
        assert_eq!(
            cfg.geometry,
            GeometryConfig::TranslatingSphere {
                velocity: [2.0, 0.0, 0.0],
                radius: 1.0
            }
        );
        assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn full_config() {
        let cfg = RunConfig::from_toml(
            r#"
            h = 0.125
            dt = 0.0000390625
            final_time = 0.04
            eps = 0.01
            potential = "example3"
            beta_mode = { fixed = 2000.0 }
            seed = 7
            [geometry]
            kind = "dziuk"
            [initial]
            kind = "random"
            [output]
            dir = "out3"
            vtk_steps = [0, 32]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.potential, PotentialChoice::Example3);
        assert_eq!(cfg.beta_mode, BetaMode::Fixed(2000.0));
        assert_eq!(
            cfg.initial,
            InitialCondition::Random {
                low: 0.0,
                high: 1.0
            }
        );
        assert_eq!(cfg.output.vtk_steps, vec![0, 32]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml(
            "h = 1\ndt = 1\nfinal_time = 1\neps = 1\nbogus = 2\n[geometry]\nkind = \"dziuk\"\n",
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
