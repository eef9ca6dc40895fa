//! Experiment configuration and its JSON form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub epsilon: f64,
    pub gamma: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathMode {
    Closed,
    Pseudomode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(rename = "N_b")]
    pub n_b: usize,
    #[serde(rename = "N_anc")]
    pub n_anc: usize,
    pub mode: BathMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub tau: f64,
    pub t_prep: f64,
    pub t_max: f64,
    pub n_time_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T_1q")]
    pub t_1q: f64,
    #[serde(rename = "T_2q")]
    pub t_2q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Exact pseudomode Lindblad dynamics.
    Exact,
    /// Noisy circuit emulation with Hadamard-test readout.
    Circuit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub engine: Engine,
    /// Shots per circuit; `null` reads exact expectation values.
    pub shots: Option<u64>,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub bath: BathConfig,
    pub circuit: CircuitConfig,
    pub noise: NoiseConfig,
    pub run: RunConfig,
}

impl Default for ExperimentConfig {
    /// The resonant-level experiment of Fig. 5a.
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig { epsilon: 0.5, gamma: 0.6, d: 10.0, beta: 1.0 },
            bath: BathConfig { n_b: 8, n_anc: 1, mode: BathMode::Pseudomode },
            circuit: CircuitConfig { tau: 0.3, t_prep: 30.0, t_max: 60.0, n_time_points: 20 },
            noise: NoiseConfig { t1: 1e5, t_1q: 1.0, t_2q: 10.0 },
            run: RunConfig { engine: Engine::Circuit, shots: None, seed: 0, output: PathBuf::from("out") },
        }
    }
}

/// Config keys accepted by [`ExperimentConfig::set`], in schema order.
pub const KEYS: [&str; 18] = [
    "epsilon",
    "gamma",
    "D",
    "beta",
    "N_b",
    "N_anc",
    "mode",
    "tau",
    "t_prep",
    "t_max",
    "n_time_points",
    "T1",
    "T_1q",
    "T_2q",
    "engine",
    "shots",
    "seed",
    "output",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| HarvestError::Config(format!("invalid value {value:?} for {key}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarvestError::Config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarvestError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Overrides one field by its config key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "epsilon" => self.model.epsilon = parse(key, value)?,
            "gamma" => self.model.gamma = parse(key, value)?,
            "D" => self.model.d = parse(key, value)?,
            "beta" => self.model.beta = parse(key, value)?,
            "N_b" => self.bath.n_b = parse(key, value)?,
            "N_anc" => self.bath.n_anc = parse(key, value)?,
            "mode" => {
                self.bath.mode = match value {
                    "closed" => BathMode::Closed,
                    "pseudomode" => BathMode::Pseudomode,
                    _ => return Err(HarvestError::Config(format!("mode must be closed or pseudomode, got {value:?}"))),
                }
            }
            "tau" => self.circuit.tau = parse(key, value)?,
            "t_prep" => self.circuit.t_prep = parse(key, value)?,
            "t_max" => self.circuit.t_max = parse(key, value)?,
            "n_time_points" => self.circuit.n_time_points = parse(key, value)?,
            "T1" => self.noise.t1 = parse(key, value)?,
            "T_1q" => self.noise.t_1q = parse(key, value)?,
            "T_2q" => self.noise.t_2q = parse(key, value)?,
            "engine" => {
                self.run.engine = match value {
                    "exact" => Engine::Exact,
                    "circuit" => Engine::Circuit,
                    _ => return Err(HarvestError::Config(format!("engine must be exact or circuit, got {value:?}"))),
                }
            }
            "shots" => self.run.shots = if value == "none" { None } else { Some(parse(key, value)?) },
            "seed" => self.run.seed = parse(key, value)?,
            "output" => self.run.output = PathBuf::from(value),
            _ => return Err(HarvestError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarvestError::Config(msg));
        let m = &self.model;
        if !(m.gamma >= 0.0 && m.gamma.is_finite()) {
            return bad(format!("gamma must be finite and nonnegative, got {}", m.gamma));
        }
        if !(m.d > 0.0 && m.d.is_finite()) || !(m.beta > 0.0 && m.beta.is_finite()) || !m.epsilon.is_finite() {
            return bad(String::from("D and beta must be positive and epsilon finite"));
        }
        if self.bath.n_b == 0 {
            return bad(String::from("N_b must be positive"));
        }
        if self.bath.mode == BathMode::Pseudomode && self.bath.n_b % 2 != 0 {
            return bad(format!("N_b must be even for pseudomode baths, got {}", self.bath.n_b));
        }
        let c = &self.circuit;
        if !(c.tau > 0.0) || !(c.t_prep >= 0.0) || !(c.t_max > 0.0) || c.n_time_points == 0 {
            return bad(String::from("tau and t_max must be positive, t_prep nonnegative and n_time_points at least 1"));
        }
        let n = &self.noise;
        if !(n.t1 > 0.0) || !(n.t_1q > 0.0) || !(n.t_2q > 0.0) {
            return bad(String::from("T1, T_1q and T_2q must be positive"));
        }
        if self.run.shots == Some(0) {
            return bad(String::from("shots must be positive or none"));
        }
        Ok(())
    }

    /// `n_time_points` uniformly spaced times on `(0, t_max]`.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.circuit.n_time_points;
        (1..=n).map(|j| self.circuit.t_max * j as f64 / n as f64).collect()
    }

    /// Same spacing including `t = 0`.
    pub fn time_grid_with_origin(&self) -> Vec<f64> {
        let mut t = vec![0.0];
        t.extend(self.time_grid());
        t
    }
}
