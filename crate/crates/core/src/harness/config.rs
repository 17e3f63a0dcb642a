//! JSON experiment descriptions.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::InstanceSpec;
use crate::optimizers::{Algorithm, CommGeometry};

pub const SCHEMA_VERSION: u32 = 1;

/// Stepsizes an algorithm is swept over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepGrid {
    /// `points` values e^{ln_min} .. e^{ln_max}, evenly spaced in log scale.
    LogSpaced { points: usize, ln_min: f64, ln_max: f64 },
    List { values: Vec<f64> },
}

impl StepGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            StepGrid::LogSpaced { points, ln_min, ln_max } => {
                if *points == 1 {
                    return vec![ln_min.exp()];
                }
                let span = ln_max - ln_min;
                (0..*points)
                    .map(|i| (ln_min + span * i as f64 / (*points - 1) as f64).exp())
                    .collect()
            }
            StepGrid::List { values } => values.clone(),
        }
    }

    /// Ten points e^-6 .. e^0, the default grid for Minibatch SGD.
    pub fn minibatch_default() -> Self {
        StepGrid::LogSpaced {
            points: 10,
            ln_min: -6.0,
            ln_max: 0.0,
        }
    }

    /// Ten points e^-8 .. e^-1, the default grid for Local SGD.
    pub fn local_default() -> Self {
        StepGrid::LogSpaced {
            points: 10,
            ln_min: -8.0,
            ln_max: -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmEntry {
    #[serde(flatten)]
    pub algorithm: Algorithm,
    /// When present, the algorithm's constant stepsize is replaced by each
    /// grid value in turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<StepGrid>,
}

impl AlgorithmEntry {
    pub fn variants(&self) -> Vec<Algorithm> {
        match &self.grid {
            None => vec![self.algorithm.clone()],
            Some(g) => g.values().into_iter().map(|eta| self.algorithm.with_eta(eta)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryGrid {
    /// Machine counts; defaults to the instance's own.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub machines: Option<Vec<usize>>,
    #[serde(rename = "K")]
    pub local_steps: Vec<usize>,
    #[serde(rename = "R")]
    pub rounds: Vec<usize>,
    /// Participants per round; absent means full participation.
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub participants: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

fn default_replicates() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Label written to the `instance` column; defaults to the family name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub instance: InstanceSpec,
    pub algorithms: Vec<AlgorithmEntry>,
    pub geometry: GeometryGrid,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// rounds_to_tol is the first round with suboptimality at most this
    /// fraction of the initial gap
    #[serde(default = "default_tol")]
    pub tol_fraction: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.instance.family().to_string())
    }

    pub fn machine_counts(&self) -> Vec<usize> {
        self.geometry
            .machines
            .clone()
            .unwrap_or_else(|| vec![self.instance.machines()])
    }

    /// Every geometry in sweep order: M, then K, then R, then S.
    pub fn geometries(&self) -> Vec<CommGeometry> {
        let mut out = Vec::new();
        for m in self.machine_counts() {
            for &k in &self.geometry.local_steps {
                for &r in &self.geometry.rounds {
                    match &self.geometry.participants {
                        None => out.push(CommGeometry::new(m, k, r)),
                        Some(ss) => {
                            for &s in ss {
                                out.push(CommGeometry::new(m, k, r).with_participants(s));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return cfg(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.replicates == 0 {
            return cfg("replicates must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return cfg("no algorithms listed".into());
        }
        let g = &self.geometry;
        if g.local_steps.is_empty() || g.rounds.is_empty() || g.machines.as_ref().is_some_and(Vec::is_empty) {
            return cfg("geometry lists must be non-empty".into());
        }
        if matches!(self.instance, InstanceSpec::Logistic(_))
            && self.machine_counts().iter().any(|&m| m != crate::logreg::TASKS)
        {
            return cfg(format!("logistic instances have exactly {} machines", crate::logreg::TASKS));
        }
        for geom in self.geometries() {
            geom.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        for a in &self.algorithms {
            if let Some(grid) = &a.grid {
                let v = grid.values();
                if v.is_empty() || v.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                    return cfg(format!("stepsize grid for {} is empty or non-positive", a.algorithm.name()));
                }
            }
            for v in a.variants() {
                v.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if !(self.tol_fraction > 0.0) {
            return cfg("tol_fraction must be positive".into());
        }
        Ok(())
    }
}
