//! Even-vs-odd logistic regression pipeline: IDX parsing, PCA, task
//! assignment, the per-machine objective, and a Newton solver for x*.

pub mod cache;
pub mod idx;
pub mod logistic;
pub mod newton;
pub mod pca;
pub mod synth;
pub mod tasks;

use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use cache::{parse_cache, read_cache, write_cache};
pub use idx::{parse_idx, IdxArray, IdxDataset};
pub use logistic::{LogisticObjective, MachineData};
pub use newton::{newton_minimize, NewtonResult};
pub use pca::{pca_reduce, Pca};
pub use synth::synth_corpus;
pub use tasks::{build_tasks_and_assign, task_digits, TaskAssignment, TASKS};

use crate::error::{Error, Result};
use crate::objective::measure_zeta_star_sq;

pub const NEWTON_TOL: f64 = 1e-10;

/// Real-valued feature rows with digit labels 0..9.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<u8>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.features)
    }

    /// Pixels scaled to [0, 1], optionally projected onto the top `pca`
    /// principal directions of the pooled data.
    pub fn from_idx(ds: &IdxDataset, pca: Option<usize>) -> Result<Corpus> {
        Corpus::from_matrix(ds.features(), ds.labels.clone(), pca)
    }

    pub fn from_matrix(x: DMatrix<f64>, labels: Vec<u8>, pca: Option<usize>) -> Result<Corpus> {
        if x.nrows() != labels.len() {
            return Err(Error::contract("row count does not match label count"));
        }
        let x = match pca {
            Some(k) if k < x.ncols() => pca_reduce(&x, k)?.0,
            _ => x,
        };
        let mut features = Vec::with_capacity(x.len());
        for i in 0..x.nrows() {
            features.extend(x.row(i).iter());
        }
        Ok(Corpus {
            dim: x.ncols(),
            features,
            labels,
        })
    }

    pub fn reduced(&self, pca: Option<usize>) -> Result<Corpus> {
        Corpus::from_matrix(self.matrix(), self.labels.clone(), pca)
    }

    /// Per-machine logistic data for an assignment.
    pub fn machine_data(&self, a: &TaskAssignment) -> Result<Vec<MachineData>> {
        a.machines
            .iter()
            .map(|rows| {
                let mut f = Vec::with_capacity(rows.len() * self.dim);
                let mut y = Vec::with_capacity(rows.len());
                for &i in rows {
                    f.extend_from_slice(self.row(i));
                    y.push(TaskAssignment::sign(self.labels[i]));
                }
                MachineData::new(self.dim, f, y)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Synth {
        seed: u64,
        #[serde(default = "default_per_digit")]
        per_digit: usize,
        #[serde(default = "default_raw_dim")]
        dim: usize,
    },
    Cache {
        path: PathBuf,
    },
}

fn default_per_digit() -> usize {
    200
}

fn default_raw_dim() -> usize {
    196
}

/// Declarative description of a logistic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticSpec {
    pub source: DataSource,
    /// PCA target dimension; ignored when the source already has at most
    /// this many columns
    #[serde(default)]
    pub pca: Option<usize>,
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub per_digit: Option<usize>,
    #[serde(default)]
    pub ridge: f64,
    #[serde(default)]
    pub full_batch: bool,
}

impl LogisticSpec {
    pub fn corpus(&self) -> Result<Corpus> {
        let raw = match &self.source {
            DataSource::Synth { seed, per_digit, dim } => synth_corpus(*seed, *per_digit, *dim),
            DataSource::Cache { path } => read_cache(std::fs::File::open(path)?)?,
        };
        raw.reduced(self.pca)
    }

    pub fn build(&self) -> Result<LogisticObjective> {
        let corpus = self.corpus()?;
        build_logistic(&corpus, self.p, self.seed, self.per_digit, self.ridge, self.full_batch)
    }
}

/// Assigns the corpus at mixing fraction `p` and solves for x*.
pub fn build_logistic(
    corpus: &Corpus,
    p: f64,
    seed: u64,
    per_digit: Option<usize>,
    ridge: f64,
    full_batch: bool,
) -> Result<LogisticObjective> {
    let a = build_tasks_and_assign(corpus, p, seed, per_digit)?;
    LogisticObjective::new(corpus.machine_data(&a)?, ridge, full_batch)?.solved(NEWTON_TOL)
}

/// zeta*^2 at the Newton minimizer for each p, sorted by p.
pub fn measure_zeta_profile(
    corpus: &Corpus,
    p_grid: &[f64],
    seed: u64,
    per_digit: Option<usize>,
    ridge: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut grid = p_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&p| {
            let obj = build_logistic(corpus, p, seed, per_digit, ridge, true)?;
            Ok((p, measure_zeta_star_sq(&obj, None)?))
        })
        .collect()
}
