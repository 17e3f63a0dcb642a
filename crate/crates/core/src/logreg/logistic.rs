//! Per-machine logistic loss over a finite dataset.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::objective::{DistributedObjective, ProblemConstants};
use crate::rng::RngStream;

/// One machine's samples: row-major features and +-1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineData {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
}

impl MachineData {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if dim == 0 || features.len() != dim * labels.len() || labels.is_empty() {
            return Err(Error::contract("feature matrix does not match label count"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::contract("labels must be +1 or -1"));
        }
        Ok(MachineData { dim, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

/// log(1 + exp(t)) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
pub struct LogisticObjective {
    dim: usize,
    machines: Vec<MachineData>,
    ridge: f64,
    full_batch: bool,
    xstar: Option<Vec<f64>>,
    fstar: Option<f64>,
    constants: ProblemConstants,
}

impl LogisticObjective {
    /// Builds the objective without solving for its minimizer.
    pub fn new(machines: Vec<MachineData>, ridge: f64, full_batch: bool) -> Result<Self> {
        if machines.is_empty() {
            return Err(Error::contract("no machines"));
        }
        let dim = machines[0].dim;
        if machines.iter().any(|m| m.dim != dim) {
            return Err(Error::contract("machines disagree on feature dimension"));
        }
        if !(ridge >= 0.0) {
            return Err(Error::param("ridge must be non-negative"));
        }
        let mut h: f64 = 0.0;
        let mut max_norm: f64 = 0.0;
        for m in &machines {
            let phi = DMatrix::from_row_slice(m.len(), dim, &m.features);
            let gram = phi.transpose() * &phi / (4.0 * m.len() as f64);
            let top = SymmetricEigen::new(gram).eigenvalues.iter().cloned().fold(0.0, f64::max);
            h = h.max(top + ridge);
            for i in 0..m.len() {
                max_norm = max_norm.max(m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
        let noise = if full_batch { 0.0 } else { max_norm };
        let constants = ProblemConstants {
            machines: machines.len(),
            smoothness: h.max(f64::MIN_POSITIVE),
            strong_convexity: ridge,
            sigma: noise,
            sigma_star: noise,
            zeta_star: 0.0,
            zeta_bar: None,
            radius: None,
            initial_gap: Some(1.0),
        };
        Ok(LogisticObjective {
            dim,
            machines,
            ridge,
            full_batch,
            xstar: None,
            fstar: None,
            constants,
        })
    }

    /// Solves for the global minimizer by Newton's method and fills in the
    /// constants that depend on it.
    pub fn solved(mut self, tol: f64) -> Result<Self> {
        let sol = super::newton::newton_minimize(&self, tol)?;
        let x = sol.x;
        self.fstar = Some(self.value(&x));
        self.xstar = Some(x.clone());
        let zs = crate::objective::measure_zeta_star_sq(&self, None)?;
        let gap = self.value(&vec![0.0; self.dim]) - self.fstar.unwrap();
        let sigma_star = if self.full_batch { 0.0 } else { self.sigma_star_exact(&x) };
        let c = &mut self.constants;
        c.zeta_star = zs.sqrt();
        c.radius = Some(x.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE));
        c.initial_gap = Some(gap.max(f64::MIN_POSITIVE));
        c.sigma_star = sigma_star.min(c.sigma);
        Ok(self)
    }

    /// Largest per-machine variance of single-sample gradients at `x`.
    fn sigma_star_exact(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut g = vec![0.0; self.dim];
        let mut mean = vec![0.0; self.dim];
        for (mi, m) in self.machines.iter().enumerate() {
            self.local_gradient(mi, x, &mut mean);
            let mut second = 0.0;
            for i in 0..m.len() {
                self.sample_gradient(m, i, x, &mut g);
                second += g.iter().map(|v| v * v).sum::<f64>();
            }
            let var = second / m.len() as f64 - mean.iter().map(|v| v * v).sum::<f64>();
            worst = worst.max(var.max(0.0));
        }
        worst.sqrt()
    }

    pub fn machine_data(&self) -> &[MachineData] {
        &self.machines
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    fn sample_gradient(&self, m: &MachineData, i: usize, x: &[f64], out: &mut [f64]) {
        let row = m.row(i);
        let y = m.labels[i];
        let margin = y * crate::objective::dot(row, x);
        let coef = -y * sigmoid(-margin);
        for j in 0..self.dim {
            out[j] = coef * row[j] + self.ridge * x[j];
        }
    }

    /// Exact Hessian of F_m at `x`.
    pub fn local_hessian(&self, machine: usize, x: &[f64]) -> DMatrix<f64> {
        let m = &self.machines[machine];
        let d = self.dim;
        let mut hess = DMatrix::<f64>::zeros(d, d);
        for i in 0..m.len() {
            let row = m.row(i);
            let s = sigmoid(crate::objective::dot(row, x));
            let w = s * (1.0 - s);
            let r = DVector::from_column_slice(row);
            hess.ger(w, &r, &r, 1.0);
        }
        hess /= m.len() as f64;
        for j in 0..d {
            hess[(j, j)] += self.ridge;
        }
        hess
    }

    /// Hessian of the machine average F.
    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut total = DMatrix::<f64>::zeros(self.dim, self.dim);
        for m in 0..self.machines.len() {
            total += self.local_hessian(m, x);
        }
        total / self.machines.len() as f64
    }
}

impl DistributedObjective for LogisticObjective {
    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn local_value(&self, machine: usize, x: &[f64]) -> f64 {
        let m = &self.machines[machine];
        let mut s = 0.0;
        for i in 0..m.len() {
            s += softplus(-m.labels[i] * crate::objective::dot(m.row(i), x));
        }
        s / m.len() as f64 + 0.5 * self.ridge * crate::objective::norm_sq(x)
    }

    fn local_gradient(&self, machine: usize, x: &[f64], out: &mut [f64]) {
        let m = &self.machines[machine];
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m.len() {
            let row = m.row(i);
            let y = m.labels[i];
            let coef = -y * sigmoid(-y * crate::objective::dot(row, x));
            for j in 0..self.dim {
                out[j] += coef * row[j];
            }
        }
        let n = m.len() as f64;
        for j in 0..self.dim {
            out[j] = out[j] / n + self.ridge * x[j];
        }
    }

    fn stochastic_gradient(&self, machine: usize, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        if self.full_batch {
            self.local_gradient(machine, x, out);
        } else {
            let m = &self.machines[machine];
            let i = rng.next_below(m.len() as u64) as usize;
            self.sample_gradient(m, i, x, out);
        }
    }

    fn minimizer(&self) -> Option<&[f64]> {
        self.xstar.as_deref()
    }

    fn optimal_value(&self) -> Option<f64> {
        self.fstar
    }

    fn family(&self) -> &str {
        "logistic"
    }
}
