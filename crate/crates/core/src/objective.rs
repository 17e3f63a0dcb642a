//! The distributed objective abstraction and the gradient oracles built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamKey};

/// Regularity constants of an M-machine problem.
///
/// `zeta_bar = None` means the uniform heterogeneity bound is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub machines: usize,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub sigma: f64,
    pub sigma_star: f64,
    pub zeta_star: f64,
    pub zeta_bar: Option<f64>,
    pub radius: Option<f64>,
    pub initial_gap: Option<f64>,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let c = self;
        if c.machines == 0 {
            return Err(Error::param("machine count must be at least 1"));
        }
        if !(c.smoothness > 0.0) {
            return Err(Error::param("smoothness must be positive"));
        }
        if !(c.strong_convexity >= 0.0) || c.strong_convexity > c.smoothness {
            return Err(Error::param(
                "strong convexity must lie in [0, smoothness]",
            ));
        }
        if !(c.sigma >= 0.0) || !(c.sigma_star >= 0.0) || c.sigma_star > c.sigma * (1.0 + 1e-12) {
            return Err(Error::param("need 0 <= sigma_star <= sigma"));
        }
        if !(c.zeta_star >= 0.0) {
            return Err(Error::param("zeta_star must be non-negative"));
        }
        if let Some(zb) = c.zeta_bar {
            if !(zb >= 0.0) {
                return Err(Error::param("zeta_bar must be non-negative"));
            }
            if c.zeta_star > zb * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::param("zeta_star exceeds zeta_bar"));
            }
        }
        if c.radius.is_none() && c.initial_gap.is_none() {
            return Err(Error::param("one of radius (B) or initial gap (Delta) is required"));
        }
        if c.radius.is_some_and(|b| !(b > 0.0)) || c.initial_gap.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::param("radius and initial gap must be positive when given"));
        }
        Ok(())
    }
}

/// An M-machine stochastic objective F(x) = (1/M) sum_m F_m(x).
pub trait DistributedObjective: Send + Sync {
    fn constants(&self) -> &ProblemConstants;

    fn dim(&self) -> usize;

    fn machines(&self) -> usize {
        self.constants().machines
    }

    fn local_value(&self, machine: usize, x: &[f64]) -> f64;

    /// Writes the exact gradient of F_m at `x` into `out`.
    fn local_gradient(&self, machine: usize, x: &[f64], out: &mut [f64]);

    /// Writes one stochastic gradient sample into `out`, drawing from `rng`.
    fn stochastic_gradient(&self, machine: usize, x: &[f64], rng: &mut RngStream, out: &mut [f64]);

    fn minimizer(&self) -> Option<&[f64]> {
        None
    }

    fn optimal_value(&self) -> Option<f64> {
        None
    }

    /// Short family name used in reports.
    fn family(&self) -> &str;

    fn value(&self, x: &[f64]) -> f64 {
        let m = self.machines();
        let mut s = 0.0;
        for i in 0..m {
            s += self.local_value(i, x);
        }
        s / m as f64
    }
}

fn check_dim(obj: &dyn DistributedObjective, x: &[f64]) -> Result<()> {
    if x.len() != obj.dim() {
        return Err(Error::contract(format!(
            "point has dimension {}, objective has {}",
            x.len(),
            obj.dim()
        )));
    }
    Ok(())
}

/// (1/M) sum_m grad F_m(x), summed in machine-index order.
pub fn average_gradient(obj: &dyn DistributedObjective, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(obj, x)?;
    let d = obj.dim();
    let m = obj.machines();
    let mut acc = vec![0.0; d];
    let mut g = vec![0.0; d];
    for i in 0..m {
        obj.local_gradient(i, x, &mut g);
        for (a, gi) in acc.iter_mut().zip(&g) {
            *a += gi;
        }
    }
    for a in &mut acc {
        *a /= m as f64;
    }
    Ok(acc)
}

/// The round gradient estimator of Minibatch SGD: K samples per machine at the
/// same point, each machine's samples averaged with a running mean and the
/// machine means averaged in index order. With zero noise the result equals
/// [`average_gradient`] bit for bit.
///
/// Sample k on machine m uses stream key (replicate, m, round, k).
pub fn minibatch_gradient(
    obj: &dyn DistributedObjective,
    x: &[f64],
    k: usize,
    seed: u64,
    replicate: u64,
    round: u64,
) -> Result<Vec<f64>> {
    let machines: Vec<usize> = (0..obj.machines()).collect();
    subset_minibatch_gradient(obj, x, k, &machines, seed, replicate, round)
}

/// Like [`minibatch_gradient`] but restricted to the listed machines.
pub fn subset_minibatch_gradient(
    obj: &dyn DistributedObjective,
    x: &[f64],
    k: usize,
    machines: &[usize],
    seed: u64,
    replicate: u64,
    round: u64,
) -> Result<Vec<f64>> {
    check_dim(obj, x)?;
    if k == 0 {
        return Err(Error::contract("K must be at least 1"));
    }
    if machines.is_empty() {
        return Err(Error::contract("empty machine set"));
    }
    let d = obj.dim();
    let mut acc = vec![0.0; d];
    let mut mean = vec![0.0; d];
    let mut g = vec![0.0; d];
    for &m in machines {
        mean.iter_mut().for_each(|v| *v = 0.0);
        for step in 0..k {
            let mut rng = RngStream::new(seed, StreamKey::new(replicate, m as u64, round, step as u64));
            obj.stochastic_gradient(m, x, &mut rng, &mut g);
            let n = (step + 1) as f64;
            for (mu, gi) in mean.iter_mut().zip(&g) {
                *mu += (gi - *mu) / n;
            }
        }
        for (a, mu) in acc.iter_mut().zip(&mean) {
            *a += mu;
        }
    }
    for a in &mut acc {
        *a /= machines.len() as f64;
    }
    Ok(acc)
}

/// Squared heterogeneity at the optimum: (1/M) sum_m |grad F_m(x*)|^2.
///
/// Uses `minimizer` when given, else the objective's own minimizer.
pub fn measure_zeta_star_sq(obj: &dyn DistributedObjective, minimizer: Option<&[f64]>) -> Result<f64> {
    let xs = minimizer.or(obj.minimizer()).ok_or(Error::MinimizerRequired)?;
    check_dim(obj, xs)?;
    let m = obj.machines();
    let mut g = vec![0.0; obj.dim()];
    let mut total = 0.0;
    for i in 0..m {
        obj.local_gradient(i, xs, &mut g);
        total += g.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(total / m as f64)
}

/// Squared noise level at the optimum: the largest per-machine empirical
/// variance (trace of the sample covariance) of `draws` stochastic gradients.
pub fn estimate_sigma_star_sq(
    obj: &dyn DistributedObjective,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if draws == 0 {
        return Err(Error::contract("draws must be at least 1"));
    }
    let xs = obj.minimizer().ok_or(Error::MinimizerRequired)?.to_vec();
    let d = obj.dim();
    let mut g = vec![0.0; d];
    let mut worst = 0.0f64;
    for m in 0..obj.machines() {
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        let mut rng = RngStream::new(seed, StreamKey::new(0, m as u64, 0, 0));
        for n in 1..=draws {
            obj.stochastic_gradient(m, &xs, &mut rng, &mut g);
            for j in 0..d {
                let delta = g[j] - mean[j];
                mean[j] += delta / n as f64;
                m2[j] += delta * (g[j] - mean[j]);
            }
        }
        let var = if draws > 1 {
            m2.iter().sum::<f64>() / (draws - 1) as f64
        } else {
            0.0
        };
        worst = worst.max(var);
    }
    Ok(worst)
}

/// Central finite-difference gradient of F_m, step 1e-6 * (1 + |x|).
pub fn finite_difference_gradient(obj: &dyn DistributedObjective, machine: usize, x: &[f64]) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 1e-6 * (1.0 + norm);
    let mut probe = x.to_vec();
    let mut out = vec![0.0; x.len()];
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let up = obj.local_value(machine, &probe);
        probe[j] = x[j] - h;
        let down = obj.local_value(machine, &probe);
        probe[j] = x[j];
        out[j] = (up - down) / (2.0 * h);
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// F_1 = (x-1)^2/2, F_2 = (x+1)^2/2 with additive N(0, s^2) noise.
    struct Pair {
        c: ProblemConstants,
        xs: Vec<f64>,
    }

    impl Pair {
        fn new(sigma: f64) -> Self {
            Pair {
                c: ProblemConstants {
                    machines: 2,
                    smoothness: 1.0,
                    strong_convexity: 1.0,
                    sigma,
                    sigma_star: sigma,
                    zeta_star: 1.0,
                    zeta_bar: Some(1.0),
                    radius: Some(1.0),
                    initial_gap: None,
                },
                xs: vec![0.0],
            }
        }
    }

    impl DistributedObjective for Pair {
        fn constants(&self) -> &ProblemConstants {
            &self.c
        }
        fn dim(&self) -> usize {
            1
        }
        fn local_value(&self, m: usize, x: &[f64]) -> f64 {
            let s = if m == 0 { 1.0 } else { -1.0 };
            0.5 * (x[0] - s).powi(2)
        }
        fn local_gradient(&self, m: usize, x: &[f64], out: &mut [f64]) {
            let s = if m == 0 { 1.0 } else { -1.0 };
            out[0] = x[0] - s;
        }
        fn stochastic_gradient(&self, m: usize, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
            self.local_gradient(m, x, out);
            if self.c.sigma > 0.0 {
                out[0] += self.c.sigma * rng.next_gaussian();
            }
        }
        fn minimizer(&self) -> Option<&[f64]> {
            Some(&self.xs)
        }
        fn family(&self) -> &str {
            "pair"
        }
    }

    #[test]
    fn symmetric_pair_average_gradient_vanishes() {
        let p = Pair::new(0.0);
        assert_eq!(average_gradient(&p, &[0.0]).unwrap(), vec![0.0]);
        assert!(average_gradient(&p, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn noiseless_minibatch_matches_exact_bitwise() {
        let p = Pair::new(0.0);
        for x in [0.3, -1.7, 12.25] {
            let a = average_gradient(&p, &[x]).unwrap();
            let b = minibatch_gradient(&p, &[x], 7, 9, 0, 3).unwrap();
            assert_eq!(a[0].to_bits(), b[0].to_bits());
        }
    }

    #[test]
    fn zeta_star_of_pair() {
        let p = Pair::new(0.0);
        assert_eq!(measure_zeta_star_sq(&p, None).unwrap(), 1.0);
    }

    #[test]
    fn constants_validation() {
        let mut c = Pair::new(1.0).c;
        assert!(c.validate().is_ok());
        c.strong_convexity = 2.0;
        assert!(c.validate().is_err());
        let mut c = Pair::new(1.0).c;
        c.radius = None;
        assert!(c.validate().is_err());
    }
}
