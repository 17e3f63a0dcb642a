//! Separable per-machine quadratics F_m(x) = 1/2 sum_i a_{m,i} (x_i - b_{m,i})^2
//! with isotropic Gaussian gradient noise. Used as the generic test suite for
//! upper-bound compliance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{DistributedObjective, ProblemConstants};
use crate::rng::{RngStream, StreamKey, DATA_MACHINE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticParams {
    pub machines: usize,
    pub dim: usize,
    #[serde(rename = "H")]
    pub smoothness: f64,
    #[serde(rename = "lambda")]
    pub strong_convexity: f64,
    /// Standard deviation of each machine's offset around the shared center.
    pub heterogeneity: f64,
    pub sigma: f64,
    /// All machines share the same curvature, which makes zeta_bar finite.
    #[serde(default)]
    pub common_hessian: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct QuadraticInstance {
    curv: Vec<Vec<f64>>,
    center: Vec<Vec<f64>>,
    sigma: f64,
    xstar: Vec<f64>,
    fstar: f64,
    constants: ProblemConstants,
}

pub fn build_quadratic(p: &QuadraticParams) -> Result<QuadraticInstance> {
    if p.machines == 0 || p.dim == 0 {
        return Err(Error::param("quadratic needs machines >= 1 and dim >= 1"));
    }
    if !(p.smoothness > 0.0) || !(p.strong_convexity >= 0.0) || p.strong_convexity > p.smoothness {
        return Err(Error::param("need 0 <= lambda <= H, H > 0"));
    }
    let mut rng = RngStream::new(p.seed, StreamKey::new(0, DATA_MACHINE, 0, 0));
    let lo = p.strong_convexity;
    let hi = p.smoothness;
    let draw_curv = |rng: &mut RngStream| -> Vec<f64> {
        let mut a: Vec<f64> = (0..p.dim).map(|_| lo + (hi - lo) * rng.next_f64()).collect();
        // pin the extremes so the stated constants are attained
        a[0] = hi;
        if p.dim > 1 {
            a[p.dim - 1] = lo.max(1e-3 * hi);
        }
        a
    };
    let shared: Vec<f64> = (0..p.dim).map(|_| rng.next_gaussian()).collect();
    let common = draw_curv(&mut rng);
    let mut curv = Vec::with_capacity(p.machines);
    let mut center = Vec::with_capacity(p.machines);
    for _ in 0..p.machines {
        curv.push(if p.common_hessian { common.clone() } else { draw_curv(&mut rng) });
        center.push(
            shared
                .iter()
                .map(|c| c + p.heterogeneity * rng.next_gaussian())
                .collect(),
        );
    }
    QuadraticInstance::from_coefficients(curv, center, p.sigma, p.strong_convexity)
}

impl QuadraticInstance {
    /// `curv[m][i]` and `center[m][i]` define machine m. `strong_convexity`
    /// is the constant to report (it must not exceed any curvature).
    pub fn from_coefficients(
        curv: Vec<Vec<f64>>,
        center: Vec<Vec<f64>>,
        sigma: f64,
        strong_convexity: f64,
    ) -> Result<Self> {
        let m = curv.len();
        if m == 0 || center.len() != m {
            return Err(Error::param("coefficient tables must be non-empty and equal length"));
        }
        let d = curv[0].len();
        if curv.iter().chain(&center).any(|r| r.len() != d) || d == 0 {
            return Err(Error::param("ragged coefficient tables"));
        }
        if curv.iter().flatten().any(|&a| !(a >= 0.0)) {
            return Err(Error::param("curvatures must be non-negative"));
        }
        let mut xstar = vec![0.0; d];
        for i in 0..d {
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..m {
                num += curv[k][i] * center[k][i];
                den += curv[k][i];
            }
            if den <= 0.0 {
                return Err(Error::param("a coordinate has zero total curvature"));
            }
            xstar[i] = num / den;
        }
        let h = curv.iter().flatten().cloned().fold(0.0, f64::max);
        let min_avg = (0..d)
            .map(|i| curv.iter().map(|r| r[i]).sum::<f64>() / m as f64)
            .fold(f64::INFINITY, f64::min);
        if strong_convexity > min_avg + 1e-12 {
            return Err(Error::param("stated strong convexity exceeds the curvature"));
        }
        let common = curv.iter().all(|r| r == &curv[0]);
        let zeta_bar = if common {
            let mean_center: Vec<f64> =
                (0..d).map(|i| center.iter().map(|r| r[i]).sum::<f64>() / m as f64).collect();
            let worst = center
                .iter()
                .map(|b| {
                    (0..d)
                        .map(|i| (curv[0][i] * (b[i] - mean_center[i])).powi(2))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            Some(worst.sqrt())
        } else {
            None
        };
        let mut inst = QuadraticInstance {
            curv,
            center,
            sigma,
            xstar,
            fstar: 0.0,
            constants: ProblemConstants {
                machines: m,
                smoothness: h,
                strong_convexity,
                sigma,
                sigma_star: sigma,
                zeta_star: 0.0,
                zeta_bar,
                radius: None,
                initial_gap: None,
            },
        };
        let xs = inst.xstar.clone();
        inst.fstar = inst.value(&xs);
        let zs = crate::objective::measure_zeta_star_sq(&inst, None)?;
        let gap = inst.value(&vec![0.0; d]) - inst.fstar;
        let norm = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
        inst.constants.zeta_star = zs.sqrt();
        if let Some(zb) = inst.constants.zeta_bar.as_mut() {
            *zb = zb.max(inst.constants.zeta_star);
        }
        inst.constants.radius = Some(norm.max(f64::MIN_POSITIVE));
        inst.constants.initial_gap = Some(gap.max(f64::MIN_POSITIVE));
        Ok(inst)
    }

    pub fn curvature(&self, machine: usize) -> &[f64] {
        &self.curv[machine]
    }

    pub fn center(&self, machine: usize) -> &[f64] {
        &self.center[machine]
    }
}

impl DistributedObjective for QuadraticInstance {
    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    fn dim(&self) -> usize {
        self.xstar.len()
    }

    fn local_value(&self, m: usize, x: &[f64]) -> f64 {
        let a = &self.curv[m];
        let b = &self.center[m];
        let mut s = 0.0;
        for i in 0..x.len() {
            s += a[i] * (x[i] - b[i]) * (x[i] - b[i]);
        }
        0.5 * s
    }

    fn local_gradient(&self, m: usize, x: &[f64], out: &mut [f64]) {
        let a = &self.curv[m];
        let b = &self.center[m];
        for i in 0..x.len() {
            out[i] = a[i] * (x[i] - b[i]);
        }
    }

    fn stochastic_gradient(&self, m: usize, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        self.local_gradient(m, x, out);
        if self.sigma > 0.0 {
            let s = self.sigma / (x.len() as f64).sqrt();
            for o in out.iter_mut() {
                *o += s * rng.next_gaussian();
            }
        }
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.xstar)
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.fstar)
    }

    fn family(&self) -> &str {
        "quadratic"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{average_gradient, measure_zeta_star_sq};

    #[test]
    fn homogeneous_has_zero_heterogeneity() {
        let a = vec![vec![1.0, 2.0]; 3];
        let b = vec![vec![0.5, -1.0]; 3];
        let q = QuadraticInstance::from_coefficients(a, b, 0.0, 1.0).unwrap();
        assert_eq!(measure_zeta_star_sq(&q, None).unwrap(), 0.0);
        assert_eq!(q.constants().zeta_bar, Some(0.0));
    }

    #[test]
    fn generated_minimizer_is_stationary() {
        let q = build_quadratic(&QuadraticParams {
            machines: 6,
            dim: 5,
            smoothness: 4.0,
            strong_convexity: 0.5,
            heterogeneity: 1.0,
            sigma: 1.0,
            common_hessian: false,
            seed: 11,
        })
        .unwrap();
        let g = average_gradient(&q, q.minimizer().unwrap()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        assert!(q.constants().zeta_bar.is_none());
        q.constants().validate().unwrap();
    }

    #[test]
    fn common_hessian_gives_finite_uniform_bound() {
        let q = build_quadratic(&QuadraticParams {
            machines: 4,
            dim: 3,
            smoothness: 2.0,
            strong_convexity: 0.0,
            heterogeneity: 0.5,
            sigma: 0.0,
            common_hessian: true,
            seed: 2,
        })
        .unwrap();
        let zb = q.constants().zeta_bar.unwrap();
        assert!(zb >= q.constants().zeta_star);
        q.constants().validate().unwrap();
    }
}
