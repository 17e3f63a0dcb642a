//! Chain-structured quadratics: each communication round can reveal at most one
//! new coordinate to an algorithm whose iterates stay in the span of the
//! gradients it has seen.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{DistributedObjective, ProblemConstants};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub machines: usize,
    #[serde(rename = "H")]
    pub smoothness: f64,
    #[serde(rename = "lambda")]
    pub strong_convexity: f64,
    #[serde(rename = "C")]
    pub scale: f64,
    /// Round budget the dimension is sized for.
    pub rounds: usize,
}

#[derive(Debug, Clone)]
pub struct ChainInstance {
    params: ChainParams,
    dim: usize,
    alpha: f64,
    q: f64,
    beta: f64,
    pairs: usize,
    padded: bool,
    xstar: Vec<f64>,
    fstar: f64,
    constants: ProblemConstants,
}

/// Smallest even d with d >= R + 1/(2 ln(1/q)).
pub fn chain_dimension(q: f64, rounds: usize) -> usize {
    let need = rounds as f64 + 1.0 / (2.0 * (1.0 / q).ln());
    2 * (need / 2.0).ceil() as usize
}

pub fn build_chain(params: ChainParams) -> Result<ChainInstance> {
    let p = &params;
    let (h, lam) = (p.smoothness, p.strong_convexity);
    if !(lam > 0.0) || h < 7.0 * lam {
        return Err(Error::param(format!(
            "chain needs H >= 7 lambda > 0 (H = {h}, lambda = {lam})"
        )));
    }
    if !(p.scale > 0.0) {
        return Err(Error::param("C must be positive"));
    }
    if p.rounds == 0 {
        return Err(Error::param("R must be at least 1"));
    }
    if p.machines < 2 {
        return Err(Error::param("chain needs at least 2 machines"));
    }
    let alpha = (1.0 + (h - lam) / (2.0 * lam)).sqrt();
    let q = (alpha - 1.0) / (alpha + 1.0);
    let beta = 1.0 - q;
    let dim = chain_dimension(q, p.rounds);
    let pairs = p.machines / 2;
    let padded = p.machines % 2 == 1;

    let xstar = if padded {
        padded_minimizer(h, lam, p.scale, beta, dim, 2.0 * pairs as f64 / p.machines as f64)
    } else {
        (1..=dim).map(|i| p.scale * q.powi(i as i32)).collect()
    };

    let mut inst = ChainInstance {
        params: params.clone(),
        dim,
        alpha,
        q,
        beta,
        pairs,
        padded,
        xstar,
        fstar: 0.0,
        constants: ProblemConstants {
            machines: params.machines,
            smoothness: h,
            strong_convexity: lam,
            sigma: 0.0,
            sigma_star: 0.0,
            zeta_star: 0.0,
            zeta_bar: None,
            radius: None,
            initial_gap: None,
        },
    };
    inst.fstar = if padded {
        let xs = inst.xstar.clone();
        inst.value(&xs)
    } else {
        -q * p.scale * p.scale * (h - lam) / 16.0
    };
    let zeta_sq = crate::objective::measure_zeta_star_sq(&inst, None)?;
    let norm = inst.xstar.iter().map(|v| v * v).sum::<f64>().sqrt();
    inst.constants.zeta_star = zeta_sq.sqrt();
    inst.constants.radius = Some(norm);
    inst.constants.initial_gap = Some(-inst.fstar);
    Ok(inst)
}

/// Minimizer of w * F_pair + (1 - w) * lambda/2 |x|^2 by a tridiagonal solve.
fn padded_minimizer(h: f64, lam: f64, c: f64, beta: f64, d: usize, w: f64) -> Vec<f64> {
    let s = w * (h - lam) / 8.0;
    let mut diag = vec![2.0 * s + lam; d];
    diag[d - 1] = (1.0 + beta) * s + lam;
    let off = -s;
    let mut rhs = vec![0.0; d];
    rhs[0] = s * c;
    solve_tridiagonal(off, &mut diag, &mut rhs);
    rhs
}

/// Thomas algorithm for a symmetric tridiagonal system with constant
/// off-diagonal. Overwrites `diag`; the solution is left in `rhs`.
pub(crate) fn solve_tridiagonal(off: f64, diag: &mut [f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let f = off / diag[i - 1];
        diag[i] -= f * off;
        rhs[i] -= f * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
    }
}

impl ChainInstance {
    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Which of the three local functions machine `m` holds (0, 1, or 2 for padding).
    pub fn role(&self, m: usize) -> usize {
        if m < self.pairs {
            0
        } else if m < 2 * self.pairs {
            1
        } else {
            2
        }
    }

    fn coupling(&self) -> f64 {
        (self.params.smoothness - self.params.strong_convexity) / 8.0
    }
}

impl DistributedObjective for ChainInstance {
    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn local_value(&self, m: usize, x: &[f64]) -> f64 {
        let d = self.dim;
        let s = self.coupling();
        let c = self.params.scale;
        let ridge = 0.5 * self.params.strong_convexity * x.iter().map(|v| v * v).sum::<f64>();
        match self.role(m) {
            0 => {
                let mut t = x[0] * x[0] - 2.0 * c * x[0] + self.beta * x[d - 1] * x[d - 1];
                for i in 1..d / 2 {
                    let diff = x[2 * i] - x[2 * i - 1];
                    t += diff * diff;
                }
                s * t + ridge
            }
            1 => {
                let mut t = 0.0;
                for i in 0..d / 2 {
                    let diff = x[2 * i + 1] - x[2 * i];
                    t += diff * diff;
                }
                s * t + ridge
            }
            _ => ridge,
        }
    }

    fn local_gradient(&self, m: usize, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let s = self.coupling();
        let lam = self.params.strong_convexity;
        for (o, v) in out.iter_mut().zip(x) {
            *o = lam * v;
        }
        match self.role(m) {
            0 => {
                out[0] += 2.0 * s * (x[0] - self.params.scale);
                out[d - 1] += 2.0 * s * self.beta * x[d - 1];
                for i in 1..d / 2 {
                    let diff = 2.0 * s * (x[2 * i] - x[2 * i - 1]);
                    out[2 * i] += diff;
                    out[2 * i - 1] -= diff;
                }
            }
            1 => {
                for i in 0..d / 2 {
                    let diff = 2.0 * s * (x[2 * i + 1] - x[2 * i]);
                    out[2 * i + 1] += diff;
                    out[2 * i] -= diff;
                }
            }
            _ => {}
        }
    }

    fn stochastic_gradient(&self, m: usize, x: &[f64], _rng: &mut RngStream, out: &mut [f64]) {
        self.local_gradient(m, x, out);
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.xstar)
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.fstar)
    }

    fn family(&self) -> &str {
        "chain"
    }
}

/// Suboptimality floor for any point whose coordinates beyond the first
/// `rounds` are zero. For even machine counts this is
/// (F(0) - F*) (q^{2R} - q^{2d}) / alpha; with a padding machine the same
/// strong-convexity argument gives lambda/2 times the tail mass of x*.
pub fn chain_residual_lower_bound(inst: &ChainInstance, rounds: usize) -> f64 {
    let d = inst.dim;
    if rounds >= d {
        return 0.0;
    }
    if inst.padded {
        let tail: f64 = inst.xstar[rounds..].iter().map(|v| v * v).sum();
        return 0.5 * inst.params.strong_convexity * tail;
    }
    let q = inst.q;
    let gap = -inst.fstar;
    gap * (q.powi(2 * rounds as i32) - q.powi(2 * d as i32)) / inst.alpha
}

/// Minimum of F over points supported on the first `k` coordinates, by a
/// restricted linear solve. Returns (minimizer, value).
pub fn restricted_minimum(inst: &ChainInstance, k: usize) -> (Vec<f64>, f64) {
    let d = inst.dim;
    if k == 0 {
        let z = vec![0.0; d];
        let v = inst.value(&z);
        return (z, v);
    }
    let w = 2.0 * inst.pairs as f64 / inst.params.machines as f64;
    let s = w * inst.coupling();
    let lam = inst.params.strong_convexity;
    let mut diag = vec![2.0 * s + lam; k];
    if k == d {
        diag[d - 1] = (1.0 + inst.beta) * s + lam;
    }
    let mut rhs = vec![0.0; k];
    rhs[0] = s * inst.params.scale;
    solve_tridiagonal(-s, &mut diag, &mut rhs);
    let mut x = rhs;
    x.resize(d, 0.0);
    let v = inst.value(&x);
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::average_gradient;

    fn inst(machines: usize, rounds: usize) -> ChainInstance {
        build_chain(ChainParams {
            machines,
            smoothness: 9.0,
            strong_convexity: 1.0,
            scale: 1.0,
            rounds,
        })
        .unwrap()
    }

    #[test]
    fn reference_algebra() {
        let c = inst(2, 3);
        assert!((c.alpha() - 5f64.sqrt()).abs() < 1e-15);
        // smaller root of 1 - 3q + q^2
        let root = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((c.q() - root).abs() < 1e-12);
        assert!((c.optimal_value().unwrap() + root / 2.0).abs() < 1e-15);
        assert_eq!(c.dim() % 2, 0);
    }

    #[test]
    fn minimizer_is_stationary() {
        for m in [2, 3, 4] {
            let c = inst(m, 5);
            let g = average_gradient(&c, c.minimizer().unwrap()).unwrap();
            let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(n < 1e-12, "M = {m}: {n}");
        }
    }

    #[test]
    fn first_gradient_is_on_first_axis() {
        let c = inst(2, 3);
        let mut g = vec![0.0; c.dim()];
        c.local_gradient(0, &vec![0.0; c.dim()], &mut g);
        assert_eq!(g[0], (1.0 - 9.0) / 4.0);
        assert!(g[1..].iter().all(|&v| v == 0.0));
        c.local_gradient(1, &vec![0.0; c.dim()], &mut g);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_poor_conditioning() {
        let r = build_chain(ChainParams {
            machines: 2,
            smoothness: 6.0,
            strong_convexity: 1.0,
            scale: 1.0,
            rounds: 3,
        });
        assert!(r.is_err());
    }

    #[test]
    fn floor_vanishes_at_full_support() {
        let c = inst(2, 3);
        assert_eq!(chain_residual_lower_bound(&c, c.dim()), 0.0);
        assert!(chain_residual_lower_bound(&c, 3) > 0.0);
    }

    #[test]
    fn even_floor_matches_tail_mass() {
        let c = inst(2, 6);
        let lam = 1.0;
        for r in 0..c.dim() {
            let tail: f64 = c.minimizer().unwrap()[r..].iter().map(|v| v * v).sum();
            let direct = 0.5 * lam * tail;
            let closed = chain_residual_lower_bound(&c, r);
            assert!((direct - closed).abs() <= 1e-12 * direct.max(1e-300), "{r}");
        }
    }
}
