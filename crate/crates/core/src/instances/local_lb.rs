//! Two-function quadratic family on which Local SGD provably pays for
//! heterogeneity at any fixed stepsize.
//!
//! Coordinates 1-3 are shared by both machines through `G`; coordinate 4 is
//! where the machines disagree: one pulls toward `-zeta/L` with curvature `L`,
//! the other toward `zeta/mu` with curvature `mu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{DistributedObjective, ProblemConstants};
use crate::rng::RngStream;

/// How the offset `c` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// c^2 = B^2 / 2, so |x*| <= B.
    Radius(f64),
    /// c^2 = Delta / mu, so F(0) - F* = Delta.
    Gap(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLbParams {
    pub machines: usize,
    #[serde(rename = "H")]
    pub smoothness: f64,
    #[serde(rename = "lambda")]
    pub strong_convexity: f64,
    pub mu: f64,
    #[serde(rename = "L")]
    pub curvature: f64,
    pub zeta: f64,
    pub sigma: f64,
    pub scale: Scale,
}

#[derive(Debug, Clone)]
pub struct LocalLbInstance {
    params: LocalLbParams,
    c: f64,
    pairs: usize,
    padded: bool,
    xstar: Vec<f64>,
    fstar: f64,
    constants: ProblemConstants,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    First,
    Second,
    Pad,
}

pub fn build_local_lb(params: LocalLbParams) -> Result<LocalLbInstance> {
    let p = &params;
    let (h, lam, mu, l) = (p.smoothness, p.strong_convexity, p.mu, p.curvature);
    if p.machines < 2 {
        return Err(Error::param("local_lb needs at least 2 machines"));
    }
    if !(h > 0.0) || !(lam >= 0.0) {
        return Err(Error::param("need H > 0 and lambda >= 0"));
    }
    if !(lam <= mu && mu <= h / 16.0) {
        return Err(Error::param(format!(
            "mu = {mu} must satisfy lambda <= mu <= H/16 (lambda = {lam}, H/16 = {})",
            h / 16.0
        )));
    }
    if !(lam <= l && l <= h) {
        return Err(Error::param(format!("L = {l} must lie in [lambda, H]")));
    }
    if mu > 2.0 * l {
        return Err(Error::param("need mu <= 2L"));
    }
    if !(p.zeta >= 0.0) || !(p.sigma >= 0.0) {
        return Err(Error::param("zeta and sigma must be non-negative"));
    }
    let c = match p.scale {
        Scale::Radius(b) if b > 0.0 => (b * b / 2.0).sqrt(),
        Scale::Gap(delta) if delta > 0.0 => (delta / mu).sqrt(),
        _ => return Err(Error::param("scale must be positive")),
    };
    let pairs = p.machines / 2;
    let padded = p.machines % 2 == 1;
    if padded && lam == 0.0 {
        return Err(Error::param("odd machine counts need lambda > 0 for the padding machine"));
    }
    let x2_target = mu.sqrt() * c / h.sqrt();
    let w = 2.0 * pairs as f64 / p.machines as f64;
    let xstar = if padded {
        vec![
            w * mu * c / (w * mu + (1.0 - w) * lam),
            w * h * x2_target / (w * h + (1.0 - w) * lam),
            0.0,
            0.0,
        ]
    } else {
        vec![c, x2_target, 0.0, 0.0]
    };
    let mut inst = LocalLbInstance {
        params: params.clone(),
        c,
        pairs,
        padded,
        xstar,
        fstar: 0.0,
        constants: ProblemConstants {
            machines: params.machines,
            smoothness: h,
            strong_convexity: lam,
            sigma: params.sigma,
            sigma_star: params.sigma,
            zeta_star: 0.0,
            zeta_bar: None,
            radius: None,
            initial_gap: None,
        },
    };
    let xs = inst.xstar.clone();
    inst.fstar = inst.value(&xs);
    let zeta_sq = crate::objective::measure_zeta_star_sq(&inst, None)?;
    let gap = inst.value(&[0.0; 4]) - inst.fstar;
    let c_ = &mut inst.constants;
    c_.zeta_star = zeta_sq.sqrt();
    c_.zeta_bar = if l == mu && !padded { Some(params.zeta) } else { None };
    c_.radius = Some(match params.scale {
        Scale::Radius(b) => b,
        Scale::Gap(_) => xs.iter().map(|v| v * v).sum::<f64>().sqrt(),
    });
    c_.initial_gap = Some(gap);
    Ok(inst)
}

impl LocalLbInstance {
    pub fn params(&self) -> &LocalLbParams {
        &self.params
    }

    /// True when an extra machine was added to make the count even.
    pub fn is_padded(&self) -> bool {
        self.padded
    }

    pub fn offset(&self) -> f64 {
        self.c
    }

    fn role(&self, m: usize) -> Role {
        if m < self.pairs {
            Role::First
        } else if m < 2 * self.pairs {
            Role::Second
        } else {
            Role::Pad
        }
    }

    fn shared_value(&self, x: &[f64]) -> f64 {
        let p = &self.params;
        let h = p.smoothness;
        let t = p.mu.sqrt() * self.c / h.sqrt();
        let pos = x[2].max(0.0);
        0.5 * p.mu * (x[0] - self.c).powi(2)
            + 0.5 * h * (x[1] - t).powi(2)
            + h / 8.0 * (x[2] * x[2] + pos * pos)
    }

    fn shared_gradient(&self, x: &[f64], out: &mut [f64]) {
        let p = &self.params;
        let h = p.smoothness;
        let t = p.mu.sqrt() * self.c / h.sqrt();
        out[0] = p.mu * (x[0] - self.c);
        out[1] = h * (x[1] - t);
        out[2] = h / 4.0 * x[2] + if x[2] > 0.0 { h / 4.0 * x[2] } else { 0.0 };
    }
}

impl DistributedObjective for LocalLbInstance {
    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    fn dim(&self) -> usize {
        4
    }

    fn local_value(&self, m: usize, x: &[f64]) -> f64 {
        let p = &self.params;
        match self.role(m) {
            Role::First => {
                self.shared_value(x) + 0.5 * p.curvature * x[3] * x[3] + p.zeta * x[3]
            }
            Role::Second => self.shared_value(x) + 0.5 * p.mu * x[3] * x[3] - p.zeta * x[3],
            Role::Pad => 0.5 * p.strong_convexity * x.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    fn local_gradient(&self, m: usize, x: &[f64], out: &mut [f64]) {
        let p = &self.params;
        match self.role(m) {
            Role::First => {
                self.shared_gradient(x, out);
                out[3] = p.curvature * x[3] + p.zeta;
            }
            Role::Second => {
                self.shared_gradient(x, out);
                out[3] = p.mu * x[3] - p.zeta;
            }
            Role::Pad => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = p.strong_convexity * v;
                }
            }
        }
    }

    fn stochastic_gradient(&self, m: usize, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        self.local_gradient(m, x, out);
        if self.params.sigma > 0.0 && self.role(m) != Role::Pad {
            out[2] += self.params.sigma * rng.next_gaussian();
        }
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.xstar)
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.fstar)
    }

    fn family(&self) -> &str {
        "local_lb"
    }
}

/// Round-start values of the averaged fourth coordinate under noiseless Local
/// SGD with constant stepsize `eta` on the two-machine split, starting at 0.
/// Entry r-1 holds the value after round r.
pub fn closed_form_x4_trajectory(
    l: f64,
    mu: f64,
    zeta: f64,
    eta: f64,
    k: usize,
    rounds: usize,
) -> Result<Vec<f64>> {
    if eta > 1.0 / l {
        return Err(Error::param(format!("eta = {eta} exceeds 1/L = {}", 1.0 / l)));
    }
    if mu > 2.0 * l {
        return Err(Error::param("need mu <= 2L"));
    }
    let a = (1.0 - mu * eta).powi(k as i32);
    let b = (1.0 - l * eta).powi(k as i32);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        x = 0.5 * (zeta / mu - zeta / l + a * (x - zeta / mu) + b * (x + zeta / l));
        out.push(x);
    }
    Ok(out)
}

/// Suboptimality floor from the stepsize case analysis: any fixed-stepsize
/// Local SGD run on this family ends at least this far from optimal
/// (noiseless heterogeneity branch).
pub fn local_sgd_floor(h: f64, mu: f64, c: f64, zeta: f64, rounds: usize) -> f64 {
    let r = rounds as f64;
    let decay = mu * c * c / 4.0 * (-6.0 * mu * r / h).exp();
    let hetero = h * zeta * zeta / (512.0 * mu * mu * r * r);
    decay.min(hetero)
}
