//! Stepsize and averaging-weight schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Communication geometry: M machines, K local steps per round, R rounds, and
/// S participants per round (defaults to M).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommGeometry {
    #[serde(rename = "M")]
    pub machines: usize,
    #[serde(rename = "K")]
    pub local_steps: usize,
    #[serde(rename = "R")]
    pub rounds: usize,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub participants: Option<usize>,
}

impl CommGeometry {
    pub fn new(machines: usize, local_steps: usize, rounds: usize) -> Self {
        Self {
            machines,
            local_steps,
            rounds,
            participants: None,
        }
    }

    pub fn with_participants(mut self, s: usize) -> Self {
        self.participants = Some(s);
        self
    }

    pub fn participants(&self) -> usize {
        self.participants.unwrap_or(self.machines)
    }

    /// Total stochastic gradients per machine, T = K R.
    pub fn total_steps(&self) -> usize {
        self.local_steps * self.rounds
    }

    pub fn validate(&self) -> Result<()> {
        if self.machines == 0 || self.local_steps == 0 || self.rounds == 0 {
            return Err(Error::param("M, K and R must all be at least 1"));
        }
        let s = self.participants();
        if s == 0 || s > self.machines {
            return Err(Error::param(format!(
                "S = {s} must lie in 1..={}",
                self.machines
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant {
        eta: f64,
    },
    /// Constant 1/(4H) with geometric weights on short horizons; a restarted
    /// 2/(lambda (kappa + t - t0)) decay with quadratic weights on long ones.
    Stich {
        #[serde(rename = "H")]
        smoothness: f64,
        #[serde(rename = "lambda")]
        strong_convexity: f64,
    },
    /// eta_t = 2 / (lambda (a + t + 1)), w_t = a + t.
    PolyDecay {
        #[serde(rename = "lambda")]
        strong_convexity: f64,
        a: f64,
    },
    /// Minibatch SGD convex stepsize min{1/(4H), B sqrt(MK) / (sigma* sqrt(R))}.
    Theorem1Convex {
        #[serde(rename = "H")]
        smoothness: f64,
        #[serde(rename = "B")]
        radius: f64,
        sigma_star: f64,
    },
    /// Local SGD convex stepsize
    /// min{1/(10H), B sqrt(M)/(sigma* sqrt(KR)), (B^2/(H K^2 R sigma^2))^(1/3),
    ///     (B^2/(H K^3 R zeta_bar^2))^(1/3)}.
    Theorem2Convex {
        #[serde(rename = "H")]
        smoothness: f64,
        #[serde(rename = "B")]
        radius: f64,
        sigma: f64,
        sigma_star: f64,
        zeta_bar: f64,
    },
}

impl Schedule {
    pub fn constant(eta: f64) -> Self {
        Schedule::Constant { eta }
    }

    /// Decaying schedule used for strongly convex Local SGD, with a = 20H/lambda.
    pub fn local_strongly_convex(smoothness: f64, strong_convexity: f64) -> Self {
        Schedule::PolyDecay {
            strong_convexity,
            a: 20.0 * smoothness / strong_convexity,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Constant { .. } => "constant",
            Schedule::Stich { .. } => "stich",
            Schedule::PolyDecay { .. } => "poly_decay",
            Schedule::Theorem1Convex { .. } => "theorem1_convex",
            Schedule::Theorem2Convex { .. } => "theorem2_convex",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Constant { eta } => eta >= 0.0 && eta.is_finite(),
            Schedule::Stich {
                smoothness,
                strong_convexity,
            } => smoothness > 0.0 && strong_convexity > 0.0,
            Schedule::PolyDecay { strong_convexity, a } => strong_convexity > 0.0 && a >= 0.0,
            Schedule::Theorem1Convex {
                smoothness,
                radius,
                sigma_star,
            } => smoothness > 0.0 && radius > 0.0 && sigma_star >= 0.0,
            Schedule::Theorem2Convex {
                smoothness,
                radius,
                sigma,
                sigma_star,
                zeta_bar,
            } => smoothness > 0.0 && radius > 0.0 && sigma >= 0.0 && sigma_star >= 0.0 && zeta_bar >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid {} schedule parameters", self.name())))
        }
    }

    /// Stepsize and averaging weight for query `t` (0-based) out of
    /// `horizon` queries, under geometry `geom`.
    pub fn at(&self, t: usize, horizon: usize, geom: &CommGeometry) -> (f64, f64) {
        match *self {
            Schedule::Constant { eta } => (eta, 1.0),
            Schedule::Stich {
                smoothness: h,
                strong_convexity: lam,
            } => {
                let base = 1.0 / (4.0 * h);
                if horizon as f64 <= 4.0 * h / lam {
                    (base, (1.0 - lam * base).powf(-((t + 1) as f64)))
                } else {
                    let kappa = 8.0 * h / lam;
                    let t0 = horizon.div_ceil(2);
                    if t < t0 {
                        (base, 0.0)
                    } else {
                        let s = kappa + (t - t0) as f64;
                        (2.0 / (lam * s), s * s)
                    }
                }
            }
            Schedule::PolyDecay { strong_convexity, a } => {
                let t = t as f64;
                (2.0 / (strong_convexity * (a + t + 1.0)), a + t)
            }
            Schedule::Theorem1Convex {
                smoothness,
                radius,
                sigma_star,
            } => {
                let mk = (geom.participants() * geom.local_steps) as f64;
                let r = geom.rounds as f64;
                let noise = if sigma_star > 0.0 {
                    radius * mk.sqrt() / (sigma_star * r.sqrt())
                } else {
                    f64::INFINITY
                };
                ((1.0 / (4.0 * smoothness)).min(noise), 1.0)
            }
            Schedule::Theorem2Convex {
                smoothness: h,
                radius: b,
                sigma,
                sigma_star,
                zeta_bar,
            } => {
                let m = geom.participants() as f64;
                let k = geom.local_steps as f64;
                let r = geom.rounds as f64;
                let mut eta = 1.0 / (10.0 * h);
                if sigma_star > 0.0 {
                    eta = eta.min(b * m.sqrt() / (sigma_star * (k * r).sqrt()));
                }
                if sigma > 0.0 {
                    eta = eta.min((b * b / (h * k * k * r * sigma * sigma)).cbrt());
                }
                if zeta_bar > 0.0 {
                    eta = eta.min((b * b / (h * k * k * k * r * zeta_bar * zeta_bar)).cbrt());
                }
                (eta, 1.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stich_short_horizon_is_geometric() {
        let s = Schedule::Stich {
            smoothness: 4.0,
            strong_convexity: 1.0,
        };
        let g = CommGeometry::new(1, 1, 10);
        for t in 0..10 {
            let (eta, w) = s.at(t, 10, &g);
            assert_eq!(eta, 1.0 / 16.0);
            let expect = (1.0f64 - 1.0 / 16.0).powi(-(t as i32 + 1));
            assert!((w - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn stich_long_horizon_restarts() {
        let s = Schedule::Stich {
            smoothness: 1.0,
            strong_convexity: 1.0,
        };
        let g = CommGeometry::new(1, 1, 9);
        // R = 9 > 4H/lambda = 4, t0 = 5, kappa = 8
        assert_eq!(s.at(4, 9, &g), (0.25, 0.0));
        assert_eq!(s.at(5, 9, &g), (0.25, 64.0));
        assert_eq!(s.at(7, 9, &g), (0.2, 100.0));
    }

    #[test]
    fn poly_decay_values() {
        let s = Schedule::PolyDecay {
            strong_convexity: 2.0,
            a: 3.0,
        };
        let g = CommGeometry::new(1, 1, 1);
        assert_eq!(s.at(0, 5, &g), (0.25, 3.0));
        assert_eq!(s.at(1, 5, &g), (0.2, 4.0));
    }

    #[test]
    fn theorem2_stepsize_takes_the_minimum() {
        let g = CommGeometry::new(4, 8, 10);
        let s = Schedule::Theorem2Convex {
            smoothness: 1.0,
            radius: 1.0,
            sigma: 0.0,
            sigma_star: 0.0,
            zeta_bar: 1.0,
        };
        let (eta, _) = s.at(0, 80, &g);
        let hetero = (1.0f64 / (512.0 * 10.0)).cbrt();
        assert!((eta - hetero.min(0.1)).abs() < 1e-15);
    }

    #[test]
    fn geometry_checks() {
        assert!(CommGeometry::new(4, 1, 1).with_participants(5).validate().is_err());
        assert!(CommGeometry::new(4, 0, 1).validate().is_err());
        assert_eq!(CommGeometry::new(3, 4, 5).total_steps(), 20);
    }
}
