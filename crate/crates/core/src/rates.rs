//! Closed-form convergence guarantees and lower bounds, evaluated with unit
//! constants unless a function says otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem and geometry values a bound may depend on. Absent entries are
/// reported by name when a bound needs them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "Delta", default, skip_serializing_if = "Option::is_none")]
    pub initial_gap: Option<f64>,
    #[serde(rename = "lambda", default, skip_serializing_if = "Option::is_none")]
    pub strong_convexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_bar: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub machines: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub local_steps: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<f64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub participants: Option<f64>,
}

macro_rules! getter {
    ($fn:ident, $field:ident, $label:literal) => {
        fn $fn(&self) -> Result<f64> {
            match self.$field {
                Some(v) if v.is_finite() && v >= 0.0 => Ok(v),
                Some(_) => Err(Error::param(concat!("parameter `", $label, "` must be finite and non-negative"))),
                None => Err(Error::MissingParameter($label)),
            }
        }
    };
}

impl BoundParams {
    getter!(h, smoothness, "H");
    getter!(b, radius, "B");
    getter!(delta, initial_gap, "Delta");
    getter!(lam_raw, strong_convexity, "lambda");
    getter!(sigma_, sigma, "sigma");
    getter!(sigma_s, sigma_star, "sigma_star");
    getter!(zeta_s, zeta_star, "zeta_star");
    getter!(zeta_b, zeta_bar, "zeta_bar");
    getter!(m, machines, "M");
    getter!(k, local_steps, "K");
    getter!(r, rounds, "R");
    getter!(s, participants, "S");

    fn lam(&self) -> Result<f64> {
        let l = self.lam_raw()?;
        if l <= 0.0 {
            return Err(Error::param("strongly convex bound needs lambda > 0"));
        }
        Ok(l)
    }

    /// Fails on the first present entry that is negative or non-finite.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("H", self.smoothness),
            ("B", self.radius),
            ("Delta", self.initial_gap),
            ("lambda", self.strong_convexity),
            ("sigma", self.sigma),
            ("sigma_star", self.sigma_star),
            ("zeta_star", self.zeta_star),
            ("zeta_bar", self.zeta_bar),
            ("M", self.machines),
            ("K", self.local_steps),
            ("R", self.rounds),
            ("S", self.participants),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!("parameter `{name}` must be finite and non-negative, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// All-ones parameter set.
    pub fn ones() -> Self {
        BoundParams {
            smoothness: Some(1.0),
            radius: Some(1.0),
            initial_gap: Some(1.0),
            strong_convexity: Some(1.0),
            sigma: Some(1.0),
            sigma_star: Some(1.0),
            zeta_star: Some(1.0),
            zeta_bar: Some(1.0),
            machines: Some(1.0),
            local_steps: Some(1.0),
            rounds: Some(1.0),
            participants: Some(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    MbsgdConvex,
    AccelMbsgdConvex,
    KoloskovaConvex,
    KhaledConvex,
    ScaffoldConvex,
    LocalUbConvex,
    LocalLbConvex,
    DzrLbConvex,
    MbsgdSc,
    AccelMbsgdSc,
    KoloskovaSc,
    ScaffoldSc,
    LocalUbSc,
    LocalLbSc,
    DzrLbSc,
    InnerOuterMinConvex,
    InnerOuterMinSc,
    SubsetMbsgdConvex,
    SubsetMbsgdSc,
    FedavgSubsetConvex,
    FedavgSubsetSc,
    ScaffoldSubsetConvex,
    ScaffoldSubsetSc,
}

impl BoundName {
    pub const ALL: [BoundName; 23] = [
        BoundName::MbsgdConvex,
        BoundName::AccelMbsgdConvex,
        BoundName::KoloskovaConvex,
        BoundName::KhaledConvex,
        BoundName::ScaffoldConvex,
        BoundName::LocalUbConvex,
        BoundName::LocalLbConvex,
        BoundName::DzrLbConvex,
        BoundName::MbsgdSc,
        BoundName::AccelMbsgdSc,
        BoundName::KoloskovaSc,
        BoundName::ScaffoldSc,
        BoundName::LocalUbSc,
        BoundName::LocalLbSc,
        BoundName::DzrLbSc,
        BoundName::InnerOuterMinConvex,
        BoundName::InnerOuterMinSc,
        BoundName::SubsetMbsgdConvex,
        BoundName::SubsetMbsgdSc,
        BoundName::FedavgSubsetConvex,
        BoundName::FedavgSubsetSc,
        BoundName::ScaffoldSubsetConvex,
        BoundName::ScaffoldSubsetSc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::MbsgdConvex => "mbsgd_convex",
            BoundName::AccelMbsgdConvex => "accel_mbsgd_convex",
            BoundName::KoloskovaConvex => "koloskova_convex",
            BoundName::KhaledConvex => "khaled_convex",
            BoundName::ScaffoldConvex => "scaffold_convex",
            BoundName::LocalUbConvex => "local_ub_convex",
            BoundName::LocalLbConvex => "local_lb_convex",
            BoundName::DzrLbConvex => "dzr_lb_convex",
            BoundName::MbsgdSc => "mbsgd_sc",
            BoundName::AccelMbsgdSc => "accel_mbsgd_sc",
            BoundName::KoloskovaSc => "koloskova_sc",
            BoundName::ScaffoldSc => "scaffold_sc",
            BoundName::LocalUbSc => "local_ub_sc",
            BoundName::LocalLbSc => "local_lb_sc",
            BoundName::DzrLbSc => "dzr_lb_sc",
            BoundName::InnerOuterMinConvex => "inner_outer_min_convex",
            BoundName::InnerOuterMinSc => "inner_outer_min_sc",
            BoundName::SubsetMbsgdConvex => "subset_mbsgd_convex",
            BoundName::SubsetMbsgdSc => "subset_mbsgd_sc",
            BoundName::FedavgSubsetConvex => "fedavg_subset_convex",
            BoundName::FedavgSubsetSc => "fedavg_subset_sc",
            BoundName::ScaffoldSubsetConvex => "scaffold_subset_convex",
            BoundName::ScaffoldSubsetSc => "scaffold_subset_sc",
        }
    }

    pub fn parse(s: &str) -> Option<BoundName> {
        BoundName::ALL.iter().copied().find(|b| b.as_str() == s)
    }

    pub fn strongly_convex(self) -> bool {
        self.as_str().ends_with("_sc")
    }

    /// Rows of the two comparison tables (convex, then strongly convex).
    pub fn table_rows() -> &'static [BoundName] {
        &BoundName::ALL[..15]
    }

    /// Human-readable expression, constants shown as `c`.
    pub fn formula(self) -> &'static str {
        match self {
            BoundName::MbsgdConvex => "H B^2/R + sigma* B/sqrt(MKR)",
            BoundName::AccelMbsgdConvex => "H B^2/R^2 + sigma B/sqrt(MKR)",
            BoundName::KoloskovaConvex => {
                "H B^2/R + sigma* B/sqrt(MKR) + (H zeta*^2 B^4)^(1/3)/R^(2/3) + (H sigma*^2 B^4)^(1/3)/(K^(1/3) R^(2/3))"
            }
            BoundName::KhaledConvex => {
                "H B^2/R + B sqrt(sigma*^2 + zeta*^2)/sqrt(MKR) + (H (sigma*^2 + zeta*^2) B^4)^(1/3)/R^(2/3)"
            }
            BoundName::ScaffoldConvex => {
                "H B^2/R + sigma B/sqrt(MKR) + zeta*^2/(H R) + sigma zeta*/(H sqrt(MKR))"
            }
            BoundName::LocalUbConvex => {
                "H B^2/(K R) + sigma* B/sqrt(MKR) + (H zetabar^2 B^4)^(1/3)/R^(2/3) + (H sigma^2 B^4)^(1/3)/(K^(1/3) R^(2/3))"
            }
            BoundName::LocalLbConvex => {
                "min{H B^2/R, (H zeta*^2 B^4)^(1/3)/R^(2/3)} + sigma B/sqrt(MKR) + (H sigma^2 B^4)^(1/3)/(K^(2/3) R^(2/3))"
            }
            BoundName::DzrLbConvex => "min{H B^2/R^2, zeta*^2/(H R^2)} + sigma B/sqrt(MKR)",
            BoundName::MbsgdSc => "(H Delta/lambda) exp(-lambda R/H) + sigma*^2/(lambda M K R)",
            BoundName::AccelMbsgdSc => "Delta exp(-sqrt(lambda/H) R) + sigma^2/(lambda M K R)",
            BoundName::KoloskovaSc => {
                "sigma*^2/(lambda M K R) + H zeta*^2/(lambda^2 R^2) + H sigma*^2/(lambda^2 K R^2)"
            }
            BoundName::ScaffoldSc => {
                "(H Delta + lambda zeta*^2/H^2) exp(-lambda R/H) + sigma^2/(lambda M K R)"
            }
            BoundName::LocalUbSc => {
                "H^2 B^2/(H K R + lambda K^2 R^2) + (H zetabar^2/(lambda^2 R^2) + H sigma^2/(lambda^2 K R^2)) log(H/lambda + K R) + sigma*^2/(lambda M K R)"
            }
            BoundName::LocalLbSc => {
                "min{Delta exp(-lambda R/H), H zeta*^2/(lambda^2 R^2)} + sigma^2/(lambda M K R) + min{Delta, H sigma^2/(lambda^2 K^2 R^2)}"
            }
            BoundName::DzrLbSc => {
                "min{Delta sqrt(lambda/H), lambda zeta*^2/H^2} exp(-sqrt(lambda/H) R) + sigma^2/(lambda M K R)"
            }
            BoundName::InnerOuterMinConvex => "min{mbsgd_convex, local_ub_convex}",
            BoundName::InnerOuterMinSc => "min{mbsgd_sc, local_ub_sc}",
            BoundName::SubsetMbsgdConvex => {
                "H B^2/R + sigma* B/sqrt(SKR) + sqrt(1 - S/M) zeta* B/sqrt(S R)"
            }
            BoundName::SubsetMbsgdSc => {
                "lambda B^2 exp(-lambda R/H) + sigma*^2/(lambda S K R) + (1 - S/M) zeta*^2/(lambda S R)"
            }
            BoundName::FedavgSubsetConvex => {
                "H B^2/R + sigma B/sqrt(SKR) + (H zeta*^2 B^4)^(1/3)/R^(2/3) + sqrt(1 - S/M) zeta* B/sqrt(S R)"
            }
            BoundName::FedavgSubsetSc => {
                "lambda B^2 exp(-lambda R/H) + sigma^2/(lambda S K R) + H zeta*^2/(lambda^2 R^2) + (1 - S/M) zeta*^2/(lambda S R)"
            }
            BoundName::ScaffoldSubsetConvex => {
                "H B^2/R + sigma B/sqrt(SKR) + M zeta*^2/(H S R) + sigma zeta* sqrt(M)/(H S sqrt(K R))"
            }
            BoundName::ScaffoldSubsetSc => {
                "lambda (B^2 + M zeta*^2/(S H^2)) exp(-min{lambda/H, S/M} R) + sigma^2/(lambda S K R)"
            }
        }
    }
}

/// How universal constants are treated. Values are identical in both modes;
/// `Symbolic` only marks rendered output with a leading `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    #[default]
    Unit,
    Symbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub name: BoundName,
    #[serde(default)]
    pub constant_mode: ConstantMode,
}

impl BoundSpec {
    pub fn unit(name: BoundName) -> Self {
        BoundSpec {
            name,
            constant_mode: ConstantMode::Unit,
        }
    }
}

fn cbrt(v: f64) -> f64 {
    v.cbrt()
}

/// Evaluates a named bound at `p` with unit constants.
pub fn eval_bound(spec: &BoundSpec, p: &BoundParams) -> Result<f64> {
    use BoundName::*;
    let v = match spec.name {
        MbsgdConvex => {
            let (h, b, ss) = (p.h()?, p.b()?, p.sigma_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            h * b * b / r + ss * b / (m * k * r).sqrt()
        }
        AccelMbsgdConvex => {
            let (h, b, s) = (p.h()?, p.b()?, p.sigma_()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            h * b * b / (r * r) + s * b / (m * k * r).sqrt()
        }
        KoloskovaConvex => {
            let (h, b, ss, zs) = (p.h()?, p.b()?, p.sigma_s()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            let b4 = b.powi(4);
            h * b * b / r
                + ss * b / (m * k * r).sqrt()
                + cbrt(h * zs * zs * b4) / r.powf(2.0 / 3.0)
                + cbrt(h * ss * ss * b4) / (k.cbrt() * r.powf(2.0 / 3.0))
        }
        KhaledConvex => {
            let (h, b, ss, zs) = (p.h()?, p.b()?, p.sigma_s()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            let mix = ss * ss + zs * zs;
            h * b * b / r + b * mix.sqrt() / (m * k * r).sqrt() + cbrt(h * mix * b.powi(4)) / r.powf(2.0 / 3.0)
        }
        ScaffoldConvex => {
            let (h, b, s, zs) = (p.h()?, p.b()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            let mkr = (m * k * r).sqrt();
            h * b * b / r + s * b / mkr + zs * zs / (h * r) + s * zs / (h * mkr)
        }
        LocalUbConvex => {
            let (h, b, s, ss, zb) = (p.h()?, p.b()?, p.sigma_()?, p.sigma_s()?, p.zeta_b()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            let b4 = b.powi(4);
            h * b * b / (k * r)
                + ss * b / (m * k * r).sqrt()
                + cbrt(h * zb * zb * b4) / r.powf(2.0 / 3.0)
                + cbrt(h * s * s * b4) / (k.cbrt() * r.powf(2.0 / 3.0))
        }
        LocalLbConvex => {
            let (h, b, s, zs) = (p.h()?, p.b()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            let b4 = b.powi(4);
            (h * b * b / r).min(cbrt(h * zs * zs * b4) / r.powf(2.0 / 3.0))
                + s * b / (m * k * r).sqrt()
                + cbrt(h * s * s * b4) / (k.powf(2.0 / 3.0) * r.powf(2.0 / 3.0))
        }
        DzrLbConvex => {
            let (h, b, s, zs) = (p.h()?, p.b()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            (h * b * b / (r * r)).min(zs * zs / (h * r * r)) + s * b / (m * k * r).sqrt()
        }
        MbsgdSc => {
            let (h, d, lam, ss) = (p.h()?, p.delta()?, p.lam()?, p.sigma_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            h * d / lam * (-lam * r / h).exp() + ss * ss / (lam * m * k * r)
        }
        AccelMbsgdSc => {
            let (h, d, lam, s) = (p.h()?, p.delta()?, p.lam()?, p.sigma_()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            d * (-(lam / h).sqrt() * r).exp() + s * s / (lam * m * k * r)
        }
        KoloskovaSc => {
            let (h, lam, ss, zs) = (p.h()?, p.lam()?, p.sigma_s()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            ss * ss / (lam * m * k * r) + h * zs * zs / (lam * lam * r * r) + h * ss * ss / (lam * lam * k * r * r)
        }
        ScaffoldSc => {
            let (h, d, lam, s, zs) = (p.h()?, p.delta()?, p.lam()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            (h * d + lam * zs * zs / (h * h)) * (-lam * r / h).exp() + s * s / (lam * m * k * r)
        }
        LocalUbSc => {
            let (h, b, lam, s, ss, zb) = (p.h()?, p.b()?, p.lam()?, p.sigma_()?, p.sigma_s()?, p.zeta_b()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            h * h * b * b / (h * k * r + lam * k * k * r * r)
                + (h * zb * zb / (lam * lam * r * r) + h * s * s / (lam * lam * k * r * r)) * (h / lam + k * r).ln()
                + ss * ss / (lam * m * k * r)
        }
        LocalLbSc => {
            let (h, d, lam, s, zs) = (p.h()?, p.delta()?, p.lam()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            (d * (-lam * r / h).exp()).min(h * zs * zs / (lam * lam * r * r))
                + s * s / (lam * m * k * r)
                + d.min(h * s * s / (lam * lam * k * k * r * r))
        }
        DzrLbSc => {
            let (h, d, lam, s, zs) = (p.h()?, p.delta()?, p.lam()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r) = (p.m()?, p.k()?, p.r()?);
            (d * (lam / h).sqrt()).min(lam * zs * zs / (h * h)) * (-(lam / h).sqrt() * r).exp()
                + s * s / (lam * m * k * r)
        }
        InnerOuterMinConvex => eval_bound(&BoundSpec::unit(MbsgdConvex), p)?
            .min(eval_bound(&BoundSpec::unit(LocalUbConvex), p)?),
        InnerOuterMinSc => {
            eval_bound(&BoundSpec::unit(MbsgdSc), p)?.min(eval_bound(&BoundSpec::unit(LocalUbSc), p)?)
        }
        SubsetMbsgdConvex => {
            let (h, b, ss, zs) = (p.h()?, p.b()?, p.sigma_s()?, p.zeta_s()?);
            let (m, k, r, s) = (p.m()?, p.k()?, p.r()?, subset(p)?);
            h * b * b / r + ss * b / (s * k * r).sqrt() + (1.0 - s / m).sqrt() * zs * b / (s * r).sqrt()
        }
        SubsetMbsgdSc => {
            let (h, b, lam, ss, zs) = (p.h()?, p.b()?, p.lam()?, p.sigma_s()?, p.zeta_s()?);
            let (m, k, r, s) = (p.m()?, p.k()?, p.r()?, subset(p)?);
            lam * b * b * (-lam * r / h).exp() + ss * ss / (lam * s * k * r) + (1.0 - s / m) * zs * zs / (lam * s * r)
        }
        FedavgSubsetConvex => {
            let (h, b, sg, zs) = (p.h()?, p.b()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r, s) = (p.m()?, p.k()?, p.r()?, subset(p)?);
            h * b * b / r
                + sg * b / (s * k * r).sqrt()
                + cbrt(h * zs * zs * b.powi(4)) / r.powf(2.0 / 3.0)
                + (1.0 - s / m).sqrt() * zs * b / (s * r).sqrt()
        }
        FedavgSubsetSc => {
            let (h, b, lam, sg, zs) = (p.h()?, p.b()?, p.lam()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r, s) = (p.m()?, p.k()?, p.r()?, subset(p)?);
            lam * b * b * (-lam * r / h).exp()
                + sg * sg / (lam * s * k * r)
                + h * zs * zs / (lam * lam * r * r)
                + (1.0 - s / m) * zs * zs / (lam * s * r)
        }
        ScaffoldSubsetConvex => {
            let (h, b, sg, zs) = (p.h()?, p.b()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r, s) = (p.m()?, p.k()?, p.r()?, subset(p)?);
            h * b * b / r
                + sg * b / (s * k * r).sqrt()
                + m * zs * zs / (h * s * r)
                + sg * zs * m.sqrt() / (h * s * (k * r).sqrt())
        }
        ScaffoldSubsetSc => {
            let (h, b, lam, sg, zs) = (p.h()?, p.b()?, p.lam()?, p.sigma_()?, p.zeta_s()?);
            let (m, k, r, s) = (p.m()?, p.k()?, p.r()?, subset(p)?);
            lam * (b * b + m * zs * zs / (s * h * h)) * (-(lam / h).min(s / m) * r).exp() + sg * sg / (lam * s * k * r)
        }
    };
    Ok(v)
}

fn subset(p: &BoundParams) -> Result<f64> {
    let s = p.s()?;
    let m = p.m()?;
    if s < 1.0 || s > m {
        return Err(Error::param("need 1 <= S <= M"));
    }
    Ok(s)
}

/// Evaluates every named bound, skipping those whose parameters are missing
/// or out of range. Entries come back in declaration order.
pub fn eval_all(p: &BoundParams) -> Vec<(BoundName, f64)> {
    BoundName::ALL
        .iter()
        .filter_map(|&n| eval_bound(&BoundSpec::unit(n), p).ok().map(|v| (n, v)))
        .collect()
}

/// Heterogeneity level zeta*^2 = H^2 B^2 / R where the Local SGD lower-bound
/// heterogeneity term meets the Minibatch SGD term H B^2 / R.
pub fn crossover_zeta(h: f64, b: f64, r: f64) -> f64 {
    h * h * b * b / r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Convex,
    StronglyConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Accelerated Minibatch SGD matches the algorithm-independent lower bound.
    AcceleratedMbOptimal,
    /// Upper and lower bounds differ; improvement may or may not be possible.
    GapRegion,
    /// Heterogeneity is small enough that other methods can win.
    LowHeterogeneity,
}

/// Classifies the heterogeneity level against the regime where Accelerated
/// Minibatch SGD is optimal.
///
/// Convex: zeta* >= H B is optimal, zeta* < H B/sqrt(R) is low heterogeneity.
/// Strongly convex: zeta*^2 >= H^{3/2}/sqrt(lambda) is optimal, and
/// zeta*^2 < H^{3/2}/(sqrt(lambda) R) is low heterogeneity.
pub fn optimality_region(regime: Regime, p: &BoundParams) -> Result<Verdict> {
    let h = p.h()?;
    let zs = p.zeta_s()?;
    let r = p.r()?;
    let (value, upper, lower) = match regime {
        Regime::Convex => {
            let b = p.b()?;
            (zs, h * b, h * b / r.sqrt())
        }
        Regime::StronglyConvex => {
            let lam = p.lam()?;
            let edge = h.powf(1.5) / lam.sqrt();
            (zs * zs, edge, edge / r)
        }
    };
    Ok(if value >= upper {
        Verdict::AcceleratedMbOptimal
    } else if value < lower {
        Verdict::LowHeterogeneity
    } else {
        Verdict::GapRegion
    })
}

/// Explicit-constant Minibatch SGD bound, convex case:
/// 4 H B^2/R + 3 sigma* B/sqrt(MKR).
pub fn mbsgd_convex_explicit(h: f64, b: f64, sigma_star: f64, m: f64, k: f64, r: f64) -> f64 {
    4.0 * h * b * b / r + 3.0 * sigma_star * b / (m * k * r).sqrt()
}

/// Explicit-constant Minibatch SGD bound, strongly convex case:
/// 128 H |x0 - x*|^2 exp(-lambda R/(8H)) + 72 sigma*^2/(lambda M K R).
pub fn mbsgd_sc_explicit(h: f64, lam: f64, dist_sq: f64, sigma_star: f64, m: f64, k: f64, r: f64) -> f64 {
    128.0 * h * dist_sq * (-lam * r / (8.0 * h)).exp() + 72.0 * sigma_star * sigma_star / (lam * m * k * r)
}

/// Explicit-constant Local SGD bound, convex case, with constants 10, 13, 7, 4.
pub fn local_convex_explicit(
    h: f64,
    b: f64,
    sigma: f64,
    sigma_star: f64,
    zeta_bar: f64,
    m: f64,
    k: f64,
    r: f64,
) -> f64 {
    let b4 = b.powi(4);
    10.0 * h * b * b / (k * r)
        + 13.0 * (h * zeta_bar * zeta_bar * b4).cbrt() / r.powf(2.0 / 3.0)
        + 7.0 * (h * sigma * sigma * b4).cbrt() / (k.cbrt() * r.powf(2.0 / 3.0))
        + 4.0 * sigma_star * b / (m * k * r).sqrt()
}

/// Suboptimality floor for fixed-stepsize Local SGD on the four-dimensional
/// construction (noiseless heterogeneity branch).
pub fn local_lb_construction_floor(h: f64, mu: f64, c: f64, zeta: f64, r: f64) -> f64 {
    (mu * c * c / 4.0 * (-6.0 * mu * r / h).exp()).min(h * zeta * zeta / (512.0 * mu * mu * r * r))
}

/// Variance of the subset-minibatch estimator at the optimum when S of M
/// machines are drawn without replacement, each averaging K samples.
///
/// `exact` uses the finite-population factor (M - S)/(M - 1); otherwise the
/// (1 - S/M) approximation is used.
pub fn subset_variance_at_optimum(
    sigma_star_sq: f64,
    zeta_star_sq: f64,
    m: f64,
    s: f64,
    k: f64,
    exact: bool,
) -> f64 {
    let spread = if exact {
        if m > 1.0 {
            (m - s) / (m - 1.0)
        } else {
            0.0
        }
    } else {
        1.0 - s / m
    };
    sigma_star_sq / (s * k) + spread * zeta_star_sq / s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub setting: String,
    pub constant: String,
    pub value: Option<f64>,
    pub formula: String,
}

/// Rows of the two comparison tables evaluated at `p`. Rows whose parameters
/// are missing have `value = None`.
pub fn rate_table(p: &BoundParams, mode: ConstantMode) -> Vec<TableRow> {
    BoundName::table_rows()
        .iter()
        .map(|&n| TableRow {
            name: n.as_str().to_string(),
            setting: if n.strongly_convex() { "strongly_convex" } else { "convex" }.to_string(),
            constant: match mode {
                ConstantMode::Unit => "1",
                ConstantMode::Symbolic => "c",
            }
            .to_string(),
            value: eval_bound(&BoundSpec { name: n, constant_mode: mode }, p).ok(),
            formula: n.formula().to_string(),
        })
        .collect()
}
