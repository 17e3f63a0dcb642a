//! Problem families: the two adversarial constructions, a generic quadratic
//! suite, and a declarative description that harness configs refer to.

pub mod chain;
pub mod local_lb;
pub mod quadratic;

use serde::{Deserialize, Serialize};

pub use chain::{build_chain, chain_residual_lower_bound, ChainInstance, ChainParams};
pub use local_lb::{build_local_lb, closed_form_x4_trajectory, LocalLbInstance, LocalLbParams, Scale};
pub use quadratic::{build_quadratic, QuadraticInstance, QuadraticParams};

use crate::error::Result;
use crate::logreg::LogisticSpec;
use crate::objective::DistributedObjective;

/// JSON description of a problem instance: a family tag plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceSpec {
    LocalLb(LocalLbParams),
    Chain(ChainParams),
    Quadratic(QuadraticParams),
    Logistic(LogisticSpec),
}

impl InstanceSpec {
    pub fn family(&self) -> &'static str {
        match self {
            InstanceSpec::LocalLb(_) => "local_lb",
            InstanceSpec::Chain(_) => "chain",
            InstanceSpec::Quadratic(_) => "quadratic",
            InstanceSpec::Logistic(_) => "logistic",
        }
    }

    pub fn machines(&self) -> usize {
        match self {
            InstanceSpec::LocalLb(p) => p.machines,
            InstanceSpec::Chain(p) => p.machines,
            InstanceSpec::Quadratic(p) => p.machines,
            InstanceSpec::Logistic(_) => crate::logreg::TASKS,
        }
    }

    pub fn build(&self) -> Result<Box<dyn DistributedObjective>> {
        Ok(match self {
            InstanceSpec::LocalLb(p) => Box::new(build_local_lb(p.clone())?),
            InstanceSpec::Chain(p) => Box::new(build_chain(p.clone())?),
            InstanceSpec::Quadratic(p) => Box::new(build_quadratic(p)?),
            InstanceSpec::Logistic(s) => Box::new(s.build()?),
        })
    }

    /// Copy of this spec with the machine count replaced, for geometry sweeps.
    pub fn with_machines(&self, machines: usize) -> InstanceSpec {
        let mut s = self.clone();
        match &mut s {
            InstanceSpec::LocalLb(p) => p.machines = machines,
            InstanceSpec::Chain(p) => p.machines = machines,
            InstanceSpec::Quadratic(p) => p.machines = machines,
            InstanceSpec::Logistic(_) => {}
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trips_through_json() {
        let spec = InstanceSpec::LocalLb(LocalLbParams {
            machines: 2,
            smoothness: 16.0,
            strong_convexity: 1.0,
            mu: 1.0,
            curvature: 8.0,
            zeta: 1.0,
            sigma: 0.0,
            scale: Scale::Gap(1.0),
        });
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"local_lb\""));
        let back: InstanceSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
