//! Damped Newton's method for the machine-averaged logistic objective.

use nalgebra::DVector;

use super::logistic::LogisticObjective;
use crate::error::{Error, Result};
use crate::objective::{average_gradient, DistributedObjective};

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
}

pub const NEWTON_MAX_ITERATIONS: usize = 200;
const SINGULAR_RIDGE: f64 = 1e-8;

/// Minimizes F = (1/M) sum_m F_m from 0 until |grad F| <= tol. Steps are
/// damped by Armijo backtracking; a 1e-8 ridge is added to the Hessian only
/// when its Cholesky factorization fails.
pub fn newton_minimize(obj: &LogisticObjective, tol: f64) -> Result<NewtonResult> {
    let d = obj.dim();
    let mut x = vec![0.0; d];
    let mut f = obj.value(&x);
    let mut grad_norm = f64::INFINITY;
    for it in 0..NEWTON_MAX_ITERATIONS {
        let g = average_gradient(obj, &x)?;
        grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad_norm <= tol {
            return Ok(NewtonResult {
                x,
                grad_norm,
                iterations: it,
            });
        }
        let mut hess = obj.hessian(&x);
        let gv = DVector::from_column_slice(&g);
        let chol = match hess.clone().cholesky() {
            Some(c) => c,
            None => {
                for j in 0..d {
                    hess[(j, j)] += SINGULAR_RIDGE;
                }
                hess.cholesky()
                    .ok_or_else(|| Error::Numeric("Hessian is not positive definite".into()))?
            }
        };
        let step = chol.solve(&gv);
        let slope = -gv.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; d];
        for _ in 0..60 {
            for j in 0..d {
                trial[j] = x[j] - t * step[j];
            }
            let ft = obj.value(&trial);
            if ft <= f + 1e-4 * t * slope {
                accepted = true;
                f = ft;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no decrease representable in floating point: take the full
            // step if it does not increase the gradient, else stop
            for j in 0..d {
                trial[j] = x[j] - step[j];
            }
            let gn = average_gradient(obj, &trial)?
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if gn >= grad_norm {
                break;
            }
            f = obj.value(&trial);
        }
        std::mem::swap(&mut x, &mut trial);
    }
    let g = average_gradient(obj, &x)?;
    let final_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if final_norm <= tol {
        return Ok(NewtonResult {
            x,
            grad_norm: final_norm,
            iterations: NEWTON_MAX_ITERATIONS,
        });
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITERATIONS,
        grad_norm: final_norm.min(grad_norm),
    })
}
