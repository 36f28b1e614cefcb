use super::view::LocalData;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub const MAX_ITERS: usize = 50;
pub const REL_TOL: f64 = 1e-8;

pub struct NewtonResult {
    pub theta: DVector<f64>,
    pub grad: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub iters: usize,
    pub loglik: f64,
}

/// Solves `-H d = g` for the concave objective, failing on a singular Hessian.
fn newton_step(g: &DVector<f64>, hess: &DMatrix<f64>) -> Option<DVector<f64>> {
    let neg = -hess;
    if let Some(ch) = neg.clone().cholesky() {
        return Some(ch.solve(g));
    }
    neg.lu().solve(g)
}

/// Damped Newton ascent on the concave log-likelihood of `data`.
///
/// Steps are halved until the log-likelihood does not decrease; iteration
/// stops once `|grad| <= 1e-8 max(1, exposure)`.
pub fn maximize(data: &LocalData, init: &DVector<f64>) -> Result<NewtonResult> {
    let tol = REL_TOL * data.exposure.max(1.0);
    let mut theta = init.clone();
    let mut ll = data.loglik(&theta);
    if !ll.is_finite() {
        theta = DVector::zeros(init.len());
        ll = data.loglik(&theta);
    }
    for iters in 0..=MAX_ITERS {
        let (g, hess) = data.score_hessian(&theta);
        let gn = g.norm();
        if gn <= tol {
            return Ok(NewtonResult { theta, grad: g, hessian: hess, iters, loglik: ll });
        }
        if iters == MAX_ITERS {
            return Err(Error::NonConvergence { iters, grad_norm: gn, last: theta.iter().copied().collect() });
        }
        let step = newton_step(&g, &hess).ok_or_else(|| Error::Numeric("singular Hessian in Newton step".into()))?;
        let mut scale = 1.0;
        loop {
            let cand = &theta + &step * scale;
            let cll = data.loglik(&cand);
            // near the optimum the change in the log-likelihood drops below its rounding error
            let slack = 64.0 * f64::EPSILON * (1.0 + ll.abs());
            if cll.is_finite() && cll >= ll - slack {
                theta = cand;
                ll = cll;
                break;
            }
            scale *= 0.5;
            if scale < 1e-12 {
                // no ascent possible at machine precision
                return Err(Error::NonConvergence { iters, grad_norm: gn, last: theta.iter().copied().collect() });
            }
        }
    }
    unreachable!()
}
