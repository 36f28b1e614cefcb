use super::newton::{maximize, MAX_ITERS};
use super::view::DataView;
use crate::error::{Error, Result};
use crate::numeric::Kernel;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct LocalFit {
    pub t0: f64,
    pub h: f64,
    pub theta: DVector<f64>,
    pub grad_norm: f64,
    pub hessian: DMatrix<f64>,
    pub iters: usize,
    pub converged: bool,
    /// Newton-Kantorovich quantity `r = B K eta` at the initial value.
    pub kantorovich_r: f64,
    pub loglik: f64,
    /// `r_n * pbar_hat(t0)`.
    pub exposure: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalFit {
    pub theta: DVector<f64>,
    pub grad_norm: f64,
    pub iters: usize,
    pub loglik: f64,
}

/// Localized log-likelihood
/// `sum_ij [ int K_{h,t0} theta^T X dN - int K_{h,t0} C exp(theta^T X) dt ]`.
pub fn local_loglik(view: &DataView, theta: &DVector<f64>, t0: f64, h: f64, kernel: &Kernel<f64>) -> f64 {
    view.local(t0, h, kernel).loglik(theta)
}

/// Gradient and Hessian of [`local_loglik`] in `theta`.
pub fn local_score_hessian(
    view: &DataView,
    theta: &DVector<f64>,
    t0: f64,
    h: f64,
    kernel: &Kernel<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    view.local(t0, h, kernel).score_hessian(theta)
}

fn check_t0(view: &DataView, t0: f64, h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("bandwidth h={h} must be positive")));
    }
    if t0 < h - 1e-12 || t0 > view.horizon - h + 1e-12 {
        return Err(Error::Domain(format!("t0={t0} outside [h, T-h] = [{h}, {}]", view.horizon - h)));
    }
    Ok(())
}

/// Maximizes the localized likelihood at `t0` by damped Newton from `init`.
pub fn fit_local(view: &DataView, t0: f64, h: f64, kernel: &Kernel<f64>, init: &DVector<f64>) -> Result<LocalFit> {
    check_t0(view, t0, h)?;
    let data = view.local(t0, h, kernel);
    if data.exposure <= 0.0 || data.atoms.is_empty() {
        return Err(Error::NoDataInWindow { t0 });
    }
    let (g0, h0) = data.score_hessian(init);
    let kantorovich_r = match (-&h0).try_inverse() {
        Some(inv) => {
            // normalized score R = score / exposure
            let b = inv.clone().singular_values().max() * data.exposure;
            let eta = (&inv * &g0).norm();
            let kx = data.covariate_bound();
            let tau = init.norm() + 2.0 * eta;
            let k = kx.powi(3) * (tau * kx).exp();
            b * k * eta
        }
        None => f64::INFINITY,
    };
    let res = maximize(&data, init)?;
    Ok(LocalFit {
        t0,
        h,
        grad_norm: res.grad.norm(),
        theta: res.theta,
        hessian: res.hessian,
        iters: res.iters,
        converged: res.iters <= MAX_ITERS,
        kantorovich_r,
        loglik: res.loglik,
        exposure: data.exposure,
    })
}

/// Local fits on a grid of `t0` values, run in parallel, each started at `init`
/// and retried from zero if that fails.
pub fn fit_path(view: &DataView, grid: &[f64], h: f64, kernel: &Kernel<f64>, init: &DVector<f64>) -> Vec<Result<LocalFit>> {
    grid.par_iter()
        .map(|&t0| match fit_local(view, t0, h, kernel, init) {
            Err(Error::NonConvergence { .. }) | Err(Error::Numeric(_)) => {
                fit_local(view, t0, h, kernel, &DVector::zeros(init.len()))
            }
            other => other,
        })
        .collect()
}

/// Unkernelized maximum likelihood estimate `theta_bar`.
pub fn fit_global(view: &DataView) -> Result<GlobalFit> {
    if view.event_count() == 0 {
        return Err(Error::Data("global fit needs at least one event".into()));
    }
    let data = view.global();
    if data.atoms.is_empty() {
        return Err(Error::NoDataInWindow { t0: f64::NAN });
    }
    let res = maximize(&data, &DVector::zeros(view.q))?;
    Ok(GlobalFit { grad_norm: res.grad.norm(), theta: res.theta, iters: res.iters, loglik: res.loglik })
}
