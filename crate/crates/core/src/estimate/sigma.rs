use super::view::DataView;
use crate::error::{Error, Result};
use crate::netcore::DynamicNetwork;
use crate::numeric::Kernel;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// `Sigma_hat(t, theta) = - sum int K_{h,t} C X X^T exp(theta^T X) / sum int K_{h,t} C`.
pub fn sigma_hat(view: &DataView, theta: &DVector<f64>, t: f64, h: f64, kernel: &Kernel<f64>) -> Result<DMatrix<f64>> {
    let data = view.local(t, h, kernel);
    if data.exposure <= 0.0 {
        return Err(Error::NoDataInWindow { t0: t });
    }
    let (_, hess) = data.score_hessian(theta);
    let s = hess / data.exposure;
    Ok((&s + s.transpose()) * 0.5)
}

/// Smoothed connectivity `pbar_hat(t0) = int K_{h,t0}(s) (1/r_n) sum C_ij(s) ds`,
/// exact through the kernel's distribution function.
pub fn pbar_hat(net: &DynamicNetwork, t0: f64, h: f64, kernel: &Kernel<f64>) -> f64 {
    let r_n = net.pair_count() as f64;
    let total: f64 = net
        .activity()
        .map(|(_, ivs)| ivs.iter().map(|iv| kernel.window_integral(iv.start, iv.end, t0, h)).sum::<f64>())
        .sum();
    total / r_n
}

/// `pbar_hat` from a data view (same value, no network needed).
pub fn pbar_from_view(view: &DataView, t0: f64, h: f64, kernel: &Kernel<f64>) -> f64 {
    view.local(t0, h, kernel).exposure / view.r_n as f64
}

/// `Sigma_hat` on a time grid with cached inverses.
#[derive(Debug, Clone)]
pub struct SigmaPath {
    pub grid: Vec<f64>,
    pub sigma: Vec<DMatrix<f64>>,
    /// `Sigma_hat^{-1}` where invertible.
    pub inverse: Vec<Option<DMatrix<f64>>>,
    pub pbar: Vec<f64>,
}

impl SigmaPath {
    /// Evaluates `Sigma_hat(t, theta)` and `pbar_hat(t)` at every grid point.
    /// Points without exposure get a zero matrix and no inverse.
    pub fn new(view: &DataView, theta: &DVector<f64>, grid: Vec<f64>, h: f64, kernel: &Kernel<f64>) -> Self {
        let q = theta.len();
        let rows: Vec<(DMatrix<f64>, Option<DMatrix<f64>>, f64)> = grid
            .par_iter()
            .map(|&t| {
                let data = view.local(t, h, kernel);
                let pbar = data.exposure / view.r_n as f64;
                if data.exposure <= 0.0 {
                    return (DMatrix::zeros(q, q), None, pbar);
                }
                let (_, hess) = data.score_hessian(theta);
                let s = hess / data.exposure;
                let s = (&s + s.transpose()) * 0.5;
                let inv = invert(&s);
                (s, inv, pbar)
            })
            .collect();
        let mut sigma = Vec::with_capacity(rows.len());
        let mut inverse = Vec::with_capacity(rows.len());
        let mut pbar = Vec::with_capacity(rows.len());
        for (s, i, p) in rows {
            sigma.push(s);
            inverse.push(i);
            pbar.push(p);
        }
        Self { grid, sigma, inverse, pbar }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `Sigma_hat^{-2}` at grid index `k`, or a singular-Sigma error.
    pub fn inverse_squared(&self, k: usize) -> Result<DMatrix<f64>> {
        let inv = self.inverse[k].as_ref().ok_or(Error::SingularSigma { t: self.grid[k] })?;
        Ok(inv * inv)
    }

    /// Condition number of `Sigma_hat` at grid index `k` (infinite when singular).
    pub fn condition(&self, k: usize) -> f64 {
        let sv = self.sigma[k].clone().singular_values();
        let (mx, mn) = (sv.max(), sv.min());
        if mn > 0.0 {
            mx / mn
        } else {
            f64::INFINITY
        }
    }
}

/// Inverse of a negative definite matrix, `None` when it is numerically singular.
fn invert(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let neg = -s;
    let ch = neg.clone().cholesky()?;
    let sv = neg.singular_values();
    if sv.min() <= 1e-12 * sv.max() {
        return None;
    }
    Some(-ch.inverse())
}
