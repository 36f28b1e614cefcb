//! Localized and global maximum likelihood for the Cox-type intensity
//! `C exp(theta(t)^T X)`, the `Sigma` plug-in and smoothed connectivity.

mod local;
mod newton;
mod sigma;
mod view;

pub use local::{fit_global, fit_local, fit_path, local_loglik, local_score_hessian, GlobalFit, LocalFit};
pub use sigma::{pbar_from_view, pbar_hat, sigma_hat, SigmaPath};
pub use view::{DataView, LocalData, PairData, Piece};

use crate::numeric::Kernel;

/// `K4 = int_0^2 ( int K(v) K(u+v) dv )^2 du` for the given kernel.
pub fn k4_constant(kernel: &Kernel<f64>) -> f64 {
    kernel.k4()
}

/// Damped Newton maximization of prebuilt local statistics; returns the maximizer.
pub fn maximize_local(data: &LocalData, init: &nalgebra::DVector<f64>) -> crate::Result<nalgebra::DVector<f64>> {
    newton::maximize(data, init).map(|r| r.theta)
}
