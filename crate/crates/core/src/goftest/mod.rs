//! L2 goodness-of-fit test of a constant parameter function against a
//! time-varying alternative.
//!
//! With `theta_hat` the localized and `theta_bar` the global estimate,
//! `T_n = int |theta_hat(t0) - theta_bar|^2 pbar(t0) w(t0) dt0` and
//! `z = (r_n h^{1/2} T_n - h^{-1/2} A_n) / sqrt(B)` is asymptotically standard
//! normal under the null.

mod martingale;

pub use martingale::{variance_b_martingale, MartingaleLimits};

use crate::error::{Error, Result};
use crate::estimate::{fit_global, fit_path, DataView, LocalFit, SigmaPath};
use crate::netcore::DynamicNetwork;
use crate::numeric::quadrature::{trapezoid_weights, uniform_grid};
use crate::numeric::{Kernel, WeightFunction};
use crate::simulate::{CovariateField, EventLog};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest share of `t0` grid points that may lack data before the test fails.
pub const MAX_EXCLUDED_SHARE: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct TestConfig {
    pub h: f64,
    pub kernel: Kernel<f64>,
    pub weight: WeightFunction<f64>,
    /// `t0` grid step is `h / t0_divisor`.
    pub t0_divisor: f64,
    /// Grid step for `Sigma_hat`, `A_n` and `B` is `h / sigma_divisor`.
    pub sigma_divisor: f64,
    /// Fully specified null value used in place of the global estimate `theta_bar`.
    pub reference: Option<DVector<f64>>,
}

impl TestConfig {
    /// Epanechnikov kernel, `delta = h`, ramps of width `h / 2`, grids `h/4` and `h/20`.
    pub fn new(h: f64, horizon: f64) -> Self {
        Self {
            h,
            kernel: Kernel::epanechnikov(),
            weight: WeightFunction::for_bandwidth(h, horizon),
            t0_divisor: 4.0,
            sigma_divisor: 20.0,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestDiagnostics {
    pub min_exposure: f64,
    pub max_sigma_condition: f64,
    pub events: usize,
    pub ignored_events: usize,
    pub max_kantorovich_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub tn: f64,
    pub an: f64,
    pub bhat: f64,
    pub z: f64,
    pub p_value: f64,
    pub r_n: usize,
    pub h: f64,
    pub theta_bar: Vec<f64>,
    pub grid_used: usize,
    pub grid_excluded: usize,
    pub diagnostics: TestDiagnostics,
}

impl TestResult {
    pub fn csv_header() -> &'static str {
        "tn,an,bhat,z,p_value,r_n,h,grid_used,grid_excluded"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.tn, self.an, self.bhat, self.z, self.p_value, self.r_n, self.h, self.grid_used, self.grid_excluded
        )
    }
}

/// One point of the estimated parameter path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPoint {
    pub t0: f64,
    pub theta: Option<Vec<f64>>,
    pub converged: bool,
    pub iters: usize,
    pub weight: f64,
}

/// Standardized value `(r_n h^{1/2} T_n - h^{-1/2} A_n) / sqrt(B)`.
pub fn standardize(r_n: usize, h: f64, tn: f64, an: f64, bhat: f64) -> Result<f64> {
    if !(bhat > 0.0) || !bhat.is_finite() {
        return Err(Error::DegenerateVariance(bhat));
    }
    Ok((r_n as f64 * h.sqrt() * tn - an / h.sqrt()) / bhat.sqrt())
}

/// Two-sided normal p-value `2 (1 - Phi(|z|))`.
pub fn p_value(z: f64) -> f64 {
    let n = Normal::standard();
    (2.0 * n.sf(z.abs())).clamp(0.0, 1.0)
}

/// `T_n` by the trapezoid rule over the grid points that have a fit.
///
/// `fits[k]` is `None` for excluded points. Returns `(T_n, used, excluded)`.
pub fn test_statistic(
    grid: &[f64],
    fits: &[Option<DVector<f64>>],
    pbar: &[f64],
    theta_bar: &DVector<f64>,
    weight: &WeightFunction<f64>,
) -> Result<(f64, usize, usize)> {
    let kept: Vec<usize> = (0..grid.len()).filter(|&k| fits[k].is_some()).collect();
    let excluded = grid.len() - kept.len();
    if grid.is_empty() {
        return Ok((0.0, 0, 0));
    }
    if excluded as f64 > MAX_EXCLUDED_SHARE * grid.len() as f64 {
        return Err(Error::Test(format!(
            "{excluded} of {} t0 grid points have no data in their window",
            grid.len()
        )));
    }
    if excluded > 0 {
        log::warn!("{excluded} t0 grid points without data excluded from T_n");
    }
    let times: Vec<f64> = kept.iter().map(|&k| grid[k]).collect();
    let omega = trapezoid_weights(&times);
    let tn = kept
        .iter()
        .zip(&omega)
        .map(|(&k, om)| {
            let d = fits[k].as_ref().expect("kept") - theta_bar;
            om * d.norm_squared() * pbar[k] * weight.eval(grid[k])
        })
        .sum();
    Ok((tn, kept.len(), excluded))
}

/// `Sigma_hat^{-2} w / pbar` on the grid, where `w > 0`.
fn weighted_inverse_squares(path: &SigmaPath, weight: &WeightFunction<f64>) -> Result<Vec<Option<DMatrix<f64>>>> {
    (0..path.len())
        .map(|k| {
            let w = weight.eval(path.grid[k]);
            if w <= 0.0 {
                return Ok(None);
            }
            if path.pbar[k] <= 0.0 {
                return Err(Error::NoDataInWindow { t0: path.grid[k] });
            }
            Ok(Some(path.inverse_squared(k)? * (w / path.pbar[k])))
        })
        .collect()
}

/// Centering `A_n = (1/r_n) sum_events X(s)^T [ int h K_{h,t}(s)^2 Sigma_t^{-2} w(t)/pbar(t) dt ] X(s)`,
/// with the inner integral by the trapezoid rule over the grid of `path`.
pub fn centering_an(
    view: &DataView,
    path: &SigmaPath,
    h: f64,
    kernel: &Kernel<f64>,
    weight: &WeightFunction<f64>,
) -> Result<f64> {
    let mats = weighted_inverse_squares(path, weight)?;
    let omega = trapezoid_weights(&path.grid);
    let grid = &path.grid;
    let total: f64 = view
        .pairs
        .par_iter()
        .map(|pd| {
            let mut acc = 0.0;
            for (s, x) in &pd.events {
                let lo = grid.partition_point(|&t| t <= s - h);
                for k in lo..grid.len() {
                    let t = grid[k];
                    if t >= s + h {
                        break;
                    }
                    if let Some(m) = &mats[k] {
                        let kv = kernel.at(*s, t, h);
                        acc += omega[k] * h * kv * kv * (x.transpose() * m * x)[(0, 0)];
                    }
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / view.r_n as f64)
}

/// `B = 4 K4 int trace(Sigma_t^{-2}) w(t)^2 dt` by the trapezoid rule.
pub fn variance_b(path: &SigmaPath, weight: &WeightFunction<f64>, k4: f64) -> Result<f64> {
    let omega = trapezoid_weights(&path.grid);
    let mut total = 0.0;
    for (k, om) in omega.iter().enumerate() {
        let w = weight.eval(path.grid[k]);
        if w <= 0.0 {
            continue;
        }
        total += om * path.inverse_squared(k)?.trace() * w * w;
    }
    Ok(4.0 * k4 * total)
}

/// Runs the full test and also returns the estimated path.
pub fn run_test_with_path(
    net: &DynamicNetwork,
    cov: &CovariateField,
    log: &EventLog,
    cfg: &TestConfig,
) -> Result<(TestResult, Vec<PathPoint>)> {
    let h = cfg.h;
    let view = DataView::new(net, cov, log, h)?;
    let theta_bar = match &cfg.reference {
        Some(r) if r.len() == view.q => r.clone(),
        Some(r) => return Err(Error::Config(format!("reference has dimension {}, expected {}", r.len(), view.q))),
        None => fit_global(&view)?.theta,
    };
    let (a, b) = cfg.weight.support();
    if cfg.weight.is_null() || !(b > a) {
        return Err(Error::DegenerateVariance(0.0));
    }
    let grid = uniform_grid(a, b, h / cfg.t0_divisor);
    let fits = fit_path(&view, &grid, h, &cfg.kernel, &theta_bar);
    let mut thetas: Vec<Option<DVector<f64>>> = Vec::with_capacity(grid.len());
    let mut pbar = Vec::with_capacity(grid.len());
    let mut points = Vec::with_capacity(grid.len());
    let mut max_r = 0.0f64;
    for (t0, fit) in grid.iter().zip(fits) {
        let weight = cfg.weight.eval(*t0);
        match fit {
            Ok(LocalFit { theta, exposure, iters, converged, kantorovich_r, .. }) => {
                max_r = max_r.max(kantorovich_r);
                pbar.push(exposure / view.r_n as f64);
                points.push(PathPoint { t0: *t0, theta: Some(theta.iter().copied().collect()), converged, iters, weight });
                thetas.push(Some(theta));
            }
            Err(Error::NoDataInWindow { .. }) => {
                pbar.push(0.0);
                points.push(PathPoint { t0: *t0, theta: None, converged: false, iters: 0, weight });
                thetas.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let (tn, used, excluded) = test_statistic(&grid, &thetas, &pbar, &theta_bar, &cfg.weight)?;
    let fine = uniform_grid(a, b, h / cfg.sigma_divisor);
    let path = SigmaPath::new(&view, &theta_bar, fine, h, &cfg.kernel);
    let an = centering_an(&view, &path, h, &cfg.kernel, &cfg.weight)?;
    let bhat = variance_b(&path, &cfg.weight, cfg.kernel.k4())?;
    let z = standardize(view.r_n, h, tn, an, bhat)?;
    let min_exposure = path.pbar.iter().copied().fold(f64::INFINITY, f64::min) * view.r_n as f64;
    let max_cond = (0..path.len())
        .filter(|&k| cfg.weight.eval(path.grid[k]) > 0.0)
        .map(|k| path.condition(k))
        .fold(0.0, f64::max);
    let result = TestResult {
        tn,
        an,
        bhat,
        z,
        p_value: p_value(z),
        r_n: view.r_n,
        h,
        theta_bar: theta_bar.iter().copied().collect(),
        grid_used: used,
        grid_excluded: excluded,
        diagnostics: TestDiagnostics {
            min_exposure,
            max_sigma_condition: max_cond,
            events: view.event_count(),
            ignored_events: view.excluded_events,
            max_kantorovich_r: max_r,
        },
    };
    Ok((result, points))
}

/// Runs the full test: `theta_bar`, the local fits, `Sigma_hat` at `theta_bar`,
/// then `T_n`, `A_n`, `B`, `z` and the two-sided p-value.
pub fn run_test(net: &DynamicNetwork, cov: &CovariateField, log: &EventLog, cfg: &TestConfig) -> Result<TestResult> {
    run_test_with_path(net, cov, log, cfg).map(|(r, _)| r)
}
