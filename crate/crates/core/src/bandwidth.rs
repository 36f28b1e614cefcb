//! Bandwidth choice by out-of-sample prediction of per-pair event counts.
//!
//! For a window start `t*`, a locally linear parameter `theta(t) = a + b (t - t*)`
//! is fitted with the one-sided kernel `K~(u) = 1/2 on [-2, 0]`, i.e. on
//! `[t* - 2h, t*)`, and extrapolated to predict counts on `[t*, t* + dpred)`.

use crate::error::{Error, Result};
use crate::estimate::{DataView, LocalData};
use crate::netcore::DynamicNetwork;
use crate::numeric::quadrature::{exp_linear_integral, trapezoid_weights, uniform_grid};
use crate::simulate::{CovariateField, EventLog};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

/// Conversion factor from the prediction-optimal to the testing bandwidth.
pub const RHO: f64 = 1.82;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionConfig {
    /// Window length as a multiple of `h`.
    pub window_factor: f64,
    /// Windows tile `[start_fraction * T, T]`.
    pub start_fraction: f64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self { window_factor: 0.5, start_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthCurve {
    pub h_grid: Vec<f64>,
    pub error: Vec<f64>,
    pub h_star: f64,
    pub h_converted: f64,
}

impl BandwidthCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,error\n");
        for (h, e) in self.h_grid.iter().zip(&self.error) {
            s.push_str(&format!("{h},{e}\n"));
        }
        s
    }
}

/// Locally linear one-sided fit at `t*`; parameters are stacked as `(a, b)`.
fn fit_one_sided(view: &DataView, t_star: f64, h: f64) -> Result<DVector<f64>> {
    let q = view.q;
    let (lo, hi) = ((t_star - 2.0 * h).max(0.0), t_star);
    let kval = 0.5 / h;
    let mut event_sum = DVector::zeros(2 * q);
    let mut atoms = Vec::new();
    let mut exposure = 0.0;
    let mut events = 0usize;
    let lift = |x: &DVector<f64>, u: f64| {
        let mut z = DVector::zeros(2 * q);
        z.rows_mut(0, q).copy_from(x);
        z.rows_mut(q, q).copy_from(&(x * u));
        z
    };
    for pd in &view.pairs {
        for pc in &pd.pieces {
            let (a, b) = (pc.start.max(lo), pc.end.min(hi));
            if b <= a {
                continue;
            }
            let nodes = uniform_grid(a, b, h / 20.0);
            let w = trapezoid_weights(&nodes);
            for (s, ws) in nodes.iter().zip(w) {
                exposure += ws * kval;
                atoms.push((ws * kval, lift(&pc.x, s - t_star)));
            }
        }
        for (s, x) in &pd.events {
            if *s >= lo && *s < hi {
                event_sum.axpy(kval, &lift(x, s - t_star), 1.0);
                events += 1;
            }
        }
    }
    if events == 0 || atoms.is_empty() {
        return Err(Error::NoDataInWindow { t0: t_star });
    }
    let data = LocalData { t0: t_star, h, event_sum, atoms, exposure };
    crate::estimate::maximize_local(&data, &DVector::zeros(2 * q))
}

/// Mean squared error of predicted per-pair counts, averaged over the pairs
/// active in each prediction window and then over windows. Windows without
/// past events or with a failed fit are skipped.
pub fn prediction_error(
    net: &DynamicNetwork,
    cov: &CovariateField,
    log: &EventLog,
    h: f64,
    cfg: &PredictionConfig,
) -> Result<f64> {
    let view = DataView::new(net, cov, log, h)?;
    prediction_error_view(&view, log, h, cfg)
}

fn prediction_error_view(view: &DataView, log: &EventLog, h: f64, cfg: &PredictionConfig) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("bandwidth h={h} must be positive")));
    }
    let len = cfg.window_factor * h;
    let horizon = view.horizon;
    let mut starts = Vec::new();
    let mut t = cfg.start_fraction * horizon;
    while t + len <= horizon * (1.0 + 1e-12) {
        starts.push(t);
        t += len;
    }
    let q = view.q;
    let per_window: Vec<Option<f64>> = starts
        .par_iter()
        .map(|&t_star| {
            let theta = match fit_one_sided(view, t_star, h) {
                Ok(th) => th,
                Err(e) => {
                    log::debug!("window at {t_star} skipped: {e}");
                    return None;
                }
            };
            let (a, b) = (theta.rows(0, q).into_owned(), theta.rows(q, q).into_owned());
            let end = t_star + len;
            let mut sq = 0.0;
            let mut active = 0usize;
            for pd in &view.pairs {
                let mut predicted = 0.0;
                let mut seen = false;
                for pc in &pd.pieces {
                    let (lo, hi) = (pc.start.max(t_star), pc.end.min(end));
                    if hi <= lo {
                        continue;
                    }
                    seen = true;
                    let beta = b.dot(&pc.x);
                    predicted += exp_linear_integral(a.dot(&pc.x) + beta * (lo - t_star), beta, hi - lo);
                }
                if seen {
                    let observed = log.count_in(pd.pair, t_star, end) as f64;
                    sq += (predicted - observed).powi(2);
                    active += 1;
                }
            }
            (active > 0).then(|| sq / active as f64)
        })
        .collect();
    let used: Vec<f64> = per_window.into_iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::Data(format!("no usable prediction window for h={h}")));
    }
    Ok(used.iter().sum::<f64>() / used.len() as f64)
}

/// `h*` minimizes the error (ties go to the smaller `h`); `h_converted = h* / RHO`.
pub fn select_bandwidth(h_grid: &[f64], error: &[f64]) -> Result<BandwidthCurve> {
    if h_grid.len() != error.len() || h_grid.is_empty() {
        return Err(Error::Config("bandwidth grid and errors must be nonempty and of equal length".into()));
    }
    let mut order: Vec<usize> = (0..h_grid.len()).collect();
    order.sort_by(|&i, &j| h_grid[i].total_cmp(&h_grid[j]));
    let mut best = order[0];
    for &k in &order[1..] {
        if error[k] < error[best] {
            best = k;
        }
    }
    let h_star = h_grid[best];
    Ok(BandwidthCurve { h_grid: h_grid.to_vec(), error: error.to_vec(), h_star, h_converted: h_star / RHO })
}

/// Prediction error over a bandwidth grid (in parallel) and the selected bandwidth.
pub fn bandwidth_curve(
    net: &DynamicNetwork,
    cov: &CovariateField,
    log: &EventLog,
    h_grid: &[f64],
    cfg: &PredictionConfig,
) -> Result<BandwidthCurve> {
    let errors: Vec<f64> = h_grid
        .par_iter()
        .map(|&h| prediction_error(net, cov, log, h, cfg))
        .collect::<Result<_>>()?;
    select_bandwidth(h_grid, &errors)
}
