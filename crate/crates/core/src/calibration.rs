//! Monte-Carlo harness for the size, power and variance checks of the test.

use crate::error::{Error, Result};
use crate::estimate::{fit_global, DataView, SigmaPath};
use crate::goftest::{run_test, variance_b, variance_b_martingale, MartingaleLimits, TestConfig, TestResult};
use crate::netcore::{DynamicNetwork, Pair};
use crate::numeric::quadrature::uniform_grid;
use crate::simulate::rng::{self, domain};
use crate::simulate::{simulate_cox, CovariateField, EventLog, ParameterPath};
use nalgebra::{dvector, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Static Erdos-Renyi network with `X_ij = (1, x_ij)`, `x_ij ~ U(-1, 1)`, and
/// `theta_0(t) = (intercept + amplitude sin(2 pi t / T), slope)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub edge_prob: f64,
    pub horizon: f64,
    pub h: f64,
    pub intercept: f64,
    pub slope: f64,
    /// Zero under the null.
    pub amplitude: f64,
}

impl Scenario {
    pub fn null(n: usize) -> Self {
        Self { n, edge_prob: 0.3, horizon: 1.0, h: 0.25, intercept: 2.0, slope: 0.5, amplitude: 0.0 }
    }

    pub fn alternative(n: usize, amplitude: f64) -> Self {
        Self { amplitude, ..Self::null(n) }
    }

    pub fn parameter_path(&self) -> Result<ParameterPath> {
        if self.amplitude == 0.0 {
            return Ok(ParameterPath::constant(dvector![self.intercept, self.slope], self.horizon));
        }
        let grid = uniform_grid(0.0, self.horizon, self.horizon / 400.0);
        let (c, a, b, big_t) = (self.intercept, self.amplitude, self.slope, self.horizon);
        ParameterPath::from_fn(grid, |t| dvector![c + a * (2.0 * std::f64::consts::PI * t / big_t).sin(), b])
    }

    /// Draws network, covariates and events of one replication.
    pub fn draw(&self, seed: u64) -> Result<(DynamicNetwork, CovariateField, EventLog)> {
        let mut edges = Vec::new();
        let mut values = BTreeMap::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let p = Pair::new(i, j);
                let mut r = rng::stream(seed, domain::SCENARIO, p.key());
                if r.random::<f64>() < self.edge_prob {
                    edges.push(p);
                    let mut rx = rng::stream(seed, domain::SCENARIO_COVARIATE, p.key());
                    values.insert(p, dvector![1.0, rx.random_range(-1.0..1.0)]);
                }
            }
        }
        let net = DynamicNetwork::static_network(self.n, false, self.horizon, edges)?;
        let cov = CovariateField::static_per_pair(2, values)?;
        let log = simulate_cox(&net, &cov, &self.parameter_path()?, seed)?;
        Ok((net, cov, log))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub reps: usize,
    pub level: f64,
    pub rejections: usize,
    pub failures: usize,
    pub rejection_rate: f64,
    pub mean_z: f64,
    pub sd_z: f64,
    pub results: Vec<Option<TestResult>>,
}

/// Runs the test on `reps` independent replications and counts two-sided
/// rejections at `level`. Failed replications count as non-rejections and are
/// reported separately.
pub fn run_calibration(scenario: &Scenario, reps: usize, level: f64, seed: u64) -> Result<CalibrationSummary> {
    if reps == 0 {
        return Err(Error::Config("at least one replication is needed".into()));
    }
    let results: Vec<Option<TestResult>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let s = rng::replication_seed(seed, rep);
            let out = scenario.draw(s).and_then(|(net, cov, log)| run_test(&net, &cov, &log, &TestConfig::new(scenario.h, scenario.horizon)));
            match out {
                Ok(r) => Some(r),
                Err(e) => {
                    log::warn!("replication {rep} failed: {e}");
                    None
                }
            }
        })
        .collect();
    let zs: Vec<f64> = results.iter().flatten().map(|r| r.z).collect();
    let rejections = results.iter().flatten().filter(|r| r.p_value < level).count();
    let failures = reps - zs.len();
    let mean = zs.iter().sum::<f64>() / zs.len().max(1) as f64;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (zs.len().max(2) - 1) as f64;
    Ok(CalibrationSummary {
        reps,
        level,
        rejections,
        failures,
        rejection_rate: rejections as f64 / reps as f64,
        mean_z: mean,
        sd_z: var.sqrt(),
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCheck {
    pub reps: usize,
    pub mean_b: f64,
    pub mean_b_martingale: f64,
    pub relative_gap: f64,
    pub per_rep: Vec<(f64, f64)>,
}

/// Compares the plug-in `B` with its martingale-based counterpart over replications.
pub fn run_variance_check(scenario: &Scenario, reps: usize, seed: u64) -> Result<VarianceCheck> {
    let per_rep: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let s = rng::replication_seed(seed, rep);
            let (net, cov, log) = scenario.draw(s)?;
            let cfg = TestConfig::new(scenario.h, scenario.horizon);
            let view = DataView::new(&net, &cov, &log, cfg.h)?;
            let theta_bar: DVector<f64> = fit_global(&view)?.theta;
            let (a, b) = cfg.weight.support();
            let grid = uniform_grid(a, b, cfg.h / cfg.sigma_divisor);
            let path = SigmaPath::new(&view, &theta_bar, grid, cfg.h, &cfg.kernel);
            let bhat = variance_b(&path, &cfg.weight, cfg.kernel.k4())?;
            let alt = variance_b_martingale(&view, &path, &theta_bar, cfg.h, &cfg.kernel, &cfg.weight, MartingaleLimits::default())?;
            Ok((bhat, alt))
        })
        .collect::<Result<_>>()?;
    let n = per_rep.len().max(1) as f64;
    let mean_b = per_rep.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_alt = per_rep.iter().map(|p| p.1).sum::<f64>() / n;
    Ok(VarianceCheck { reps, mean_b, mean_b_martingale: mean_alt, relative_gap: (mean_alt - mean_b).abs() / mean_b, per_rep })
}
