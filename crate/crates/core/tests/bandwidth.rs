mod common;

use approx::assert_relative_eq;
use nalgebra::dvector;
use netcox::bandwidth::{bandwidth_curve, prediction_error, select_bandwidth, PredictionConfig, RHO};
use netcox::simulate::simulate_cox;
use netcox::{CovariateField, DynamicNetwork, Pair, ParameterPath};
use proptest::prelude::*;

fn complete(n: usize, horizon: f64) -> DynamicNetwork {
    DynamicNetwork::static_network(n, false, horizon, (0..n).flat_map(|i| (i + 1..n).map(move |j| Pair::new(i, j))))
        .unwrap()
}

#[test]
fn reported_grid_gives_reported_bandwidths() {
    let c = select_bandwidth(&[0.5, 1.1, 2.0], &[5.0, 3.0, 4.0]).unwrap();
    assert_eq!(c.h_star, 1.1);
    assert!((c.h_converted - 0.604).abs() < 5e-4);
}

#[test]
fn flat_curve_and_single_dip() {
    assert_eq!(select_bandwidth(&[0.3, 0.1, 0.2], &[2.0, 2.0, 2.0]).unwrap().h_star, 0.1);
    let grid: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    let err: Vec<f64> = grid.iter().map(|h| if (h - 0.6).abs() < 1e-9 { 0.5 } else { 1.0 }).collect();
    assert_eq!(select_bandwidth(&grid, &err).unwrap().h_star, grid[5]);
    assert!(select_bandwidth(&[0.1, 0.2], &[1.0]).is_err());
    assert!(select_bandwidth(&[], &[]).is_err());
}

#[test]
fn constant_rate_error_is_poisson_variance() {
    // with the rate well estimated, E (N - lambda L)^2 = lambda L
    let net = complete(30, 10.0);
    let cov = CovariateField::constant(dvector![1.0]);
    let rate: f64 = 2.0;
    let path = ParameterPath::constant(dvector![rate.ln()], 10.0);
    let h = 2.0;
    let cfg = PredictionConfig::default();
    let errs: Vec<f64> = (0..4)
        .map(|seed| {
            let log = simulate_cox(&net, &cov, &path, 500 + seed).unwrap();
            prediction_error(&net, &cov, &log, h, &cfg).unwrap()
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    let variance = rate * cfg.window_factor * h;
    assert!((mean - variance).abs() <= 0.08 * variance, "{errs:?}");
}

#[test]
fn tiny_bandwidth_on_sparse_data_is_worse() {
    let net = complete(12, 10.0);
    let cov = CovariateField::constant(dvector![1.0]);
    let path = ParameterPath::constant(dvector![0.0], 10.0);
    let log = simulate_cox(&net, &cov, &path, 77).unwrap();
    let cfg = PredictionConfig::default();
    let errs: Vec<f64> = [2.0, 0.5, 0.1].iter().map(|&h| prediction_error(&net, &cov, &log, h, &cfg).unwrap()).collect();
    // the error is normalized by the window length, which shrinks with h
    let per_time: Vec<f64> = errs.iter().zip([2.0, 0.5, 0.1]).map(|(e, h)| e / (cfg.window_factor * h)).collect();
    assert!(per_time[0] < per_time[1] && per_time[1] < per_time[2], "{per_time:?}");
}

#[test]
fn periodic_intensity_gives_interior_minimum() {
    let horizon = 40.0;
    let net = complete(20, horizon);
    let cov = CovariateField::constant(dvector![1.0]);
    let grid: Vec<f64> = (0..=4000).map(|k| k as f64 * horizon / 4000.0).collect();
    let path =
        ParameterPath::from_fn(grid, |t| dvector![1.5 * (2.0 * std::f64::consts::PI * t / 8.0).sin()]).unwrap();
    let log = simulate_cox(&net, &cov, &path, 3).unwrap();
    // compare at a common window length so the errors are on one scale
    let hs = [0.1, 0.5, 4.0];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let cfg = PredictionConfig { window_factor: 0.25 / h, start_fraction: 0.5 };
            prediction_error(&net, &cov, &log, h, &cfg).unwrap()
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[1] < errs[2], "{errs:?}");
}

#[test]
fn error_is_invariant_under_relabeling() {
    let inst = common::random_instance(8, 8, 2, 4.0);
    let perm = [3, 1, 4, 0, 7, 5, 2, 6];
    let net = inst.net.relabeled(&perm).unwrap();
    let cov = inst.cov.relabeled(&perm);
    let log = inst.log.relabeled(&perm, false);
    let cfg = PredictionConfig::default();
    for h in [0.3, 0.8] {
        let a = prediction_error(&inst.net, &inst.cov, &inst.log, h, &cfg).unwrap();
        let b = prediction_error(&net, &cov, &log, h, &cfg).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }
}

#[test]
fn curve_selects_its_minimum() {
    let inst = common::random_instance(14, 8, 2, 4.0);
    let grid = [0.2, 0.4, 0.8];
    let c = bandwidth_curve(&inst.net, &inst.cov, &inst.log, &grid, &PredictionConfig::default()).unwrap();
    assert_eq!(c.error.len(), 3);
    assert!(c.error.iter().all(|e| e.is_finite()));
    let best = c.error.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(c.error[grid.iter().position(|&h| h == c.h_star).unwrap()], best);
    assert!(c.to_csv().starts_with("h,error\n"));
    assert!(prediction_error(&inst.net, &inst.cov, &inst.log, 0.0, &PredictionConfig::default()).is_err());
}

proptest! {
    #[test]
    fn converted_bandwidth_times_rho_is_h_star(errs in prop::collection::vec(0.0f64..10.0, 3..12)) {
        let grid: Vec<f64> = (0..errs.len()).map(|k| 0.05 + 0.1 * k as f64).collect();
        let c = select_bandwidth(&grid, &errs).unwrap();
        prop_assert_eq!(c.h_converted, c.h_star / RHO);
        prop_assert!((c.h_converted * RHO - c.h_star).abs() <= 4.0 * f64::EPSILON * c.h_star);
        let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let first = errs.iter().position(|&e| e == min).unwrap();
        prop_assert_eq!(c.h_star, grid[first]);
    }
}
