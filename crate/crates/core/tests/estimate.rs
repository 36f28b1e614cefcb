mod common;

use approx::assert_relative_eq;
use nalgebra::{dvector, DMatrix, DVector};
use netcox::estimate::{
    fit_global, fit_local, local_loglik, local_score_hessian, pbar_hat, sigma_hat, DataView, SigmaPath,
};
use netcox::simulate::simulate_cox;
use netcox::{CovariateField, DynamicNetwork, Error, EventLog, Kernel, Pair, ParameterPath};
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeMap;

fn complete(n: usize, horizon: f64) -> DynamicNetwork {
    DynamicNetwork::static_network(n, false, horizon, (0..n).flat_map(|i| (i + 1..n).map(move |j| Pair::new(i, j))))
        .unwrap()
}

fn one_pair(times: &[f64]) -> (DynamicNetwork, CovariateField, EventLog) {
    let net = complete(2, 1.0);
    let mut log = EventLog::new(1.0);
    log.set_times(Pair::new(0, 1), times.to_vec()).unwrap();
    (net, CovariateField::constant(dvector![1.0]), log)
}

#[test]
fn loglik_at_zero_is_minus_exposure() {
    let inst = common::random_instance(3, 8, 2, 1.0);
    let k = Kernel::epanechnikov();
    let view = DataView::new(&inst.net, &inst.cov, &inst.log, 0.2).unwrap();
    for t0 in [0.2, 0.45, 0.8] {
        let ll = local_loglik(&view, &DVector::zeros(2), t0, 0.2, &k);
        let expected = -(view.r_n as f64) * pbar_hat(&inst.net, t0, 0.2, &k);
        assert_relative_eq!(ll, expected, max_relative = 1e-12);
    }
}

#[test]
fn single_event_term() {
    let (net, cov, log) = one_pair(&[0.5]);
    let view = DataView::new(&net, &cov, &log, 0.2).unwrap();
    let k = Kernel::epanechnikov();
    let theta = 0.7;
    let ll = local_loglik(&view, &dvector![theta], 0.5, 0.2, &k);
    // K(0) = 3/4 and the kernel integrates to one over the window
    assert_relative_eq!(ll, 0.75 / 0.2 * theta - theta.exp(), max_relative = 1e-12);
}

#[test]
fn score_and_hessian_match_finite_differences() {
    let k = Kernel::epanechnikov();
    for seed in 0..20 {
        let inst = common::random_instance(100 + seed, 7, 3, 1.0);
        let view = DataView::new(&inst.net, &inst.cov, &inst.log, 0.25).unwrap();
        let mut r = common::rng(seed);
        let theta = DVector::from_fn(3, |_, _| r.random_range(-1.0..1.0));
        let t0 = r.random_range(0.25..0.75);
        let (g, hess) = local_score_hessian(&view, &theta, t0, 0.25, &k);
        let eps = 1e-4;
        let mut fd_g = DVector::zeros(3);
        let mut fd_h = DMatrix::zeros(3, 3);
        for a in 0..3 {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[a] += eps;
            dn[a] -= eps;
            fd_g[a] = (local_loglik(&view, &up, t0, 0.25, &k) - local_loglik(&view, &dn, t0, 0.25, &k)) / (2.0 * eps);
            let col = (local_score_hessian(&view, &up, t0, 0.25, &k).0 - local_score_hessian(&view, &dn, t0, 0.25, &k).0)
                / (2.0 * eps);
            fd_h.set_column(a, &col);
        }
        assert!((&g - &fd_g).norm() <= 1e-6 * g.norm().max(1.0), "seed {seed}");
        assert!((&hess - &fd_h).norm() <= 1e-6 * hess.norm().max(1.0), "seed {seed}");
        assert!(hess.symmetric_eigenvalues().max() <= 1e-9 * hess.norm());
    }
}

#[test]
fn empty_window_has_zero_score_and_no_fit() {
    let mut net = DynamicNetwork::new(3, false, 1.0).unwrap();
    net.add_interval(Pair::new(0, 1), 0.0, 0.3).unwrap();
    let mut log = EventLog::new(1.0);
    log.push(Pair::new(0, 1), 0.1).unwrap();
    let cov = CovariateField::constant(dvector![1.0, 0.5]);
    let view = DataView::new(&net, &cov, &log, 0.2).unwrap();
    let k = Kernel::epanechnikov();
    let (g, hess) = local_score_hessian(&view, &dvector![0.3, -0.2], 0.7, 0.2, &k);
    assert_eq!(g.norm(), 0.0);
    assert_eq!(hess.norm(), 0.0);
    assert!(matches!(fit_local(&view, 0.7, 0.2, &k, &DVector::zeros(2)), Err(Error::NoDataInWindow { .. })));
    assert!(matches!(sigma_hat(&view, &DVector::zeros(2), 0.7, 0.2, &k), Err(Error::NoDataInWindow { .. })));
}

#[test]
fn fits_near_the_boundary_are_domain_errors() {
    let (net, cov, log) = one_pair(&[0.5]);
    let view = DataView::new(&net, &cov, &log, 0.2).unwrap();
    let k = Kernel::epanechnikov();
    assert!(matches!(fit_local(&view, 0.1, 0.2, &k, &dvector![0.0]), Err(Error::Domain(_))));
    assert!(matches!(fit_local(&view, 0.95, 0.2, &k, &dvector![0.0]), Err(Error::Domain(_))));
}

#[test]
fn one_pair_fit_has_closed_form() {
    let mut r = common::rng(11);
    let mut times: Vec<f64> = (0..60).map(|_| r.random::<f64>()).collect();
    times.sort_by(f64::total_cmp);
    let (net, cov, log) = one_pair(&times);
    let k = Kernel::epanechnikov();
    let h = 0.3;
    let view = DataView::new(&net, &cov, &log, h).unwrap();
    for t0 in [0.3, 0.5, 0.66] {
        let fit = fit_local(&view, t0, h, &k, &dvector![0.0]).unwrap();
        let weighted: f64 = times.iter().map(|&s| k.at(s, t0, h)).sum();
        let exposure = k.window_integral(0.0, 1.0, t0, h);
        assert_relative_eq!(fit.theta[0], (weighted / exposure).ln(), epsilon = 1e-8);
        assert!(fit.converged);
        assert_relative_eq!(fit.hessian.clone(), fit.hessian.transpose(), epsilon = 1e-12);
    }
    let global = fit_global(&view).unwrap();
    assert_relative_eq!(global.theta[0], (60.0f64).ln(), epsilon = 1e-8);
}

#[test]
fn global_fit_without_events_fails() {
    let (net, cov, log) = one_pair(&[]);
    let view = DataView::new(&net, &cov, &log, 0.2).unwrap();
    assert!(fit_global(&view).is_err());
}

#[test]
fn duplicating_every_pair_leaves_the_global_fit_unchanged() {
    let inst = common::random_instance(21, 6, 2, 1.0);
    let n = 6;
    let mut net2 = DynamicNetwork::new(2 * n, false, 1.0).unwrap();
    let mut log2 = EventLog::new(1.0);
    let mut steps = BTreeMap::new();
    for p in (0..n).flat_map(|i| (i + 1..n).map(move |j| Pair::new(i, j))) {
        for q in [p, Pair::new(p.i + n, p.j + n)] {
            for iv in inst.net.intervals(p) {
                net2.add_interval(q, iv.start, iv.end).unwrap();
            }
            log2.set_times(q, inst.log.times(p).to_vec()).unwrap();
            let bps = inst.cov.breakpoints(p, 0.0, 1.0);
            let mut list = vec![(0.0, inst.cov.eval(p, 0.0).unwrap())];
            for b in bps {
                if b > 0.0 && b < 1.0 {
                    list.push((b, inst.cov.eval(p, b).unwrap()));
                }
            }
            steps.insert(q, list);
        }
    }
    let cov2 = CovariateField::piecewise_constant(2, steps).unwrap();
    let a = fit_global(&DataView::new(&inst.net, &inst.cov, &inst.log, 0.2).unwrap()).unwrap();
    let b = fit_global(&DataView::new(&net2, &cov2, &log2, 0.2).unwrap()).unwrap();
    assert_relative_eq!(a.theta, b.theta, epsilon = 1e-8);
}

#[test]
fn local_fit_is_centred_on_the_true_constant() {
    let net = complete(30, 1.0);
    let cov = CovariateField::constant(dvector![1.0]);
    let path = ParameterPath::constant(dvector![0.5], 1.0);
    let k = Kernel::epanechnikov();
    let est: Vec<f64> = (0..200)
        .map(|rep| {
            let log = simulate_cox(&net, &cov, &path, 9000 + rep).unwrap();
            let view = DataView::new(&net, &cov, &log, 0.3).unwrap();
            fit_local(&view, 0.5, 0.3, &k, &dvector![0.0]).unwrap().theta[0]
        })
        .collect();
    let (mean, sd) = common::mean_sd(&est);
    assert!((mean - 0.5).abs() <= 3.0 * sd / (est.len() as f64).sqrt(), "mean {mean}, sd {sd}");
    assert!((est[0] - 0.5).abs() <= 3.0 * sd);
}

#[test]
fn sigma_with_constant_covariate_is_exact() {
    let inst = common::random_instance(5, 6, 2, 1.0);
    let x0 = dvector![1.0, -0.4, 2.0];
    let cov = CovariateField::constant(x0.clone());
    let view = DataView::new(&inst.net, &cov, &inst.log, 0.2).unwrap();
    let theta = dvector![0.3, 0.1, -0.2];
    let s = sigma_hat(&view, &theta, 0.5, 0.2, &Kernel::epanechnikov()).unwrap();
    let expected = -(&x0 * x0.transpose()) * theta.dot(&x0).exp();
    assert_relative_eq!(s, expected, max_relative = 1e-12);
}

#[test]
fn sigma_of_random_signs_is_minus_identity() {
    let n = 60;
    let net = complete(n, 1.0);
    let mut r = common::rng(17);
    let values: BTreeMap<Pair, DVector<f64>> = net
        .pairs()
        .map(|p| {
            let mut sign = || if r.random::<bool>() { 1.0 } else { -1.0 };
            (p, dvector![sign(), sign()])
        })
        .collect();
    let cov = CovariateField::static_per_pair(2, values).unwrap();
    let log = EventLog::new(1.0);
    let view = DataView::new(&net, &cov, &log, 0.2).unwrap();
    let s = sigma_hat(&view, &DVector::zeros(2), 0.5, 0.2, &Kernel::epanechnikov()).unwrap();
    // off-diagonal entries average r_n signs
    let se = 1.0 / (net.pair_count() as f64).sqrt();
    assert_relative_eq!(s[(0, 0)], -1.0, epsilon = 1e-12);
    assert_relative_eq!(s[(1, 1)], -1.0, epsilon = 1e-12);
    assert!(s[(0, 1)].abs() < 4.0 * se);
    assert_eq!(s[(0, 1)], s[(1, 0)]);
}

#[test]
fn sigma_path_is_symmetric_and_negative() {
    let inst = common::random_instance(9, 8, 3, 1.0);
    let view = DataView::new(&inst.net, &inst.cov, &inst.log, 0.25).unwrap();
    let grid: Vec<f64> = (0..21).map(|i| 0.25 + 0.025 * i as f64).collect();
    let path = SigmaPath::new(&view, &inst.theta, grid, 0.25, &Kernel::epanechnikov());
    for s in &path.sigma {
        assert_eq!(s, &s.transpose());
        assert!(s.clone().symmetric_eigenvalues().max() <= 1e-9 * s.norm());
    }
    for p in &path.pbar {
        assert!((0.0..=1.0).contains(p));
    }
}

#[test]
fn pbar_simple_cases() {
    let k = Kernel::epanechnikov();
    let full = complete(6, 1.0);
    assert_relative_eq!(pbar_hat(&full, 0.5, 0.2, &k), 1.0, epsilon = 1e-14);
    let mut half = DynamicNetwork::new(4, false, 1.0).unwrap();
    for p in [Pair::new(0, 1), Pair::new(1, 2), Pair::new(2, 3)] {
        half.add_interval(p, 0.0, 1.0).unwrap();
    }
    assert_relative_eq!(pbar_hat(&half, 0.5, 0.2, &k), 0.5, epsilon = 1e-14);
}

/// Simpson's rule on one panel is exact for the quadratic kernel pieces.
fn pbar_oracle(net: &DynamicNetwork, t0: f64, h: f64) -> f64 {
    let kv = |s: f64| {
        let u = (s - t0) / h;
        if u.abs() <= 1.0 {
            0.75 * (1.0 - u * u) / h
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    for (_, ivs) in net.activity() {
        for iv in ivs {
            let (a, b) = (iv.start.max(t0 - h), iv.end.min(t0 + h));
            if b > a {
                total += (b - a) / 6.0 * (kv(a) + 4.0 * kv(0.5 * (a + b)) + kv(b));
            }
        }
    }
    total / net.pair_count() as f64
}

#[test]
fn pbar_matches_quadrature_oracle() {
    let k = Kernel::epanechnikov();
    for seed in 0..10 {
        let inst = common::random_instance(300 + seed, 9, 1, 1.0);
        for t0 in [0.2, 0.37, 0.5, 0.81] {
            assert_relative_eq!(pbar_hat(&inst.net, t0, 0.2, &k), pbar_oracle(&inst.net, t0, 0.2), max_relative = 1e-8);
        }
    }
}

#[test]
fn k4_constants() {
    assert_relative_eq!(Kernel::boxcar().k4(), 1.0 / 6.0, epsilon = 1e-5);
    let tri = Kernel::triangular();
    assert_relative_eq!(tri.k4_with_step(1e-3), tri.k4_with_step(5e-4), epsilon = 1e-6);
    let c: f64 = 1.7;
    let e = Kernel::epanechnikov();
    assert_relative_eq!(e.scaled(c).k4(), c.powi(4) * e.k4(), max_relative = 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loglik_is_concave_along_segments(seed in 0u64..5000, lambda in 0.05f64..0.95) {
        let inst = common::random_instance(seed, 6, 2, 1.0);
        let view = DataView::new(&inst.net, &inst.cov, &inst.log, 0.3).unwrap();
        let k = Kernel::epanechnikov();
        let mut r = common::rng(seed ^ 0x55);
        let a = DVector::from_fn(2, |_, _| r.random_range(-3.0..3.0));
        let b = DVector::from_fn(2, |_, _| r.random_range(-3.0..3.0));
        let mid = &a * lambda + &b * (1.0 - lambda);
        let f = |th: &DVector<f64>| local_loglik(&view, th, 0.5, 0.3, &k);
        let chord = lambda * f(&a) + (1.0 - lambda) * f(&b);
        prop_assert!(f(&mid) >= chord - 1e-9 * chord.abs().max(1.0));
    }

    #[test]
    fn fit_is_equivariant_under_linear_maps(seed in 0u64..5000) {
        let inst = common::random_instance(seed, 8, 2, 1.0);
        let mut r = common::rng(seed ^ 0xa5);
        let a = loop {
            let m = DMatrix::<f64>::from_fn(2, 2, |_, _| r.random_range(-1.5..1.5));
            if m.determinant().abs() > 0.3 {
                break m;
            }
        };
        let k = Kernel::epanechnikov();
        let view = DataView::new(&inst.net, &inst.cov, &inst.log, 0.3).unwrap();
        let fit = fit_local(&view, 0.5, 0.3, &k, &DVector::zeros(2));
        prop_assume!(fit.is_ok());
        let theta = fit.unwrap().theta;
        let moved = inst.cov.transformed(&a);
        let view2 = DataView::new(&inst.net, &moved, &inst.log, 0.3).unwrap();
        let theta2 = fit_local(&view2, 0.5, 0.3, &k, &DVector::zeros(2)).unwrap().theta;
        let expected = a.transpose().try_inverse().unwrap() * &theta;
        prop_assert!((&theta2 - &expected).norm() <= 1e-6 * expected.norm().max(1.0), "{} vs {}", theta2, expected);
    }
}
