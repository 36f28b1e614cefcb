use super::covariates::{CovariateField, CovariateKind};
use super::events::EventLog;
use super::path::ParameterPath;
use super::rng::{self, domain};
use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};
use crate::numeric::quadrature::{adaptive_simpson, exp_linear_integral};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Grid points used to bound `theta(s)^T X(s)` on one activity piece.
const DOMINATING_GRID: usize = 64;
const HEADROOM: f64 = 1.1;

/// `lambda_ij(t) = C_ij(t) exp(theta(t)^T X_ij(t))`.
pub fn intensity(
    net: &DynamicNetwork,
    cov: &CovariateField,
    theta: &ParameterPath,
    pair: Pair,
    t: f64,
) -> Result<f64> {
    if !net.edge_active(pair, t)? {
        return Ok(0.0);
    }
    let x = cov.eval(pair, t)?;
    Ok(theta.eval(t).dot(&x).exp())
}

fn segment_points(cov: &CovariateField, theta: &ParameterPath, pair: Pair, a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    pts.extend(cov.breakpoints(pair, a, b));
    pts.extend(theta.knots_in(a, b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Compensator `int_0^t lambda_ij(s) ds`.
///
/// Exact on stretches where the covariate is constant (the exponent is then
/// linear or constant in `s`); adaptive Simpson for callback covariates.
pub fn compensator(
    net: &DynamicNetwork,
    cov: &CovariateField,
    theta: &ParameterPath,
    pair: Pair,
    t: f64,
) -> Result<f64> {
    if !(0.0..=net.horizon()).contains(&t) {
        return Err(Error::Domain(format!("t={t} outside [0, {}]", net.horizon())));
    }
    let mut total = 0.0;
    for iv in net.intervals(pair) {
        let Some(iv) = iv.clip(0.0, t) else { continue };
        let pts = segment_points(cov, theta, pair, iv.start, iv.end);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            if cov.kind() == CovariateKind::Callback {
                let f = |s: f64| theta.eval(s).dot(&cov.eval(pair, s).expect("callback covariate")).exp();
                let scale = f(0.5 * (a + b)).max(1e-300) * (b - a);
                total += adaptive_simpson(a, b, 1e-12 * scale, &f);
            } else {
                let x = cov.eval(pair, 0.5 * (a + b))?;
                let ea = theta.eval(a).dot(&x);
                // step paths are constant between knots, so use the left value throughout
                let eb = match theta.interpolation() {
                    super::path::Interpolation::Linear => theta.eval(b).dot(&x),
                    super::path::Interpolation::Constant => ea,
                };
                total += exp_linear_integral(ea, (eb - ea) / (b - a), b - a);
            }
        }
    }
    Ok(total)
}

fn simulate_pair(
    net: &DynamicNetwork,
    cov: &CovariateField,
    theta: &ParameterPath,
    pair: Pair,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = rng::stream(seed, domain::COX, pair.key());
    let log_lambda = |s: f64| -> Result<f64> {
        let v = theta.eval(s).dot(&cov.eval(pair, s)?);
        if !v.is_finite() {
            return Err(Error::Simulation { pair, time: s, reason: format!("non-finite log-intensity {v}") });
        }
        Ok(v)
    };
    let mut times = Vec::new();
    for iv in net.intervals(pair) {
        let pts = segment_points(cov, theta, pair, iv.start, iv.end);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mut max_log = f64::NEG_INFINITY;
            for k in 0..=DOMINATING_GRID {
                let s = a + (b - a) * k as f64 / DOMINATING_GRID as f64;
                max_log = max_log.max(log_lambda(s.min(b - (b - a) * 1e-12))?);
            }
            let bound = max_log.exp() * HEADROOM;
            if !bound.is_finite() || bound <= 0.0 {
                return Err(Error::Simulation { pair, time: a, reason: format!("dominating rate {bound}") });
            }
            let gap = Exp::new(bound).map_err(|e| Error::Numeric(e.to_string()))?;
            let mut s = a;
            loop {
                s += gap.sample(&mut rng);
                if s >= b {
                    break;
                }
                let lam = log_lambda(s)?.exp();
                if lam > bound {
                    return Err(Error::Simulation {
                        pair,
                        time: s,
                        reason: format!("intensity {lam} exceeds dominating rate {bound}"),
                    });
                }
                if rng.random::<f64>() * bound < lam {
                    times.push(s);
                }
            }
        }
    }
    Ok(times)
}

/// Draws an [`EventLog`] from the Cox-type intensity `C exp(theta^T X)` by
/// thinning a dominating homogeneous process on each activity stretch.
///
/// Every pair uses its own random stream keyed by `(seed, pair)`, so pairs can
/// be simulated in parallel and the result does not depend on which other pairs
/// exist.
pub fn simulate_cox(
    net: &DynamicNetwork,
    cov: &CovariateField,
    theta: &ParameterPath,
    seed: u64,
) -> Result<EventLog> {
    let pairs: Vec<Pair> = net.pairs().collect();
    let drawn: Vec<(Pair, Vec<f64>)> = pairs
        .par_iter()
        .map(|&p| simulate_pair(net, cov, theta, p, seed).map(|ts| (p, ts)))
        .collect::<Result<_>>()?;
    let mut log = EventLog::new(net.horizon());
    let mut by_pair = BTreeMap::new();
    for (p, ts) in drawn {
        if !ts.is_empty() {
            by_pair.insert(p, ts);
        }
    }
    for (p, ts) in by_pair {
        log.set_times(p, ts)?;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn one_edge(horizon: f64) -> DynamicNetwork {
        DynamicNetwork::static_network(2, false, horizon, [Pair::new(0, 1)]).unwrap()
    }

    #[test]
    fn compensator_constant_rate() {
        let mut net = DynamicNetwork::new(2, false, 3.0).unwrap();
        net.add_interval(Pair::new(0, 1), 0.0, 1.0).unwrap();
        let cov = CovariateField::constant(dvector![0.0]);
        let theta = ParameterPath::constant(dvector![0.0], 3.0);
        let c = compensator(&net, &cov, &theta, Pair::new(0, 1), 2.0).unwrap();
        assert!((c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn compensator_piecewise_activity() {
        let mut net = DynamicNetwork::new(2, false, 3.0).unwrap();
        net.add_interval(Pair::new(0, 1), 0.0, 1.0).unwrap();
        net.add_interval(Pair::new(0, 1), 2.0, 3.0).unwrap();
        let cov = CovariateField::constant(dvector![1.0]);
        let theta = ParameterPath::constant(dvector![2f64.ln()], 3.0);
        let c = compensator(&net, &cov, &theta, Pair::new(0, 1), 2.5).unwrap();
        assert!((c - 3.0).abs() < 1e-12);
    }

    #[test]
    fn compensator_linear_theta_closed_form() {
        let net = one_edge(2.0);
        let cov = CovariateField::constant(dvector![1.0]);
        // theta(s) = 0.3 + 0.8 s
        let theta = ParameterPath::from_fn(vec![0.0, 0.7, 2.0], |s| dvector![0.3 + 0.8 * s]).unwrap();
        let c = compensator(&net, &cov, &theta, Pair::new(0, 1), 1.5).unwrap();
        let exact = (0.3f64.exp()) * ((0.8f64 * 1.5).exp() - 1.0) / 0.8;
        assert!((c - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn inactive_network_has_no_events() {
        let net = DynamicNetwork::new(5, false, 10.0).unwrap();
        let cov = CovariateField::constant(dvector![1.0]);
        let theta = ParameterPath::constant(dvector![3.0], 10.0);
        assert!(simulate_cox(&net, &cov, &theta, 1).unwrap().is_empty());
    }

    #[test]
    fn reproducible_given_seed() {
        let net = one_edge(10.0);
        let cov = CovariateField::constant(dvector![1.0]);
        let theta = ParameterPath::constant(dvector![2f64.ln()], 10.0);
        let a = simulate_cox(&net, &cov, &theta, 42).unwrap();
        let b = simulate_cox(&net, &cov, &theta, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_intensity_is_reported() {
        let net = one_edge(1.0);
        let cov = CovariateField::constant(dvector![f64::INFINITY]);
        let theta = ParameterPath::constant(dvector![1.0], 1.0);
        let err = simulate_cox(&net, &cov, &theta, 1).unwrap_err();
        assert!(matches!(err, Error::Simulation { pair, .. } if pair == Pair::new(0, 1)));
    }
}
