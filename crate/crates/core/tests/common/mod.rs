#![allow(dead_code)]

use nalgebra::DVector;
use netcox::simulate::{simulate_cox, CovariateField, EventLog, ParameterPath};
use netcox::{DynamicNetwork, Pair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small random instance: each pair is active on up to two random
/// intervals and has a piecewise-constant covariate with an intercept.
pub struct Instance {
    pub net: DynamicNetwork,
    pub cov: CovariateField,
    pub log: EventLog,
    pub theta: DVector<f64>,
}

pub fn random_instance(seed: u64, n: usize, q: usize, horizon: f64) -> Instance {
    let mut r = rng(seed);
    let mut net = DynamicNetwork::new(n, false, horizon).unwrap();
    let mut steps = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = Pair::new(i, j);
            if r.random::<f64>() < 0.6 {
                let mut cuts = [r.random::<f64>() * horizon, r.random::<f64>() * horizon];
                cuts.sort_by(f64::total_cmp);
                if r.random::<bool>() {
                    net.add_interval(p, 0.0, horizon).unwrap();
                } else {
                    net.add_interval(p, 0.0, cuts[0].max(0.1 * horizon)).unwrap();
                    if cuts[1] > cuts[0].max(0.1 * horizon) {
                        net.add_interval(p, cuts[1], horizon).unwrap();
                    }
                }
            }
            let mut list = Vec::new();
            let mut t = 0.0;
            while t < horizon {
                let mut x = DVector::from_fn(q, |_, _| r.random_range(-1.0..1.0));
                x[0] = 1.0;
                list.push((t, x));
                t += r.random_range(0.2..0.6) * horizon;
            }
            steps.insert(p, list);
        }
    }
    let cov = CovariateField::piecewise_constant(q, steps).unwrap();
    let mut theta = DVector::from_fn(q, |_, _| r.random_range(-0.5..0.5));
    theta[0] = 3.0;
    let log = simulate_cox(&net, &cov, &ParameterPath::constant(theta.clone(), horizon), seed).unwrap();
    Instance { net, cov, log, theta }
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}
