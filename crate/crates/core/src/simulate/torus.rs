use super::rng::{self, domain};
use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::VecDeque;

/// Edges of the `side x side` torus with the autoregressive coupling `alpha0`.
///
/// Edge `2 v` joins vertex `v = x + side * y` to its right neighbour, edge
/// `2 v + 1` to its upper neighbour. Two edges are coupled when they share
/// exactly one vertex, so every edge has six neighbours.
#[derive(Debug, Clone)]
pub struct TorusField {
    side: usize,
    alpha0: f64,
    edges: Vec<Pair>,
    neighbours: Vec<Vec<usize>>,
}

impl TorusField {
    pub fn new(side: usize, alpha0: f64) -> Result<Self> {
        if side < 3 {
            return Err(Error::Config(format!("torus side {side} must be at least 3")));
        }
        if !(alpha0 >= 0.0) || 6.0 * alpha0 >= 1.0 {
            return Err(Error::Config(format!("alpha0={alpha0} must lie in [0, 1/6)")));
        }
        let vid = |x: usize, y: usize| (x % side) + side * (y % side);
        let mut edges = Vec::with_capacity(2 * side * side);
        for y in 0..side {
            for x in 0..side {
                edges.push(Pair::new(vid(x, y), vid(x + 1, y)).normalized());
                edges.push(Pair::new(vid(x, y), vid(x, y + 1)).normalized());
            }
        }
        let n = side * side;
        let mut incidence = vec![Vec::new(); n];
        for (e, p) in edges.iter().enumerate() {
            incidence[p.i].push(e);
            incidence[p.j].push(e);
        }
        let neighbours = edges
            .iter()
            .enumerate()
            .map(|(e, p)| {
                let mut nb: Vec<usize> =
                    incidence[p.i].iter().chain(&incidence[p.j]).copied().filter(|&f| f != e).collect();
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect();
        Ok(Self { side, alpha0, edges, neighbours })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn vertex_count(&self) -> usize {
        self.side * self.side
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The enumeration of edges.
    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn neighbours(&self, e: usize) -> &[usize] {
        &self.neighbours[e]
    }

    /// Grid coordinates of the anchor vertex of edge `e` and its direction (0 right, 1 up).
    pub fn anchor(&self, e: usize) -> ([usize; 2], usize) {
        let v = e / 2;
        ([v % self.side, v / self.side], e % 2)
    }

    /// Coupling matrix `C~`.
    pub fn coupling(&self) -> DMatrix<f64> {
        let r = self.edge_count();
        let mut c = DMatrix::zeros(r, r);
        for (e, nb) in self.neighbours.iter().enumerate() {
            for &f in nb {
                c[(e, f)] = 1.0;
            }
        }
        c
    }

    /// `I - alpha0 C~`.
    pub fn system_matrix(&self) -> DMatrix<f64> {
        DMatrix::identity(self.edge_count(), self.edge_count()) - self.coupling() * self.alpha0
    }

    /// Line-graph distances between all edges (BFS over the coupling graph).
    pub fn edge_distances(&self) -> DMatrix<u32> {
        let r = self.edge_count();
        let mut d = DMatrix::from_element(r, r, u32::MAX);
        let mut queue = VecDeque::new();
        for s in 0..r {
            d[(s, s)] = 0;
            queue.push_back(s);
            while let Some(e) = queue.pop_front() {
                let de = d[(s, e)];
                for &f in &self.neighbours[e] {
                    if d[(s, f)] == u32::MAX {
                        d[(s, f)] = de + 1;
                        queue.push_back(f);
                    }
                }
            }
        }
        d
    }

    /// Static network of the torus on `side^2` vertices, labels permuted by `perm`.
    pub fn network(&self, horizon: f64, perm: Option<&[usize]>) -> Result<DynamicNetwork> {
        let map = |v: usize| perm.map_or(v, |p| p[v]);
        DynamicNetwork::static_network(
            self.vertex_count(),
            false,
            horizon,
            self.edges.iter().map(|p| Pair::new(map(p.i), map(p.j)).normalized()),
        )
    }
}

/// One snapshot `A(t)` and the indicators `N = 1(A >= theta0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusDraw {
    pub values: DVector<f64>,
    pub indicators: Vec<bool>,
}

/// Reusable sampler holding the Cholesky factor of `I - alpha0 C~`.
#[derive(Debug, Clone)]
pub struct TorusSampler {
    chol: Cholesky<f64, Dyn>,
    theta0: f64,
}

impl TorusSampler {
    pub fn new(field: &TorusField, theta0: f64) -> Result<Self> {
        let chol = Cholesky::new(field.system_matrix())
            .ok_or_else(|| Error::Numeric("I - alpha0 C~ is not positive definite".into()))?;
        Ok(Self { chol, theta0 })
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> TorusDraw {
        let r = self.chol.l_dirty().nrows();
        let eps = DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let values = self.chol.solve(&eps);
        let indicators = values.iter().map(|&a| a >= self.theta0).collect();
        TorusDraw { values, indicators }
    }
}

/// Draws `A(t) = (I - alpha0 C~)^{-1} eps` with iid standard normal `eps`.
///
/// Only the fixed-time marginal is simulated, so `t` enters through the seed.
pub fn simulate_torus_ar(field: &TorusField, t: f64, theta0: f64, seed: u64) -> Result<TorusDraw> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t={t} must be positive")));
    }
    let sampler = TorusSampler::new(field, theta0)?;
    let mut rng = rng::stream(seed, domain::TORUS, t.to_bits());
    Ok(sampler.draw(&mut rng))
}

#[derive(Debug, Clone)]
pub struct TorusCovariance {
    pub matrix: DMatrix<f64>,
    /// `max |Cov(A_x, A_y)|` over edge pairs at line-graph distance `d`, indexed by `d`.
    pub max_by_distance: Vec<f64>,
    /// `max_d max_by_distance[d] / (6 alpha0)^{d/2}`.
    pub c_star: f64,
    /// `max_by_distance[d + 1] / max_by_distance[d]` for `d >= 2`, indexed from `d = 2`.
    pub decay_ratios: Vec<f64>,
    pub bound_holds: bool,
}

/// Exact covariance `(I - alpha0 C~)^{-1} (I - alpha0 C~)^{-T}` and its decay in distance.
pub fn torus_covariance(field: &TorusField) -> Result<TorusCovariance> {
    let m = field.system_matrix();
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular I - alpha0 C~".into()))?;
    let matrix = &inv * inv.transpose();
    let dist = field.edge_distances();
    let dmax = dist.iter().copied().filter(|&d| d != u32::MAX).max().unwrap_or(0) as usize;
    let mut max_by_distance = vec![0.0f64; dmax + 1];
    for (k, d) in dist.iter().enumerate() {
        if *d != u32::MAX {
            let slot = &mut max_by_distance[*d as usize];
            *slot = slot.max(matrix[k].abs());
        }
    }
    let base = 6.0 * field.alpha0();
    let mut c_star = 0.0f64;
    for (d, &v) in max_by_distance.iter().enumerate() {
        let scale = base.powf(d as f64 / 2.0);
        if scale > 0.0 {
            c_star = c_star.max(v / scale);
        } else if v > 0.0 && d > 0 {
            c_star = f64::INFINITY;
        }
    }
    if field.alpha0() == 0.0 {
        c_star = max_by_distance[0];
    }
    let bound_holds = max_by_distance
        .iter()
        .enumerate()
        .all(|(d, &v)| v <= c_star * base.powf(d as f64 / 2.0) * (1.0 + 1e-12));
    let decay_ratios = max_by_distance
        .windows(2)
        .skip(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    Ok(TorusCovariance { matrix, max_by_distance, c_star, decay_ratios, bound_holds })
}
