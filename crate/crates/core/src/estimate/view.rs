use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};
use crate::numeric::Kernel;
use crate::simulate::{CovariateField, EventLog};
use nalgebra::DVector;

/// Stretch of activity of one pair with a constant covariate vector.
#[derive(Debug, Clone)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub x: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct PairData {
    pub pair: Pair,
    pub pieces: Vec<Piece>,
    /// Events at which the pair is active, with the covariate at the event time.
    pub events: Vec<(f64, DVector<f64>)>,
}

/// Immutable view of `(network, covariates, events)` used by every estimator.
///
/// Activity intervals are split into pieces on which the covariate is constant
/// (callback covariates are sampled at piece midpoints, with pieces of width at
/// most `resolution`). Kernel integrals over a piece are then exact.
#[derive(Debug, Clone)]
pub struct DataView {
    pub q: usize,
    pub r_n: usize,
    pub horizon: f64,
    pub resolution: f64,
    pub pairs: Vec<PairData>,
    /// Events on pairs that were inactive at the event time; they are ignored.
    pub excluded_events: usize,
}

/// Kernel-weighted sufficient statistics at one `t0`.
#[derive(Debug, Clone)]
pub struct LocalData {
    pub t0: f64,
    pub h: f64,
    /// `sum_events K_{h,t0}(s) X(s)`.
    pub event_sum: DVector<f64>,
    /// `(int K_{h,t0} over the piece, X)` for every piece meeting the window.
    pub atoms: Vec<(f64, DVector<f64>)>,
    /// `sum_ij int K_{h,t0} C_ij = r_n * pbar_hat(t0)`.
    pub exposure: f64,
}

impl DataView {
    /// Builds the view; `h` sets the callback sampling resolution `h / 20`.
    pub fn new(net: &DynamicNetwork, cov: &CovariateField, log: &EventLog, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("bandwidth h={h} must be positive")));
        }
        let resolution = h / 20.0;
        let mut excluded = 0usize;
        let mut pairs = Vec::new();
        for p in log.pairs() {
            if net.key(p)? != p {
                return Err(Error::Data(format!("event pair {p} is not in canonical orientation")));
            }
        }
        for (pair, intervals) in net.activity() {
            let mut pieces = Vec::new();
            for iv in intervals {
                for pc in cov.pieces(pair, iv.start, iv.end, resolution)? {
                    if pc.end > pc.start {
                        pieces.push(Piece { start: pc.start, end: pc.end, x: pc.x });
                    }
                }
            }
            let mut events = Vec::new();
            for &s in log.times(pair) {
                if net.is_active_key(&pair, s) {
                    events.push((s, cov.eval(pair, s)?));
                } else {
                    excluded += 1;
                }
            }
            if !pieces.is_empty() || !events.is_empty() {
                pairs.push(PairData { pair, pieces, events });
            }
        }
        for p in log.pairs() {
            if net.intervals(p).is_empty() {
                excluded += log.times(p).len();
            }
        }
        if excluded > 0 {
            log::warn!("{excluded} events on inactive pairs ignored");
        }
        Ok(Self {
            q: cov.dim(),
            r_n: net.pair_count(),
            horizon: net.horizon(),
            resolution,
            pairs,
            excluded_events: excluded,
        })
    }

    pub fn event_count(&self) -> usize {
        self.pairs.iter().map(|p| p.events.len()).sum()
    }

    /// Sufficient statistics of the localized likelihood at `t0`.
    pub fn local(&self, t0: f64, h: f64, kernel: &Kernel<f64>) -> LocalData {
        let (a, b) = (t0 - h, t0 + h);
        let mut event_sum = DVector::zeros(self.q);
        let mut atoms = Vec::new();
        let mut exposure = 0.0;
        for pd in &self.pairs {
            for pc in &pd.pieces {
                if pc.end <= a || pc.start >= b {
                    continue;
                }
                let w = kernel.window_integral(pc.start, pc.end, t0, h);
                if w > 0.0 {
                    exposure += w;
                    atoms.push((w, pc.x.clone()));
                }
            }
            let lo = pd.events.partition_point(|(s, _)| *s < a);
            for (s, x) in pd.events[lo..].iter().take_while(|(s, _)| *s <= b) {
                let k = kernel.at(*s, t0, h);
                if k != 0.0 {
                    event_sum.axpy(k, x, 1.0);
                }
            }
        }
        LocalData { t0, h, event_sum, atoms, exposure }
    }

    /// Unkernelized statistics: every piece weighted by its length.
    pub fn global(&self) -> LocalData {
        let mut event_sum = DVector::zeros(self.q);
        let mut atoms = Vec::new();
        let mut exposure = 0.0;
        for pd in &self.pairs {
            for pc in &pd.pieces {
                let w = pc.end - pc.start;
                exposure += w;
                atoms.push((w, pc.x.clone()));
            }
            for (_, x) in &pd.events {
                event_sum += x;
            }
        }
        LocalData { t0: f64::NAN, h: f64::INFINITY, event_sum, atoms, exposure }
    }
}

impl LocalData {
    pub fn loglik(&self, theta: &DVector<f64>) -> f64 {
        let comp: f64 = self.atoms.iter().map(|(w, x)| w * theta.dot(x).exp()).sum();
        theta.dot(&self.event_sum) - comp
    }

    /// Gradient and Hessian of [`LocalData::loglik`].
    pub fn score_hessian(&self, theta: &DVector<f64>) -> (DVector<f64>, nalgebra::DMatrix<f64>) {
        let q = theta.len();
        let mut g = self.event_sum.clone();
        let mut hess = nalgebra::DMatrix::zeros(q, q);
        for (w, x) in &self.atoms {
            let e = w * theta.dot(x).exp();
            g.axpy(-e, x, 1.0);
            hess.ger(-e, x, x, 1.0);
        }
        (g, hess)
    }

    /// Largest Euclidean covariate norm among the atoms.
    pub fn covariate_bound(&self) -> f64 {
        self.atoms.iter().map(|(_, x)| x.norm()).fold(0.0, f64::max)
    }
}
