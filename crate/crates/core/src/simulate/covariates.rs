use crate::error::{Error, Result};
use crate::netcore::Pair;
use nalgebra::DVector;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type CovariateFn = Arc<dyn Fn(Pair, f64) -> DVector<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateKind {
    StaticPerPair,
    PiecewiseConstant,
    Callback,
}

/// A stretch `[start, end)` on which the covariate of one pair is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariatePiece {
    pub start: f64,
    pub end: f64,
    pub x: DVector<f64>,
}

#[derive(Clone)]
enum Repr {
    Static {
        values: BTreeMap<Pair, DVector<f64>>,
        default: Option<DVector<f64>>,
    },
    /// Per pair: sorted change points with the value taken from each one on.
    Piecewise(BTreeMap<Pair, Vec<(f64, DVector<f64>)>>),
    Callback(CovariateFn),
}

/// Covariate processes `X_ij(t) in R^q` with a declared sup-norm bound.
#[derive(Clone)]
pub struct CovariateField {
    q: usize,
    bound: f64,
    repr: Repr,
}

impl fmt::Debug for CovariateField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovariateField")
            .field("q", &self.q)
            .field("bound", &self.bound)
            .field("kind", &self.kind())
            .finish()
    }
}

fn sup_norm(x: &DVector<f64>) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

impl CovariateField {
    /// The same vector for every pair.
    pub fn constant(x: DVector<f64>) -> Self {
        let bound = sup_norm(&x);
        Self { q: x.len(), bound, repr: Repr::Static { values: BTreeMap::new(), default: Some(x) } }
    }

    /// One vector per pair; pairs missing from the map have no covariate.
    pub fn static_per_pair(q: usize, values: BTreeMap<Pair, DVector<f64>>) -> Result<Self> {
        if values.values().any(|v| v.len() != q) {
            return Err(Error::Config(format!("static covariates must all have dimension {q}")));
        }
        let bound = values.values().map(sup_norm).fold(0.0, f64::max);
        Ok(Self { q, bound, repr: Repr::Static { values, default: None } })
    }

    /// Step functions per pair. Each list must start at or before time 0.
    pub fn piecewise_constant(q: usize, mut steps: BTreeMap<Pair, Vec<(f64, DVector<f64>)>>) -> Result<Self> {
        let mut bound: f64 = 0.0;
        for (p, list) in steps.iter_mut() {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            if list.first().is_none_or(|(t, _)| *t > 0.0) {
                return Err(Error::Config(format!("piecewise covariate of {p} must start at t <= 0")));
            }
            for (_, v) in list.iter() {
                if v.len() != q {
                    return Err(Error::Config(format!("piecewise covariate of {p} has wrong dimension")));
                }
                bound = bound.max(sup_norm(v));
            }
        }
        Ok(Self { q, bound, repr: Repr::Piecewise(steps) })
    }

    /// Arbitrary evaluator with a declared bound `K_hat`.
    pub fn callback(q: usize, bound: f64, f: CovariateFn) -> Self {
        Self { q, bound, repr: Repr::Callback(f) }
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    /// Declared `K_hat`, an almost-sure bound on `|X|_inf`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn kind(&self) -> CovariateKind {
        match self.repr {
            Repr::Static { .. } => CovariateKind::StaticPerPair,
            Repr::Piecewise(_) => CovariateKind::PiecewiseConstant,
            Repr::Callback(_) => CovariateKind::Callback,
        }
    }

    fn lookup<V>(map: &BTreeMap<Pair, V>, p: Pair) -> Option<&V> {
        map.get(&p)
            .or_else(|| map.get(&p.normalized()))
            .or_else(|| map.get(&Pair::new(p.j, p.i)))
    }

    /// `X_ij(t)`, or `None` if the pair has no covariate.
    pub fn try_eval(&self, pair: Pair, t: f64) -> Option<DVector<f64>> {
        match &self.repr {
            Repr::Static { values, default } => Self::lookup(values, pair).or(default.as_ref()).cloned(),
            Repr::Piecewise(steps) => {
                let list = Self::lookup(steps, pair)?;
                let k = list.partition_point(|(s, _)| *s <= t).max(1) - 1;
                Some(list[k].1.clone())
            }
            Repr::Callback(f) => Some(f(pair, t)),
        }
    }

    pub fn eval(&self, pair: Pair, t: f64) -> Result<DVector<f64>> {
        self.try_eval(pair, t)
            .ok_or_else(|| Error::Config(format!("no covariate for pair {pair}")))
    }

    /// Splits `[a, b)` into stretches of constant covariate. Callback fields are
    /// sampled at the midpoints of sub-intervals no longer than `resolution`.
    pub fn pieces(&self, pair: Pair, a: f64, b: f64, resolution: f64) -> Result<Vec<CovariatePiece>> {
        if b <= a {
            return Ok(Vec::new());
        }
        match &self.repr {
            Repr::Static { .. } => Ok(vec![CovariatePiece { start: a, end: b, x: self.eval(pair, a)? }]),
            Repr::Piecewise(steps) => {
                let list = Self::lookup(steps, pair)
                    .ok_or_else(|| Error::Config(format!("no covariate for pair {pair}")))?;
                let mut out = Vec::new();
                let mut start = a;
                let mut k = list.partition_point(|(s, _)| *s <= a).max(1) - 1;
                loop {
                    let end = list.get(k + 1).map_or(b, |(s, _)| s.min(b));
                    if end > start {
                        out.push(CovariatePiece { start, end, x: list[k].1.clone() });
                    }
                    if end >= b {
                        break;
                    }
                    start = end;
                    k += 1;
                }
                Ok(out)
            }
            Repr::Callback(f) => {
                let n = ((b - a) / resolution).ceil().max(1.0) as usize;
                let step = (b - a) / n as f64;
                Ok((0..n)
                    .map(|k| {
                        let s = a + step * k as f64;
                        let e = if k + 1 == n { b } else { s + step };
                        CovariatePiece { start: s, end: e, x: f(pair, 0.5 * (s + e)) }
                    })
                    .collect())
            }
        }
    }

    /// Change points strictly inside `(a, b)`; empty for static and callback fields.
    pub fn breakpoints(&self, pair: Pair, a: f64, b: f64) -> Vec<f64> {
        match &self.repr {
            Repr::Piecewise(steps) => Self::lookup(steps, pair)
                .map(|l| l.iter().map(|(s, _)| *s).filter(|&s| s > a && s < b).collect())
                .unwrap_or_default(),
            _ => Vec::new(),
        }
    }

    /// Checks the declared bound on the given sample points.
    pub fn check_bound(&self, samples: impl IntoIterator<Item = (Pair, f64)>) -> Result<()> {
        for (p, t) in samples {
            if let Some(x) = self.try_eval(p, t) {
                let m = sup_norm(&x);
                if !(m <= self.bound * (1.0 + 1e-12)) {
                    return Err(Error::Config(format!(
                        "covariate of {p} at t={t} has sup norm {m} above declared bound {}",
                        self.bound
                    )));
                }
            }
        }
        Ok(())
    }

    /// Field seen under the vertex permutation `v -> perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let map_pair = |p: &Pair| Pair::new(perm[p.i], perm[p.j]);
        let repr = match &self.repr {
            Repr::Static { values, default } => Repr::Static {
                values: values.iter().map(|(p, v)| (map_pair(p), v.clone())).collect(),
                default: default.clone(),
            },
            Repr::Piecewise(steps) => {
                Repr::Piecewise(steps.iter().map(|(p, v)| (map_pair(p), v.clone())).collect())
            }
            Repr::Callback(f) => {
                let mut inverse = vec![0; perm.len()];
                for (v, &w) in perm.iter().enumerate() {
                    inverse[w] = v;
                }
                let f = f.clone();
                Repr::Callback(Arc::new(move |p, t| f(Pair::new(inverse[p.i], inverse[p.j]), t)))
            }
        };
        Self { q: self.q, bound: self.bound, repr }
    }

    /// Field under the time change `t -> c t`.
    pub fn time_scaled(&self, c: f64) -> Self {
        let repr = match &self.repr {
            Repr::Static { .. } => self.repr.clone(),
            Repr::Piecewise(steps) => Repr::Piecewise(
                steps
                    .iter()
                    .map(|(p, l)| (*p, l.iter().map(|(s, v)| (s * c, v.clone())).collect()))
                    .collect(),
            ),
            Repr::Callback(f) => {
                let f = f.clone();
                Repr::Callback(Arc::new(move |p, t| f(p, t / c)))
            }
        };
        Self { q: self.q, bound: self.bound, repr }
    }

    /// Applies `x -> A x` to every covariate value.
    pub fn transformed(&self, a: &nalgebra::DMatrix<f64>) -> Self {
        let q = a.nrows();
        let tr = |v: &DVector<f64>| a * v;
        let repr = match &self.repr {
            Repr::Static { values, default } => Repr::Static {
                values: values.iter().map(|(p, v)| (*p, tr(v))).collect(),
                default: default.as_ref().map(tr),
            },
            Repr::Piecewise(steps) => Repr::Piecewise(
                steps
                    .iter()
                    .map(|(p, l)| (*p, l.iter().map(|(s, v)| (*s, tr(v))).collect()))
                    .collect(),
            ),
            Repr::Callback(f) => {
                let f = f.clone();
                let a = a.clone();
                Repr::Callback(Arc::new(move |p, t| &a * f(p, t)))
            }
        };
        let mut out = Self { q, bound: 0.0, repr };
        out.bound = match &out.repr {
            Repr::Static { values, default } => values
                .values()
                .chain(default.iter())
                .map(sup_norm)
                .fold(0.0, f64::max),
            Repr::Piecewise(steps) => steps.values().flatten().map(|(_, v)| sup_norm(v)).fold(0.0, f64::max),
            Repr::Callback(_) => a.iter().map(|v| v.abs()).sum::<f64>() * self.bound,
        };
        out
    }
}
