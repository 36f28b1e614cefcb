use super::Pair;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Half-open activity interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Intersection with `[a, b]`, if nonempty.
    pub fn clip(&self, a: f64, b: f64) -> Option<Interval> {
        let s = self.start.max(a);
        let e = self.end.min(b);
        (e > s).then_some(Interval::new(s, e))
    }
}

/// Vertex set `{0, .., n-1}` with per-pair activity processes `C_ij(t)`
/// represented as sorted, disjoint interval lists inside `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicNetwork {
    n: usize,
    directed: bool,
    horizon: f64,
    activity: BTreeMap<Pair, Vec<Interval>>,
}

impl DynamicNetwork {
    pub fn new(n: usize, directed: bool, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { n, directed, horizon, activity: BTreeMap::new() })
    }

    /// Network whose listed pairs are active on the whole horizon.
    pub fn static_network<I>(n: usize, directed: bool, horizon: f64, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = Pair>,
    {
        let mut net = Self::new(n, directed, horizon)?;
        for p in pairs {
            net.add_interval(p, 0.0, horizon)?;
        }
        Ok(net)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `r_n = |L_n|`, the number of potential pairs.
    pub fn pair_count(&self) -> usize {
        let n = self.n;
        if n < 2 {
            return 0;
        }
        if self.directed {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        }
    }

    /// Validates a pair and returns its storage key.
    pub fn key(&self, pair: Pair) -> Result<Pair> {
        if pair.i == pair.j {
            return Err(Error::Domain(format!("loop pair {pair}")));
        }
        if pair.i >= self.n || pair.j >= self.n {
            return Err(Error::Domain(format!("pair {pair} outside vertex range 0..{}", self.n)));
        }
        Ok(if self.directed { pair } else { pair.normalized() })
    }

    /// Adds `[start, end)` to the activity of `pair`, merging overlaps.
    pub fn add_interval(&mut self, pair: Pair, start: f64, end: f64) -> Result<()> {
        let key = self.key(pair)?;
        if !(start.is_finite() && end.is_finite()) || start < 0.0 || end > self.horizon || end < start {
            return Err(Error::Domain(format!(
                "interval [{start}, {end}) for {pair} not inside [0, {}]",
                self.horizon
            )));
        }
        if end == start {
            return Ok(());
        }
        let list = self.activity.entry(key).or_default();
        list.push(Interval::new(start, end));
        list.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut merged: Vec<Interval> = Vec::with_capacity(list.len());
        for iv in list.drain(..) {
            match merged.last_mut() {
                Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
                _ => merged.push(iv),
            }
        }
        *list = merged;
        Ok(())
    }

    /// `C_ij(t)`.
    pub fn edge_active(&self, pair: Pair, t: f64) -> Result<bool> {
        let key = self.key(pair)?;
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!("t={t} outside [0, {}]", self.horizon)));
        }
        Ok(self.is_active_key(&key, t))
    }

    pub(crate) fn is_active_key(&self, key: &Pair, t: f64) -> bool {
        self.activity.get(key).is_some_and(|ivs| {
            let idx = ivs.partition_point(|iv| iv.end <= t);
            idx < ivs.len() && ivs[idx].contains(t)
        })
    }

    /// `sup_{u in [a,b]} C_ij(u)`.
    pub fn ever_active(&self, pair: Pair, a: f64, b: f64) -> bool {
        let Ok(key) = self.key(pair) else { return false };
        self.activity
            .get(&key)
            .is_some_and(|ivs| ivs.iter().any(|iv| iv.start <= b && iv.end > a))
    }

    pub fn intervals(&self, pair: Pair) -> &[Interval] {
        self.key(pair)
            .ok()
            .and_then(|k| self.activity.get(&k))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Pairs with at least one activity interval, in key order.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.activity.iter().filter(|(_, v)| !v.is_empty()).map(|(p, _)| *p)
    }

    pub fn activity(&self) -> impl Iterator<Item = (Pair, &[Interval])> + '_ {
        self.activity.iter().map(|(p, v)| (*p, v.as_slice()))
    }

    /// `E_{n,t}`: pairs active at `t`, in key order.
    pub fn active_pairs(&self, t: f64) -> Vec<Pair> {
        self.activity
            .keys()
            .filter(|p| self.is_active_key(p, t))
            .copied()
            .collect()
    }

    /// `sum_ij int_a^b C_ij(s) ds`.
    pub fn total_exposure(&self, a: f64, b: f64) -> f64 {
        self.activity
            .values()
            .flatten()
            .filter_map(|iv| iv.clip(a, b))
            .map(|iv| iv.len())
            .sum()
    }

    /// Applies a vertex permutation `v -> perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Domain("permutation length differs from vertex count".into()));
        }
        let mut out = Self::new(self.n, self.directed, self.horizon)?;
        for (p, ivs) in &self.activity {
            for iv in ivs {
                out.add_interval(Pair::new(perm[p.i], perm[p.j]), iv.start, iv.end)?;
            }
        }
        Ok(out)
    }

    /// Rescales time by `c > 0`.
    pub fn time_scaled(&self, c: f64) -> Result<Self> {
        let mut out = Self::new(self.n, self.directed, self.horizon * c)?;
        for (p, ivs) in &self.activity {
            out.activity.insert(
                *p,
                ivs.iter().map(|iv| Interval::new(iv.start * c, iv.end * c)).collect(),
            );
        }
        Ok(out)
    }
}
