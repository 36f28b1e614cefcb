use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};
use std::collections::BTreeMap;

/// Counting processes `N_ij` stored as strictly increasing event times per pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    horizon: f64,
    events: BTreeMap<Pair, Vec<f64>>,
}

impl EventLog {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, events: BTreeMap::new() }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Inserts one event; times must lie in `[0, T]` and be distinct per pair.
    pub fn push(&mut self, pair: Pair, t: f64) -> Result<()> {
        if pair.i == pair.j {
            return Err(Error::Domain(format!("loop pair {pair} in event log")));
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!("event time {t} outside [0, {}]", self.horizon)));
        }
        let list = self.events.entry(pair).or_default();
        let pos = list.partition_point(|&s| s < t);
        if list.get(pos) == Some(&t) {
            return Err(Error::Data(format!("duplicate event time {t} for {pair}")));
        }
        list.insert(pos, t);
        Ok(())
    }

    /// Replaces the times of one pair; they are sorted and must be distinct.
    pub fn set_times(&mut self, pair: Pair, mut times: Vec<f64>) -> Result<()> {
        times.sort_by(f64::total_cmp);
        if times.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Data(format!("duplicate event times for {pair}")));
        }
        if times.iter().any(|t| !(0.0..=self.horizon).contains(t)) {
            return Err(Error::Domain(format!("event times of {pair} outside [0, {}]", self.horizon)));
        }
        if times.is_empty() {
            self.events.remove(&pair);
        } else {
            self.events.insert(pair, times);
        }
        Ok(())
    }

    pub fn times(&self, pair: Pair) -> &[f64] {
        self.events.get(&pair).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.events.keys().copied()
    }

    pub fn per_pair(&self) -> impl Iterator<Item = (Pair, &[f64])> + '_ {
        self.events.iter().map(|(p, v)| (*p, v.as_slice()))
    }

    pub fn total_count(&self) -> usize {
        self.events.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_count() == 0
    }

    /// `N_ij(b) - N_ij(a)` counting events in `[a, b)`.
    pub fn count_in(&self, pair: Pair, a: f64, b: f64) -> usize {
        let ts = self.times(pair);
        ts.partition_point(|&t| t < b) - ts.partition_point(|&t| t < a)
    }

    /// `N_ij(t)`, events in `[0, t]`.
    pub fn count_until(&self, pair: Pair, t: f64) -> usize {
        self.times(pair).partition_point(|&s| s <= t)
    }

    /// All events as `(time, pair)`, sorted by time with ties broken by pair order.
    pub fn sorted_events(&self) -> Vec<(f64, Pair)> {
        let mut all: Vec<(f64, Pair)> = self
            .events
            .iter()
            .flat_map(|(p, ts)| ts.iter().map(move |&t| (t, *p)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all
    }

    /// Checks the pairs against the vertex set of `net`.
    pub fn validate(&self, net: &DynamicNetwork) -> Result<()> {
        for p in self.events.keys() {
            let key = net.key(*p)?;
            if key != *p {
                return Err(Error::Data(format!("event pair {p} not in normalized form {key}")));
            }
        }
        Ok(())
    }

    pub fn relabeled(&self, perm: &[usize], directed: bool) -> Self {
        let mut out = Self::new(self.horizon);
        for (p, ts) in &self.events {
            let mut q = Pair::new(perm[p.i], perm[p.j]);
            if !directed {
                q = q.normalized();
            }
            out.events.insert(q, ts.clone());
        }
        out
    }

    pub fn time_scaled(&self, c: f64) -> Self {
        Self {
            horizon: self.horizon * c,
            events: self
                .events
                .iter()
                .map(|(p, ts)| (*p, ts.iter().map(|t| t * c).collect()))
                .collect(),
        }
    }

    /// Restriction to events in `[a, b]`, shifted so that `a` becomes time 0.
    pub fn window(&self, a: f64, b: f64) -> Self {
        let mut out = Self::new(b - a);
        for (p, ts) in &self.events {
            let kept: Vec<f64> = ts.iter().filter(|&&t| t >= a && t <= b).map(|t| t - a).collect();
            if !kept.is_empty() {
                out.events.insert(*p, kept);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_keeps_order_and_rejects_duplicates() {
        let mut log = EventLog::new(5.0);
        let p = Pair::new(0, 1);
        log.push(p, 3.0).unwrap();
        log.push(p, 1.0).unwrap();
        assert_eq!(log.times(p), &[1.0, 3.0]);
        assert!(log.push(p, 3.0).is_err());
        assert!(log.push(p, 6.0).is_err());
        assert_eq!(log.count_in(p, 1.0, 3.0), 1);
        assert_eq!(log.count_until(p, 3.0), 2);
    }

    #[test]
    fn sorted_events_break_ties_by_pair() {
        let mut log = EventLog::new(5.0);
        log.push(Pair::new(2, 3), 1.0).unwrap();
        log.push(Pair::new(0, 1), 1.0).unwrap();
        log.push(Pair::new(0, 1), 0.5).unwrap();
        let ev = log.sorted_events();
        assert_eq!(ev, vec![(0.5, Pair::new(0, 1)), (1.0, Pair::new(0, 1)), (1.0, Pair::new(2, 3))]);
    }
}
