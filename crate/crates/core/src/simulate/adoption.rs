use super::events::EventLog;
use super::rng::{self, domain};
use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

/// Stochastic block model: iid group labels drawn from `membership`, then
/// independent edges with probability `q[g(i)][g(j)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockModel {
    pub membership: Vec<f64>,
    pub q: Vec<Vec<f64>>,
}

impl BlockModel {
    pub fn groups(&self) -> usize {
        self.membership.len()
    }

    fn validate(&self) -> Result<()> {
        let g = self.groups();
        if g == 0 {
            return Err(Error::Config("block model needs at least one group".into()));
        }
        if self.membership.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Config("membership probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = self.membership.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("membership probabilities sum to {total}")));
        }
        if self.q.len() != g || self.q.iter().any(|row| row.len() != g) {
            return Err(Error::Config(format!("Q must be {g}x{g}")));
        }
        for a in 0..g {
            for b in 0..g {
                let v = self.q[a][b];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Config(format!("Q[{a}][{b}]={v} outside [0,1]")));
                }
                if v != self.q[b][a] {
                    return Err(Error::Config("Q must be symmetric".into()));
                }
            }
        }
        Ok(())
    }

    fn draw_group(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (g, p) in self.membership.iter().enumerate() {
            acc += p;
            if u < acc {
                return g;
            }
        }
        self.groups() - 1
    }
}

/// Law of the iid perceptions `U_ij >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum PerceptionLaw {
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
}

impl Default for PerceptionLaw {
    fn default() -> Self {
        PerceptionLaw::Uniform { low: 0.0, high: 1.0 }
    }
}

impl PerceptionLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            PerceptionLaw::Uniform { low, high } if low >= 0.0 && high > low && high.is_finite() => Ok(()),
            PerceptionLaw::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            other => Err(Error::Config(format!("invalid perception law {other:?}"))),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            PerceptionLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            PerceptionLaw::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
        }
    }
}

/// Information delays `delta_{source,target}` between neighbouring pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum Delays {
    Constant(f64),
    /// Keyed by `(source, target)`; every connected neighbour pair needs an entry.
    Table(HashMap<(Pair, Pair), f64>),
}

impl Delays {
    fn get(&self, source: Pair, target: Pair) -> Result<f64> {
        let d = match self {
            Delays::Constant(d) => *d,
            Delays::Table(t) => *t.get(&(source, target)).ok_or_else(|| {
                Error::Config(format!("delay table has no entry for {source} -> {target}"))
            })?,
        };
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Config(format!("delay {d} for {source} -> {target} must be positive")));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionConfig {
    pub n: usize,
    pub block_model: BlockModel,
    pub perception: PerceptionLaw,
    pub alpha0: f64,
    pub theta0: f64,
    pub delays: Delays,
    pub horizon: f64,
}

#[derive(Debug, Clone)]
pub struct AdoptionOutcome {
    pub network: DynamicNetwork,
    pub events: EventLog,
    pub groups: Vec<usize>,
    pub perceptions: BTreeMap<Pair, f64>,
    /// First time the threshold is crossed, `None` if it never is before the horizon.
    pub adoption: BTreeMap<Pair, Option<f64>>,
}

#[derive(PartialEq)]
struct Scheduled {
    time: f64,
    idx: usize,
    version: u32,
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    // min-heap on (time, pair order)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First `t` with `u + alpha * sum_s (t - s)_+ > theta0`, given sorted start times `s`.
fn crossing_time(u: f64, alpha: f64, theta0: f64, starts: &[f64]) -> Option<f64> {
    if u > theta0 {
        return Some(0.0);
    }
    if alpha <= 0.0 {
        return None;
    }
    // pressure is u + alpha * (k t - sum_{first k} s) on [s_k, s_{k+1})
    let mut sum = 0.0;
    for (k, &s) in starts.iter().enumerate() {
        sum += s;
        let slope = alpha * (k + 1) as f64;
        let t = (theta0 - u + alpha * sum) / slope;
        let next = starts.get(k + 1).copied().unwrap_or(f64::INFINITY);
        if t < next {
            return Some(t.max(s));
        }
    }
    None
}

/// Runs the threshold cascade on a fixed static network with given perceptions.
///
/// A pair adopts at the first time its perception plus `alpha0` times the
/// accumulated delayed adoption time of its neighbours (pairs sharing a vertex)
/// exceeds `theta0`. Adoptions are processed from a global priority queue;
/// each one reschedules its neighbours. Ties are broken by pair order.
pub fn propagate_adoption(
    net: &DynamicNetwork,
    perceptions: &BTreeMap<Pair, f64>,
    alpha0: f64,
    theta0: f64,
    delays: &Delays,
) -> Result<BTreeMap<Pair, Option<f64>>> {
    if !(alpha0 >= 0.0) || !alpha0.is_finite() {
        return Err(Error::Config(format!("alpha0={alpha0} must be finite and nonnegative")));
    }
    let pairs: Vec<Pair> = net.pairs().collect();
    let mut by_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, p) in pairs.iter().enumerate() {
        by_vertex.entry(p.i).or_default().push(k);
        if p.j != p.i {
            by_vertex.entry(p.j).or_default().push(k);
        }
    }
    let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); pairs.len()];
    for (k, p) in pairs.iter().enumerate() {
        let mut nb: Vec<usize> = p.vertices().iter().flat_map(|v| by_vertex[v].iter().copied()).filter(|&m| m != k).collect();
        nb.sort_unstable();
        nb.dedup();
        for m in nb {
            neighbours[k].push((m, delays.get(*p, pairs[m])?));
        }
    }
    let u: Vec<f64> = pairs
        .iter()
        .map(|p| {
            perceptions
                .get(p)
                .copied()
                .ok_or_else(|| Error::Config(format!("no perception for {p}")))
        })
        .collect::<Result<_>>()?;
    let horizon = net.horizon();
    let mut starts: Vec<Vec<f64>> = vec![Vec::new(); pairs.len()];
    let mut version = vec![0u32; pairs.len()];
    let mut adopted: Vec<Option<f64>> = vec![None; pairs.len()];
    let mut heap = BinaryHeap::new();
    for (k, &uk) in u.iter().enumerate() {
        if let Some(t) = crossing_time(uk, alpha0, theta0, &[]) {
            heap.push(Scheduled { time: t, idx: k, version: 0 });
        }
    }
    while let Some(Scheduled { time, idx, version: v }) = heap.pop() {
        if v != version[idx] || adopted[idx].is_some() || time > horizon {
            continue;
        }
        adopted[idx] = Some(time);
        for &(m, delay) in &neighbours[idx] {
            if adopted[m].is_some() {
                continue;
            }
            let s = time + delay;
            let list = &mut starts[m];
            let pos = list.partition_point(|&x| x <= s);
            list.insert(pos, s);
            version[m] += 1;
            if let Some(t) = crossing_time(u[m], alpha0, theta0, list) {
                heap.push(Scheduled { time: t, idx: m, version: version[m] });
            }
        }
    }
    Ok(pairs.into_iter().zip(adopted).collect())
}

/// Draws a block-model network, iid perceptions and the resulting adoption
/// cascade. Each adoption before the horizon is a single event in the log.
pub fn simulate_adoption(cfg: &AdoptionConfig, seed: u64) -> Result<AdoptionOutcome> {
    cfg.block_model.validate()?;
    cfg.perception.validate()?;
    if !(cfg.horizon > 0.0) {
        return Err(Error::Config(format!("horizon {} must be positive", cfg.horizon)));
    }
    let groups: Vec<usize> = (0..cfg.n)
        .map(|v| {
            let mut r = rng::stream(seed, domain::ADOPTION_GROUPS, v as u64);
            cfg.block_model.draw_group(r.random::<f64>())
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..cfg.n {
        for j in i + 1..cfg.n {
            let p = Pair::new(i, j);
            let mut r = rng::stream(seed, domain::ADOPTION_NETWORK, p.key());
            if r.random::<f64>() < cfg.block_model.q[groups[i]][groups[j]] {
                edges.push(p);
            }
        }
    }
    let network = DynamicNetwork::static_network(cfg.n, false, cfg.horizon, edges.iter().copied())?;
    let perceptions: BTreeMap<Pair, f64> = edges
        .iter()
        .map(|&p| {
            let mut r = rng::stream(seed, domain::ADOPTION_PERCEPTION, p.key());
            (p, cfg.perception.sample(&mut r))
        })
        .collect();
    let adoption = propagate_adoption(&network, &perceptions, cfg.alpha0, cfg.theta0, &cfg.delays)?;
    let mut events = EventLog::new(cfg.horizon);
    for (p, t) in &adoption {
        if let Some(t) = t {
            events.push(*p, *t)?;
        }
    }
    Ok(AdoptionOutcome { network, events, groups, perceptions, adoption })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_time_cases() {
        assert_eq!(crossing_time(0.9, 0.5, 0.5, &[]), Some(0.0));
        assert_eq!(crossing_time(0.1, 0.5, 0.5, &[]), None);
        // u + 0.5 (t - 1) > 0.5 at t = 1.8
        let t = crossing_time(0.1, 0.5, 0.5, &[1.0]).unwrap();
        assert!((t - 1.8).abs() < 1e-12);
        // second contribution before the first alone would cross
        let t = crossing_time(0.1, 0.5, 0.5, &[1.0, 1.2]).unwrap();
        // 0.1 + 0.5 (t-1) + 0.5 (t-1.2) = 0.5 -> t = 1.5
        assert!((t - 1.5).abs() < 1e-12);
    }

    #[test]
    fn missing_delay_entry_is_config_error() {
        let net = DynamicNetwork::static_network(3, false, 1.0, [Pair::new(0, 1), Pair::new(1, 2)]).unwrap();
        let u: BTreeMap<_, _> = [(Pair::new(0, 1), 0.0), (Pair::new(1, 2), 0.0)].into();
        let mut table = HashMap::new();
        table.insert((Pair::new(0, 1), Pair::new(1, 2)), 0.1);
        let err = propagate_adoption(&net, &u, 0.1, 0.5, &Delays::Table(table)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
