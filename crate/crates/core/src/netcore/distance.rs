use super::{DynamicNetwork, Pair};
use crate::error::{Error, Result};
use rayon::prelude::*;
use std::collections::{HashMap, VecDeque};

const UNREACHED: u32 = u32::MAX;

/// Line-graph distances between the pairs active at time `t`.
///
/// Two active pairs are adjacent when they share a vertex. Distances larger
/// than the cap, or between pairs in different components, are infinite
/// (`None`); pairs inactive at `t` are infinitely far from everything.
#[derive(Debug, Clone)]
pub struct DistanceSnapshot {
    t: f64,
    directed: bool,
    cap: u32,
    pairs: Vec<Pair>,
    index: HashMap<Pair, usize>,
    dist: Vec<u32>,
}

/// Snapshot with the default cap `2n`.
pub fn pair_distance_snapshot(net: &DynamicNetwork, t: f64) -> Result<DistanceSnapshot> {
    let cap = 2 * net.vertex_count().max(1);
    DistanceSnapshot::with_cap(net, t, cap as u32)
}

impl DistanceSnapshot {
    pub fn with_cap(net: &DynamicNetwork, t: f64, cap: u32) -> Result<Self> {
        if !(0.0..=net.horizon()).contains(&t) {
            return Err(Error::Domain(format!("t={t} outside [0, {}]", net.horizon())));
        }
        let pairs = net.active_pairs(t);
        Ok(Self::from_pairs(t, net.is_directed(), net.vertex_count(), pairs, cap))
    }

    /// Builds the snapshot of an explicit active edge list.
    pub fn from_pairs(t: f64, directed: bool, n: usize, pairs: Vec<Pair>, cap: u32) -> Self {
        let m = pairs.len();
        let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, p) in pairs.iter().enumerate() {
            incidence[p.i].push(e);
            if p.j != p.i {
                incidence[p.j].push(e);
            }
        }
        let neighbors: Vec<Vec<usize>> = pairs
            .iter()
            .enumerate()
            .map(|(e, p)| {
                let mut nb: Vec<usize> = incidence[p.i]
                    .iter()
                    .chain(&incidence[p.j])
                    .copied()
                    .filter(|&f| f != e)
                    .collect();
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect();

        let mut dist = vec![UNREACHED; m * m];
        if m > 0 {
            dist.par_chunks_mut(m).enumerate().for_each(|(src, row)| {
                let mut queue = VecDeque::new();
                row[src] = 0;
                queue.push_back(src);
                while let Some(u) = queue.pop_front() {
                    let du = row[u];
                    if du >= cap {
                        continue;
                    }
                    for &v in &neighbors[u] {
                        if row[v] == UNREACHED {
                            row[v] = du + 1;
                            queue.push_back(v);
                        }
                    }
                }
            });
        }
        let index = pairs.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        Self { t, directed, cap, pairs, index, dist }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Active pairs in snapshot order.
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    fn key(&self, p: Pair) -> Pair {
        if self.directed {
            p
        } else {
            p.normalized()
        }
    }

    pub fn index_of(&self, p: Pair) -> Option<usize> {
        self.index.get(&self.key(p)).copied()
    }

    pub fn is_active(&self, p: Pair) -> bool {
        self.index_of(p).is_some()
    }

    /// Distance by snapshot index.
    pub fn dist_idx(&self, a: usize, b: usize) -> Option<u32> {
        let d = self.dist[a * self.pairs.len() + b];
        (d != UNREACHED && d <= self.cap).then_some(d)
    }

    /// `d_t(u, v)`; `None` means infinite.
    pub fn dist(&self, u: Pair, v: Pair) -> Option<u32> {
        let a = self.index_of(u)?;
        let b = self.index_of(v)?;
        self.dist_idx(a, b)
    }

    /// Distance of `u` to a set of pairs (minimum; infinite for the empty set).
    pub fn dist_to_set(&self, u: Pair, set: &[Pair]) -> Option<u32> {
        set.iter().filter_map(|&v| self.dist(u, v)).min()
    }

    /// Connected component label of every active pair (snapshot order), labels `0..k`.
    pub fn components(&self) -> Vec<usize> {
        let m = self.pairs.len();
        let mut label = vec![usize::MAX; m];
        let mut next = 0;
        for s in 0..m {
            if label[s] != usize::MAX {
                continue;
            }
            for (v, lv) in label.iter_mut().enumerate() {
                if *lv == usize::MAX && self.dist[s * m + v] != UNREACHED {
                    *lv = next;
                }
            }
            next += 1;
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> DynamicNetwork {
        DynamicNetwork::static_network(3, false, 1.0, [Pair::new(0, 1), Pair::new(1, 2)]).unwrap()
    }

    #[test]
    fn adjacent_and_identity() {
        let s = pair_distance_snapshot(&path3(), 0.5).unwrap();
        assert_eq!(s.dist(Pair::new(0, 1), Pair::new(1, 2)), Some(1));
        assert_eq!(s.dist(Pair::new(1, 0), Pair::new(0, 1)), Some(0));
        assert_eq!(s.dist(Pair::new(0, 2), Pair::new(0, 1)), None);
    }

    #[test]
    fn components_are_infinitely_far() {
        let net = DynamicNetwork::static_network(4, false, 1.0, [Pair::new(0, 1), Pair::new(2, 3)]).unwrap();
        let s = pair_distance_snapshot(&net, 0.0).unwrap();
        assert_eq!(s.dist(Pair::new(0, 1), Pair::new(2, 3)), None);
        assert_eq!(s.components(), vec![0, 1]);
    }

    #[test]
    fn cap_truncates() {
        let pairs: Vec<Pair> = (0..9).map(|i| Pair::new(i, i + 1)).collect();
        let net = DynamicNetwork::static_network(10, false, 1.0, pairs).unwrap();
        let s = DistanceSnapshot::with_cap(&net, 0.0, 3).unwrap();
        assert_eq!(s.dist(Pair::new(0, 1), Pair::new(3, 4)), Some(3));
        assert_eq!(s.dist(Pair::new(0, 1), Pair::new(4, 5)), None);
    }

    #[test]
    fn set_distance() {
        let s = pair_distance_snapshot(&path3(), 0.5).unwrap();
        assert_eq!(s.dist_to_set(Pair::new(0, 1), &[Pair::new(1, 2), Pair::new(0, 1)]), Some(0));
        assert_eq!(s.dist_to_set(Pair::new(0, 1), &[]), None);
    }
}
