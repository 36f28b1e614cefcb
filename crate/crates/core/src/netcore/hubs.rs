use super::{pair_distance_snapshot, DynamicNetwork, Pair};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Neighbour-activity counts `K_m^{(k,l)}(a, b)` and hub flags for a set of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HubReport {
    pub radius: u32,
    pub threshold: usize,
    pub window: (f64, f64),
    pub per_pair: BTreeMap<Pair, usize>,
    /// `K_m^A(a, b)`, the largest count.
    pub max_count: usize,
    pub hub_flags: BTreeMap<Pair, bool>,
    /// `N_UB`, the number of flagged pairs.
    pub hub_count: usize,
}

/// Counts, for each pair in `set`, the pairs at distance `< radius` (at time `a`)
/// that are active somewhere in `[a, b]`; flags counts `>= threshold` as hubs.
pub fn hub_report(
    net: &DynamicNetwork,
    set: &[Pair],
    radius: u32,
    threshold: usize,
    window: (f64, f64),
) -> Result<HubReport> {
    let (a, b) = window;
    if radius < 1 || threshold < 1 {
        return Err(Error::Domain("hub radius and threshold must be >= 1".into()));
    }
    if !(0.0 <= a && a <= b && b <= net.horizon()) {
        return Err(Error::Domain(format!("window [{a}, {b}] not inside [0, {}]", net.horizon())));
    }
    let snap = pair_distance_snapshot(net, a)?;
    let live: Vec<usize> = snap
        .pairs()
        .iter()
        .enumerate()
        .filter(|(_, p)| net.ever_active(**p, a, b))
        .map(|(k, _)| k)
        .collect();

    let mut per_pair = BTreeMap::new();
    let mut hub_flags = BTreeMap::new();
    for &target in set {
        let key = net.key(target)?;
        let count = match snap.index_of(key) {
            Some(t_idx) => live
                .iter()
                .filter(|&&k| snap.dist_idx(k, t_idx).is_some_and(|d| d < radius))
                .count(),
            None => 0,
        };
        per_pair.insert(key, count);
        hub_flags.insert(key, count >= threshold);
    }
    let max_count = per_pair.values().copied().max().unwrap_or(0);
    let hub_count = hub_flags.values().filter(|&&f| f).count();
    Ok(HubReport { radius, threshold, window, per_pair, max_count, hub_flags, hub_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_edge_counts_itself() {
        let net = DynamicNetwork::static_network(4, false, 1.0, [Pair::new(0, 1)]).unwrap();
        let r = hub_report(&net, &[Pair::new(0, 1)], 1, 2, (0.0, 1.0)).unwrap();
        assert_eq!(r.per_pair[&Pair::new(0, 1)], 1);
        assert!(!r.hub_flags[&Pair::new(0, 1)]);
        assert_eq!(r.hub_count, 0);
    }

    #[test]
    fn star_center_is_hub() {
        let pairs: Vec<Pair> = (1..=5).map(|j| Pair::new(0, j)).collect();
        let net = DynamicNetwork::static_network(6, false, 1.0, pairs.clone()).unwrap();
        let r = hub_report(&net, &pairs, 2, 5, (0.0, 0.5)).unwrap();
        for p in &pairs {
            assert_eq!(r.per_pair[p], 5);
            assert!(r.hub_flags[p]);
        }
        assert_eq!(r.max_count, 5);
        assert_eq!(r.hub_count, 5);
    }

    #[test]
    fn inactive_network_has_zero_counts() {
        let net = DynamicNetwork::new(4, false, 1.0).unwrap();
        let r = hub_report(&net, &[Pair::new(0, 1), Pair::new(2, 3)], 3, 1, (0.0, 1.0)).unwrap();
        assert!(r.per_pair.values().all(|&c| c == 0));
        assert_eq!(r.max_count, 0);
    }

    #[test]
    fn empty_set_is_valid() {
        let net = DynamicNetwork::new(4, false, 1.0).unwrap();
        let r = hub_report(&net, &[], 3, 1, (0.0, 1.0)).unwrap();
        assert!(r.per_pair.is_empty());
        assert_eq!(r.hub_count, 0);
    }
}
