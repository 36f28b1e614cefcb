use super::PartitionAssignment;
use crate::error::Result;
use crate::netcore::{DistanceSnapshot, DynamicNetwork, Pair};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    /// Disjoint blocks and same-type separation both hold.
    pub ok: bool,
    pub disjoint: bool,
    pub separated: bool,
    /// Smallest distance between different same-type blocks when below delta.
    pub worst_violation: Option<u32>,
    pub active_pairs: usize,
    pub covered_active: usize,
    /// Every active pair belongs to some block.
    pub covers_active: bool,
    pub uncovered: Vec<Pair>,
}

/// Exhaustively checks the partition conditions at time `p.t`.
///
/// Pairs inactive at `t` are infinitely far from everything, so they never
/// violate separation. Coverage of the active edge set is reported but does
/// not affect `ok`.
pub fn validate_partition(p: &PartitionAssignment, net: &DynamicNetwork) -> Result<PartitionReport> {
    let cap = net.pair_count().max(2 * net.vertex_count()).max(p.delta as usize) as u32;
    let snap = DistanceSnapshot::with_cap(net, p.t, cap)?;
    let keyed: Vec<(Pair, (usize, usize))> =
        p.assign.iter().map(|(&q, &c)| (net.key(q), c)).map(|(q, c)| q.map(|q| (q, c))).collect::<Result<_>>()?;
    let mut sorted: Vec<Pair> = keyed.iter().map(|(q, _)| *q).collect();
    sorted.sort();
    let disjoint = sorted.windows(2).all(|w| w[0] != w[1]);
    let located: Vec<(usize, (usize, usize))> =
        keyed.iter().filter_map(|(q, c)| snap.index_of(*q).map(|i| (i, *c))).collect();
    let worst = (0..located.len())
        .into_par_iter()
        .filter_map(|a| {
            let (ia, ca) = located[a];
            located[a + 1..]
                .iter()
                .filter(|(_, cb)| cb.0 == ca.0 && cb.1 != ca.1)
                .filter_map(|&(ib, _)| snap.dist_idx(ia, ib))
                .filter(|&d| d < p.delta)
                .min()
        })
        .min();
    let covered_active = located.len();
    let uncovered: Vec<Pair> = snap.pairs().iter().copied().filter(|q| !p.assign.contains_key(q)).collect();
    let separated = worst.is_none();
    Ok(PartitionReport {
        ok: disjoint && separated,
        disjoint,
        separated,
        worst_violation: worst,
        active_pairs: snap.pairs().len(),
        covered_active,
        covers_active: uncovered.is_empty(),
        uncovered,
    })
}
