//! Delta-partitions of the pair set and empirical beta-mixing estimates.
//!
//! A partition assigns each covered pair to a block `(k, m)`: `k` is the block
//! type, `m` the block number within that type. Both are 0-based. Blocks of the
//! same type must be at line-graph distance at least `delta` from each other.

mod beta;
mod coords;
mod grid;
mod validate;

pub use beta::{binned_beta, block_sums, estimate_beta, BetaEstimate, BlockSums};
pub use coords::{coordinate_partition, mds_partition, MdsPartition};
pub use grid::{grid_blocks, grid_chessboard, GridSpec};
pub use validate::{validate_partition, PartitionReport};

use crate::netcore::Pair;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    pub t: f64,
    pub delta: u32,
    pub type_count: usize,
    pub assign: BTreeMap<Pair, (usize, usize)>,
    /// Type holding pairs with an infinite coordinate, one block per component.
    pub reserved_type: Option<usize>,
    /// Set when the construction collapsed to a single block.
    pub degenerate: bool,
}

impl PartitionAssignment {
    pub fn covered(&self) -> impl Iterator<Item = Pair> + '_ {
        self.assign.keys().copied()
    }

    pub fn block_of(&self, pair: Pair) -> Option<(usize, usize)> {
        self.assign.get(&pair).copied()
    }

    /// Pairs of block `(k, m)` in pair order.
    pub fn block(&self, k: usize, m: usize) -> Vec<Pair> {
        self.assign.iter().filter(|(_, &c)| c == (k, m)).map(|(p, _)| *p).collect()
    }

    /// Number of blocks of each type.
    pub fn blocks_per_type(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.type_count];
        for &(k, m) in self.assign.values() {
            if k < counts.len() {
                counts[k] = counts[k].max(m + 1);
            }
        }
        counts
    }

    /// The same partition after relabelling vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[usize], directed: bool) -> Self {
        let assign = self
            .assign
            .iter()
            .map(|(p, &c)| {
                let q = Pair::new(perm[p.i], perm[p.j]);
                (if directed { q } else { q.normalized() }, c)
            })
            .collect();
        Self { assign, ..self.clone() }
    }
}

/// Relabels blocks so that, within each type, numbers follow the order of the keys.
pub(crate) fn number_blocks<K: Ord + Clone>(
    cells: impl IntoIterator<Item = (Pair, usize, K)>,
) -> BTreeMap<Pair, (usize, usize)> {
    let cells: Vec<(Pair, usize, K)> = cells.into_iter().collect();
    let mut keys: BTreeMap<usize, std::collections::BTreeSet<K>> = BTreeMap::new();
    for (_, k, key) in &cells {
        keys.entry(*k).or_default().insert(key.clone());
    }
    let rank: BTreeMap<(usize, K), usize> = keys
        .into_iter()
        .flat_map(|(k, set)| set.into_iter().enumerate().map(move |(m, key)| ((k, key), m)))
        .collect();
    cells.into_iter().map(|(p, k, key)| (p, (k, rank[&(k, key)]))).collect()
}
