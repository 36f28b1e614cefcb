//! Dynamic networks: vertex pairs, activity intervals, line-graph distances
//! and hub statistics.

mod distance;
mod hubs;
mod network;

pub use distance::{pair_distance_snapshot, DistanceSnapshot};
pub use hubs::{hub_report, HubReport};
pub use network::{DynamicNetwork, Interval};

use serde::{Deserialize, Serialize};
use std::fmt;

/// An ordered pair of vertices `(i, j)`, `i != j`.
///
/// Undirected networks always store the normalized form with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
}

impl Pair {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }

    /// Same pair with `i < j`.
    pub fn normalized(self) -> Self {
        if self.i <= self.j {
            self
        } else {
            Self { i: self.j, j: self.i }
        }
    }

    pub fn shares_vertex(&self, other: &Pair) -> bool {
        self.i == other.i || self.i == other.j || self.j == other.i || self.j == other.j
    }

    pub fn vertices(&self) -> [usize; 2] {
        [self.i, self.j]
    }

    /// Stable 64-bit key, independent of the vertex count.
    pub fn key(&self) -> u64 {
        ((self.i as u64) << 32) | (self.j as u64 & 0xffff_ffff)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl From<(usize, usize)> for Pair {
    fn from((i, j): (usize, usize)) -> Self {
        Pair::new(i, j)
    }
}
