use super::{number_blocks, PartitionAssignment};
use crate::error::{Error, Result};
use crate::netcore::{DistanceSnapshot, DynamicNetwork, Pair};
use nalgebra::{DMatrix, SymmetricEigen};

/// Exact line-graph distances at `t` (the cap exceeds any finite distance).
fn exact_snapshot(net: &DynamicNetwork, t: f64) -> Result<DistanceSnapshot> {
    let cap = net.pair_count().min(u32::MAX as usize - 1).max(2 * net.vertex_count()) as u32;
    DistanceSnapshot::with_cap(net, t, cap)
}

fn parity_type(cell: &[i64]) -> usize {
    cell.iter().enumerate().map(|(a, &c)| (c.rem_euclid(2) as usize) << a).sum()
}

/// Chessboard grouping of the anchor-distance coordinates of the active pairs.
///
/// Pair `u` gets coordinates `(d_t(u, e_1), ..., d_t(u, e_d))`; cells have side
/// `delta` and the type is the parity pattern of the cell, giving `2^d` types.
/// Since `d_t(u, v) >= |d_t(u, e_a) - d_t(v, e_a)|`, same-type pairs in different
/// cells are more than `delta` apart. Pairs with an infinite coordinate go to
/// one extra type with one block per connected component.
pub fn coordinate_partition(net: &DynamicNetwork, t: f64, anchors: &[Pair], delta: u32) -> Result<PartitionAssignment> {
    if anchors.is_empty() {
        return Err(Error::Config("coordinate partition needs at least one anchor".into()));
    }
    if delta == 0 {
        return Err(Error::Config("delta must be at least 1".into()));
    }
    let snap = exact_snapshot(net, t)?;
    let anchors: Vec<Pair> = anchors
        .iter()
        .map(|&a| {
            let key = net.key(a)?;
            if snap.index_of(key).is_none() {
                return Err(Error::Config(format!("anchor {a} is not active at t={t}")));
            }
            Ok(key)
        })
        .collect::<Result<_>>()?;
    let d = anchors.len();
    let reserved = 1usize << d;
    let components = snap.components();
    let mut raw: Vec<(Pair, usize, Vec<i64>)> = Vec::new();
    let mut any_reserved = false;
    for (idx, &p) in snap.pairs().iter().enumerate() {
        let coords: Option<Vec<i64>> = anchors.iter().map(|&a| snap.dist(p, a).map(i64::from)).collect();
        match coords {
            Some(c) => {
                let cell: Vec<i64> = c.iter().map(|&x| x.div_euclid(delta as i64)).collect();
                let key: Vec<i64> = cell.iter().rev().copied().collect();
                raw.push((p, parity_type(&cell), key));
            }
            None => {
                any_reserved = true;
                raw.push((p, reserved, vec![components[idx] as i64]));
            }
        }
    }
    let assign = number_blocks(raw);
    Ok(PartitionAssignment {
        t,
        delta,
        type_count: reserved + usize::from(any_reserved),
        assign,
        reserved_type: any_reserved.then_some(reserved),
        degenerate: false,
    })
}

#[derive(Debug, Clone)]
pub struct MdsPartition {
    pub partition: PartitionAssignment,
    /// Smallest distance between different blocks of one type (the requested
    /// delta when no such pair exists).
    pub achieved_delta: u32,
    /// Embedding dimension actually used per component.
    pub dims_used: Vec<usize>,
    pub embedding: Vec<(Pair, Vec<f64>)>,
}

/// Classical multidimensional scaling of one component's distance matrix.
fn classical_mds(dist: &DMatrix<f64>, dim: usize) -> (DMatrix<f64>, usize) {
    let m = dist.nrows();
    let sq = dist.map(|x| x * x);
    let j = DMatrix::<f64>::identity(m, m) - DMatrix::from_element(m, m, 1.0 / m as f64);
    let b = -0.5 * &j * sq * &j;
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
    let tol = 1e-9 * eig.eigenvalues.amax().max(1.0);
    let used: Vec<usize> = order.into_iter().take(dim).filter(|&k| eig.eigenvalues[k] > tol).collect();
    let mut x = DMatrix::zeros(m, dim);
    for (col, &k) in used.iter().enumerate() {
        let s = eig.eigenvalues[k].sqrt();
        for r in 0..m {
            x[(r, col)] = eig.eigenvectors[(r, k)] * s;
        }
    }
    (x, used.len())
}

/// Embeds each connected component by classical MDS into `dim` dimensions and
/// groups the embedded points in a chessboard with cells of side `delta`.
///
/// Embedded distances only approximate graph distances, so the result is
/// re-certified: `achieved_delta` is the largest delta for which the
/// separation condition actually holds, and the partition carries that value.
pub fn mds_partition(net: &DynamicNetwork, t: f64, dim: usize, delta: u32) -> Result<MdsPartition> {
    if dim == 0 || delta == 0 {
        return Err(Error::Config("mds partition needs dim >= 1 and delta >= 1".into()));
    }
    let snap = exact_snapshot(net, t)?;
    let pairs = snap.pairs().to_vec();
    let components = snap.components();
    let ncomp = components.iter().max().map_or(0, |&c| c + 1);
    let mut raw: Vec<(Pair, usize, Vec<i64>)> = Vec::with_capacity(pairs.len());
    let mut embedding = Vec::with_capacity(pairs.len());
    let mut dims_used = Vec::with_capacity(ncomp);
    for comp in 0..ncomp {
        let members: Vec<usize> = (0..pairs.len()).filter(|&i| components[i] == comp).collect();
        let m = members.len();
        let dist = DMatrix::from_fn(m, m, |a, b| {
            snap.dist_idx(members[a], members[b]).expect("finite within a component") as f64
        });
        let (x, used) = classical_mds(&dist, dim);
        if used < dim && m > used + 1 {
            log::warn!("component {comp}: only {used} positive eigenvalues, embedding in {used} dimensions");
        }
        dims_used.push(used);
        for (r, &i) in members.iter().enumerate() {
            let point: Vec<f64> = (0..dim).map(|c| x[(r, c)]).collect();
            let cell: Vec<i64> = point.iter().map(|&v| (v / delta as f64).floor() as i64).collect();
            let mut key = vec![comp as i64];
            key.extend(cell.iter().rev());
            raw.push((pairs[i], parity_type(&cell), key));
            embedding.push((pairs[i], point));
        }
    }
    let assign = number_blocks(raw);
    let mut achieved: Option<u32> = None;
    let cells: Vec<(usize, usize)> = pairs.iter().map(|p| assign[p]).collect();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            if cells[a].0 == cells[b].0 && cells[a].1 != cells[b].1 {
                if let Some(d) = snap.dist_idx(a, b) {
                    achieved = Some(achieved.map_or(d, |x| x.min(d)));
                }
            }
        }
    }
    let achieved_delta = achieved.unwrap_or(delta);
    let blocks = assign.values().collect::<std::collections::BTreeSet<_>>().len();
    let partition = PartitionAssignment {
        t,
        delta: achieved_delta,
        type_count: 1 << dim,
        assign,
        reserved_type: None,
        degenerate: blocks <= 1,
    };
    Ok(MdsPartition { partition, achieved_delta, dims_used, embedding })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> DynamicNetwork {
        DynamicNetwork::static_network(n, false, 1.0, (0..n - 1).map(|i| Pair::new(i, i + 1))).unwrap()
    }

    #[test]
    fn path_runs_of_two() {
        let net = path(9);
        let p = coordinate_partition(&net, 0.5, &[Pair::new(0, 1)], 2).unwrap();
        let blocks: Vec<(usize, usize)> = (0..8).map(|i| p.assign[&Pair::new(i, i + 1)]).collect();
        assert_eq!(blocks, vec![(0, 0), (0, 0), (1, 0), (1, 0), (0, 1), (0, 1), (1, 1), (1, 1)]);
        assert_eq!(p.reserved_type, None);
    }

    #[test]
    fn inactive_anchor_is_config_error() {
        let net = path(4);
        let err = coordinate_partition(&net, 0.5, &[Pair::new(0, 3)], 2).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn unreachable_pairs_get_reserved_blocks() {
        let net = DynamicNetwork::static_network(6, false, 1.0, [Pair::new(0, 1), Pair::new(2, 3), Pair::new(4, 5)]).unwrap();
        let p = coordinate_partition(&net, 0.5, &[Pair::new(0, 1)], 1).unwrap();
        assert_eq!(p.type_count, 3);
        assert_eq!(p.assign[&Pair::new(2, 3)], (2, 0));
        assert_eq!(p.assign[&Pair::new(4, 5)], (2, 1));
    }

    #[test]
    fn mds_single_edge() {
        let net = path(2);
        let r = mds_partition(&net, 0.5, 2, 3).unwrap();
        assert_eq!(r.achieved_delta, 3);
        assert!(r.partition.degenerate);
    }

    #[test]
    fn mds_recovers_path_order() {
        let net = path(12);
        let r = mds_partition(&net, 0.5, 1, 2).unwrap();
        let xs: Vec<f64> = (0..11)
            .map(|i| r.embedding.iter().find(|(p, _)| *p == Pair::new(i, i + 1)).unwrap().1[0])
            .collect();
        let increasing = xs.windows(2).all(|w| w[1] > w[0]);
        let decreasing = xs.windows(2).all(|w| w[1] < w[0]);
        assert!(increasing || decreasing);
        assert!(r.achieved_delta >= 1);
    }
}
