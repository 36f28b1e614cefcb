use super::{number_blocks, PartitionAssignment};
use crate::error::{Error, Result};
use crate::netcore::{DynamicNetwork, Pair};

/// Rectangular grid or torus. Vertex `x` has id `x_0 + dims_0 (x_1 + dims_1 (...))`
/// and anchors one edge per direction towards `x + e_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub torus: bool,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, torus: bool) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Config(format!("invalid grid dimensions {dims:?}")));
        }
        if torus && dims.iter().any(|&d| d < 3) {
            return Err(Error::Config("torus sides must be at least 3".into()));
        }
        Ok(Self { dims, torus })
    }

    pub fn vertex_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn vertex_id(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.dims).rev().fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn coords(&self, mut v: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let c = v % d;
                v /= d;
                c
            })
            .collect()
    }

    /// All edges with their anchor coordinates, ordered by anchor id then direction.
    pub fn edges(&self) -> Vec<(Pair, Vec<usize>)> {
        let mut out = Vec::new();
        for v in 0..self.vertex_count() {
            let x = self.coords(v);
            for a in 0..self.dims.len() {
                let mut y = x.clone();
                if x[a] + 1 < self.dims[a] {
                    y[a] += 1;
                } else if self.torus {
                    y[a] = 0;
                } else {
                    continue;
                }
                out.push((Pair::new(v, self.vertex_id(&y)).normalized(), x.clone()));
            }
        }
        out
    }

    pub fn network(&self, horizon: f64) -> Result<DynamicNetwork> {
        DynamicNetwork::static_network(self.vertex_count(), false, horizon, self.edges().into_iter().map(|(p, _)| p))
    }
}

/// Cell index of every coordinate along one axis of length `side`.
fn axis_cells(side: usize, block: usize, torus: bool) -> Vec<usize> {
    let mut count = side.div_ceil(block);
    // on a torus a short last cell would sit between two full ones, so merge it
    if torus && count > 1 && !side.is_multiple_of(block) {
        count -= 1;
    }
    (0..side).map(|x| (x / block).min(count - 1)).collect()
}

/// Type component of each cell along one axis, cycling with `period`.
///
/// On a torus the cells after the last complete period get their own
/// components so that equal components never meet across the seam.
fn axis_types(count: usize, period: usize, torus: bool) -> Vec<usize> {
    let full = if torus { count - count % period } else { count };
    (0..count).map(|c| if c < full { c % period } else { period + (c - full) }).collect()
}

/// Generalized chessboard: cells of side `block` along every axis, type given
/// by the cell index modulo `period` per axis.
///
/// Different blocks of one type are separated by at least `period - 1` full
/// cells along some axis, so their line-graph distance is at least
/// `(period - 1) * block + 1`, which becomes the partition's delta.
pub fn grid_blocks(grid: &GridSpec, t: f64, block: usize, period: usize) -> Result<PartitionAssignment> {
    if block == 0 || period < 2 {
        return Err(Error::Config(format!("block={block}, period={period}: need block >= 1 and period >= 2")));
    }
    let cells: Vec<Vec<usize>> = grid.dims.iter().map(|&s| axis_cells(s, block, grid.torus)).collect();
    let counts: Vec<usize> = cells.iter().map(|c| c.last().map_or(0, |&m| m + 1)).collect();
    let types: Vec<Vec<usize>> = counts.iter().map(|&c| axis_types(c, period, grid.torus)).collect();
    let radix: Vec<usize> = types.iter().map(|t| t.iter().max().map_or(1, |&m| m + 1)).collect();
    let mut raw = Vec::new();
    for (pair, x) in grid.edges() {
        let cell: Vec<usize> = x.iter().enumerate().map(|(a, &c)| cells[a][c]).collect();
        let ty = cell.iter().enumerate().rev().fold(0, |acc, (a, &c)| acc * radix[a] + types[a][c]);
        // row-major: the last axis varies slowest
        let order: Vec<usize> = cell.iter().rev().copied().collect();
        raw.push((pair, ty, order));
    }
    let mut used: Vec<usize> = raw.iter().map(|(_, k, _)| *k).collect();
    used.sort_unstable();
    used.dedup();
    let compact = |k: usize| used.binary_search(&k).expect("type in use");
    let assign = number_blocks(raw.into_iter().map(|(p, k, o)| (p, compact(k), o)));
    let total_blocks: usize = counts.iter().product();
    let delta = ((period - 1) * block + 1) as u32;
    Ok(PartitionAssignment {
        t,
        delta,
        type_count: used.len(),
        assign,
        reserved_type: None,
        degenerate: total_blocks <= 1,
    })
}

/// Chessboard partition with square cells of side `delta` and two parities per
/// axis; edges on a cell boundary belong to the cell of their lower/left end.
pub fn grid_chessboard(grid: &GridSpec, t: f64, delta: usize) -> Result<PartitionAssignment> {
    if delta == 0 {
        return Err(Error::Config("delta must be at least 1".into()));
    }
    let mut p = grid_blocks(grid, t, delta, 2)?;
    p.delta = delta as u32;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_cells_merge_on_torus() {
        assert_eq!(axis_cells(7, 3, true), vec![0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(axis_cells(7, 3, false), vec![0, 0, 0, 1, 1, 1, 2]);
        assert_eq!(axis_types(3, 2, true), vec![0, 1, 2]);
        assert_eq!(axis_types(4, 2, true), vec![0, 1, 0, 1]);
        assert_eq!(axis_types(3, 2, false), vec![0, 1, 0]);
    }

    #[test]
    fn chessboard_delta1_pairs_edges_at_vertex() {
        let g = GridSpec::new(vec![4, 4], false).unwrap();
        let p = grid_chessboard(&g, 0.0, 1).unwrap();
        assert_eq!(p.type_count, 4);
        let mut sizes = std::collections::BTreeMap::new();
        for c in p.assign.values() {
            *sizes.entry(*c).or_insert(0) += 1;
        }
        // one cell per anchor vertex; interior anchors own two edges
        // the top-right corner anchors nothing
        assert_eq!(sizes.len(), 15);
        assert!(sizes.values().all(|&s| s <= 2));
    }

    #[test]
    fn interior_blocks_have_2_delta_squared_edges() {
        let g = GridSpec::new(vec![8, 8], true).unwrap();
        let p = grid_chessboard(&g, 0.0, 2).unwrap();
        assert_eq!(p.type_count, 4);
        let mut sizes = std::collections::BTreeMap::new();
        for c in p.assign.values() {
            *sizes.entry(*c).or_insert(0) += 1;
        }
        assert!(sizes.values().all(|&s| s == 8));
    }

    #[test]
    fn path_alternates_two_types() {
        let g = GridSpec::new(vec![10], false).unwrap();
        let p = grid_chessboard(&g, 0.0, 3).unwrap();
        assert_eq!(p.type_count, 2);
        let types: Vec<usize> = g.edges().iter().map(|(e, _)| p.assign[e].0).collect();
        assert_eq!(types, vec![0, 0, 0, 1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn oversized_delta_is_degenerate() {
        let g = GridSpec::new(vec![4, 4], true).unwrap();
        let p = grid_chessboard(&g, 0.0, 5).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.type_count, 1);
    }
}
