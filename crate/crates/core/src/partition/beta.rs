use super::PartitionAssignment;
use crate::error::{Error, Result};
use crate::netcore::Pair;
use serde::Serialize;
use std::collections::BTreeMap;

/// Centred sums of `Z` over the blocks of a partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSums {
    pub u: BTreeMap<(usize, usize), f64>,
    pub sizes: BTreeMap<(usize, usize), usize>,
    /// Largest block size per type.
    pub max_size: Vec<usize>,
}

impl BlockSums {
    pub fn get(&self, k: usize, m: usize) -> Option<f64> {
        self.u.get(&(k, m)).copied()
    }
}

/// `U_{k,m} = sum over block (k,m) of (Z - centering)`; a pair missing from
/// `centering` is centred at zero.
pub fn block_sums(
    z: &BTreeMap<Pair, f64>,
    p: &PartitionAssignment,
    centering: &BTreeMap<Pair, f64>,
) -> Result<BlockSums> {
    let mut u = BTreeMap::new();
    let mut sizes = BTreeMap::new();
    let mut max_size = vec![0usize; p.type_count];
    for (pair, &cell) in &p.assign {
        let zv = *z.get(pair).ok_or_else(|| Error::Data(format!("no value for covered pair {pair}")))?;
        *u.entry(cell).or_insert(0.0) += zv - centering.get(pair).copied().unwrap_or(0.0);
        let s = sizes.entry(cell).or_insert(0usize);
        *s += 1;
        if cell.0 < max_size.len() {
            max_size[cell.0] = max_size[cell.0].max(*s);
        }
    }
    Ok(BlockSums { u, sizes, max_size })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub beta: f64,
    pub replications: usize,
    pub bins: usize,
    pub warning: Option<String>,
}

/// Upper cut points of `bins` equiprobable quantile bins; tied values share a bin.
fn quantile_cuts(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (1..bins).map(|a| sorted[(a * n / bins).min(n - 1)]).collect()
}

fn bin_of(v: f64, cuts: &[f64]) -> usize {
    cuts.partition_point(|&c| c <= v)
}

/// `1/2 sum_{a,b} |P(X in S_a, Y in S_b) - P(X in S_a) P(Y in S_b)|` over quantile bins.
pub fn binned_beta(x: &[f64], y: &[f64], bins: usize) -> f64 {
    let n = x.len();
    let (cx, cy) = (quantile_cuts(x, bins), quantile_cuts(y, bins));
    let mut joint = vec![0usize; bins * bins];
    let mut mx = vec![0usize; bins];
    let mut my = vec![0usize; bins];
    for (&a, &b) in x.iter().zip(y) {
        let (i, j) = (bin_of(a, &cx), bin_of(b, &cy));
        joint[i * bins + j] += 1;
        mx[i] += 1;
        my[j] += 1;
    }
    let nf = n as f64;
    let mut total = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            total += (joint[i * bins + j] as f64 / nf - (mx[i] as f64 / nf) * (my[j] as f64 / nf)).abs();
        }
    }
    0.5 * total
}

/// Estimates the beta coefficient between the joint past `U_{k,0}, ..., U_{k,M-1}`
/// of type `k` and the next block `U_{k,M}` from independent replications.
///
/// The past is reduced to its sum and both sides are cut into `bins`
/// equiprobable quantile bins, so the estimate is a lower bound for the
/// population coefficient up to sampling noise. It is unchanged by strictly
/// increasing transformations of the block sums.
pub fn estimate_beta(samples: &[BlockSums], k: usize, m: usize, bins: usize) -> Result<BetaEstimate> {
    if samples.len() < 200 {
        return Err(Error::Config(format!("beta estimation needs at least 200 replications, got {}", samples.len())));
    }
    if bins < 2 {
        return Err(Error::Config("beta estimation needs at least 2 bins".into()));
    }
    if m == 0 {
        return Err(Error::Config("block index m must be at least 1 so that a past exists".into()));
    }
    let mut past = Vec::with_capacity(samples.len());
    let mut next = Vec::with_capacity(samples.len());
    for s in samples {
        let mut acc = 0.0;
        for b in 0..m {
            acc += s.get(k, b).ok_or_else(|| Error::Data(format!("block ({k},{b}) missing")))?;
        }
        past.push(acc);
        next.push(s.get(k, m).ok_or_else(|| Error::Data(format!("block ({k},{m}) missing")))?);
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(&past) || constant(&next) {
        let warning = "block sums are constant across replications; beta set to 0".to_string();
        log::warn!("{warning}");
        return Ok(BetaEstimate { beta: 0.0, replications: samples.len(), bins, warning: Some(warning) });
    }
    Ok(BetaEstimate { beta: binned_beta(&past, &next, bins), replications: samples.len(), bins, warning: None })
}
