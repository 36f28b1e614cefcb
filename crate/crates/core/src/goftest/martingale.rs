use super::weighted_inverse_squares;
use crate::error::{Error, Result};
use crate::estimate::{DataView, SigmaPath};
use crate::numeric::quadrature::{trapezoid_weights, uniform_grid};
use crate::numeric::{Kernel, WeightFunction};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Size limits for the direct evaluation, whose cost grows with
/// `pairs * grid^2` and `events * grid^2`.
#[derive(Debug, Clone, Copy)]
pub struct MartingaleLimits {
    pub max_pairs: usize,
    pub max_events: usize,
}

impl Default for MartingaleLimits {
    fn default() -> Self {
        Self { max_pairs: 20_000, max_events: 200_000 }
    }
}

/// Per grid point: fitted intensity and covariate where the pair is active.
type Activity = Vec<Option<(f64, DVector<f64>)>>;

/// Covariate of the piece containing `t`, if the pair is active there.
fn x_at(pieces: &[crate::estimate::Piece], t: f64) -> Option<&DVector<f64>> {
    let k = pieces.partition_point(|p| p.end <= t);
    pieces.get(k).filter(|p| p.start <= t).map(|p| &p.x)
}

/// Direct plug-in evaluation of
/// `4 / (h r_n^2) sum_ij int sum_{kl != ij} tau_{ij,kl}(s)^2 C_ij(s) lambda_ij(s) ds`
/// with `tau_{ij,kl}(s) = int_{[0,s)} f_{ij,kl}(s,t) dM_kl(t)` and the fitted
/// intensity `exp(theta_bar^T X)` in the martingale increments.
///
/// With `v_kl(s) = int_{[0,s)} G(s,t) X_kl(t) dM_kl(t)` and `W = sum_kl v_kl v_kl^T`,
/// the inner sum is `X_ij^T W X_ij - (X_ij^T v_ij)^2`. All time integrals use the
/// trapezoid rule on the grid of `path`, extended by `h` on both sides.
pub fn variance_b_martingale(
    view: &DataView,
    path: &SigmaPath,
    theta_bar: &DVector<f64>,
    h: f64,
    kernel: &Kernel<f64>,
    weight: &WeightFunction<f64>,
    limits: MartingaleLimits,
) -> Result<f64> {
    if view.pairs.len() > limits.max_pairs || view.event_count() > limits.max_events {
        return Err(Error::TooLarge(format!(
            "martingale variance limited to {} pairs and {} events, got {} and {}",
            limits.max_pairs,
            limits.max_events,
            view.pairs.len(),
            view.event_count()
        )));
    }
    let q = view.q;
    let mats = weighted_inverse_squares(path, weight)?;
    let omega_g = trapezoid_weights(&path.grid);
    // M_k = omega_k h Sigma^{-2} w / pbar on the t0 grid
    let m: Vec<(f64, DMatrix<f64>)> = mats
        .iter()
        .zip(&path.grid)
        .zip(&omega_g)
        .filter_map(|((mk, &t), &om)| mk.as_ref().map(|mk| (t, mk * (om * h))))
        .collect();
    if m.is_empty() {
        return Ok(0.0);
    }
    let g_at = |s: f64, t: f64| -> DMatrix<f64> {
        let mut g = DMatrix::zeros(q, q);
        let lo = m.partition_point(|(t0, _)| *t0 <= s.max(t) - h);
        for (t0, mk) in &m[lo..] {
            if *t0 >= s.min(t) + h {
                break;
            }
            let c = kernel.at(s, *t0, h) * kernel.at(t, *t0, h);
            if c != 0.0 {
                g += mk * c;
            }
        }
        g
    };
    let step = path.grid.get(1).map_or(h / 20.0, |t1| t1 - path.grid[0]);
    let lo = (m[0].0 - h).max(0.0);
    let hi = (m[m.len() - 1].0 + h).min(view.horizon);
    let sgrid = uniform_grid(lo, hi, step);
    let ns = sgrid.len();
    let omega_s = trapezoid_weights(&sgrid);
    let band = ((2.0 * h) / step).ceil() as usize + 1;
    // G(s_a, s_b) for b <= a within the band
    let gtab: Vec<Vec<DMatrix<f64>>> = (0..ns)
        .into_par_iter()
        .map(|a| (a.saturating_sub(band)..=a).map(|b| g_at(sgrid[a], sgrid[b])).collect())
        .collect();
    let gref = |a: usize, b: usize| -> Option<&DMatrix<f64>> {
        let first = a.saturating_sub(band);
        (b >= first && b <= a).then(|| &gtab[a][b - first])
    };
    // per pair: v(s_a) and C lambda X at s_a
    let per_pair: Vec<(Vec<DVector<f64>>, Activity)> = view
        .pairs
        .par_iter()
        .map(|pd| {
            let active: Activity = sgrid
                .iter()
                .map(|&s| x_at(&pd.pieces, s).map(|x| (theta_bar.dot(x).exp(), x.clone())))
                .collect();
            let mut v = vec![DVector::zeros(q); ns];
            for a in 0..ns {
                // compensator part over [s_a - 2h, s_a] with trapezoid weights of the sub-grid
                let first = a.saturating_sub(band);
                for (b, act) in active.iter().enumerate().take(a + 1).skip(first) {
                    if let Some((lam, x)) = act {
                        let mut wt = if b == 0 { 0.5 * step } else { step };
                        if b == a {
                            wt = if a == 0 { 0.0 } else { 0.5 * step };
                        }
                        if let Some(g) = gref(a, b) {
                            v[a] -= g * x * (wt * lam);
                        }
                    }
                }
                for (t, x) in &pd.events {
                    if *t < sgrid[a] && sgrid[a] - *t < 2.0 * h {
                        v[a] += g_at(sgrid[a], *t) * x;
                    }
                }
            }
            (v, active)
        })
        .collect();
    let total: f64 = (0..ns)
        .into_par_iter()
        .map(|a| {
            let mut w = DMatrix::zeros(q, q);
            for (v, _) in &per_pair {
                w.ger(1.0, &v[a], &v[a], 1.0);
            }
            let mut acc = 0.0;
            for (v, active) in &per_pair {
                if let Some((lam, x)) = &active[a] {
                    let xv = x.dot(&v[a]);
                    acc += lam * ((x.transpose() * &w * x)[(0, 0)] - xv * xv);
                }
            }
            omega_s[a] * acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let r_n = view.r_n as f64;
    Ok(4.0 / (h * r_n * r_n) * total)
}
