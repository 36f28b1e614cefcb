use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Right-continuous step function: value of the last grid point `<= t`.
    Constant,
    Linear,
}

/// A parameter function `theta: [0, T] -> R^q` tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    grid: Vec<f64>,
    values: Vec<DVector<f64>>,
    interpolation: Interpolation,
}

impl ParameterPath {
    pub fn new(grid: Vec<f64>, values: Vec<DVector<f64>>, interpolation: Interpolation) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::Config("parameter path needs matching, nonempty grid and values".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("parameter path grid must be strictly increasing".into()));
        }
        let q = values[0].len();
        if values.iter().any(|v| v.len() != q || v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Config("parameter path values must be finite with a common dimension".into()));
        }
        Ok(Self { grid, values, interpolation })
    }

    /// `theta(t) = theta` on `[0, horizon]`.
    pub fn constant(theta: DVector<f64>, horizon: f64) -> Self {
        Self {
            grid: vec![0.0, horizon],
            values: vec![theta.clone(), theta],
            interpolation: Interpolation::Linear,
        }
    }

    /// Tabulates `f` on `grid` with linear interpolation.
    pub fn from_fn<F: Fn(f64) -> DVector<f64>>(grid: Vec<f64>, f: F) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values, Interpolation::Linear)
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// `theta(t)`, clamped to the end values outside the grid.
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let g = &self.grid;
        if t <= g[0] {
            return self.values[0].clone();
        }
        if t >= g[g.len() - 1] {
            return self.values[g.len() - 1].clone();
        }
        let k = g.partition_point(|&x| x <= t) - 1;
        match self.interpolation {
            Interpolation::Constant => self.values[k].clone(),
            Interpolation::Linear => {
                let w = (t - g[k]) / (g[k + 1] - g[k]);
                &self.values[k] * (1.0 - w) + &self.values[k + 1] * w
            }
        }
    }

    /// Grid points strictly inside `(a, b)`, where the path may bend or jump.
    pub fn knots_in(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        self.grid.iter().copied().filter(move |&x| x > a && x < b)
    }

    /// `sup_t |theta(t)|_2`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn time_scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.iter().map(|t| t * c).collect(),
            values: self.values.clone(),
            interpolation: self.interpolation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn linear_and_step_interpolation() {
        let grid = vec![0.0, 1.0, 2.0];
        let vals = vec![dvector![0.0], dvector![2.0], dvector![0.0]];
        let lin = ParameterPath::new(grid.clone(), vals.clone(), Interpolation::Linear).unwrap();
        assert_eq!(lin.eval(0.5)[0], 1.0);
        assert_eq!(lin.eval(1.5)[0], 1.0);
        assert_eq!(lin.eval(5.0)[0], 0.0);
        let step = ParameterPath::new(grid, vals, Interpolation::Constant).unwrap();
        assert_eq!(step.eval(0.99)[0], 0.0);
        assert_eq!(step.eval(1.0)[0], 2.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(ParameterPath::new(vec![0.0, 0.0], vec![dvector![1.0], dvector![1.0]], Interpolation::Linear).is_err());
        assert!(ParameterPath::new(vec![0.0], vec![dvector![f64::NAN]], Interpolation::Linear).is_err());
    }
}
