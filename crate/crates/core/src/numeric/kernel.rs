use super::quadrature::simpson;
use super::Real;
use serde::{Deserialize, Serialize};

/// Compactly supported kernel shapes on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    /// `3/4 (1 - u^2)`; the default.
    Epanechnikov,
    /// `1 - |u|`.
    Triangular,
    /// `1/2` on `[-1, 1]`. Discontinuous, so only useful as an analytic oracle.
    Box,
}

impl std::str::FromStr for KernelShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" | "epa" => Ok(KernelShape::Epanechnikov),
            "triangular" | "tri" => Ok(KernelShape::Triangular),
            "box" | "uniform" => Ok(KernelShape::Box),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}

/// A kernel function `K`, optionally multiplied by a constant `scale`.
///
/// `K_{h,t0}(t) = K((t - t0)/h) / h` is provided by [`Kernel::at`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel<T> {
    pub shape: KernelShape,
    pub scale: T,
}

impl<T: Real> Kernel<T> {
    pub fn new(shape: KernelShape) -> Self {
        Self { shape, scale: T::one() }
    }

    pub fn epanechnikov() -> Self {
        Self::new(KernelShape::Epanechnikov)
    }

    pub fn triangular() -> Self {
        Self::new(KernelShape::Triangular)
    }

    pub fn boxcar() -> Self {
        Self::new(KernelShape::Box)
    }

    /// Returns `c * K`.
    pub fn scaled(self, c: T) -> Self {
        Self { shape: self.shape, scale: self.scale * c }
    }

    /// Whether the kernel is Hoelder continuous (the box kernel is not).
    pub fn is_continuous(&self) -> bool {
        !matches!(self.shape, KernelShape::Box)
    }

    /// `K(u)`.
    pub fn eval(&self, u: T) -> T {
        let one = T::one();
        if u < -one || u > one {
            return T::zero();
        }
        let base = match self.shape {
            KernelShape::Epanechnikov => T::lit(0.75) * (one - u * u),
            KernelShape::Triangular => one - u.abs(),
            KernelShape::Box => T::lit(0.5),
        };
        self.scale * base
    }

    /// `K_{h,t0}(t) = K((t - t0)/h) / h`.
    pub fn at(&self, t: T, t0: T, h: T) -> T {
        self.eval((t - t0) / h) / h
    }

    /// `int_{-inf}^{u} K(v) dv`.
    pub fn cdf(&self, u: T) -> T {
        let one = T::one();
        let half = T::lit(0.5);
        if u <= -one {
            return T::zero();
        }
        let u = u.min(one);
        let base = match self.shape {
            KernelShape::Epanechnikov => half + T::lit(0.75) * (u - u * u * u / T::lit(3.0)),
            KernelShape::Triangular => {
                if u < T::zero() {
                    half * (one + u) * (one + u)
                } else {
                    one - half * (one - u) * (one - u)
                }
            }
            KernelShape::Box => half * (u + one),
        };
        self.scale * base
    }

    /// Exact `int_a^b K_{h,t0}(t) dt`.
    pub fn window_integral(&self, a: T, b: T, t0: T, h: T) -> T {
        if b <= a {
            return T::zero();
        }
        self.cdf((b - t0) / h) - self.cdf((a - t0) / h)
    }

    /// Points in `(-1, 1)` where `K` is not smooth, besides the support edges.
    pub fn kinks(&self) -> &'static [f64] {
        match self.shape {
            KernelShape::Triangular => &[0.0],
            _ => &[],
        }
    }

    /// `int K(u)^2 du`.
    pub fn roughness(&self) -> T {
        let base = match self.shape {
            KernelShape::Epanechnikov => T::lit(0.6),
            KernelShape::Triangular => T::lit(2.0 / 3.0),
            KernelShape::Box => T::lit(0.5),
        };
        self.scale * self.scale * base
    }

    /// The self-convolution constant
    /// `K4 = int_0^2 ( int_{-1}^{1} K(v) K(u+v) dv )^2 du`
    /// by nested composite Simpson quadrature with steps of at most `1e-3`.
    pub fn k4(&self) -> T {
        self.k4_with_step(T::lit(1e-3))
    }

    /// [`Kernel::k4`] with a caller-chosen maximal step (used for refinement checks).
    pub fn k4_with_step(&self, step: T) -> T {
        let two = T::lit(2.0);
        let mut outer_breaks = vec![T::zero(), two];
        for &k in self.kinks() {
            // the autoconvolution of a kink at 0 is kinked at |u| = 0, 1
            outer_breaks.push(T::lit(k).abs() + T::one());
        }
        piecewise_simpson(&mut outer_breaks, step, |u| {
            let inner = self.autocorrelation(u, step);
            inner * inner
        })
    }

    /// `int K(v) K(u+v) dv`, integrated piecewise between the kinks of both factors.
    pub fn autocorrelation(&self, u: T, step: T) -> T {
        let one = T::one();
        let lo = (-one).max(-one - u);
        let hi = one.min(one - u);
        if hi <= lo {
            return T::zero();
        }
        let mut breaks = vec![lo, hi];
        for &k in self.kinks() {
            breaks.push(T::lit(k));
            breaks.push(T::lit(k) - u);
        }
        breaks.retain(|&b| b >= lo && b <= hi);
        piecewise_simpson(&mut breaks, step, |v| self.eval(v) * self.eval(u + v))
    }
}

impl<T: Real> Default for Kernel<T> {
    fn default() -> Self {
        Self::epanechnikov()
    }
}

/// Composite Simpson over consecutive breakpoints. Integrand evaluations at a
/// breakpoint are taken from the interior side to avoid support-edge jumps.
fn piecewise_simpson<T: Real, F: Fn(T) -> T>(breaks: &mut Vec<T>, step: T, f: F) -> T {
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        // nudge endpoints inwards by a negligible amount so one-sided limits are used
        let eps = (b - a) * T::lit(1e-12);
        total = total + simpson(a + eps, b - eps, step, &f) ;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernels_integrate_to_one() {
        for shape in [KernelShape::Epanechnikov, KernelShape::Triangular, KernelShape::Box] {
            let k = Kernel::<f64>::new(shape);
            assert_abs_diff_eq!(k.cdf(1.0), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(k.cdf(-1.0), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(k.cdf(0.0), 0.5, epsilon = 1e-14);
            // cdf is the antiderivative of eval
            for &u in &[-0.7, -0.2, 0.1, 0.55, 0.93] {
                let d = (k.cdf(u + 1e-6) - k.cdf(u - 1e-6)) / 2e-6;
                assert_abs_diff_eq!(d, k.eval(u), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn box_k4_closed_form() {
        let k = Kernel::<f64>::boxcar();
        assert_abs_diff_eq!(k.k4(), 1.0 / 6.0, epsilon = 1e-10);
        // inner integral is (2 - u)/4
        for &u in &[0.0, 0.3, 1.0, 1.7] {
            assert_abs_diff_eq!(k.autocorrelation(u, 1e-3), (2.0 - u) / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn roughness_matches_autocorrelation_at_zero() {
        for shape in [KernelShape::Epanechnikov, KernelShape::Triangular, KernelShape::Box] {
            let k = Kernel::<f64>::new(shape);
            assert_abs_diff_eq!(k.autocorrelation(0.0, 1e-3), k.roughness(), epsilon = 1e-10);
        }
    }

    #[test]
    fn single_precision_kernel() {
        let k = Kernel::<f32>::epanechnikov();
        assert!((k.eval(0.0) - 0.75).abs() < 1e-7);
        assert!((k.k4() - Kernel::<f64>::epanechnikov().k4() as f32).abs() < 1e-4);
    }

    #[test]
    fn window_integral_matches_scaled_cdf() {
        let k = Kernel::<f64>::epanechnikov();
        let (t0, h) = (2.0, 0.5);
        assert_abs_diff_eq!(k.window_integral(0.0, 10.0, t0, h), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.window_integral(t0, 10.0, t0, h), 0.5, epsilon = 1e-14);
        assert_eq!(k.window_integral(3.0, 2.0, t0, h), 0.0);
    }
}
