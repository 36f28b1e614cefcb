use super::Real;

/// Continuous boundary weight `w` on `[0, T]`: zero outside `[delta, T - delta]`,
/// one on `[delta + taper, T - delta - taper]`, cubic smoothstep ramps in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction<T> {
    pub delta: T,
    pub taper: T,
    pub horizon: T,
    /// Multiplies the whole function; `0` gives the null weight.
    pub level: T,
}

impl<T: Real> WeightFunction<T> {
    pub fn new(delta: T, taper: T, horizon: T) -> Self {
        Self { delta, taper, horizon, level: T::one() }
    }

    /// The default weight for bandwidth `h`: `delta = h`, `taper = delta / 2`.
    pub fn for_bandwidth(h: T, horizon: T) -> Self {
        Self::new(h, h * T::lit(0.5), horizon)
    }

    pub fn zero(horizon: T) -> Self {
        Self { delta: T::zero(), taper: T::zero(), horizon, level: T::zero() }
    }

    /// Support `[delta, T - delta]`.
    pub fn support(&self) -> (T, T) {
        (self.delta, self.horizon - self.delta)
    }

    pub fn eval(&self, t: T) -> T {
        let (lo, hi) = self.support();
        if t < lo || t > hi || hi <= lo {
            return T::zero();
        }
        let ramp = |x: T| {
            if self.taper <= T::zero() {
                return T::one();
            }
            let s = (x / self.taper).min(T::one()).max(T::zero());
            s * s * (T::lit(3.0) - T::lit(2.0) * s)
        };
        self.level * ramp(t - lo).min(ramp(hi - t))
    }

    pub fn is_null(&self) -> bool {
        self.level == T::zero() || self.horizon - self.delta <= self.delta
    }
}
