use super::Real;

/// Composite Simpson rule on `[a, b]` with an even number of panels of width at most `max_step`.
pub fn simpson<T: Real, F: Fn(T) -> T>(a: T, b: T, max_step: T, f: F) -> T {
    if b <= a {
        return T::zero();
    }
    let mut n = ((b - a) / max_step).ceil().to_usize().unwrap_or(2).max(2);
    if n % 2 == 1 {
        n += 1;
    }
    let h = (b - a) / T::from_usize_lossy(n);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * T::from_usize_lossy(i);
        let c = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        acc = acc + c * f(x);
    }
    acc * h / T::lit(3.0)
}

/// Uniform grid covering `[a, b]` (both ends included) with spacing at most `max_step`.
pub fn uniform_grid<T: Real>(a: T, b: T, max_step: T) -> Vec<T> {
    if b <= a {
        return vec![a];
    }
    let n = ((b - a) / max_step).ceil().to_usize().unwrap_or(1).max(1);
    let h = (b - a) / T::from_usize_lossy(n);
    (0..=n)
        .map(|i| if i == n { b } else { a + h * T::from_usize_lossy(i) })
        .collect()
}

/// Trapezoid weights for an arbitrary sorted grid.
pub fn trapezoid_weights<T: Real>(grid: &[T]) -> Vec<T> {
    let n = grid.len();
    let mut w = vec![T::zero(); n];
    if n < 2 {
        return w;
    }
    let half = T::lit(0.5);
    for i in 0..n - 1 {
        let d = grid[i + 1] - grid[i];
        w[i] = w[i] + half * d;
        w[i + 1] = w[i + 1] + half * d;
    }
    w
}

/// Trapezoid rule over tabulated values.
pub fn trapezoid<T: Real>(grid: &[T], values: &[T]) -> T {
    assert_eq!(grid.len(), values.len(), "grid and values differ in length");
    trapezoid_weights(grid)
        .into_iter()
        .zip(values)
        .fold(T::zero(), |acc, (w, &v)| acc + w * v)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(a: T, b: T, tol: T, f: &F) -> T {
    if b <= a {
        return T::zero();
    }
    let m = (a + b) * T::lit(0.5);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    adaptive_step(a, b, fa, fm, fb, whole, tol, f, 48)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<T: Real, F: Fn(T) -> T>(
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    f: &F,
    depth: u32,
) -> T {
    let m = (a + b) * T::lit(0.5);
    let (lm, rm) = ((a + m) * T::lit(0.5), (m + b) * T::lit(0.5));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    let half = tol * T::lit(0.5);
    adaptive_step(a, m, fa, flm, fm, left, half, f, depth - 1)
        + adaptive_step(m, b, fm, frm, fb, right, half, f, depth - 1)
}

/// `int_0^len exp(alpha + beta u) du`, stable for small `beta len`.
pub fn exp_linear_integral(alpha: f64, beta: f64, len: f64) -> f64 {
    let z = beta * len;
    if z.abs() < 1e-8 {
        alpha.exp() * len * (1.0 + 0.5 * z + z * z / 6.0)
    } else {
        alpha.exp() * z.exp_m1() / beta
    }
}
