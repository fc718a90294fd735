//! Quadrature kernels shared by the proximity integrals and the winding
//! counters: adaptive Simpson on real intervals and composite
//! Gauss–Legendre rules on complex line segments.

use num_complex::Complex64;

/// Result of an adaptive quadrature: value plus an a-posteriori error
/// estimate accumulated over all accepted panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum QuadError {
    #[error("quadrature did not converge (residual {residual:.3e} after max refinement)")]
    Divergence { residual: f64 },
    #[error("integrand evaluation failed at {point:.6e}: {reason}")]
    BadIntegrand { point: f64, reason: String },
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson rule on [a, b].
///
/// The integrand may be unbounded at isolated points (integrable log
/// singularities); nodes that come back non-finite are nudged inward by a
/// tiny offset once, and panels that still fail are refined. Tolerance is
/// absolute over the whole interval.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<QuadEstimate, QuadError>
where
    F: Fn(f64) -> f64,
{
    let sample = |x: f64| -> f64 {
        let v = f(x);
        if v.is_finite() {
            return v;
        }
        // integrable singularity at a node: step off it
        let h = (b - a).abs() * 1e-12 + 1e-300;
        let v2 = f(x + h);
        if v2.is_finite() {
            v2
        } else {
            f(x - h)
        }
    };
    let fa = sample(a);
    let fb = sample(b);
    let m = 0.5 * (a + b);
    let fm = sample(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut acc = QuadEstimate { value: 0.0, error: 0.0 };
    simpson_recurse(&sample, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut acc)?;
    Ok(acc)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut QuadEstimate,
) -> Result<(), QuadError>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(QuadError::BadIntegrand {
            point: if flm.is_finite() { rm } else { lm },
            reason: "non-finite integrand after singularity nudge".into(),
        });
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        acc.value += left + right + delta / 15.0;
        acc.error += delta.abs() / 15.0;
        if depth == 0 && delta.abs() > 15.0 * tol {
            // panel did not meet tolerance; keep going but report honestly
            acc.error += delta.abs();
        }
        return Ok(());
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, acc)?;
    simpson_recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, acc)
}

// ---------------------------------------------------------------------------
// Gauss–Legendre
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl_cached(n: usize) -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| GL_SIZES.iter().map(|&n| gauss_legendre(n)).collect());
    let idx = GL_SIZES.iter().position(|&m| m == n).expect("unsupported GL size");
    &rules[idx]
}

/// Supported composite sizes for the node-doubling stopping rule.
pub const GL_SIZES: [usize; 6] = [16, 32, 64, 128, 256, 512];

/// Failure modes of the adaptive contour integrals.
#[derive(Debug)]
pub enum ContourError<E> {
    Integrand(E),
    /// A singularity sits on (or numerically on) the path.
    NoConvergence,
}

/// Adaptive composite Gauss–Legendre along a parameterized path.
/// `map` sends the parameter to (point, dz/dt). Panels are split until the
/// 16-point estimate agrees with its bisection within the local tolerance,
/// so a pole near one spot on the path costs log(length/distance) panels
/// instead of defeating the whole rule.
pub fn adaptive_path<F, E>(
    g: &F,
    map: &impl Fn(f64) -> (Complex64, Complex64),
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64, ContourError<E>>
where
    F: Fn(Complex64) -> Result<Complex64, E>,
{
    fn panel<F, E>(
        g: &F,
        map: &impl Fn(f64) -> (Complex64, Complex64),
        a: f64,
        b: f64,
    ) -> Result<Complex64, ContourError<E>>
    where
        F: Fn(Complex64) -> Result<Complex64, E>,
    {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = Complex64::new(0.0, 0.0);
        for &(x, w) in gl_cached(16) {
            let (z, jac) = map(mid + half * x);
            sum += w * g(z).map_err(ContourError::Integrand)? * jac;
        }
        Ok(sum * half)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F, E>(
        g: &F,
        map: &impl Fn(f64) -> (Complex64, Complex64),
        a: f64,
        b: f64,
        whole: Complex64,
        tol: f64,
        depth: u32,
        force: u32,
    ) -> Result<Complex64, ContourError<E>>
    where
        F: Fn(Complex64) -> Result<Complex64, E>,
    {
        let mid = 0.5 * (a + b);
        let left = panel(g, map, a, mid)?;
        let right = panel(g, map, mid, b)?;
        let refined = left + right;
        // narrow near-boundary spikes can slip between the nodes of coarse
        // panels, so acceptance is deferred for the first few levels
        if force == 0 && (refined - whole).norm() <= tol {
            return Ok(refined);
        }
        if depth == 0 {
            return Err(ContourError::NoConvergence);
        }
        let nf = force.saturating_sub(1);
        let l = recurse(g, map, a, mid, left, tol * 0.5, depth - 1, nf)?;
        let r = recurse(g, map, mid, b, right, tol * 0.5, depth - 1, nf)?;
        Ok(l + r)
    }

    let whole = panel(g, map, a, b)?;
    recurse(g, map, a, b, whole, tol, 44, 3)
}

/// Adaptive ∫ g(z) dz along the straight segment from `z0` to `z1`.
pub fn adaptive_segment<F, E>(
    g: &F,
    z0: Complex64,
    z1: Complex64,
    tol: f64,
) -> Result<Complex64, ContourError<E>>
where
    F: Fn(Complex64) -> Result<Complex64, E>,
{
    let dir = z1 - z0;
    adaptive_path(g, &|t| (z0 + t * dir, dir), 0.0, 1.0, tol)
}

/// Adaptive ∫ g(z) dz along the arc |z − center| = radius, angles t0 → t1.
pub fn adaptive_arc<F, E>(
    g: &F,
    center: Complex64,
    radius: f64,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Complex64, ContourError<E>>
where
    F: Fn(Complex64) -> Result<Complex64, E>,
{
    adaptive_path(
        g,
        &|t| {
            let e = Complex64::from_polar(radius, t);
            (center + e, Complex64::new(0.0, 1.0) * e)
        },
        t0,
        t1,
        tol,
    )
}

/// ∫ g(z) dz along the straight segment from `z0` to `z1` with an n-point
/// Gauss–Legendre rule. Errors from the integrand are propagated.
pub fn segment_integral<F, E>(g: &F, z0: Complex64, z1: Complex64, n: usize) -> Result<Complex64, E>
where
    F: Fn(Complex64) -> Result<Complex64, E>,
{
    let mid = 0.5 * (z0 + z1);
    let half = 0.5 * (z1 - z0);
    let mut sum = Complex64::new(0.0, 0.0);
    for &(x, w) in gl_cached(n) {
        sum += w * g(mid + half * x)?;
    }
    Ok(sum * half)
}

/// ∫ g(z) dz along the circular arc |z - center| = radius from angle `t0`
/// to `t1`, n-point Gauss–Legendre in the angle variable.
pub fn arc_integral<F, E>(
    g: &F,
    center: Complex64,
    radius: f64,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<Complex64, E>
where
    F: Fn(Complex64) -> Result<Complex64, E>,
{
    let mid = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    let mut sum = Complex64::new(0.0, 0.0);
    for &(x, w) in gl_cached(n) {
        let t = mid + half * x;
        let dir = Complex64::new(0.0, 1.0) * Complex64::from_polar(radius, t);
        sum += w * g(center + Complex64::from_polar(radius, t))? * dir;
    }
    Ok(sum * half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_is_exact() {
        let q = adaptive_simpson(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12, "got {}", q.value);
    }

    #[test]
    fn simpson_handles_log_singularity() {
        // ∫_0^1 log x dx = -1
        let q = adaptive_simpson(&|x| x.ln(), 0.0, 1.0, 1e-10).unwrap();
        assert!((q.value + 1.0).abs() < 1e-7, "got {} err {}", q.value, q.error);
    }

    #[test]
    fn gl_circle_winding() {
        // ∮ dz/z over |z|=1 = 2πi
        let g = |z: Complex64| -> Result<Complex64, ()> { Ok(z.inv()) };
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let t0 = std::f64::consts::FRAC_PI_2 * k as f64;
            let t1 = t0 + std::f64::consts::FRAC_PI_2;
            total += arc_integral(&g, Complex64::new(0.0, 0.0), 1.0, t0, t1, 32).unwrap();
        }
        let expected = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!((total - expected).norm() < 1e-12);
    }

    #[test]
    fn gl_segment_exactness() {
        // ∫ z² dz from 0 to 1+i = (1+i)³/3
        let g = |z: Complex64| -> Result<Complex64, ()> { Ok(z * z) };
        let v = segment_integral(&g, Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0), 16).unwrap();
        let expected = Complex64::new(1.0, 1.0).powu(3) / 3.0;
        assert!((v - expected).norm() < 1e-13);
    }
}
