//! The value-distribution quantities: proximity m(r,·), counting N(r,·),
//! characteristic T = m + N, the Cartan characteristic of a holomorphic
//! curve, the shift-truncated counting function, and empirical order /
//! hyper-order fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{forward_difference, Expr, ExprError, ExprRef};
use crate::quad::{adaptive_simpson, QuadError};
use crate::roots::{locate_divisor, Disc, Divisor, PointKind, RootsError};

#[derive(Debug, thiserror::Error)]
pub enum NevanlinnaError {
    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),
    #[error("divisor disc (radius {have}) does not cover radius {need}")]
    DivisorTooSmall { have: f64, need: f64 },
    #[error("growth grid needs at least 8 increasing radii")]
    GridTooSmall,
    #[error("all curve coordinates drop below the probe tolerance near z = {at} (reduced representation suspect)")]
    CommonZeroSuspected { at: Complex64 },
    #[error(transparent)]
    Roots(#[from] RootsError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Per-radius record of the characteristic decomposition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CharSample {
    pub r: f64,
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub quadrature_error: f64,
    /// Power k of the internal z^k·f normalization restoring f(0) ≠ 0, ∞;
    /// zero when none was needed. Reported values are for the normalized
    /// function.
    pub normalized_power: i32,
}

fn log_plus(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Proximity
// ---------------------------------------------------------------------------

/// m(r, f) = ∫ log⁺|f(re^{iθ})| dθ/2π by adaptive quadrature over the
/// log-scale channel. Returns (value, error estimate).
pub fn proximity(f: &ExprRef, r: f64) -> Result<(f64, f64), NevanlinnaError> {
    proximity_split(f, r, &[], 1e-9)
}

/// Same, with the integration interval split at the given angles (the
/// angles of divisor points near the circle, where log|f| has integrable
/// singularities or kinks).
pub fn proximity_split(
    f: &ExprRef,
    r: f64,
    split_angles: &[f64],
    tol: f64,
) -> Result<(f64, f64), NevanlinnaError> {
    circle_average(
        |theta| {
            let z = Complex64::from_polar(r, theta);
            f.eval_log(z).map(|lc| log_plus(lc.log_abs))
        },
        split_angles,
        tol,
    )
}

/// Average of a log-channel integrand over the circle, with optional
/// interval splitting. The integrand may blow up at isolated angles.
pub(crate) fn circle_average(
    integrand: impl Fn(f64) -> Result<f64, ExprError>,
    split_angles: &[f64],
    tol: f64,
) -> Result<(f64, f64), NevanlinnaError> {
    use std::cell::RefCell;
    let two_pi = 2.0 * std::f64::consts::PI;
    let fatal: RefCell<Option<ExprError>> = RefCell::new(None);
    let g = |theta: f64| -> f64 {
        match integrand(theta) {
            Ok(v) => v,
            Err(ExprError::SingularPoint { .. }) => f64::NAN, // nudged by the rule
            Err(e) => {
                *fatal.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };
    let mut cuts: Vec<f64> = split_angles
        .iter()
        .map(|a| a.rem_euclid(two_pi))
        .filter(|a| a.is_finite())
        .collect();
    cuts.push(0.0);
    cuts.push(two_pi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut value = 0.0;
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-12 {
            continue;
        }
        let est = adaptive_simpson(&g, a, b, tol * (b - a) / two_pi).map_err(|e| {
            if let Some(fe) = fatal.borrow_mut().take() {
                return NevanlinnaError::Expr(fe);
            }
            match e {
                QuadError::Divergence { residual } => {
                    NevanlinnaError::QuadratureDivergence(format!("residual {residual:.3e}"))
                }
                QuadError::BadIntegrand { point, reason } => {
                    NevanlinnaError::QuadratureDivergence(format!("at θ={point}: {reason}"))
                }
            }
        })?;
        value += est.value;
        error += est.error;
    }
    if let Some(fe) = fatal.borrow_mut().take() {
        return Err(NevanlinnaError::Expr(fe));
    }
    Ok((value / two_pi, error / two_pi + 1e-15))
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

/// N(r) = Σ_{0<|z_j|≤r} m_j log(r/|z_j|) + n(0) log r — the exact
/// piecewise-log evaluation of ∫₀^r (n(t)−n(0))/t dt + n(0) log r.
pub fn counting(div: &Divisor, r: f64, kind: PointKind) -> Result<f64, NevanlinnaError> {
    if div.disc.radius < r - 1e-12 * r.max(1.0) {
        return Err(NevanlinnaError::DivisorTooSmall { have: div.disc.radius, need: r });
    }
    let origin_tol = 1e-10 * (1.0 + r);
    let mut total = 0.0;
    for e in div.entries.iter().filter(|e| e.kind == kind) {
        let modulus = e.location.norm();
        if modulus <= origin_tol {
            total += f64::from(e.multiplicity) * r.ln();
        } else if modulus <= r {
            total += f64::from(e.multiplicity) * (r / modulus).ln();
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Characteristic
// ---------------------------------------------------------------------------

/// Order of f at the origin from its divisor (zeros minus poles).
fn origin_order(div: &Divisor) -> i32 {
    let tol = 1e-10 * (1.0 + div.disc.radius);
    let mut k = 0i32;
    for e in &div.entries {
        if e.location.norm() <= tol {
            match e.kind {
                PointKind::Zero => k += e.multiplicity as i32,
                PointKind::Pole => k -= e.multiplicity as i32,
            }
        }
    }
    k
}

/// Divisor with the origin entries removed (they are cancelled by the z^k
/// normalization).
fn strip_origin(div: &Divisor) -> Divisor {
    let tol = 1e-10 * (1.0 + div.disc.radius);
    let mut d = div.clone();
    d.entries.retain(|e| e.location.norm() > tol);
    d
}

/// T(r, f) = m(r, f) + N(r, f), with the divisor coming from the roots
/// module. When f(0) = 0 or ∞ the computation silently moves to
/// z^k·f(z) with the unique k making the origin regular; the sample records
/// that k.
pub fn characteristic(f: &ExprRef, r: f64, tol: f64) -> Result<CharSample, NevanlinnaError> {
    let div = locate_divisor(f, &Disc::centered(r)?, 1e-9)?;
    characteristic_from_divisor(f, &div, r, tol)
}

/// Characteristic at radius r reusing a divisor already located on a disc
/// of radius ≥ r (grids locate once at the largest radius).
pub fn characteristic_from_divisor(
    f: &ExprRef,
    div: &Divisor,
    r: f64,
    tol: f64,
) -> Result<CharSample, NevanlinnaError> {
    let ord0 = origin_order(div);
    let (g, div_used, normalized_power) = if ord0 != 0 {
        let norm = Expr::mul(Expr::powi(Expr::var(), -ord0), f.clone());
        (norm, strip_origin(div), -ord0)
    } else {
        (f.clone(), div.clone(), 0)
    };
    let angles = near_circle_angles(&div_used, r);
    let (m, err) = proximity_split(&g, r, &angles, tol)?;
    let n = counting(&div_used, r, PointKind::Pole)?;
    Ok(CharSample { r, m, n, t: m + n, quadrature_error: err, normalized_power })
}

/// Angles of divisor points whose modulus is within 2% of the circle.
fn near_circle_angles(div: &Divisor, r: f64) -> Vec<f64> {
    div.entries
        .iter()
        .filter(|e| {
            let m = e.location.norm();
            (m - r).abs() < 0.02 * r
        })
        .map(|e| e.location.arg())
        .collect()
}

// ---------------------------------------------------------------------------
// Cartan characteristic
// ---------------------------------------------------------------------------

/// T_g(r) = ∫ sup_k log|g_k(re^{iθ})| dθ/2π − sup_k log|g_k(0)| for entire
/// coordinates. A relative dip of the sup below 1e-14 of its circle maximum
/// at a probe point raises `CommonZeroSuspected`.
pub fn cartan_characteristic(
    coords: &[ExprRef],
    r: f64,
    tol: f64,
) -> Result<(f64, f64), NevanlinnaError> {
    assert!(!coords.is_empty());
    let sup = |z: Complex64| -> Result<f64, ExprError> {
        let mut best = f64::NEG_INFINITY;
        for g in coords {
            let lc = g.eval_log(z)?;
            best = best.max(lc.log_abs);
        }
        Ok(best)
    };
    // probe pass: reduced-representation check on the circle
    let probes = 256;
    let mut circle_max = f64::NEG_INFINITY;
    let mut circle_min = f64::INFINITY;
    let mut min_at = Complex64::new(r, 0.0);
    for i in 0..probes {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / probes as f64;
        let z = Complex64::from_polar(r, theta);
        if let Ok(u) = sup(z) {
            circle_max = circle_max.max(u);
            if u < circle_min {
                circle_min = u;
                min_at = z;
            }
        }
    }
    if circle_min < circle_max - 32.3 {
        // all coordinates simultaneously below 1e-14 of the local scale
        return Err(NevanlinnaError::CommonZeroSuspected { at: min_at });
    }
    let (avg, err) = circle_average(
        |theta| sup(Complex64::from_polar(r, theta)),
        &[],
        tol,
    )?;
    let u0 = sup(Complex64::new(0.0, 0.0)).map_err(NevanlinnaError::Expr)?;
    Ok((avg - u0, err))
}

// ---------------------------------------------------------------------------
// Truncated counting
// ---------------------------------------------------------------------------

/// Target value for the truncated counting function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Finite(Complex64),
    Infinity,
}

/// Result of the truncated counting: the value and whether the degenerate
/// Δ_c w ≡ 0 convention fired (every contribution clamps to zero because
/// the difference vanishes identically).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncatedCounting {
    pub value: f64,
    pub degenerate_difference: bool,
}

/// Ñ(r, 1/(w−a)) per the shift-truncated convention: an a-point of
/// multiplicity m contributes max(0, m − ord(Δ_c w)) at that point; the
/// clamp and the identically-zero convention are deliberate (negative
/// contributions are never produced).
pub fn truncated_counting(
    w: &ExprRef,
    a: Target,
    c: Complex64,
    r: f64,
) -> Result<TruncatedCounting, NevanlinnaError> {
    let (base, target) = match a {
        Target::Finite(a) => (w.clone(), a),
        Target::Infinity => (Expr::div(Expr::real(1.0), w.clone()), Complex64::new(0.0, 0.0)),
    };
    let h = Expr::sub(base.clone(), Expr::constant(target));
    let disc = Disc::centered(r)?;
    let div_h = locate_divisor(&h, &disc, 1e-9)?;

    let delta = forward_difference(&base, c);
    if difference_vanishes(&delta, &base, r) {
        return Ok(TruncatedCounting { value: 0.0, degenerate_difference: true });
    }
    let div_delta = locate_divisor(&delta, &disc, 1e-9)?;

    let origin_tol = 1e-10 * (1.0 + r);
    let mut value = 0.0;
    for e in div_h.zeros() {
        let ord_delta = div_delta.order_at(e.location, PointKind::Zero);
        let contrib = e.multiplicity.saturating_sub(ord_delta);
        if contrib == 0 {
            continue;
        }
        let modulus = e.location.norm();
        if modulus <= origin_tol {
            value += f64::from(contrib) * r.ln();
        } else if modulus <= r {
            value += f64::from(contrib) * (r / modulus).ln();
        }
    }
    Ok(TruncatedCounting { value, degenerate_difference: false })
}

/// Probe test for Δ ≡ 0, relative to the magnitude of the base function.
fn difference_vanishes(delta: &ExprRef, base: &ExprRef, r: f64) -> bool {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut valid = 0;
    for i in 0..24u32 {
        let radius = if i % 2 == 0 { 0.37 * r } else { 0.73 * r };
        let z = Complex64::from_polar(radius, golden * i as f64);
        let (d, b) = match (delta.eval_log(z), base.eval_log(z)) {
            (Ok(d), Ok(b)) => (d, b),
            _ => continue,
        };
        valid += 1;
        if d.is_zero() {
            continue;
        }
        if d.log_abs > b.log_abs + (1e-10f64).ln() {
            return false;
        }
    }
    valid >= 8
}

// ---------------------------------------------------------------------------
// Growth estimates
// ---------------------------------------------------------------------------

/// Least-squares order/hyper-order fit. These are empirical slopes —
/// a limsup is not computable from finitely many samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub sigma: f64,
    pub varsigma: f64,
    pub r_grid: Vec<f64>,
    pub fit_residual: f64,
    pub varsigma_residual: f64,
    pub note: String,
}

/// Fit σ and ς from (r, T(r)) samples: σ is the slope of log⁺T against
/// log r, ς the slope of log⁺log⁺T against log r.
pub fn growth_estimate_from_samples(samples: &[(f64, f64)]) -> Result<GrowthEstimate, NevanlinnaError> {
    if samples.len() < 8 || samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(NevanlinnaError::GridTooSmall);
    }
    let xs: Vec<f64> = samples.iter().map(|(r, _)| r.ln()).collect();
    let y1: Vec<f64> = samples.iter().map(|(_, t)| log_plus(t.ln())).collect();
    let y2: Vec<f64> = samples
        .iter()
        .map(|(_, t)| log_plus(log_plus(t.ln()).ln()))
        .collect();
    let (sigma, _, res1) = linear_fit(&xs, &y1);
    let (varsigma, _, res2) = linear_fit(&xs, &y2);
    Ok(GrowthEstimate {
        sigma,
        varsigma,
        r_grid: samples.iter().map(|(r, _)| *r).collect(),
        fit_residual: res1,
        varsigma_residual: res2,
        note: "empirical — limsup not computable from finitely many samples".into(),
    })
}

/// Growth estimate of a meromorphic function from its characteristic.
pub fn growth_estimate(f: &ExprRef, r_grid: &[f64], tol: f64) -> Result<GrowthEstimate, NevanlinnaError> {
    if r_grid.len() < 8 {
        return Err(NevanlinnaError::GridTooSmall);
    }
    let rmax = r_grid.last().copied().unwrap();
    let div = locate_divisor(f, &Disc::centered(rmax)?, 1e-9)?;
    let mut samples = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let cs = characteristic_from_divisor(f, &div, r, tol)?;
        samples.push((r, cs.t));
    }
    growth_estimate_from_samples(&samples)
}

/// Growth estimate of a holomorphic curve from its Cartan characteristic.
pub fn growth_estimate_curve(
    coords: &[ExprRef],
    r_grid: &[f64],
    tol: f64,
) -> Result<GrowthEstimate, NevanlinnaError> {
    if r_grid.len() < 8 {
        return Err(NevanlinnaError::GridTooSmall);
    }
    let mut samples = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let (t, _) = cartan_characteristic(coords, r, tol)?;
        samples.push((r, t));
    }
    growth_estimate_from_samples(&samples)
}

/// (slope, intercept, rms residual) of an ordinary least squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;

    #[test]
    fn proximity_of_identity() {
        // m(r, z) = log r for r > 1
        let f = parse_expr("z").unwrap();
        let (m, err) = proximity(&f, std::f64::consts::E).unwrap();
        assert!((m - 1.0).abs() < 1e-9 + 5.0 * err, "m = {m}");
    }

    #[test]
    fn proximity_gamma_ratio_is_log_r() {
        let f = parse_expr("shift(gamma(z); 1) / gamma(z)").unwrap();
        let (m, _) = proximity(&f, 10.0).unwrap();
        assert!((m - 10.0f64.ln()).abs() < 1e-6, "m = {m}, want {}", 10.0f64.ln());
    }

    #[test]
    fn proximity_exponential_closed_form() {
        // ∫ log⁺ e^{r cos θ} dθ/2π = r/π
        let f = parse_expr("exp(z)").unwrap();
        let r = std::f64::consts::PI;
        let (m, err) = proximity(&f, r).unwrap();
        assert!((m - 1.0).abs() < 1e-8 + 5.0 * err, "m = {m}");
    }

    #[test]
    fn counting_single_zero() {
        let f = parse_expr("z - 1").unwrap();
        let div = locate_divisor(&f, &Disc::centered(4.0).unwrap(), 1e-10).unwrap();
        let n = counting(&div, std::f64::consts::E, PointKind::Zero).unwrap();
        assert!((n - 1.0).abs() < 1e-9);
        // empty kind
        let p = counting(&div, 2.0, PointKind::Pole).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn counting_gamma_poles_matches_direct_sum() {
        let f = parse_expr("gamma(z)").unwrap();
        let div = locate_divisor(&f, &Disc::centered(5.2).unwrap(), 1e-10).unwrap();
        let n = counting(&div, 5.0, PointKind::Pole).unwrap();
        let direct: f64 = 5.0f64.ln() + (1..=5).map(|k| (5.0f64 / k as f64).ln()).sum::<f64>();
        assert!((n - direct).abs() < 1e-7, "N = {n}, direct {direct}");
    }

    #[test]
    fn counting_requires_coverage() {
        let f = parse_expr("z").unwrap();
        let div = locate_divisor(&f, &Disc::centered(1.0).unwrap(), 1e-10).unwrap();
        assert!(matches!(
            counting(&div, 2.0, PointKind::Zero),
            Err(NevanlinnaError::DivisorTooSmall { .. })
        ));
    }

    #[test]
    fn characteristic_exponential() {
        let f = parse_expr("exp(z)").unwrap();
        let cs = characteristic(&f, std::f64::consts::PI, 1e-9).unwrap();
        assert_eq!(cs.n, 0.0);
        assert!((cs.t - 1.0).abs() < 1e-8 + 5.0 * cs.quadrature_error);
        assert_eq!(cs.normalized_power, 0);
    }

    #[test]
    fn characteristic_jensen_with_origin_zero() {
        // f = z/(z−1) has f(0) = 0; the z^k normalization makes Jensen exact:
        // T(r, w) − T(r, 1/w) = log|w(0)| with w = f/z = 1/(z−1), w(0) = −1.
        let f = parse_expr("z / (z - 1)").unwrap();
        let finv = parse_expr("(z - 1) / z").unwrap();
        let a = characteristic(&f, 2.0, 1e-10).unwrap();
        let b = characteristic(&finv, 2.0, 1e-10).unwrap();
        assert_eq!(a.normalized_power, -1);
        assert_eq!(b.normalized_power, 1);
        assert!((a.n - 2.0f64.ln()).abs() < 1e-9, "N(2, f) = {}", a.n);
        let jensen = a.t - b.t;
        assert!(jensen.abs() < 1e-8 + 5.0 * (a.quadrature_error + b.quadrature_error));
    }

    #[test]
    fn characteristic_tangent_poles() {
        let f = parse_expr("sin(z) / cos(z)").unwrap();
        let cs = characteristic(&f, 4.0, 1e-9).unwrap();
        // poles at ±π/2 (and ±3π/2 at 4.71 > 4): N = 2 log(4/(π/2))
        let expect = 2.0 * (4.0 / std::f64::consts::FRAC_PI_2).ln();
        assert!((cs.n - expect).abs() < 1e-7, "N = {}, want {expect}", cs.n);
    }

    #[test]
    fn cartan_of_exponential_line() {
        let coords = vec![parse_expr("1").unwrap(), parse_expr("exp(z)").unwrap()];
        let (t, err) = cartan_characteristic(&coords, std::f64::consts::PI, 1e-9).unwrap();
        assert!((t - 1.0).abs() < 1e-8 + 5.0 * err, "T_g = {t}");
        // constant curve
        let consts = vec![parse_expr("1").unwrap(), parse_expr("1").unwrap()];
        let (t0, _) = cartan_characteristic(&consts, 2.0, 1e-9).unwrap();
        assert!(t0.abs() < 1e-12);
    }

    #[test]
    fn cartan_common_zero_detection() {
        // both coordinates vanish at z = 1 (on the circle r = 1): not a
        // reduced representation
        let coords = vec![
            parse_expr("z - 1").unwrap(),
            parse_expr("(z - 1) * exp(z)").unwrap(),
        ];
        let r = cartan_characteristic(&coords, 1.0, 1e-9);
        assert!(matches!(r, Err(NevanlinnaError::CommonZeroSuspected { .. })));
    }

    #[test]
    fn truncated_counting_periodic_degenerate() {
        let w = parse_expr("exp(z)").unwrap();
        let c = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let out = truncated_counting(&w, Target::Finite(Complex64::new(1.0, 0.0)), c, 1.0).unwrap();
        assert!(out.degenerate_difference);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn truncated_counting_simple_point() {
        // w = e^z, a = 1, c = 1: a-point at 0 simple, Δ(0) = e−1 ≠ 0;
        // contribution log r = 0 at r = 1
        let w = parse_expr("exp(z)").unwrap();
        let out = truncated_counting(
            &w,
            Target::Finite(Complex64::new(1.0, 0.0)),
            Complex64::new(1.0, 0.0),
            1.0,
        )
        .unwrap();
        assert!(!out.degenerate_difference);
        assert!(out.value.abs() < 1e-12);
    }

    #[test]
    fn growth_of_exponential_and_polynomial() {
        let grid: Vec<f64> = (0..10).map(|i| 10.0 * 1.4f64.powi(i)).collect();
        let f = parse_expr("exp(z)").unwrap();
        let g = growth_estimate(&f, &grid, 1e-8).unwrap();
        assert!((g.sigma - 1.0).abs() < 0.05, "σ = {}", g.sigma);
        // T(r, poly) = deg·log r + O(1), so the σ slope decays like 1/log r;
        // a wide grid brings it near zero
        let wide: Vec<f64> = (0..10).map(|i| 1000.0 * 2.0f64.powi(i)).collect();
        let p = parse_expr("z^3 - 2*z + 1").unwrap();
        let gp = growth_estimate(&p, &wide, 1e-8).unwrap();
        assert!(gp.sigma.abs() < 0.15, "σ(poly) = {}", gp.sigma);
    }
}
