//! Zero isolation for entire functions by recursive subdivision of a
//! bounding rectangle with winding-number counts on each cell, Newton
//! polish for simple zeros, and a first-moment centroid test for multiple
//! ones. Cells whose boundary cannot be freed of zeros are re-split at a
//! perturbed ratio so that children always tile the parent exactly —
//! nothing is ever counted twice.

use num_complex::Complex64;

use crate::expr::{ExprError, ExprRef};
use crate::quad::adaptive_segment;

use super::derivs::value_and_deriv_log;

#[derive(Debug, Clone, Copy)]
pub struct IsolationParams {
    /// Zero acceptance: |g(z*)| below tol × (local magnitude scale).
    pub tol: f64,
    /// Cells below this half-size with winding > 1 are unresolved clusters.
    pub min_half: f64,
    /// Below this half-size a winding-m cell may be collapsed to a single
    /// multiplicity-m point via the centroid test.
    pub moment_half: f64,
}

#[derive(Debug)]
pub enum IsolateFail {
    /// A zero sits (numerically) on the current boundary; the caller should
    /// retry with a perturbed split or outer rectangle.
    Contaminated,
    Unresolved { center: Complex64, size: f64, count: i64 },
    Eval(ExprError),
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn half(&self) -> f64 {
        0.5 * (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.x0 - slack
            && z.re <= self.x1 + slack
            && z.im >= self.y0 - slack
            && z.im <= self.y1 + slack
    }
}

/// Isolate all zeros of the entire function `g` inside the square of the
/// given half-side around `center`. Returns (location, multiplicity) pairs
/// sorted by real then imaginary part.
/// Geometrically graded growth factors for the outer square: a zero
/// sitting exactly on the boundary must end up far enough inside to be
/// resolvable by the forced panel depth of the edge quadrature.
const OUTER_GROWTH: [f64; 8] = [0.0, 1e-6, 1e-5, 1e-4, 6e-4, 3e-3, 1.3e-2, 4.7e-2];

pub fn isolate_zeros(
    g: &ExprRef,
    center: Complex64,
    half: f64,
    params: &IsolationParams,
) -> Result<Vec<(Complex64, u32)>, IsolateFail> {
    for &growth in OUTER_GROWTH.iter() {
        let h = half * (1.0 + growth);
        let rect = Rect {
            x0: center.re - h,
            x1: center.re + h,
            y0: center.im - h,
            y1: center.im + h,
        };
        let mut out = Vec::new();
        match process(g, rect, params, &mut out) {
            Ok(()) => {
                out.sort_by(|a, b| {
                    (a.0.re, a.0.im)
                        .partial_cmp(&(b.0.re, b.0.im))
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                return Ok(out);
            }
            Err(IsolateFail::Contaminated) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(IsolateFail::Contaminated)
}

fn process(
    g: &ExprRef,
    rect: Rect,
    params: &IsolationParams,
    out: &mut Vec<(Complex64, u32)>,
) -> Result<(), IsolateFail> {
    let n = rect_winding(g, &rect)?;
    if n < 0 {
        // an entire function cannot wind negatively; the contour integral
        // must have been corrupted
        return Err(IsolateFail::Contaminated);
    }
    if n == 0 {
        return Ok(());
    }
    if n == 1 {
        if let Some(z) = polish(g, rect.center(), 1, &rect, params) {
            out.push((z, 1));
            return Ok(());
        }
    } else if rect.half() <= params.moment_half {
        if let Some(z) = moment_candidate(g, &rect, n)? {
            if let Some(z) = polish(g, z, n as u32, &rect, params) {
                if confirm_multiplicity(g, z, n, rect.half(), params) {
                    out.push((z, n as u32));
                    return Ok(());
                }
            }
        }
    }
    if rect.half() < params.min_half {
        return Err(IsolateFail::Unresolved { center: rect.center(), size: rect.half(), count: n });
    }
    split(g, rect, n, params, out)
}

const SPLIT_RATIOS: [f64; 5] = [0.5, 0.5037, 0.4918, 0.5124, 0.4873];

fn split(
    g: &ExprRef,
    rect: Rect,
    expected: i64,
    params: &IsolationParams,
    out: &mut Vec<(Complex64, u32)>,
) -> Result<(), IsolateFail> {
    'ratios: for &r in SPLIT_RATIOS.iter() {
        if std::env::var("ISOLATE_DEBUG").is_ok() {
            eprintln!("split rect [{:.8},{:.8}]x[{:.8},{:.8}] n={} ratio={}", rect.x0, rect.x1, rect.y0, rect.y1, expected, r);
        }
        let xs = rect.x0 + (rect.x1 - rect.x0) * r;
        let ys = rect.y0 + (rect.y1 - rect.y0) * r;
        let children = [
            Rect { x0: rect.x0, x1: xs, y0: rect.y0, y1: ys },
            Rect { x0: xs, x1: rect.x1, y0: rect.y0, y1: ys },
            Rect { x0: rect.x0, x1: xs, y0: ys, y1: rect.y1 },
            Rect { x0: xs, x1: rect.x1, y0: ys, y1: rect.y1 },
        ];
        let mut found = Vec::new();
        let mut total = 0u32;
        for child in children {
            match process(g, child, params, &mut found) {
                Ok(()) => {}
                Err(IsolateFail::Contaminated) => continue 'ratios,
                Err(e) => return Err(e),
            }
        }
        for &(_, m) in &found {
            total += m;
        }
        if i64::from(total) != expected {
            if std::env::var("ISOLATE_DEBUG").is_ok() {
                eprintln!("  -> total {} != expected {} at ratio {}", total, expected, r);
            }
            // a zero slipped through the split line; try another ratio
            continue 'ratios;
        }
        out.extend(found);
        return Ok(());
    }
    Err(IsolateFail::Contaminated)
}

/// Winding number of g over the rectangle boundary via adaptive edge
/// quadrature, required to land stably within 0.25 of an integer.
fn rect_winding(g: &ExprRef, rect: &Rect) -> Result<i64, IsolateFail> {
    let corners = rect.corners();
    let ld = |z: Complex64| -> Result<Complex64, ExprError> {
        let (v, d) = value_and_deriv_log(g, z)?;
        if v.is_zero() {
            return Err(ExprError::SingularPoint { at: z });
        }
        let ratio = d.div(v);
        if ratio.log_abs > 32.3 {
            // |g'/g| beyond ~1e14: effectively on a zero
            return Err(ExprError::SingularPoint { at: z });
        }
        ratio.to_c64().ok_or(ExprError::Overflow { at: z })
    };
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        match adaptive_segment(&ld, corners[k], corners[(k + 1) % 4], 0.05) {
            Ok(v) => total += v,
            Err(crate::quad::ContourError::Integrand(
                e @ (ExprError::Unsupported(_) | ExprError::BadScale(_)),
            )) => return Err(IsolateFail::Eval(e)),
            Err(e) => {
                if std::env::var("ISOLATE_DEBUG").is_ok() {
                    eprintln!("rect edge {k} [{:.8},{:.8}]x[{:.8},{:.8}] failed: {:?}", rect.x0, rect.x1, rect.y0, rect.y1, match &e { crate::quad::ContourError::Integrand(x) => format!("integrand {x}"), _ => "no convergence".into() });
                }
                return Err(IsolateFail::Contaminated);
            }
        }
    }
    let w = total / two_pi_i;
    let nearest = w.re.round();
    let residual = ((w.re - nearest).powi(2) + w.im.powi(2)).sqrt();
    if std::env::var("ISOLATE_DEBUG").is_ok() {
        eprintln!("rect [{:.8},{:.8}]x[{:.8},{:.8}]: w = {w}, residual {residual:.3e}", rect.x0, rect.x1, rect.y0, rect.y1);
    }
    if residual < 0.25 {
        Ok(nearest as i64)
    } else {
        Err(IsolateFail::Contaminated)
    }
}

/// Multiplicity-aware Newton: z ← z − m / (g'/g)(z). Accepts when the step
/// collapses and |g| has dropped below tol relative to the corner scale.
fn polish(
    g: &ExprRef,
    start: Complex64,
    mult: u32,
    rect: &Rect,
    params: &IsolationParams,
) -> Option<Complex64> {
    let scale_log = rect
        .corners()
        .iter()
        .filter_map(|&c| value_and_deriv_log(g, c).ok().map(|(v, _)| v.log_abs))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z = start;
    let mut last_step = f64::INFINITY;
    for _ in 0..80 {
        let (v, d) = match value_and_deriv_log(g, z) {
            Ok(p) => p,
            Err(_) => return None,
        };
        if v.is_zero() {
            return Some(z);
        }
        let ratio = match d.div(v).to_c64() {
            Some(r) if r.norm() > 0.0 => r,
            _ => return None,
        };
        let step = Complex64::new(mult as f64, 0.0) / ratio;
        z -= step;
        last_step = step.norm();
        if !rect.contains(z, rect.half()) {
            return None;
        }
        if last_step < 1e-13 * (1.0 + z.norm()) {
            break;
        }
    }
    if last_step > 1e-9 * (1.0 + z.norm()) {
        return None;
    }
    let (v, _) = value_and_deriv_log(g, z).ok()?;
    let ok_value = v.is_zero()
        || (scale_log.is_finite() && v.log_abs <= scale_log + params.tol.ln())
        || v.log_abs <= params.tol.ln();
    if ok_value {
        Some(z)
    } else {
        None
    }
}

/// First moment of the zero set: (1/2πi·n) ∮ z g'(z)/g(z) dz.
fn moment_candidate(g: &ExprRef, rect: &Rect, n: i64) -> Result<Option<Complex64>, IsolateFail> {
    let integrand = |z: Complex64| -> Result<Complex64, ExprError> {
        let (v, d) = value_and_deriv_log(g, z)?;
        if v.is_zero() {
            return Err(ExprError::SingularPoint { at: z });
        }
        let r = d.div(v).to_c64().ok_or(ExprError::Overflow { at: z })?;
        Ok(z * r)
    };
    let corners = rect.corners();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        match adaptive_segment(&integrand, corners[k], corners[(k + 1) % 4], 0.01 * rect.half()) {
            Ok(v) => total += v,
            Err(_) => return Ok(None),
        }
    }
    let centroid = total / Complex64::new(0.0, 2.0 * std::f64::consts::PI) / n as f64;
    if rect.contains(centroid, rect.half() * 0.5) {
        Ok(Some(centroid))
    } else {
        Ok(None)
    }
}

/// A winding count of exactly m on a tight square around z* certifies the
/// multiplicity.
fn confirm_multiplicity(
    g: &ExprRef,
    z: Complex64,
    m: i64,
    cell_half: f64,
    params: &IsolationParams,
) -> bool {
    let mut h = (cell_half * 1e-3).max(params.min_half * 4.0);
    for _ in 0..3 {
        let rect = Rect { x0: z.re - h, x1: z.re + h, y0: z.im - h, y1: z.im + h };
        match rect_winding(g, &rect) {
            Ok(n) if n == m => return true,
            Ok(_) => return false,
            Err(_) => h *= 1.618, // boundary too close to the point; widen
        }
    }
    false
}
