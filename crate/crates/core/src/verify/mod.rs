//! Theorem-verification harness: evaluates both sides of the explicit
//! growth inequalities on concrete instances and emits margin reports.
//!
//! Unconditional inequalities (the circle-average bound and the shifted
//! logarithmic proximity bound) are hard pass/fail up to quadrature error;
//! asymptotic statements carry unquantified o(·)/O(1) terms and are
//! reported as margins and fitted trends only, with candidate exceptional
//! windows annotated rather than judged.

pub mod examples;

pub use examples::{example_ids, run_example, ExampleReport, NamedCheck};

use num_complex::Complex64;
use serde::Serialize;

use crate::casorati::{casorati, dependence_over_periodic, DependenceOptions, Verdict as DepVerdict};
use crate::expr::{Expr, ExprError, ExprRef};
use crate::hyperplanes::{apply, forward_invariant, general_position, Curve, Hyperplane, HyperplaneError};
use crate::nevanlinna::{
    cartan_characteristic, characteristic_from_divisor, circle_average, counting, growth_estimate,
    linear_fit, proximity, GrowthEstimate, NevanlinnaError,
};
use crate::roots::{locate_divisor, Disc, PointKind, RootsError};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("parameters out of range: {0}")]
    BadParameters(String),
    #[error("curve coordinates are linearly dependent over the shift-periodic field (verdict {0:?})")]
    DependentCoordinates(DepVerdict),
    #[error("the linear-combination coefficient rows are not in general position")]
    CoefficientDegeneracy,
    #[error("characteristic samples must be nondecreasing in r")]
    NonMonotoneInput,
    #[error("sharing condition ({condition}) fails for target {target_index} at {witness}")]
    SharingViolated { target_index: usize, condition: &'static str, witness: Complex64 },
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Roots(#[from] RootsError),
    #[error(transparent)]
    Nevanlinna(#[from] NevanlinnaError),
    #[error(transparent)]
    Hyperplane(#[from] HyperplaneError),
    #[error(transparent)]
    Casorati(#[from] crate::casorati::CasoratiError),
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportVerdict {
    /// Every margin is nonnegative within the stated error allowance.
    Pass,
    /// At least one margin dips below the allowance — for unconditional
    /// inequalities this is a defect.
    Violation,
    /// Margins reported as trends; unquantified o(·)/O(1) terms make a
    /// pointwise pass/fail unsound.
    TrendOnly,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReportRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub quadrature_error: f64,
}

/// Grid window where the margin dips below the error allowance; its
/// logarithmic size is reported, with no claim about finiteness of the
/// union over all radii.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExceptionalWindow {
    pub r_lo: f64,
    pub r_hi: f64,
    pub rows: usize,
    pub log_measure: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub verdict: ReportVerdict,
    pub rows: Vec<ReportRow>,
    /// Indices of rows violating the allowance (hard reports only).
    pub violations: Vec<usize>,
    pub exceptional_windows: Vec<ExceptionalWindow>,
    /// Least-squares slope of the margin against r, when meaningful.
    pub margin_slope: Option<f64>,
    /// Fitted additive offset standing in for an O(1) term, when used.
    pub fitted_offset: Option<f64>,
    pub notes: Vec<String>,
}

impl Report {
    fn hard(scenario: String, rows: Vec<ReportRow>, error_factor: f64, notes: Vec<String>) -> Report {
        let violations: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row.margin < -error_factor * row.quadrature_error)
            .map(|(i, _)| i)
            .collect();
        let verdict = if violations.is_empty() { ReportVerdict::Pass } else { ReportVerdict::Violation };
        Report {
            scenario,
            verdict,
            exceptional_windows: windows(&rows, error_factor),
            rows,
            violations,
            margin_slope: None,
            fitted_offset: None,
            notes,
        }
    }

    fn trend(scenario: String, rows: Vec<ReportRow>, notes: Vec<String>) -> Report {
        let xs: Vec<f64> = rows.iter().map(|r| r.r).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.margin).collect();
        let slope = if rows.len() >= 2 { Some(linear_fit(&xs, &ys).0) } else { None };
        Report {
            scenario,
            verdict: ReportVerdict::TrendOnly,
            exceptional_windows: windows(&rows, 3.0),
            rows,
            violations: Vec::new(),
            margin_slope: slope,
            fitted_offset: None,
            notes,
        }
    }
}

fn windows(rows: &[ReportRow], error_factor: f64) -> Vec<ExceptionalWindow> {
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for (i, row) in rows.iter().enumerate() {
        let dip = row.margin < -error_factor * row.quadrature_error;
        match (dip, run) {
            (true, None) => run = Some((i, i)),
            (true, Some((s, _))) => run = Some((s, i)),
            (false, Some((s, e))) => {
                out.push(window_from(rows, s, e));
                run = None;
            }
            (false, None) => {}
        }
    }
    if let Some((s, e)) = run {
        out.push(window_from(rows, s, e));
    }
    out
}

fn window_from(rows: &[ReportRow], s: usize, e: usize) -> ExceptionalWindow {
    let r_lo = rows[s].r;
    let r_hi = rows[e].r;
    ExceptionalWindow { r_lo, r_hi, rows: e - s + 1, log_measure: (r_hi / r_lo).ln().max(0.0) }
}

// ---------------------------------------------------------------------------
// Bound parameters
// ---------------------------------------------------------------------------

/// Parameters of the shifted-proximity bound, with the constant
/// K(α, δ, c) = 4|c|^δ(4α + αδ + δ) / (δ(1−δ)(α−1)) computed by two
/// independent arithmetic routes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundParams {
    pub alpha: f64,
    pub delta: f64,
    #[serde(skip)]
    pub c: Complex64,
    pub k: f64,
}

impl BoundParams {
    pub fn new(alpha: f64, delta: f64, c: Complex64) -> Result<BoundParams, VerifyError> {
        if !(alpha > 1.0) || !(0.0 < delta && delta < 1.0) {
            return Err(VerifyError::BadParameters(format!(
                "need alpha > 1 and delta in (0,1); got alpha={alpha}, delta={delta}"
            )));
        }
        let k = Self::k_direct(alpha, delta, c);
        Ok(BoundParams { alpha, delta, c, k })
    }

    pub fn k_direct(alpha: f64, delta: f64, c: Complex64) -> f64 {
        4.0 * c.norm().powf(delta) * (4.0 * alpha + alpha * delta + delta)
            / (delta * (1.0 - delta) * (alpha - 1.0))
    }

    /// Same constant through the factored form
    /// (4|c|^δ / ((1−δ)(α−1))) · (4α/δ + α + 1).
    pub fn k_factored(alpha: f64, delta: f64, c: Complex64) -> f64 {
        (4.0 * c.norm().powf(delta) / ((1.0 - delta) * (alpha - 1.0)))
            * (4.0 * alpha / delta + alpha + 1.0)
    }
}

// ---------------------------------------------------------------------------
// Circle-average bound (unconditional, all r > 0)
// ---------------------------------------------------------------------------

/// ∫ log⁺|1 + c/(re^{iθ} − a)| dθ/2π ≤ (1/δ)·log⁺(1 + |c|^δ/((1−δ) r^δ)).
pub fn check_ineq_lemma(
    a: Complex64,
    c: Complex64,
    delta: f64,
    r: f64,
) -> Result<Report, VerifyError> {
    if !(0.0 < delta && delta < 1.0) || !(r > 0.0) {
        return Err(VerifyError::BadParameters(format!("delta={delta}, r={r}")));
    }
    // the integrand is singular only where re^{iθ} = a
    let splits: Vec<f64> = if (a.norm() - r).abs() < 0.02 * r { vec![a.arg()] } else { vec![] };
    let (lhs, err) = circle_average(
        |theta| {
            let z = Complex64::from_polar(r, theta);
            let den = z - a;
            if den.norm() == 0.0 {
                return Err(ExprError::SingularPoint { at: z });
            }
            let v = Complex64::new(1.0, 0.0) + c / den;
            Ok(if v.norm() > 1.0 { v.norm().ln() } else { 0.0 })
        },
        &splits,
        1e-10,
    )?;
    let rhs = plog(1.0 + c.norm().powf(delta) / ((1.0 - delta) * r.powf(delta))) / delta;
    let rows = vec![ReportRow { r, lhs, rhs, margin: rhs - lhs, quadrature_error: err }];
    Ok(Report::hard(
        format!("ineq-lemma a={a} c={c} delta={delta}"),
        rows,
        1.0,
        vec![],
    ))
}

fn plog(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Shifted proximity bound (unconditional)
// ---------------------------------------------------------------------------

/// m(r, f(z+c)/f(z)) ≤ (K/r^δ)·(T(α(r+|c|), f) + log⁺ 1/|f(0)|), for all
/// α > 1, δ ∈ (0,1), r > 0. A violation beyond the error allowance is a
/// build-failing defect. When f(0) ∈ {0, ∞} the function is replaced by
/// z^k·f with the origin regularized, as the report notes.
pub fn check_logdiff_bound(
    f: &ExprRef,
    params: &BoundParams,
    r: f64,
) -> Result<Report, VerifyError> {
    let big_r = params.alpha * (r + params.c.norm());
    let div = locate_divisor(f, &Disc::centered(big_r)?, 1e-9)?;
    let cs = characteristic_from_divisor(f, &div, big_r, 1e-10)?;
    let mut notes = Vec::new();
    let w = if cs.normalized_power != 0 {
        notes.push(format!(
            "origin normalized: working with z^{}·f",
            cs.normalized_power
        ));
        Expr::mul(Expr::powi(Expr::var(), cs.normalized_power), f.clone())
    } else {
        f.clone()
    };
    let w0 = w.eval(Complex64::new(0.0, 0.0))?;
    let log_plus_recip = plog(1.0 / w0.norm());
    let ratio = Expr::div(Expr::shift(w.clone(), params.c), w.clone());
    let (lhs, err_m) = proximity(&ratio, r)?;
    let rhs = params.k / r.powf(params.delta) * (cs.t + log_plus_recip);
    let rows = vec![ReportRow {
        r,
        lhs,
        rhs,
        margin: rhs - lhs,
        quadrature_error: err_m + cs.quadrature_error,
    }];
    Ok(Report::hard(
        format!("logdiff-bound alpha={} delta={} r={r}", params.alpha, params.delta),
        rows,
        3.0,
        notes,
    ))
}

// ---------------------------------------------------------------------------
// Asymptotic logarithmic-difference estimates (trend only)
// ---------------------------------------------------------------------------

/// m(r, f(z+c)/f(z)) against (log r / r)·T(r, f) and against
/// T(r, f)/r^{1−ς−ε}: trends only — the exceptional sets make pointwise
/// judgments unsound.
pub fn check_logdiff_asymptotic(
    f: &ExprRef,
    c: Complex64,
    r_grid: &[f64],
) -> Result<Report, VerifyError> {
    if r_grid.len() < 2 {
        return Err(VerifyError::BadParameters("need at least 2 radii".into()));
    }
    let growth = growth_estimate(f, &pad_grid(r_grid), 1e-8)?;
    let epsilon = 0.1;
    let exponent = 1.0 - growth.varsigma.max(0.0) - epsilon;
    let rmax = r_grid.last().copied().unwrap();
    let div = locate_divisor(f, &Disc::centered(rmax)?, 1e-9)?;
    let ratio_of = |w: &ExprRef| Expr::div(Expr::shift(w.clone(), c), w.clone());
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut notes = vec![
        format!(
            "growth fit: sigma={:.4}, varsigma={:.4} (residuals {:.2e}/{:.2e})",
            growth.sigma, growth.varsigma, growth.fit_residual, growth.varsigma_residual
        ),
        format!("comparison exponent 1−ς−ε with ε={epsilon}: r^{exponent:.3}"),
    ];
    for &r in r_grid {
        let cs = characteristic_from_divisor(f, &div, r, 1e-9)?;
        let w = if cs.normalized_power != 0 {
            Expr::mul(Expr::powi(Expr::var(), cs.normalized_power), f.clone())
        } else {
            f.clone()
        };
        let (m_ratio, err) = proximity(&ratio_of(&w), r)?;
        let finite_order_side = r.ln() / r * cs.t;
        rows.push(ReportRow {
            r,
            lhs: m_ratio,
            rhs: finite_order_side,
            margin: finite_order_side - m_ratio,
            quadrature_error: err + cs.quadrature_error,
        });
    }
    // second comparison recorded as a note column would lose data; attach a
    // compact summary of m·r^{1−ς−ε}/T instead
    let mut summary = String::from("m(r,ratio)·r^(1−ς−ε)/T(r):");
    for row in &rows {
        let cs_t = row.rhs * row.r / row.r.ln();
        let q = if cs_t > 0.0 { row.lhs * row.r.powf(exponent) / cs_t } else { f64::NAN };
        summary.push_str(&format!(" {:.3}", q));
    }
    notes.push(summary);
    Ok(Report::trend(format!("logdiff-asymptotic c={c}"), rows, notes))
}

fn pad_grid(grid: &[f64]) -> Vec<f64> {
    // growth fits need ≥ 8 points; densify geometrically if needed
    if grid.len() >= 8 {
        return grid.to_vec();
    }
    let lo = grid.first().copied().unwrap();
    let hi = grid.last().copied().unwrap();
    (0..8)
        .map(|i| lo * (hi / lo).powf(i as f64 / 7.0))
        .collect()
}

/// Empirical check that a nondecreasing characteristic of hyper-order < 1
/// satisfies T(r+s) = T(r) + o(T(r)/r^δ): reports (T(r+s) − T(r))·r^δ/T(r)
/// per radius. T(r+s) is linearly interpolated between samples.
pub fn check_shift_characteristic(
    samples: &[(f64, f64)],
    s: f64,
    delta: f64,
) -> Result<Report, VerifyError> {
    if samples.windows(2).any(|w| w[1].1 < w[0].1 - 1e-12 || w[1].0 <= w[0].0) {
        return Err(VerifyError::NonMonotoneInput);
    }
    if !(s > 0.0) || !(0.0 < delta && delta < 1.0) {
        return Err(VerifyError::BadParameters(format!("s={s}, delta={delta}")));
    }
    let rmax = samples.last().unwrap().0;
    let interp = |r: f64| -> Option<f64> {
        if r > rmax {
            return None;
        }
        let j = samples.partition_point(|(x, _)| *x < r);
        if j == 0 {
            return Some(samples[0].1);
        }
        let (x0, y0) = samples[j - 1];
        let (x1, y1) = samples[j.min(samples.len() - 1)];
        if x1 == x0 {
            return Some(y0);
        }
        Some(y0 + (y1 - y0) * (r - x0) / (x1 - x0))
    };
    let mut rows = Vec::new();
    for &(r, t) in samples {
        if let Some(ts) = interp(r + s) {
            if t > 0.0 {
                let q = (ts - t) * r.powf(delta) / t;
                rows.push(ReportRow { r, lhs: q, rhs: 0.0, margin: -q, quadrature_error: 0.0 });
            }
        }
    }
    Ok(Report::trend(
        format!("shift-characteristic s={s} delta={delta}"),
        rows,
        vec!["quantity (T(r+s)−T(r))·r^δ/T(r); expected to trend to zero".into()],
    ))
}

// ---------------------------------------------------------------------------
// Second-main-theorem desk instances
// ---------------------------------------------------------------------------

/// Margin report for (q−n)·T_g(r) ≤ N(r, 1/L) − N(r, L) + o(·) + O(1), with
/// L assembled from the shifted products over the family determinant. The
/// fitted O(1) offset is the max deficit over the smallest third of the
/// grid and is flagged heuristic.
pub fn check_smt(
    g: &Curve,
    coeff_rows: &[Vec<Complex64>],
    c: Complex64,
    r_grid: &[f64],
) -> Result<Report, VerifyError> {
    let n = g.dim();
    let q = coeff_rows.len().saturating_sub(1);
    if q <= n {
        return Err(VerifyError::BadParameters(format!(
            "need more combinations than coordinates: q={q}, n={n}"
        )));
    }
    // coordinates independent over the periodic field
    let dep = dependence_over_periodic(
        g.coords(),
        c,
        24,
        1e-10,
        &DependenceOptions { with_growth: false, ..Default::default() },
    )?;
    if dep.verdict != DepVerdict::Independent {
        return Err(VerifyError::DependentCoordinates(dep.verdict));
    }
    // any n+1 of the coefficient rows linearly independent
    let hyper: Vec<Hyperplane> = coeff_rows
        .iter()
        .map(|row| Hyperplane::new(row.clone()))
        .collect::<Result<_, _>>()?;
    let gp = general_position(&hyper)?;
    if !gp.ok {
        return Err(VerifyError::CoefficientDegeneracy);
    }

    let fs: Vec<ExprRef> = hyper
        .iter()
        .map(|h| apply(h, g))
        .collect::<Result<_, _>>()?;
    let mut num: Option<ExprRef> = None;
    for (j, fj) in fs.iter().enumerate() {
        let factor = if j <= n {
            Expr::shift(fj.clone(), c * j as f64)
        } else {
            fj.clone()
        };
        num = Some(match num {
            None => factor,
            Some(acc) => Expr::mul(acc, factor),
        });
    }
    let den = casorati(g.coords(), c)?;
    let l_fn = Expr::div(num.expect("q ≥ 1"), den);

    let rmax = r_grid.last().copied().ok_or_else(|| {
        VerifyError::BadParameters("empty radius grid".into())
    })?;
    let div = locate_divisor(&l_fn, &Disc::centered(rmax)?, 1e-9)?;

    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let n_zeros = counting(&div, r, PointKind::Zero)?;
        let n_poles = counting(&div, r, PointKind::Pole)?;
        let (t_g, err) = cartan_characteristic(g.coords(), r, 1e-9)?;
        let lhs = (q - n) as f64 * t_g;
        let rhs = n_zeros - n_poles;
        rows.push(ReportRow { r, lhs, rhs, margin: rhs - lhs, quadrature_error: err });
    }
    let third = (rows.len() / 3).max(1);
    let offset = rows[..third]
        .iter()
        .map(|row| -row.margin)
        .fold(0.0f64, f64::max);
    let mut report = Report::trend(
        format!("smt q={q} n={n} c={c}"),
        rows,
        vec![format!(
            "O(1) offset fitted as max deficit over the smallest third of the grid: {offset:.6} (heuristic)"
        )],
    );
    report.fitted_offset = Some(offset);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Shared-target verification (ignoring shift-separated pairs)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum IcpTarget {
    Fn(ExprRef),
    Infinity,
}

impl IcpTarget {
    fn label(&self) -> String {
        match self {
            IcpTarget::Fn(e) => e.to_string(),
            IcpTarget::Infinity => "∞".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MobiusFit {
    /// Fitted (A, B, C, D) as re/im pairs with the largest-magnitude entry
    /// normalized to 1.
    pub coefficients: [[f64; 2]; 4],
    pub fit_residual: f64,
    /// Relative residual of the same coefficients at the samples shifted
    /// by c (small when the true coefficients are themselves c-periodic).
    pub shifted_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharingReport {
    pub scenario: String,
    pub targets: Vec<String>,
    /// Per-target count of divisor points checked for the separation rules.
    pub points_checked: Vec<usize>,
    pub mobius: Option<MobiusFit>,
    pub notes: Vec<String>,
}

/// Verify that f and g share each target ignoring c-separated pairs —
/// each zero (pole) of the ratio (f−a)/(g−a) must recur at z+c with at
/// least the same multiplicity — then fit a constant quasi-linear-fractional
/// relation f = (Ag+B)/(Cg+D) at sample points and probe the fitted
/// coefficients for c-periodicity.
pub fn check_icp_sharing(
    f: &ExprRef,
    g: &ExprRef,
    targets: &[IcpTarget; 4],
    c: Complex64,
    disc: &Disc,
) -> Result<SharingReport, VerifyError> {
    let inner = disc.radius - c.norm();
    if inner <= 0.0 {
        return Err(VerifyError::BadParameters(
            "disc radius must exceed |c| so shifted points stay inside".into(),
        ));
    }
    let mut points_checked = Vec::with_capacity(4);
    for (idx, target) in targets.iter().enumerate() {
        let ratio = match target {
            IcpTarget::Fn(a) => Expr::div(
                Expr::sub(f.clone(), a.clone()),
                Expr::sub(g.clone(), a.clone()),
            ),
            IcpTarget::Infinity => Expr::div(g.clone(), f.clone()),
        };
        let div = locate_divisor(&ratio, disc, 1e-9)?;
        let rep = forward_invariant(&div, c, inner)?;
        if !rep.forward_invariant {
            let v = &rep.violations[0];
            let cond = match div
                .entries
                .iter()
                .find(|e| (e.location - Complex64::new(v.location[0], v.location[1])).norm() < 1e-9)
                .map(|e| e.kind)
            {
                Some(PointKind::Zero) => "ii: the ratio vanishes but its shift carries less multiplicity",
                _ => "iii: the ratio has a pole but its shift carries less multiplicity",
            };
            return Err(VerifyError::SharingViolated {
                target_index: idx,
                condition: cond,
                witness: Complex64::new(v.location[0], v.location[1]),
            });
        }
        points_checked.push(rep.points_checked);
    }

    let mobius = fit_mobius(f, g, c, disc.radius * 0.45);
    let mut notes = vec![
        "separation rules hold on every divisor point of each target ratio".into(),
    ];
    if mobius.is_none() {
        notes.push("linear-fractional fit unavailable (samples degenerate)".into());
    }
    Ok(SharingReport {
        scenario: "icp-sharing".into(),
        targets: targets.iter().map(|t| t.label()).collect(),
        points_checked,
        mobius,
        notes,
    })
}

/// Least-squares homogeneous fit of A·g + B − C·fg − D·f = 0 at 8 samples;
/// each unknown is pinned to 1 in turn and the best conditioned candidate
/// wins.
fn fit_mobius(f: &ExprRef, g: &ExprRef, c: Complex64, radius: f64) -> Option<MobiusFit> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut samples = Vec::new();
    let mut i = 0u32;
    while samples.len() < 8 && i < 64 {
        i += 1;
        let z = Complex64::from_polar(radius * (0.6 + 0.4 * ((i as f64) * 0.618).fract()), golden * i as f64);
        if let (Ok(fv), Ok(gv)) = (f.eval(z), g.eval(z)) {
            if fv.norm() < 1e8 && gv.norm() < 1e8 {
                samples.push((z, fv, gv));
            }
        }
    }
    if samples.len() < 8 {
        return None;
    }
    let rows: Vec<[Complex64; 4]> = samples
        .iter()
        .map(|&(_, fv, gv)| [gv, Complex64::new(1.0, 0.0), -fv * gv, -fv])
        .collect();
    let (coeffs, fit_residual) = best_null_vector(&rows)?;
    // residual at shifted samples
    let mut shifted_rows = Vec::new();
    for &(z, _, _) in &samples {
        if let (Ok(fv), Ok(gv)) = (f.eval(z + c), g.eval(z + c)) {
            shifted_rows.push([gv, Complex64::new(1.0, 0.0), -fv * gv, -fv]);
        }
    }
    let shifted_residual = residual_of(&shifted_rows, &coeffs);
    Some(MobiusFit {
        coefficients: [
            [coeffs[0].re, coeffs[0].im],
            [coeffs[1].re, coeffs[1].im],
            [coeffs[2].re, coeffs[2].im],
            [coeffs[3].re, coeffs[3].im],
        ],
        fit_residual,
        shifted_residual,
    })
}

fn residual_of(rows: &[[Complex64; 4]], x: &[Complex64; 4]) -> f64 {
    let mut worst = 0.0f64;
    for row in rows {
        let dot: Complex64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
        let scale: f64 = row
            .iter()
            .zip(x)
            .map(|(a, b)| (a * b).norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        worst = worst.max(dot.norm() / scale);
    }
    worst
}

fn best_null_vector(rows: &[[Complex64; 4]]) -> Option<([Complex64; 4], f64)> {
    let mut best: Option<([Complex64; 4], f64)> = None;
    for pinned in 0..4 {
        // solve min ‖M x − b‖ with x[pinned] = 1 via normal equations
        let cols: Vec<usize> = (0..4).filter(|&k| k != pinned).collect();
        let mut ata = vec![vec![Complex64::new(0.0, 0.0); 3]; 3];
        let mut atb = vec![Complex64::new(0.0, 0.0); 3];
        for row in rows {
            let b = -row[pinned];
            for (i, &ci) in cols.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    ata[i][j] += row[ci].conj() * row[cj];
                }
                atb[i] += row[ci].conj() * b;
            }
        }
        let sol = crate::linalg::solve(ata, atb)?;
        let mut x = [Complex64::new(0.0, 0.0); 4];
        x[pinned] = Complex64::new(1.0, 0.0);
        for (i, &ci) in cols.iter().enumerate() {
            x[ci] = sol[i];
        }
        // normalize so the largest entry is 1
        let max = x.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if max == 0.0 || !max.is_finite() {
            continue;
        }
        let pivot = *x.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())?;
        for v in x.iter_mut() {
            *v /= pivot;
        }
        let res = residual_of(rows, &x);
        if best.as_ref().map(|(_, r)| res < *r).unwrap_or(true) {
            best = Some((x, res));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Randomized suites
// ---------------------------------------------------------------------------

/// Aggregate of a randomized inequality suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub scenario: String,
    pub cases: usize,
    pub violations: usize,
    pub worst_margin_over_error: f64,
    pub notes: Vec<String>,
}

/// Deterministic suite over the circle-average bound: `cases` draws of
/// (a, c, δ, r) from the stated ranges, zero violations expected.
pub fn ineq_lemma_suite(cases: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut state = seed.max(1);
    let mut next = move || {
        // xorshift64*
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        state.wrapping_mul(0x2545F4914F6CDD1D) as f64 / u64::MAX as f64
    };
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..cases {
        let a = Complex64::from_polar(5.0 * next(), 2.0 * std::f64::consts::PI * next());
        let c = Complex64::from_polar(5.0 * next(), 2.0 * std::f64::consts::PI * next());
        let delta = 0.1 + 0.8 * next();
        let r = 0.1 * (1000.0f64).powf(next()); // log-uniform in [0.1, 100]
        let rep = check_ineq_lemma(a, c, delta, r)?;
        let row = rep.rows[0];
        let allowance = row.quadrature_error.max(1e-14);
        worst = worst.min(row.margin / allowance);
        if rep.verdict == ReportVerdict::Violation {
            violations += 1;
        }
    }
    Ok(SuiteReport {
        scenario: format!("ineq-lemma-suite cases={cases} seed={seed}"),
        cases,
        violations,
        worst_margin_over_error: worst,
        notes: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;

    #[test]
    fn k_constant_two_routes() {
        let k = BoundParams::k_direct(2.0, 0.5, Complex64::new(1.0, 0.0));
        assert!((k - 152.0).abs() < 1e-12, "K(2, 1/2, 1) = {k}");
        for &(a, d, cr, ci) in
            &[(2.0, 0.5, 1.0, 0.0), (1.3, 0.25, -2.0, 0.7), (7.5, 0.9, 0.0, 3.0), (1.01, 0.05, 5.0, -5.0)]
        {
            let c = Complex64::new(cr, ci);
            let k1 = BoundParams::k_direct(a, d, c);
            let k2 = BoundParams::k_factored(a, d, c);
            assert!(((k1 - k2) / k1).abs() < 1e-14, "routes disagree: {k1} vs {k2}");
        }
    }

    #[test]
    fn ineq_lemma_degenerate_and_derived() {
        // c = 0: both sides vanish
        let rep = check_ineq_lemma(
            Complex64::new(1.0, 0.5),
            Complex64::new(0.0, 0.0),
            0.5,
            2.0,
        )
        .unwrap();
        assert_eq!(rep.verdict, ReportVerdict::Pass);
        assert!(rep.rows[0].lhs.abs() < 1e-12 && rep.rows[0].rhs.abs() < 1e-12);
        // a = 0, c = 1, δ = 1/2, r = 4: RHS = 2 log 2
        let rep = check_ineq_lemma(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            0.5,
            4.0,
        )
        .unwrap();
        assert!((rep.rows[0].rhs - 2.0 * 2.0f64.ln()).abs() < 1e-12);
        assert_eq!(rep.verdict, ReportVerdict::Pass);
    }

    #[test]
    fn logdiff_bound_exponential_case() {
        // f = e^z, c = 1, α = 2, δ = 1/2, r = 4: LHS = m(4, e) = 1 exactly;
        // RHS = 152/2 · T(10, e^z) = 76·(10/π)
        let f = parse_expr("exp(z)").unwrap();
        let params = BoundParams::new(2.0, 0.5, Complex64::new(1.0, 0.0)).unwrap();
        let rep = check_logdiff_bound(&f, &params, 4.0).unwrap();
        let row = rep.rows[0];
        assert!((row.lhs - 1.0).abs() < 1e-7, "lhs {}", row.lhs);
        let expect_rhs = 76.0 * (10.0 / std::f64::consts::PI);
        assert!((row.rhs - expect_rhs).abs() < 1e-4 * expect_rhs, "rhs {}", row.rhs);
        assert_eq!(rep.verdict, ReportVerdict::Pass);
    }

    #[test]
    fn logdiff_bound_entire_reciprocal_gamma() {
        // f = 1/Γ(z): f(z+1)/f(z) = 1/z, and m(r, 1/z) = 0 for r ≥ 1
        let f = parse_expr("1 / gamma(z)").unwrap();
        let params = BoundParams::new(2.0, 0.5, Complex64::new(1.0, 0.0)).unwrap();
        let rep = check_logdiff_bound(&f, &params, 5.0).unwrap();
        let row = rep.rows[0];
        assert!(row.lhs.abs() < 1e-8, "m = {}", row.lhs);
        assert_eq!(rep.verdict, ReportVerdict::Pass);
    }

    #[test]
    fn shift_characteristic_closed_forms() {
        // T = r²: quantity ≈ 2s·r^{δ−1} → 0
        let samples: Vec<(f64, f64)> = (1..400).map(|i| {
            let r = i as f64 * 0.5;
            (r, r * r)
        }).collect();
        let rep = check_shift_characteristic(&samples, 1.0, 0.3).unwrap();
        let first = rep.rows.first().unwrap().lhs;
        let last = rep.rows.last().unwrap().lhs;
        assert!(last < first * 0.1, "no decay: first {first}, last {last}");
        // constant T: identically zero
        let flat: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 7.0)).collect();
        let rep = check_shift_characteristic(&flat, 1.0, 0.3).unwrap();
        assert!(rep.rows.iter().all(|r| r.lhs.abs() < 1e-14));
        // non-monotone input is rejected
        let bad = vec![(1.0, 2.0), (2.0, 1.0), (3.0, 3.0)];
        assert!(matches!(
            check_shift_characteristic(&bad, 1.0, 0.3),
            Err(VerifyError::NonMonotoneInput)
        ));
    }

    #[test]
    fn ineq_suite_small() {
        let rep = ineq_lemma_suite(25, 7).unwrap();
        assert_eq!(rep.violations, 0, "worst margin/err {}", rep.worst_margin_over_error);
    }
}
