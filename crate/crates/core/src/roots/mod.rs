//! Zero/pole divisor extraction inside a disc: either from the analytic
//! catalog of the library functions, or numerically via the argument
//! principle (circle winding for the totals, rectangle quadrisection for
//! the locations).

mod derivs;
mod isolate;

pub use derivs::{log_deriv, value_and_deriv_log};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{rationalize, Expr, ExprError, ExprRef};
use crate::quad::adaptive_arc;
use crate::special::EllipticParams;

use isolate::{isolate_zeros, IsolateFail, IsolationParams};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Result<Disc, RootsError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(RootsError::BadDisc);
        }
        Ok(Disc { center: [center.re, center.im], radius })
    }

    pub fn centered(radius: f64) -> Result<Disc, RootsError> {
        Disc::new(Complex64::new(0.0, 0.0), radius)
    }

    pub fn center_c(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        (z - self.center_c()).norm() <= self.radius + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Zero,
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorEntry {
    pub location: Complex64,
    pub multiplicity: u32,
    pub kind: PointKind,
}

// wire form: {re, im, mult, kind}
#[derive(Serialize, Deserialize)]
struct EntryWire {
    re: f64,
    im: f64,
    mult: u32,
    kind: PointKind,
}

impl Serialize for DivisorEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EntryWire {
            re: self.location.re,
            im: self.location.im,
            mult: self.multiplicity,
            kind: self.kind,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DivisorEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = EntryWire::deserialize(d)?;
        Ok(DivisorEntry {
            location: Complex64::new(w.re, w.im),
            multiplicity: w.mult,
            kind: w.kind,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivisorMethod {
    Catalog,
    ArgumentPrinciple,
}

/// Finite multiset of zeros and poles inside a stated disc. Each point is
/// repeated according to its multiplicity (stored as a count).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Divisor {
    pub entries: Vec<DivisorEntry>,
    pub disc: Disc,
    pub method: DivisorMethod,
}

impl Divisor {
    pub fn zeros(&self) -> impl Iterator<Item = &DivisorEntry> {
        self.entries.iter().filter(|e| e.kind == PointKind::Zero)
    }

    pub fn poles(&self) -> impl Iterator<Item = &DivisorEntry> {
        self.entries.iter().filter(|e| e.kind == PointKind::Pole)
    }

    pub fn total(&self, kind: PointKind) -> i64 {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| i64::from(e.multiplicity))
            .sum()
    }

    pub fn signed_total(&self) -> i64 {
        self.total(PointKind::Zero) - self.total(PointKind::Pole)
    }

    /// Multiplicity of the given kind at a point, matched within
    /// 1e-7·(1+|z|).
    pub fn order_at(&self, z: Complex64, kind: PointKind) -> u32 {
        let tol = 1e-7 * (1.0 + z.norm());
        self.entries
            .iter()
            .filter(|e| e.kind == kind && (e.location - z).norm() <= tol)
            .map(|e| e.multiplicity)
            .sum()
    }

    fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            (a.location.re, a.location.im, a.kind == PointKind::Pole)
                .partial_cmp(&(b.location.re, b.location.im, b.kind == PointKind::Pole))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RootsError {
    #[error("disc radius must be positive and finite")]
    BadDisc,
    #[error("boundary contamination: zeros/poles could not be moved off the contour after 8 perturbations")]
    BoundaryContamination,
    #[error("winding quadrature did not converge (residual {residual:.3})")]
    QuadratureDivergence { residual: f64 },
    #[error("unresolved cluster at {center} (cell size {size:.3e}, winding {count})")]
    ClusterUnresolved { center: Complex64, size: f64, count: i64 },
    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),
    #[error("divisor totals ({divisor}) disagree with the contour count ({contour})")]
    Inconsistent { contour: i64, divisor: i64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

// ---------------------------------------------------------------------------
// Circle winding
// ---------------------------------------------------------------------------

/// (1/2πi) ∮ f'/f over |z − center| = radius by adaptive arc quadrature,
/// required to land within 0.25 of an integer. `Err` carries the residual
/// (∞ when the contour is contaminated at this radius).
fn winding_circle(f: &ExprRef, center: Complex64, radius: f64) -> Result<i64, f64> {
    let ld = |z: Complex64| -> Result<Complex64, ExprError> {
        let r = derivs::log_deriv(f, z)?;
        if r.norm() > 1e14 {
            return Err(ExprError::SingularPoint { at: z });
        }
        Ok(r)
    };
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let t0 = std::f64::consts::FRAC_PI_2 * k as f64;
        let t1 = t0 + std::f64::consts::FRAC_PI_2;
        match adaptive_arc(&ld, center, radius, t0, t1, 0.05) {
            Ok(v) => total += v,
            Err(e) => {
                if std::env::var("ISOLATE_DEBUG").is_ok() {
                    let why = match &e {
                        crate::quad::ContourError::Integrand(x) => format!("integrand {x}"),
                        crate::quad::ContourError::NoConvergence => "no convergence".into(),
                    };
                    eprintln!("arc {k} radius {radius}: {why}");
                }
                return Err(f64::INFINITY);
            }
        }
    }
    let w = total / two_pi_i;
    let nearest = w.re.round();
    let residual = ((w.re - nearest).powi(2) + w.im.powi(2)).sqrt();
    if residual < 0.25 {
        Ok(nearest as i64)
    } else {
        Err(residual)
    }
}

/// Winding number of f over the disc boundary: zeros minus poles inside,
/// an exact integer. The contour radius is perturbed by factors
/// (1 ± j·1e-6), j = 1..8, when zeros or poles sit on the circle.
pub fn count_zeros_minus_poles(f: &ExprRef, d: &Disc) -> Result<i64, RootsError> {
    let mut last_residual = f64::INFINITY;
    for j in 0..=8 {
        let dirs: &[f64] = if j == 0 { &[0.0] } else { &[1.0, -1.0] };
        for &s in dirs {
            let r = d.radius * (1.0 + s * j as f64 * 1e-6);
            match winding_circle(f, d.center_c(), r) {
                Ok(n) => return Ok(n),
                Err(res) => last_residual = last_residual.min(res),
            }
        }
    }
    if last_residual.is_finite() {
        Err(RootsError::QuadratureDivergence { residual: last_residual })
    } else {
        Err(RootsError::BoundaryContamination)
    }
}

// ---------------------------------------------------------------------------
// Numeric divisor
// ---------------------------------------------------------------------------

/// Divisor of f inside the disc by the argument principle: the tree is
/// rationalized into entire numerator/denominator, each side is isolated by
/// quadrisection, coincident points cancel, and the totals are reconciled
/// against the circle count.
pub fn locate_divisor(f: &ExprRef, d: &Disc, tol: f64) -> Result<Divisor, RootsError> {
    let (num, den) = rationalize(f)?;
    let params = IsolationParams {
        tol,
        min_half: 1e-9 * d.radius,
        moment_half: 1e-4 * d.radius,
    };
    // the bounding square circumscribes the disc
    let zeros = run_isolation(&num, d, &params)?;
    let poles = if num_is_const(&den) {
        Vec::new()
    } else {
        run_isolation(&den, d, &params)?
    };
    let (zeros, poles) = cancel_common(zeros, poles);

    // effective radius clear of all located moduli
    let r_eff = clear_radius(d, zeros.iter().chain(poles.iter()));
    if std::env::var("ISOLATE_DEBUG").is_ok() {
        eprintln!("r_eff = {r_eff:.9}; zero moduli: {:?}", zeros.iter().map(|(z, m)| ((*z - d.center_c()).norm(), *m)).collect::<Vec<_>>());
    }
    let mut entries = Vec::new();
    for (z, m) in zeros {
        if (z - d.center_c()).norm() <= r_eff {
            entries.push(DivisorEntry { location: z, multiplicity: m, kind: PointKind::Zero });
        }
    }
    for (z, m) in poles {
        if (z - d.center_c()).norm() <= r_eff {
            entries.push(DivisorEntry { location: z, multiplicity: m, kind: PointKind::Pole });
        }
    }
    let mut div = Divisor { entries, disc: *d, method: DivisorMethod::ArgumentPrinciple };
    div.sort();

    // reconcile with the independent contour count at the same radius
    match winding_circle(f, d.center_c(), r_eff) {
        Ok(contour) => {
            let total = div.signed_total();
            if contour != total {
                return Err(RootsError::Inconsistent { contour, divisor: total });
            }
        }
        Err(residual) => return Err(RootsError::QuadratureDivergence { residual }),
    }
    Ok(div)
}

fn num_is_const(e: &ExprRef) -> bool {
    matches!(**e, Expr::Const(_))
}

fn run_isolation(
    g: &ExprRef,
    d: &Disc,
    params: &IsolationParams,
) -> Result<Vec<(Complex64, u32)>, RootsError> {
    match isolate_zeros(g, d.center_c(), d.radius, params) {
        Ok(v) => Ok(v),
        Err(IsolateFail::Contaminated) => Err(RootsError::BoundaryContamination),
        Err(IsolateFail::Unresolved { center, size, count }) => {
            Err(RootsError::ClusterUnresolved { center, size, count })
        }
        Err(IsolateFail::Eval(e)) => Err(RootsError::Expr(e)),
    }
}

/// Remove common zero/pole locations (within 1e-8·(1+|z|)), subtracting
/// multiplicities.
fn cancel_common(
    zeros: Vec<(Complex64, u32)>,
    poles: Vec<(Complex64, u32)>,
) -> (Vec<(Complex64, u32)>, Vec<(Complex64, u32)>) {
    let mut zs = zeros;
    let mut ps = poles;
    for z in zs.iter_mut() {
        for p in ps.iter_mut() {
            if p.1 == 0 || z.1 == 0 {
                continue;
            }
            let tol = 1e-8 * (1.0 + z.0.norm());
            if (z.0 - p.0).norm() <= tol {
                let c = z.1.min(p.1);
                z.1 -= c;
                p.1 -= c;
            }
        }
    }
    zs.retain(|e| e.1 > 0);
    ps.retain(|e| e.1 > 0);
    (zs, ps)
}

/// Pick a radius within (1 ± 8e-6)·r whose circle stays at least
/// 2e-7·r away from every located point.
fn clear_radius<'a>(d: &Disc, points: impl Iterator<Item = &'a (Complex64, u32)>) -> f64 {
    let moduli: Vec<f64> = points.map(|(z, _)| (*z - d.center_c()).norm()).collect();
    let gap = 2e-7 * d.radius;
    for j in 0..=8 {
        for s in if j == 0 { vec![0.0] } else { vec![1.0, -1.0] } {
            let r = d.radius * (1.0 + s * j as f64 * 1e-6);
            if moduli.iter().all(|&m| (m - r).abs() > gap) {
                return r;
            }
        }
    }
    d.radius
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Library functions with analytically known zero/pole sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnownFunction {
    Sin,
    Cos,
    Gamma,
    /// 1/Γ — zeros at the nonpositive integers.
    GammaRecip,
    /// γ_q (zero-free, poles exactly at q^{-k}).
    QGamma { q: Complex64 },
    /// 1/γ_q — zeros at q^{-k}.
    QGammaRecip { q: Complex64 },
    /// Π(z) = ∏(1 − z/q^j), |q| > 1 — zeros at q^j.
    ProdGeom { q: Complex64 },
    Sn { modulus: f64 },
}

impl KnownFunction {
    pub fn from_name(name: &str, q: Option<Complex64>, modulus: Option<f64>) -> Result<Self, RootsError> {
        match name {
            "sin" => Ok(KnownFunction::Sin),
            "cos" => Ok(KnownFunction::Cos),
            "gamma" => Ok(KnownFunction::Gamma),
            "gamma-recip" => Ok(KnownFunction::GammaRecip),
            "qgamma" => q.map(|q| KnownFunction::QGamma { q }).ok_or_else(|| {
                RootsError::UnknownFunction("qgamma needs a q parameter".into())
            }),
            "qgamma-recip" => q.map(|q| KnownFunction::QGammaRecip { q }).ok_or_else(|| {
                RootsError::UnknownFunction("qgamma-recip needs a q parameter".into())
            }),
            "prodq" => q.map(|q| KnownFunction::ProdGeom { q }).ok_or_else(|| {
                RootsError::UnknownFunction("prodq needs a q parameter".into())
            }),
            "sn" => modulus.map(|k| KnownFunction::Sn { modulus: k }).ok_or_else(|| {
                RootsError::UnknownFunction("sn needs a modulus parameter".into())
            }),
            other => Err(RootsError::UnknownFunction(other.into())),
        }
    }
}

/// Exact divisor of a catalog function intersected with the disc. All
/// multiplicities are 1 (every catalog member has simple zeros and poles).
pub fn catalog_divisor(kf: KnownFunction, d: &Disc) -> Result<Divisor, RootsError> {
    let c0 = d.center_c();
    let r = d.radius;
    let mut entries = Vec::new();
    let mut push = |z: Complex64, kind: PointKind| {
        if (z - c0).norm() <= r {
            entries.push(DivisorEntry { location: z, multiplicity: 1, kind });
        }
    };
    match kf {
        KnownFunction::Sin => {
            enumerate_real_lattice(c0, r, std::f64::consts::PI, 0.0, |z| push(z, PointKind::Zero));
        }
        KnownFunction::Cos => {
            enumerate_real_lattice(
                c0,
                r,
                std::f64::consts::PI,
                std::f64::consts::FRAC_PI_2,
                |z| push(z, PointKind::Zero),
            );
        }
        KnownFunction::Gamma | KnownFunction::GammaRecip => {
            let kind = if matches!(kf, KnownFunction::Gamma) { PointKind::Pole } else { PointKind::Zero };
            let mut k = 0i64;
            loop {
                let z = Complex64::new(-(k as f64), 0.0);
                if (z - c0).norm() <= r {
                    push(z, kind);
                } else if -(k as f64) < c0.re - r {
                    break;
                }
                k += 1;
                if k > 1_000_000 {
                    break;
                }
            }
        }
        KnownFunction::QGamma { q } | KnownFunction::QGammaRecip { q } => {
            let kind = if matches!(kf, KnownFunction::QGamma { .. }) {
                PointKind::Pole
            } else {
                PointKind::Zero
            };
            // points q^{-k}, k ≥ 0; |q| < 1 makes the moduli grow
            let qinv = q.inv();
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..10_000 {
                if p.norm() > c0.norm() + r {
                    break;
                }
                push(p, kind);
                p *= qinv;
            }
        }
        KnownFunction::ProdGeom { q } => {
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..10_000 {
                if p.norm() > c0.norm() + r {
                    break;
                }
                push(p, PointKind::Zero);
                p *= q;
            }
        }
        KnownFunction::Sn { modulus } => {
            let p = EllipticParams::new(modulus)
                .map_err(|e| RootsError::Expr(ExprError::BadScale(e.to_string())))?;
            let (kk, kp) = (p.big_k, p.big_k_prime);
            let n_lo = ((c0.re - r) / (2.0 * kk)).floor() as i64;
            let n_hi = ((c0.re + r) / (2.0 * kk)).ceil() as i64;
            let m_lo = ((c0.im - r) / kp).floor() as i64 - 1;
            let m_hi = ((c0.im + r) / kp).ceil() as i64 + 1;
            for n in n_lo..=n_hi {
                for m in m_lo..=m_hi {
                    let base = Complex64::new(2.0 * kk * n as f64, 0.0);
                    let zero = base + Complex64::new(0.0, 2.0 * kp * m as f64);
                    let pole = base + Complex64::new(0.0, (2.0 * m as f64 + 1.0) * kp);
                    push(zero, PointKind::Zero);
                    push(pole, PointKind::Pole);
                }
            }
        }
    }
    let mut div = Divisor { entries, disc: *d, method: DivisorMethod::Catalog };
    div.sort();
    Ok(div)
}

fn enumerate_real_lattice(
    c0: Complex64,
    r: f64,
    spacing: f64,
    offset: f64,
    mut push: impl FnMut(Complex64),
) {
    let lo = ((c0.re - r - offset) / spacing).floor() as i64;
    let hi = ((c0.re + r - offset) / spacing).ceil() as i64;
    for k in lo..=hi {
        push(Complex64::new(offset + k as f64 * spacing, 0.0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;

    fn disc(r: f64) -> Disc {
        Disc::centered(r).unwrap()
    }

    #[test]
    fn count_square_zero() {
        let f = parse_expr("z^2").unwrap();
        assert_eq!(count_zeros_minus_poles(&f, &disc(1.0)).unwrap(), 2);
    }

    #[test]
    fn count_gamma_poles() {
        // poles at 0, −1, −2, −3 inside |z| < 3.5
        let f = parse_expr("gamma(z)").unwrap();
        assert_eq!(count_zeros_minus_poles(&f, &disc(3.5)).unwrap(), -4);
    }

    #[test]
    fn count_exp_exp_minus_one() {
        // solutions of e^z ∈ 2πi·Z\{0} inside |z| < 3: direct branch search
        let f = parse_expr("exp(exp(z)) - 1").unwrap();
        let mut expected = 0;
        for k in -200i64..=200 {
            if k == 0 {
                continue;
            }
            let w = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64);
            // all log branches of w
            for m in -200i64..=200 {
                let z = Complex64::new(
                    w.norm().ln(),
                    w.arg() + 2.0 * std::f64::consts::PI * m as f64,
                );
                if z.norm() < 3.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(count_zeros_minus_poles(&f, &disc(3.0)).unwrap(), expected);
    }

    #[test]
    fn locate_sin_zeros() {
        let f = parse_expr("sin(z)").unwrap();
        let div = locate_divisor(&f, &disc(4.0), 1e-10).unwrap();
        let zs: Vec<_> = div.zeros().collect();
        assert_eq!(zs.len(), 3);
        let pi = std::f64::consts::PI;
        for (entry, expect) in zs.iter().zip([-pi, 0.0, pi]) {
            assert!((entry.location - Complex64::new(expect, 0.0)).norm() < 1e-8);
            assert_eq!(entry.multiplicity, 1);
        }
    }

    #[test]
    fn locate_double_zero() {
        let f = parse_expr("(exp(z) - 1)^2").unwrap();
        let div = locate_divisor(&f, &disc(1.0), 1e-10).unwrap();
        assert_eq!(div.entries.len(), 1);
        assert_eq!(div.entries[0].multiplicity, 2);
        assert!(div.entries[0].location.norm() < 1e-9);
    }

    #[test]
    fn locate_exp_exp_root_of_unity() {
        // zeros of exp(e^z) − η, η a primitive 5th root of unity, vs direct
        // enumeration of log(log η + 2πik) over branches
        let eta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 5.0);
        let f = Expr::sub(
            Expr::exp(Expr::exp(Expr::var())),
            Expr::constant(eta),
        );
        let d = disc(3.0);
        let div = locate_divisor(&f, &d, 1e-10).unwrap();
        let mut expected = Vec::new();
        let two_pi = 2.0 * std::f64::consts::PI;
        for k in -300i64..=300 {
            let w = Complex64::new(0.0, two_pi / 5.0 + two_pi * k as f64);
            if w.norm() == 0.0 {
                continue;
            }
            for m in -300i64..=300 {
                let z = Complex64::new(w.norm().ln(), w.arg() + two_pi * m as f64);
                if z.norm() <= 3.0 {
                    expected.push(z);
                }
            }
        }
        assert_eq!(div.entries.len(), expected.len());
        for e in expected {
            assert!(
                div.zeros().any(|x| (x.location - e).norm() < 1e-7),
                "missing zero at {e}"
            );
        }
    }

    #[test]
    fn locate_ratio_with_poles() {
        let f = parse_expr("sin(z) / cos(z)").unwrap();
        let div = locate_divisor(&f, &disc(4.0), 1e-10).unwrap();
        assert_eq!(div.total(PointKind::Zero), 3); // −π, 0, π
        assert_eq!(div.total(PointKind::Pole), 2); // ±π/2  (±3π/2 outside r=4? no: 4.71 > 4)
        assert_eq!(div.signed_total(), 1);
    }

    #[test]
    fn catalog_gamma_pole_near_minus_two() {
        let d = Disc::new(Complex64::new(-2.0, 0.0), 0.5).unwrap();
        let div = catalog_divisor(KnownFunction::Gamma, &d).unwrap();
        assert_eq!(div.entries.len(), 1);
        assert_eq!(div.entries[0].kind, PointKind::Pole);
        assert!((div.entries[0].location - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn catalog_qgamma_poles() {
        // q = 1/2: poles at 2^k → {1, 2, 4} inside |z| < 5
        let div = catalog_divisor(
            KnownFunction::QGamma { q: Complex64::new(0.5, 0.0) },
            &disc(5.0),
        )
        .unwrap();
        let mods: Vec<f64> = div.poles().map(|e| e.location.re).collect();
        assert_eq!(mods, vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn catalog_sn_origin() {
        let d = disc(0.1);
        let div = catalog_divisor(KnownFunction::Sn { modulus: 0.8 }, &d).unwrap();
        assert_eq!(div.entries.len(), 1);
        assert_eq!(div.entries[0].kind, PointKind::Zero);
        assert!(div.entries[0].location.norm() < 1e-15);
    }

    #[test]
    fn divisor_json_round_trip() {
        let f = parse_expr("sin(z)").unwrap();
        let div = locate_divisor(&f, &disc(1.0), 1e-10).unwrap();
        let js = serde_json::to_string(&div).unwrap();
        assert!(js.contains("\"kind\":\"zero\""));
        assert!(js.contains("\"method\":\"argument-principle\""));
        let back: Divisor = serde_json::from_str(&js).unwrap();
        assert_eq!(back, div);
    }
}
