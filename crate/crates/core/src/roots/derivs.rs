//! Joint value/derivative evaluation in the log channel.
//!
//! The winding integrals, Newton polish and moment centroids all consume
//! f'(z)/f(z). Computing the pair structurally gives analytic derivatives
//! for every node kind — including the truncated products, whose
//! logarithmic derivatives have convergent series of their own — without
//! building derivative trees.

use num_complex::Complex64;

use crate::expr::{Expr, ExprError, ExprRef, LogComplex};
use crate::special;

/// (f(z), f'(z)) in the log channel.
pub fn value_and_deriv_log(
    e: &ExprRef,
    z: Complex64,
) -> Result<(LogComplex, LogComplex), ExprError> {
    let zero = LogComplex::ZERO;
    Ok(match &**e {
        Expr::Const(c) => (LogComplex::from_c64(*c), zero),
        Expr::Var => (LogComplex::from_c64(z), LogComplex::from_c64(Complex64::new(1.0, 0.0))),
        Expr::Add(a, b) => {
            let (va, da) = value_and_deriv_log(a, z)?;
            let (vb, db) = value_and_deriv_log(b, z)?;
            (va.add(vb), da.add(db))
        }
        Expr::Sub(a, b) => {
            let (va, da) = value_and_deriv_log(a, z)?;
            let (vb, db) = value_and_deriv_log(b, z)?;
            (va.sub(vb), da.sub(db))
        }
        Expr::Mul(a, b) => {
            let (va, da) = value_and_deriv_log(a, z)?;
            let (vb, db) = value_and_deriv_log(b, z)?;
            (va.mul(vb), da.mul(vb).add(va.mul(db)))
        }
        Expr::Div(a, b) => {
            let (va, da) = value_and_deriv_log(a, z)?;
            let (vb, db) = value_and_deriv_log(b, z)?;
            if vb.is_zero() {
                return Err(ExprError::SingularPoint { at: z });
            }
            let num = da.mul(vb).sub(va.mul(db));
            (va.div(vb), num.div(vb.mul(vb)))
        }
        Expr::Neg(a) => {
            let (v, d) = value_and_deriv_log(a, z)?;
            (v.neg(), d.neg())
        }
        Expr::Powi(a, k) => {
            let (v, d) = value_and_deriv_log(a, z)?;
            if *k < 0 && v.is_zero() {
                return Err(ExprError::SingularPoint { at: z });
            }
            let kf = LogComplex::from_c64(Complex64::new(*k as f64, 0.0));
            (v.powi(*k), kf.mul(v.powi(k - 1)).mul(d))
        }
        Expr::Exp(a) => {
            let w = a.eval(z)?;
            let (_, dw) = value_and_deriv_log(a, z)?;
            let v = LogComplex::from_log(w);
            (v, dw.mul(v))
        }
        Expr::Log(a) => {
            let (vw, dw) = value_and_deriv_log(a, z)?;
            if vw.is_zero() {
                return Err(ExprError::SingularPoint { at: z });
            }
            let lv = Complex64::new(vw.log_abs, crate::expr::normalize_angle(vw.arg));
            (LogComplex::from_c64(lv), dw.div(vw))
        }
        Expr::Sin(a) => {
            let w = a.eval(z)?;
            let (_, dw) = value_and_deriv_log(a, z)?;
            (log_sin(w), dw.mul(log_cos(w)))
        }
        Expr::Cos(a) => {
            let w = a.eval(z)?;
            let (_, dw) = value_and_deriv_log(a, z)?;
            (log_cos(w), dw.mul(log_sin(w)).neg())
        }
        Expr::Gamma(a) => {
            let w = a.eval(z)?;
            let (_, dw) = value_and_deriv_log(a, z)?;
            let lg = special::lgamma(w).map_err(|err| sp(err, z))?;
            let psi = special::digamma(w).map_err(|err| sp(err, z))?;
            let v = LogComplex::from_log(lg);
            (v, dw.mul(v).mul(LogComplex::from_c64(psi)))
        }
        Expr::GammaRecip(a) => {
            let w = a.eval(z)?;
            let (_, dw) = value_and_deriv_log(a, z)?;
            match special::lgamma(w) {
                Ok(lg) => {
                    let psi = special::digamma(w).map_err(|err| sp(err, z))?;
                    let v = LogComplex::from_log(-lg);
                    (v, dw.mul(v).mul(LogComplex::from_c64(psi)).neg())
                }
                Err(special::SpecialError::Pole) => {
                    // zero of 1/Γ of multiplicity 1; derivative there is
                    // (-1)^k k! — nonzero but awkward via logs. Derivative of
                    // 1/Γ at a pole of Γ: lim −ψ(w)/Γ(w) = residue reciprocal.
                    let k = (-w.re).round() as i64;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let lnfact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
                    let d = LogComplex { log_abs: lnfact, arg: if sign < 0.0 { std::f64::consts::PI } else { 0.0 } };
                    (LogComplex::ZERO, dw.mul(d))
                }
                Err(err) => return Err(sp(err, z)),
            }
        }
        Expr::Digamma(_) => {
            return Err(ExprError::Unsupported(
                "derivative evaluation through digamma".into(),
            ))
        }
        Expr::QGammaRecip { q, arg } => {
            let w = arg.eval(z)?;
            let (_, dw) = value_and_deriv_log(arg, z)?;
            let (v, s) = qpoch_value_and_logderiv(w, *q, z)?;
            let den = match special::log_qpochhammer_inf(*q, *q).map_err(|err| sp(err, z))? {
                special::LogProduct::Log(l) => l,
                special::LogProduct::Zero => return Err(ExprError::SingularPoint { at: z }),
            };
            let scaled = LogComplex {
                log_abs: v.log_abs - den.re,
                arg: v.arg - den.im,
            };
            (scaled, dw.mul(scaled).mul(LogComplex::from_c64(s)))
        }
        Expr::ProdGeom { q, arg } => {
            let w = arg.eval(z)?;
            let (_, dw) = value_and_deriv_log(arg, z)?;
            let (v, s) = qpoch_value_and_logderiv(w, q.inv(), z)?;
            (v, dw.mul(v).mul(LogComplex::from_c64(s)))
        }
        Expr::JacobiSn { modulus, arg } => {
            let (v, d) = jacobi_pair(*modulus, arg, z, JacobiKind::Sn)?;
            (v, d)
        }
        Expr::JacobiCn { modulus, arg } => {
            let (v, d) = jacobi_pair(*modulus, arg, z, JacobiKind::Cn)?;
            (v, d)
        }
        Expr::JacobiDn { modulus, arg } => {
            let (v, d) = jacobi_pair(*modulus, arg, z, JacobiKind::Dn)?;
            (v, d)
        }
        Expr::Theta { j, nome, deriv, arg } => {
            let w = arg.eval(z)?;
            let (_, dw) = value_and_deriv_log(arg, z)?;
            let v = special::theta(*j, *deriv, w, *nome).map_err(|err| sp(err, z))?;
            let d = special::theta(*j, *deriv + 1, w, *nome).map_err(|err| sp(err, z))?;
            (LogComplex::from_c64(v), dw.mul(LogComplex::from_c64(d)))
        }
        Expr::Shift(f, c) => value_and_deriv_log(f, z + c)?,
        Expr::Rescale(f, q) => {
            let (v, d) = value_and_deriv_log(f, q * z)?;
            (v, d.mul(LogComplex::from_c64(*q)))
        }
        Expr::Det(_) => {
            return Err(ExprError::Unsupported(
                "derivative evaluation of an LU determinant node".into(),
            ))
        }
    })
}

/// f'(z)/f(z) as an ordinary complex number.
pub fn log_deriv(e: &ExprRef, z: Complex64) -> Result<Complex64, ExprError> {
    let (v, d) = value_and_deriv_log(e, z)?;
    if v.is_zero() {
        return Err(ExprError::SingularPoint { at: z });
    }
    d.div(v).to_c64().ok_or(ExprError::Overflow { at: z })
}

fn sp(e: special::SpecialError, at: Complex64) -> ExprError {
    match e {
        special::SpecialError::Pole => ExprError::SingularPoint { at },
        special::SpecialError::Overflow => ExprError::Overflow { at },
        special::SpecialError::BadParameter(m) => ExprError::BadScale(m),
    }
}

fn log_sin(w: Complex64) -> LogComplex {
    let up = LogComplex { log_abs: -w.im, arg: w.re };
    let dn = LogComplex { log_abs: w.im, arg: -w.re };
    let diff = up.sub(dn);
    LogComplex {
        log_abs: diff.log_abs - 2.0f64.ln(),
        arg: diff.arg - std::f64::consts::FRAC_PI_2,
    }
}

fn log_cos(w: Complex64) -> LogComplex {
    let up = LogComplex { log_abs: -w.im, arg: w.re };
    let dn = LogComplex { log_abs: w.im, arg: -w.re };
    let sum = up.add(dn);
    LogComplex { log_abs: sum.log_abs - 2.0f64.ln(), arg: sum.arg }
}

/// ((a;q)_∞ as a log value, d/da log (a;q)_∞). The series
/// Σ_k −q^k/(1 − a q^k) converges at the same rate as the product.
fn qpoch_value_and_logderiv(
    a: Complex64,
    q: Complex64,
    at: Complex64,
) -> Result<(LogComplex, Complex64), ExprError> {
    if q.norm() >= 1.0 {
        return Err(ExprError::BadScale(format!("|q| must be < 1, got {}", q.norm())));
    }
    let mut log_sum = Complex64::new(0.0, 0.0);
    let mut ld = Complex64::new(0.0, 0.0);
    let mut qk = Complex64::new(1.0, 0.0);
    for _ in 0..20_000 {
        let aq = a * qk;
        if aq.norm() < 1e-17 {
            return Ok((LogComplex::from_log(log_sum), ld));
        }
        let factor = Complex64::new(1.0, 0.0) - aq;
        if factor.norm() == 0.0 {
            // the log-derivative has a pole here; the caller sits on a zero
            return Err(ExprError::SingularPoint { at });
        }
        log_sum += factor.ln();
        ld += -qk / factor;
        qk *= q;
    }
    Err(ExprError::BadScale("q-product truncation did not terminate".into()))
}

enum JacobiKind {
    Sn,
    Cn,
    Dn,
}

fn jacobi_pair(
    modulus: f64,
    arg: &ExprRef,
    z: Complex64,
    kind: JacobiKind,
) -> Result<(LogComplex, LogComplex), ExprError> {
    let p = special::EllipticParams::new(modulus).map_err(|e| sp(e, z))?;
    let w = arg.eval(z)?;
    let (_, dw) = value_and_deriv_log(arg, z)?;
    let s = special::jacobi_sn(w, &p).map_err(|e| sp(e, z))?;
    let c = special::jacobi_cn(w, &p).map_err(|e| sp(e, z))?;
    let d = special::jacobi_dn(w, &p).map_err(|e| sp(e, z))?;
    let (v, dv) = match kind {
        JacobiKind::Sn => (s, c * d),
        JacobiKind::Cn => (c, -s * d),
        JacobiKind::Dn => (d, -(modulus * modulus) * s * c),
    };
    Ok((
        LogComplex::from_c64(v),
        dw.mul(LogComplex::from_c64(dv)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;

    #[test]
    fn pair_matches_finite_difference() {
        let cases = [
            "z^3 - 2*z + 1",
            "exp(z) * sin(z)",
            "gamma(z + 3)",
            "prodq(2; z) - 0.5",
            "qgamma(0.5; z) + z",
            "sn(z; 0.7)",
            "shift(exp(z^2); 0.3) / (z - 5)",
        ];
        let z = Complex64::new(0.4, 0.3);
        let h = 1e-6;
        for s in cases {
            let e = parse_expr(s).unwrap();
            let (v, d) = value_and_deriv_log(&e, z).unwrap();
            let fv = v.to_c64().unwrap();
            let fd = d.to_c64().unwrap();
            let plus = e.eval(z + h).unwrap();
            let minus = e.eval(z - h).unwrap();
            let approx = (plus - minus) / (2.0 * h);
            assert!((fv - e.eval(z).unwrap()).norm() < 1e-10 * (1.0 + fv.norm()), "{s}: value");
            assert!(
                (fd - approx).norm() < 1e-5 * (1.0 + approx.norm()),
                "{s}: deriv pair {fd} vs fd {approx}"
            );
        }
    }
}
