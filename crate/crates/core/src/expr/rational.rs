//! Structural rewrite of a tree into an entire numerator/denominator pair.
//!
//! Γ is replaced by its entire reciprocal and the Jacobi functions by their
//! theta quotients, so that both returned trees are provably entire and the
//! winding-number machinery never sees zero/pole cancellation inside one
//! cell.

use std::sync::Arc;

use super::{Expr, ExprError, ExprRef};
use crate::special::EllipticParams;

/// Returns (num, den) with f = num/den and both sides entire.
pub fn rationalize(e: &ExprRef) -> Result<(ExprRef, ExprRef), ExprError> {
    let one = Expr::real(1.0);
    Ok(match &**e {
        Expr::Const(_) | Expr::Var => (e.clone(), one),
        Expr::Add(a, b) => {
            let (na, da) = rationalize(a)?;
            let (nb, db) = rationalize(b)?;
            if is_one(&da) && is_one(&db) {
                (Expr::add(na, nb), one)
            } else {
                (
                    Expr::add(Expr::mul(na, db.clone()), Expr::mul(nb, da.clone())),
                    Expr::mul(da, db),
                )
            }
        }
        Expr::Sub(a, b) => {
            let (na, da) = rationalize(a)?;
            let (nb, db) = rationalize(b)?;
            if is_one(&da) && is_one(&db) {
                (Expr::sub(na, nb), one)
            } else {
                (
                    Expr::sub(Expr::mul(na, db.clone()), Expr::mul(nb, da.clone())),
                    Expr::mul(da, db),
                )
            }
        }
        Expr::Mul(a, b) => {
            let (na, da) = rationalize(a)?;
            let (nb, db) = rationalize(b)?;
            (Expr::mul(na, nb), Expr::mul(da, db))
        }
        Expr::Div(a, b) => {
            let (na, da) = rationalize(a)?;
            let (nb, db) = rationalize(b)?;
            (Expr::mul(na, db), Expr::mul(da, nb))
        }
        Expr::Neg(a) => {
            let (na, da) = rationalize(a)?;
            (Expr::neg(na), da)
        }
        Expr::Powi(a, k) => {
            let (na, da) = rationalize(a)?;
            if *k >= 0 {
                (Expr::powi(na, *k), Expr::powi(da, *k))
            } else {
                (Expr::powi(da, -*k), Expr::powi(na, -*k))
            }
        }
        Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
            if a.is_entire() {
                (e.clone(), one)
            } else {
                return Err(ExprError::Unsupported(format!(
                    "divisor extraction through {} of a non-entire argument",
                    head_name(e)
                )));
            }
        }
        Expr::Log(_) => {
            return Err(ExprError::Unsupported(
                "divisor extraction through a logarithm branch".into(),
            ))
        }
        Expr::Gamma(a) => {
            require_entire_arg(a, e)?;
            (one, Expr::gamma_recip(a.clone()))
        }
        Expr::GammaRecip(a) => {
            require_entire_arg(a, e)?;
            (e.clone(), one)
        }
        Expr::Digamma(_) => {
            return Err(ExprError::Unsupported(
                "divisor extraction through digamma".into(),
            ))
        }
        Expr::QGammaRecip { arg, .. } | Expr::ProdGeom { arg, .. } | Expr::Theta { arg, .. } => {
            require_entire_arg(arg, e)?;
            (e.clone(), one)
        }
        Expr::JacobiSn { modulus, arg } => {
            require_entire_arg(arg, e)?;
            let (c, num, den) = theta_quotient(*modulus, arg, 1)?;
            (Expr::mul(Expr::real(c), num), den)
        }
        Expr::JacobiCn { modulus, arg } => {
            require_entire_arg(arg, e)?;
            let (c, num, den) = theta_quotient(*modulus, arg, 2)?;
            (Expr::mul(Expr::real(c), num), den)
        }
        Expr::JacobiDn { modulus, arg } => {
            require_entire_arg(arg, e)?;
            let (c, num, den) = theta_quotient(*modulus, arg, 3)?;
            (Expr::mul(Expr::real(c), num), den)
        }
        Expr::Shift(f, c) => {
            let (n, d) = rationalize(f)?;
            (Expr::shift(n, *c), Expr::shift(d, *c))
        }
        Expr::Rescale(f, q) => {
            let (n, d) = rationalize(f)?;
            (
                Expr::rescale(n, *q).expect("scale already validated"),
                Expr::rescale(d, *q).expect("scale already validated"),
            )
        }
        Expr::Det(rows) => {
            if rows.iter().flatten().all(|x| x.is_entire()) {
                (e.clone(), one)
            } else {
                return Err(ExprError::Unsupported(
                    "divisor extraction of a determinant with non-entire entries".into(),
                ))
            }
        }
    })
}

fn is_one(e: &ExprRef) -> bool {
    matches!(**e, Expr::Const(c) if c == num_complex::Complex64::new(1.0, 0.0))
}

fn head_name(e: &ExprRef) -> &'static str {
    match &**e {
        Expr::Exp(_) => "exp",
        Expr::Sin(_) => "sin",
        Expr::Cos(_) => "cos",
        _ => "node",
    }
}

fn require_entire_arg(arg: &ExprRef, whole: &ExprRef) -> Result<(), ExprError> {
    if arg.is_entire() {
        Ok(())
    } else {
        Err(ExprError::Unsupported(format!(
            "divisor extraction of {whole} needs an entire inner argument"
        )))
    }
}

/// sn = (θ₃(0)/θ₂(0))·θ₁/θ₄, cn = (θ₄(0)/θ₂(0))·θ₂/θ₄,
/// dn = (θ₄(0)/θ₃(0))·θ₃/θ₄, all at v = (π/2K)·arg.
fn theta_quotient(
    modulus: f64,
    arg: &ExprRef,
    num_j: u8,
) -> Result<(f64, ExprRef, ExprRef), ExprError> {
    let p = EllipticParams::new(modulus).map_err(|e| ExprError::BadScale(e.to_string()))?;
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let t2 = crate::special::theta(2, 0, zero, p.nome).map_err(te)?;
    let t3 = crate::special::theta(3, 0, zero, p.nome).map_err(te)?;
    let t4 = crate::special::theta(4, 0, zero, p.nome).map_err(te)?;
    let scale = match num_j {
        1 => t3.re / t2.re,
        2 => t4.re / t2.re,
        3 => t4.re / t3.re,
        _ => unreachable!(),
    };
    let v = Expr::mul(
        Expr::real(std::f64::consts::FRAC_PI_2 / p.big_k),
        arg.clone(),
    );
    let num = Arc::new(Expr::Theta { j: num_j, nome: p.nome, deriv: 0, arg: v.clone() });
    let den = Arc::new(Expr::Theta { j: 4, nome: p.nome, deriv: 0, arg: v });
    Ok((scale, num, den))
}

fn te(e: crate::special::SpecialError) -> ExprError {
    ExprError::BadScale(e.to_string())
}
