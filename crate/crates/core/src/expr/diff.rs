//! Symbolic differentiation. Γ goes through the digamma node, the Jacobi
//! functions through their closed derivative system, theta nodes bump their
//! term-wise derivative order. Truncated products and determinant nodes
//! have no derivative rule and report `Unsupported`.

use num_complex::Complex64;

use super::{Expr, ExprError, ExprRef};

pub fn differentiate(e: &ExprRef) -> Result<ExprRef, ExprError> {
    Ok(match &**e {
        Expr::Const(_) => Expr::real(0.0),
        Expr::Var => Expr::real(1.0),
        Expr::Add(a, b) => Expr::add(differentiate(a)?, differentiate(b)?),
        Expr::Sub(a, b) => Expr::sub(differentiate(a)?, differentiate(b)?),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(differentiate(a)?, b.clone()),
            Expr::mul(a.clone(), differentiate(b)?),
        ),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(
                Expr::mul(differentiate(a)?, b.clone()),
                Expr::mul(a.clone(), differentiate(b)?),
            ),
            Expr::powi(b.clone(), 2),
        ),
        Expr::Neg(a) => Expr::neg(differentiate(a)?),
        Expr::Powi(a, k) => Expr::mul(
            Expr::mul(Expr::real(*k as f64), Expr::powi(a.clone(), k - 1)),
            differentiate(a)?,
        ),
        Expr::Exp(a) => Expr::mul(differentiate(a)?, e.clone()),
        Expr::Log(a) => Expr::div(differentiate(a)?, a.clone()),
        Expr::Sin(a) => Expr::mul(differentiate(a)?, Expr::cos(a.clone())),
        Expr::Cos(a) => Expr::neg(Expr::mul(differentiate(a)?, Expr::sin(a.clone()))),
        Expr::Gamma(a) => Expr::mul(
            differentiate(a)?,
            Expr::mul(e.clone(), Expr::digamma(a.clone())),
        ),
        Expr::GammaRecip(a) => Expr::neg(Expr::mul(
            differentiate(a)?,
            Expr::mul(Expr::digamma(a.clone()), e.clone()),
        )),
        Expr::Digamma(_) => {
            return Err(ExprError::Unsupported(
                "derivative of digamma (polygamma of higher order)".into(),
            ))
        }
        Expr::QGammaRecip { .. } => {
            return Err(ExprError::Unsupported(
                "derivative of the truncated q-gamma product".into(),
            ))
        }
        Expr::ProdGeom { .. } => {
            return Err(ExprError::Unsupported(
                "derivative of the truncated product".into(),
            ))
        }
        Expr::JacobiSn { modulus, arg } => Expr::mul(
            differentiate(arg)?,
            Expr::mul(
                std::sync::Arc::new(Expr::JacobiCn { modulus: *modulus, arg: arg.clone() }),
                std::sync::Arc::new(Expr::JacobiDn { modulus: *modulus, arg: arg.clone() }),
            ),
        ),
        Expr::JacobiCn { modulus, arg } => Expr::neg(Expr::mul(
            differentiate(arg)?,
            Expr::mul(
                std::sync::Arc::new(Expr::JacobiSn { modulus: *modulus, arg: arg.clone() }),
                std::sync::Arc::new(Expr::JacobiDn { modulus: *modulus, arg: arg.clone() }),
            ),
        )),
        Expr::JacobiDn { modulus, arg } => Expr::neg(Expr::mul(
            Expr::mul(Expr::real(modulus * modulus), differentiate(arg)?),
            Expr::mul(
                std::sync::Arc::new(Expr::JacobiSn { modulus: *modulus, arg: arg.clone() }),
                std::sync::Arc::new(Expr::JacobiCn { modulus: *modulus, arg: arg.clone() }),
            ),
        )),
        Expr::Theta { j, nome, deriv, arg } => Expr::mul(
            differentiate(arg)?,
            std::sync::Arc::new(Expr::Theta {
                j: *j,
                nome: *nome,
                deriv: deriv + 1,
                arg: arg.clone(),
            }),
        ),
        Expr::Shift(f, c) => Expr::shift(differentiate(f)?, *c),
        Expr::Rescale(f, q) => Expr::mul(
            Expr::constant(*q),
            Expr::rescale(differentiate(f)?, *q).expect("scale already validated"),
        ),
        Expr::Det(_) => {
            return Err(ExprError::Unsupported(
                "derivative of an LU determinant node".into(),
            ))
        }
    })
}

/// The forward difference f(z+c) − f(z).
pub fn forward_difference(f: &ExprRef, c: Complex64) -> ExprRef {
    Expr::sub(Expr::shift(f.clone(), c), f.clone())
}
