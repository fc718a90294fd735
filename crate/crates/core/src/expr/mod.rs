//! Expression trees for meromorphic functions of one complex variable.
//!
//! Trees are immutable (`Arc` children), finite and acyclic; every
//! operation is pure. Two evaluation channels are provided: plain complex
//! values, and a log-magnitude/phase channel that keeps integrands like
//! log⁺|exp(eᶻ)| representable far past the f64 range.

mod diff;
pub mod parse;
mod rational;

pub use diff::{differentiate, forward_difference};
pub use rational::rationalize;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dd;
use crate::special;

pub type ExprRef = Arc<Expr>;

/// Hard floor on how close |q| may come to 1 for the truncated q-products.
pub const Q_UNIT_GAP: f64 = 1e-3;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("evaluation at a singular point (z = {at})")]
    SingularPoint { at: Complex64 },
    #[error("overflow during evaluation (z = {at})")]
    Overflow { at: Complex64 },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("rescale factor must be nonzero")]
    ZeroScale,
    #[error("bad scale parameter: {0}")]
    BadScale(String),
}

/// Evaluation precision for the determinant nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    DoubleDouble,
}

impl Precision {
    /// Interpret a mantissa-bit count: anything beyond f64's 53 bits selects
    /// the double-double path (~106 bits).
    pub fn from_mantissa_bits(bits: u32) -> Precision {
        if bits > 53 {
            Precision::DoubleDouble
        } else {
            Precision::F64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalOptions {
    pub precision: Precision,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var,
    Add(ExprRef, ExprRef),
    Sub(ExprRef, ExprRef),
    Mul(ExprRef, ExprRef),
    Div(ExprRef, ExprRef),
    Neg(ExprRef),
    Powi(ExprRef, i32),
    Exp(ExprRef),
    Log(ExprRef),
    Sin(ExprRef),
    Cos(ExprRef),
    Gamma(ExprRef),
    /// 1/Γ — entire; the primitive the divisor machinery works with.
    GammaRecip(ExprRef),
    Digamma(ExprRef),
    /// 1/γ_q(·) = (·; q)_∞ / (q; q)_∞ for |q| < 1 — entire, zeros at q^{-k}.
    QGammaRecip { q: Complex64, arg: ExprRef },
    /// ∏_{j≥0} (1 − ·/q^j) for |q| > 1 — entire, zeros at q^j.
    ProdGeom { q: Complex64, arg: ExprRef },
    JacobiSn { modulus: f64, arg: ExprRef },
    JacobiCn { modulus: f64, arg: ExprRef },
    JacobiDn { modulus: f64, arg: ExprRef },
    /// θ_j^(deriv) with fixed nome; produced by rationalizing sn/cn/dn and by
    /// their differentiation chain.
    Theta { j: u8, nome: f64, deriv: u32, arg: ExprRef },
    /// z ↦ f(z + c)
    Shift(ExprRef, Complex64),
    /// z ↦ f(q z)
    Rescale(ExprRef, Complex64),
    /// Determinant evaluated by row-scaled LU; used for determinant families
    /// too large for cofactor expansion.
    Det(Vec<Vec<ExprRef>>),
}

// ---------------------------------------------------------------------------
// Log-channel values
// ---------------------------------------------------------------------------

/// A complex value represented as exp(log_abs + i·arg). `log_abs = -∞`
/// encodes an exact zero. The phase is not normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex { log_abs: f64::NEG_INFINITY, arg: 0.0 };

    pub fn from_c64(z: Complex64) -> LogComplex {
        if z.re == 0.0 && z.im == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex { log_abs: z.norm().ln(), arg: z.arg() }
    }

    /// Build from a complex logarithm w: value = exp(w).
    pub fn from_log(w: Complex64) -> LogComplex {
        LogComplex { log_abs: w.re, arg: w.im }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    /// Back to a complex value; fails when exp(log_abs) overflows f64.
    pub fn to_c64(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if self.log_abs > 709.0 {
            return None;
        }
        Some(Complex64::from_polar(self.log_abs.exp(), self.arg))
    }

    pub fn mul(self, o: LogComplex) -> LogComplex {
        if self.is_zero() || o.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex { log_abs: self.log_abs + o.log_abs, arg: self.arg + o.arg }
    }

    pub fn div(self, o: LogComplex) -> LogComplex {
        LogComplex { log_abs: self.log_abs - o.log_abs, arg: self.arg - o.arg }
    }

    pub fn powi(self, k: i32) -> LogComplex {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex { log_abs: self.log_abs * k as f64, arg: self.arg * k as f64 }
    }

    pub fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex { log_abs: self.log_abs, arg: self.arg + std::f64::consts::PI }
    }

    /// Sum via the ratio trick: factor out the larger magnitude so the
    /// remaining 1 + ratio is an ordinary complex number of norm ≤ 2.
    pub fn add(self, o: LogComplex) -> LogComplex {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.log_abs >= o.log_abs { (self, o) } else { (o, self) };
        let dl = small.log_abs - big.log_abs;
        // below ~ -745 the ratio underflows to zero anyway
        let ratio = if dl < -745.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(dl.exp(), small.arg - big.arg)
        };
        let factor = Complex64::new(1.0, 0.0) + ratio;
        if factor.re == 0.0 && factor.im == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex {
            log_abs: big.log_abs + factor.norm().ln(),
            arg: big.arg + factor.arg(),
        }
    }

    pub fn sub(self, o: LogComplex) -> LogComplex {
        self.add(o.neg())
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

fn is_const(e: &ExprRef, v: f64) -> bool {
    matches!(**e, Expr::Const(c) if c == Complex64::new(v, 0.0))
}

impl Expr {
    pub fn constant(c: Complex64) -> ExprRef {
        Arc::new(Expr::Const(c))
    }

    pub fn real(x: f64) -> ExprRef {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn var() -> ExprRef {
        Arc::new(Expr::Var)
    }

    pub fn add(a: ExprRef, b: ExprRef) -> ExprRef {
        if is_const(&a, 0.0) {
            return b;
        }
        if is_const(&b, 0.0) {
            return a;
        }
        Arc::new(Expr::Add(a, b))
    }

    pub fn sub(a: ExprRef, b: ExprRef) -> ExprRef {
        if is_const(&b, 0.0) {
            return a;
        }
        Arc::new(Expr::Sub(a, b))
    }

    pub fn mul(a: ExprRef, b: ExprRef) -> ExprRef {
        if is_const(&a, 1.0) {
            return b;
        }
        if is_const(&b, 1.0) {
            return a;
        }
        if is_const(&a, 0.0) || is_const(&b, 0.0) {
            return Expr::real(0.0);
        }
        Arc::new(Expr::Mul(a, b))
    }

    pub fn div(a: ExprRef, b: ExprRef) -> ExprRef {
        if is_const(&b, 1.0) {
            return a;
        }
        // 1/Γ is entire; rewriting keeps quotients of gamma expressions
        // inside the divisor machinery
        if let Expr::Gamma(w) = &*b {
            return Expr::mul(a, Expr::gamma_recip(w.clone()));
        }
        if let Expr::Div(p, q) = &*b {
            return Expr::div(Expr::mul(a, q.clone()), p.clone());
        }
        Arc::new(Expr::Div(a, b))
    }

    pub fn neg(a: ExprRef) -> ExprRef {
        if let Expr::Neg(inner) = &*a {
            return inner.clone();
        }
        Arc::new(Expr::Neg(a))
    }

    pub fn powi(a: ExprRef, k: i32) -> ExprRef {
        match k {
            0 => Expr::real(1.0),
            1 => a,
            _ => Arc::new(Expr::Powi(a, k)),
        }
    }

    pub fn exp(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Exp(a))
    }

    pub fn log(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Log(a))
    }

    pub fn sin(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Sin(a))
    }

    pub fn cos(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Cos(a))
    }

    pub fn gamma(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Gamma(a))
    }

    pub fn gamma_recip(a: ExprRef) -> ExprRef {
        Arc::new(Expr::GammaRecip(a))
    }

    pub fn digamma(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Digamma(a))
    }

    pub fn qgamma_recip(q: Complex64, arg: ExprRef) -> Result<ExprRef, ExprError> {
        let n = q.norm();
        if n == 0.0 || n >= 1.0 - Q_UNIT_GAP {
            return Err(ExprError::BadScale(format!(
                "q-gamma needs 0 < |q| ≤ {} (got |q| = {n})",
                1.0 - Q_UNIT_GAP
            )));
        }
        Ok(Arc::new(Expr::QGammaRecip { q, arg }))
    }

    pub fn prod_geom(q: Complex64, arg: ExprRef) -> Result<ExprRef, ExprError> {
        let n = q.norm();
        if n <= 1.0 + Q_UNIT_GAP {
            return Err(ExprError::BadScale(format!(
                "truncated product needs |q| ≥ {} (got |q| = {n})",
                1.0 + Q_UNIT_GAP
            )));
        }
        Ok(Arc::new(Expr::ProdGeom { q, arg }))
    }

    pub fn sn(modulus: f64, arg: ExprRef) -> Result<ExprRef, ExprError> {
        special::EllipticParams::new(modulus)
            .map_err(|e| ExprError::BadScale(e.to_string()))?;
        Ok(Arc::new(Expr::JacobiSn { modulus, arg }))
    }

    pub fn shift(f: ExprRef, c: Complex64) -> ExprRef {
        if c == Complex64::new(0.0, 0.0) {
            return f;
        }
        Arc::new(Expr::Shift(f, c))
    }

    pub fn rescale(f: ExprRef, q: Complex64) -> Result<ExprRef, ExprError> {
        if q == Complex64::new(0.0, 0.0) {
            return Err(ExprError::ZeroScale);
        }
        if q == Complex64::new(1.0, 0.0) {
            return Ok(f);
        }
        Ok(Arc::new(Expr::Rescale(f, q)))
    }

    pub fn det(rows: Vec<Vec<ExprRef>>) -> ExprRef {
        Arc::new(Expr::Det(rows))
    }
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

impl Expr {
    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_var() || b.contains_var()
            }
            Expr::Neg(a)
            | Expr::Powi(a, _)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Gamma(a)
            | Expr::GammaRecip(a)
            | Expr::Digamma(a)
            | Expr::QGammaRecip { arg: a, .. }
            | Expr::ProdGeom { arg: a, .. }
            | Expr::JacobiSn { arg: a, .. }
            | Expr::JacobiCn { arg: a, .. }
            | Expr::JacobiDn { arg: a, .. }
            | Expr::Theta { arg: a, .. }
            | Expr::Shift(a, _)
            | Expr::Rescale(a, _) => a.contains_var(),
            Expr::Det(rows) => rows.iter().flatten().any(|e| e.contains_var()),
        }
    }

    /// Conservative entirety check: true only when the tree provably denotes
    /// an entire function.
    pub fn is_entire(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_entire() && b.is_entire(),
            Expr::Div(a, b) => a.is_entire() && !b.contains_var() && matches!(**b, Expr::Const(c) if c.norm() > 0.0),
            Expr::Neg(a) => a.is_entire(),
            Expr::Powi(a, k) => *k >= 0 && a.is_entire(),
            Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.is_entire(),
            Expr::Log(_) | Expr::Gamma(_) | Expr::Digamma(_) => false,
            Expr::GammaRecip(a) => a.is_entire(),
            Expr::QGammaRecip { arg, .. } | Expr::ProdGeom { arg, .. } | Expr::Theta { arg, .. } => {
                arg.is_entire()
            }
            Expr::JacobiSn { .. } | Expr::JacobiCn { .. } | Expr::JacobiDn { .. } => false,
            Expr::Shift(a, _) | Expr::Rescale(a, _) => a.is_entire(),
            Expr::Det(rows) => rows.iter().flatten().all(|e| e.is_entire()),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation: value channel
// ---------------------------------------------------------------------------

fn finite_or_overflow(v: Complex64, at: Complex64) -> Result<Complex64, ExprError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Overflow { at })
    }
}

impl Expr {
    pub fn eval(&self, z: Complex64) -> Result<Complex64, ExprError> {
        self.eval_with(z, &EvalOptions::default())
    }

    pub fn eval_with(&self, z: Complex64, opts: &EvalOptions) -> Result<Complex64, ExprError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var => Ok(z),
            Expr::Add(a, b) => finite_or_overflow(a.eval_with(z, opts)? + b.eval_with(z, opts)?, z),
            Expr::Sub(a, b) => finite_or_overflow(a.eval_with(z, opts)? - b.eval_with(z, opts)?, z),
            Expr::Mul(a, b) => finite_or_overflow(a.eval_with(z, opts)? * b.eval_with(z, opts)?, z),
            Expr::Div(a, b) => {
                let den = b.eval_with(z, opts)?;
                if den.norm() == 0.0 {
                    return Err(ExprError::SingularPoint { at: z });
                }
                finite_or_overflow(a.eval_with(z, opts)? / den, z)
            }
            Expr::Neg(a) => Ok(-a.eval_with(z, opts)?),
            Expr::Powi(a, k) => {
                let v = a.eval_with(z, opts)?;
                if *k < 0 && v.norm() == 0.0 {
                    return Err(ExprError::SingularPoint { at: z });
                }
                finite_or_overflow(v.powi(*k), z)
            }
            Expr::Exp(a) => finite_or_overflow(a.eval_with(z, opts)?.exp(), z),
            Expr::Log(a) => {
                let v = a.eval_with(z, opts)?;
                if v.norm() == 0.0 {
                    return Err(ExprError::SingularPoint { at: z });
                }
                Ok(v.ln())
            }
            Expr::Sin(a) => finite_or_overflow(a.eval_with(z, opts)?.sin(), z),
            Expr::Cos(a) => finite_or_overflow(a.eval_with(z, opts)?.cos(), z),
            Expr::Gamma(a) => {
                let v = a.eval_with(z, opts)?;
                let lg = special::lgamma(v).map_err(|e| special_err(e, z))?;
                LogComplex::from_log(lg)
                    .to_c64()
                    .ok_or(ExprError::Overflow { at: z })
            }
            Expr::GammaRecip(a) => {
                let v = a.eval_with(z, opts)?;
                match special::lgamma(v) {
                    Ok(lg) => LogComplex::from_log(-lg)
                        .to_c64()
                        .ok_or(ExprError::Overflow { at: z }),
                    // pole of Γ is an exact zero of 1/Γ
                    Err(special::SpecialError::Pole) => Ok(Complex64::new(0.0, 0.0)),
                    Err(e) => Err(special_err(e, z)),
                }
            }
            Expr::Digamma(a) => {
                let v = a.eval_with(z, opts)?;
                special::digamma(v).map_err(|e| special_err(e, z))
            }
            Expr::QGammaRecip { q, arg } => {
                let v = arg.eval_with(z, opts)?;
                let num = special::log_qpochhammer_inf(v, *q).map_err(|e| special_err(e, z))?;
                let den = special::log_qpochhammer_inf(*q, *q).map_err(|e| special_err(e, z))?;
                let dl = match den {
                    special::LogProduct::Log(l) => l,
                    special::LogProduct::Zero => return Err(ExprError::SingularPoint { at: z }),
                };
                match num {
                    special::LogProduct::Zero => Ok(Complex64::new(0.0, 0.0)),
                    special::LogProduct::Log(nl) => LogComplex::from_log(nl - dl)
                        .to_c64()
                        .ok_or(ExprError::Overflow { at: z }),
                }
            }
            Expr::ProdGeom { q, arg } => {
                let v = arg.eval_with(z, opts)?;
                match special::log_prod_geometric(v, *q).map_err(|e| special_err(e, z))? {
                    special::LogProduct::Zero => Ok(Complex64::new(0.0, 0.0)),
                    special::LogProduct::Log(l) => LogComplex::from_log(l)
                        .to_c64()
                        .ok_or(ExprError::Overflow { at: z }),
                }
            }
            Expr::JacobiSn { modulus, arg } => {
                let v = arg.eval_with(z, opts)?;
                let p = elliptic(*modulus)?;
                special::jacobi_sn(v, &p).map_err(|e| special_err(e, z))
            }
            Expr::JacobiCn { modulus, arg } => {
                let v = arg.eval_with(z, opts)?;
                let p = elliptic(*modulus)?;
                special::jacobi_cn(v, &p).map_err(|e| special_err(e, z))
            }
            Expr::JacobiDn { modulus, arg } => {
                let v = arg.eval_with(z, opts)?;
                let p = elliptic(*modulus)?;
                special::jacobi_dn(v, &p).map_err(|e| special_err(e, z))
            }
            Expr::Theta { j, nome, deriv, arg } => {
                let v = arg.eval_with(z, opts)?;
                special::theta(*j, *deriv, v, *nome).map_err(|e| special_err(e, z))
            }
            Expr::Shift(f, c) => f.eval_with(z + c, opts),
            Expr::Rescale(f, q) => f.eval_with(q * z, opts),
            Expr::Det(_) => {
                let lc = self.eval_log_with(z, opts)?;
                lc.to_c64().ok_or(ExprError::Overflow { at: z })
            }
        }
    }
}

fn special_err(e: special::SpecialError, at: Complex64) -> ExprError {
    match e {
        special::SpecialError::Pole => ExprError::SingularPoint { at },
        special::SpecialError::Overflow => ExprError::Overflow { at },
        special::SpecialError::BadParameter(m) => ExprError::BadScale(m),
    }
}

fn elliptic(k: f64) -> Result<special::EllipticParams, ExprError> {
    special::EllipticParams::new(k).map_err(|e| ExprError::BadScale(e.to_string()))
}

// ---------------------------------------------------------------------------
// Evaluation: log channel
// ---------------------------------------------------------------------------

impl Expr {
    pub fn eval_log(&self, z: Complex64) -> Result<LogComplex, ExprError> {
        self.eval_log_with(z, &EvalOptions::default())
    }

    pub fn eval_log_with(&self, z: Complex64, opts: &EvalOptions) -> Result<LogComplex, ExprError> {
        match self {
            Expr::Const(c) => Ok(LogComplex::from_c64(*c)),
            Expr::Var => Ok(LogComplex::from_c64(z)),
            Expr::Add(a, b) => Ok(a.eval_log_with(z, opts)?.add(b.eval_log_with(z, opts)?)),
            Expr::Sub(a, b) => Ok(a.eval_log_with(z, opts)?.sub(b.eval_log_with(z, opts)?)),
            Expr::Mul(a, b) => Ok(a.eval_log_with(z, opts)?.mul(b.eval_log_with(z, opts)?)),
            Expr::Div(a, b) => {
                let den = b.eval_log_with(z, opts)?;
                if den.is_zero() {
                    return Err(ExprError::SingularPoint { at: z });
                }
                Ok(a.eval_log_with(z, opts)?.div(den))
            }
            Expr::Neg(a) => Ok(a.eval_log_with(z, opts)?.neg()),
            Expr::Powi(a, k) => {
                let v = a.eval_log_with(z, opts)?;
                if *k < 0 && v.is_zero() {
                    return Err(ExprError::SingularPoint { at: z });
                }
                Ok(v.powi(*k))
            }
            Expr::Exp(a) => {
                let w = a.eval_with(z, opts)?;
                Ok(LogComplex::from_log(w))
            }
            Expr::Log(a) => {
                let w = a.eval_log_with(z, opts)?;
                if w.is_zero() {
                    return Err(ExprError::SingularPoint { at: z });
                }
                // principal branch: normalize the phase into (-π, π]
                let arg = normalize_angle(w.arg);
                Ok(LogComplex::from_c64(Complex64::new(w.log_abs, arg)))
            }
            Expr::Sin(a) => {
                let w = a.eval_with(z, opts)?;
                // sin w = (e^{iw} − e^{−iw}) / (2i), assembled in log space so
                // large |Im w| cannot overflow
                let up = LogComplex { log_abs: -w.im, arg: w.re };
                let dn = LogComplex { log_abs: w.im, arg: -w.re };
                let diff = up.sub(dn);
                Ok(LogComplex {
                    log_abs: diff.log_abs - 2.0f64.ln(),
                    arg: diff.arg - std::f64::consts::FRAC_PI_2,
                })
            }
            Expr::Cos(a) => {
                let w = a.eval_with(z, opts)?;
                let up = LogComplex { log_abs: -w.im, arg: w.re };
                let dn = LogComplex { log_abs: w.im, arg: -w.re };
                let sum = up.add(dn);
                Ok(LogComplex { log_abs: sum.log_abs - 2.0f64.ln(), arg: sum.arg })
            }
            Expr::Gamma(a) => {
                let v = a.eval_with(z, opts)?;
                let lg = special::lgamma(v).map_err(|e| special_err(e, z))?;
                Ok(LogComplex::from_log(lg))
            }
            Expr::GammaRecip(a) => {
                let v = a.eval_with(z, opts)?;
                match special::lgamma(v) {
                    Ok(lg) => Ok(LogComplex::from_log(-lg)),
                    Err(special::SpecialError::Pole) => Ok(LogComplex::ZERO),
                    Err(e) => Err(special_err(e, z)),
                }
            }
            Expr::Digamma(a) => {
                let v = a.eval_with(z, opts)?;
                let d = special::digamma(v).map_err(|e| special_err(e, z))?;
                Ok(LogComplex::from_c64(d))
            }
            Expr::QGammaRecip { q, arg } => {
                let v = arg.eval_with(z, opts)?;
                let num = special::log_qpochhammer_inf(v, *q).map_err(|e| special_err(e, z))?;
                let den = match special::log_qpochhammer_inf(*q, *q).map_err(|e| special_err(e, z))? {
                    special::LogProduct::Log(l) => l,
                    special::LogProduct::Zero => return Err(ExprError::SingularPoint { at: z }),
                };
                match num {
                    special::LogProduct::Zero => Ok(LogComplex::ZERO),
                    special::LogProduct::Log(nl) => Ok(LogComplex::from_log(nl - den)),
                }
            }
            Expr::ProdGeom { q, arg } => {
                let v = arg.eval_with(z, opts)?;
                match special::log_prod_geometric(v, *q).map_err(|e| special_err(e, z))? {
                    special::LogProduct::Zero => Ok(LogComplex::ZERO),
                    special::LogProduct::Log(l) => Ok(LogComplex::from_log(l)),
                }
            }
            Expr::JacobiSn { .. }
            | Expr::JacobiCn { .. }
            | Expr::JacobiDn { .. }
            | Expr::Theta { .. } => {
                // theta quotients stay in a moderate range on desk-scale
                // discs; the value channel is accurate there
                Ok(LogComplex::from_c64(self.eval_with(z, opts)?))
            }
            Expr::Shift(f, c) => f.eval_log_with(z + c, opts),
            Expr::Rescale(f, q) => f.eval_log_with(q * z, opts),
            Expr::Det(rows) => det_log(rows, z, opts),
        }
    }
}

/// Reduce an angle into (-π, π].
pub fn normalize_angle(mut a: f64) -> f64 {
    use std::f64::consts::PI;
    a %= 2.0 * PI;
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Row-scaled LU determinant over the log channel.
fn det_log(rows: &[Vec<ExprRef>], z: Complex64, opts: &EvalOptions) -> Result<LogComplex, ExprError> {
    let n = rows.len();
    let mut lcs: Vec<Vec<LogComplex>> = Vec::with_capacity(n);
    for row in rows {
        debug_assert_eq!(row.len(), n);
        let mut r = Vec::with_capacity(n);
        for e in row {
            r.push(e.eval_log_with(z, opts)?);
        }
        lcs.push(r);
    }
    let mut scale_sum = 0.0f64;
    let mut matrix: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for r in &lcs {
        let s = r
            .iter()
            .map(|lc| lc.log_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if s == f64::NEG_INFINITY {
            return Ok(LogComplex::ZERO); // an all-zero row
        }
        scale_sum += s;
        matrix.push(
            r.iter()
                .map(|lc| {
                    if lc.is_zero() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::from_polar((lc.log_abs - s).exp(), lc.arg)
                    }
                })
                .collect(),
        );
    }
    let det = match opts.precision {
        Precision::F64 => crate::linalg::det_in_place(&mut matrix),
        Precision::DoubleDouble => dd::det_dd(&matrix),
    };
    if det.norm() == 0.0 {
        return Ok(LogComplex::ZERO);
    }
    Ok(LogComplex { log_abs: scale_sum + det.norm().ln(), arg: det.arg() })
}

// ---------------------------------------------------------------------------
// Display (grammar-compatible where the grammar covers the node)
// ---------------------------------------------------------------------------

fn fmt_c64(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{}", fmt_c64(*c)),
            Expr::Var => write!(f, "z"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Powi(a, k) => write!(f, "{a}^{k}"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Gamma(a) => write!(f, "gamma({a})"),
            Expr::GammaRecip(a) => write!(f, "(1 / gamma({a}))"),
            Expr::Digamma(a) => write!(f, "digamma({a})"),
            Expr::QGammaRecip { q, arg } => write!(f, "(1 / qgamma({}; {arg}))", fmt_c64(*q)),
            Expr::ProdGeom { q, arg } => write!(f, "prodq({}; {arg})", fmt_c64(*q)),
            Expr::JacobiSn { modulus, arg } => write!(f, "sn({arg}; {modulus})"),
            Expr::JacobiCn { modulus, arg } => write!(f, "cn({arg}; {modulus})"),
            Expr::JacobiDn { modulus, arg } => write!(f, "dn({arg}; {modulus})"),
            Expr::Theta { j, nome, deriv, arg } => {
                write!(f, "theta{j}[d{deriv}]({arg}; {nome})")
            }
            Expr::Shift(a, c) => write!(f, "shift({a}; {})", fmt_c64(*c)),
            Expr::Rescale(a, q) => write!(f, "rescale({a}; {})", fmt_c64(*q)),
            Expr::Det(rows) => write!(f, "det[{}x{}]", rows.len(), rows.len()),
        }
    }
}
