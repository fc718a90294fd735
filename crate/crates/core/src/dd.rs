//! Double-double ("twofold") arithmetic: an unevaluated sum of two f64s
//! giving roughly 106 mantissa bits, built from the classic error-free
//! transforms. Used by the determinant evaluation path when the configured
//! precision exceeds 53 bits; near-dependent Casorati columns cancel
//! catastrophically in plain f64 LU.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let e = e + self.lo + b.lo;
        quick_two_sum(s, e)
    }

    pub fn sub(self, b: Dd) -> Dd {
        self.add(b.neg())
    }

    pub fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + self.hi * b.lo + self.lo * b.hi;
        quick_two_sum(p, e)
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self.sub(b.mul(Dd::from_f64(q1)));
        let q2 = r.hi / b.hi;
        let r2 = r.sub(b.mul(Dd::from_f64(q2)));
        let q3 = r2.hi / b.hi;
        quick_two_sum(q1, q2).add(Dd::from_f64(q3))
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let err = b - (s - a);
    Dd { hi: s, lo: err }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };

    pub fn from_c64(z: Complex64) -> Self {
        DdComplex { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn add(self, b: Self) -> Self {
        DdComplex { re: self.re.add(b.re), im: self.im.add(b.im) }
    }

    pub fn sub(self, b: Self) -> Self {
        DdComplex { re: self.re.sub(b.re), im: self.im.sub(b.im) }
    }

    pub fn mul(self, b: Self) -> Self {
        DdComplex {
            re: self.re.mul(b.re).sub(self.im.mul(b.im)),
            im: self.re.mul(b.im).add(self.im.mul(b.re)),
        }
    }

    pub fn div(self, b: Self) -> Self {
        let den = b.re.mul(b.re).add(b.im.mul(b.im));
        let num_re = self.re.mul(b.re).add(self.im.mul(b.im));
        let num_im = self.im.mul(b.re).sub(self.re.mul(b.im));
        DdComplex { re: num_re.div(den), im: num_im.div(den) }
    }

    pub fn norm_sqr_f64(self) -> f64 {
        let n = self.re.mul(self.re).add(self.im.mul(self.im));
        n.to_f64()
    }
}

/// Determinant of a complex matrix by LU with partial pivoting carried out
/// entirely in double-double arithmetic. Entries are taken as exact f64
/// pairs; returns the determinant rounded back to f64 components.
pub fn det_dd(entries: &[Vec<Complex64>]) -> Complex64 {
    let n = entries.len();
    let mut m: Vec<Vec<DdComplex>> = entries
        .iter()
        .map(|row| row.iter().map(|&z| DdComplex::from_c64(z)).collect())
        .collect();
    let mut det = DdComplex { re: Dd::from_f64(1.0), im: Dd::ZERO };
    let mut sign = 1.0f64;
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[col][col].norm_sqr_f64();
        for row in col + 1..n {
            let v = m[row][col].norm_sqr_f64();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        let d = m[col][col];
        det = det.mul(d);
        for row in col + 1..n {
            let factor = m[row][col].div(d);
            for k in col..n {
                let t = factor.mul(m[col][k]);
                m[row][k] = m[row][k].sub(t);
            }
        }
    }
    det.to_c64() * sign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_mul_recovers_low_bits() {
        let a = Dd::from_f64(1.0).add(Dd::from_f64(1e-20));
        let b = a.mul(a);
        // (1 + 1e-20)² = 1 + 2e-20 + 1e-40; the 2e-20 must survive
        assert!((b.sub(Dd::from_f64(1.0)).to_f64() - 2e-20).abs() < 1e-33);
    }

    #[test]
    fn dd_div_inverse() {
        let a = Dd::from_f64(3.0);
        let inv = Dd::from_f64(1.0).div(a);
        let back = inv.mul(a).sub(Dd::from_f64(1.0));
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn det_catastrophic_cancellation() {
        // Entries exactly representable in f64: det = (1+2⁻³⁰)(1−2⁻³⁰) − 1
        // = −2⁻⁶⁰, which plain f64 LU rounds to 0.
        let x = (2.0f64).powi(-30);
        let m = vec![
            vec![Complex64::new(1.0 + x, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0 - x, 0.0)],
        ];
        let exact = -(2.0f64).powi(-60);
        let d = det_dd(&m);
        assert!(
            ((d.re - exact) / exact).abs() < 1e-10,
            "dd det {} vs exact {exact}",
            d.re
        );
    }
}
