//! Scalar special-function kernels: complex log-gamma (Lanczos with
//! reflection), digamma, complete elliptic integrals by AGM, Jacobi theta
//! series with term-wise derivatives, and the infinite q-products.
//!
//! Everything here returns plain complex values (or complex logarithms in
//! the case of products that over/underflow), leaving tree plumbing to the
//! expression module.

use num_complex::Complex64;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("evaluation at a pole")]
    Pole,
    #[error("series overflow at the requested point")]
    Overflow,
    #[error("parameter out of range: {0}")]
    BadParameter(String),
}

const LN_2PI_HALF: f64 = 0.918938533204672741780329736406; // ln(2π)/2
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// log Γ(z). The imaginary part is *some* branch of the argument of Γ(z),
/// not the continuous one; exp of the result is Γ(z) itself, which is all
/// the evaluation channels need.
pub fn lgamma(z: Complex64) -> Result<Complex64, SpecialError> {
    if z.re < 0.5 {
        // reflection: log Γ(z) = log π − log sin(πz) − log Γ(1−z)
        if z.im == 0.0 && z.re == z.re.floor() {
            return Err(SpecialError::Pole); // nonpositive integer
        }
        let ls = log_sin_pi(z)?;
        let lg = lgamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(Complex64::new(std::f64::consts::PI.ln(), 0.0) - ls - lg);
    }
    let zm = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (zm + i as f64);
    }
    let t = zm + 7.5;
    let r = LN_2PI_HALF + (zm + 0.5) * t.ln() - t + x.ln();
    if r.re.is_finite() {
        Ok(r)
    } else {
        Err(SpecialError::Overflow)
    }
}

/// log sin(πz), stable for large |Im z|; branch of the imaginary part is
/// unnormalized.
pub fn log_sin_pi(z: Complex64) -> Result<Complex64, SpecialError> {
    let w = z * std::f64::consts::PI;
    let i = Complex64::new(0.0, 1.0);
    // sin w = e^{iw}(1 − e^{−2iw}) / (2i),  good for Im w ≤ 0
    // sin w = −e^{−iw}(1 − e^{2iw}) / (2i), good for Im w ≥ 0
    let (lead, tail) = if w.im >= 0.0 {
        let t = (Complex64::new(0.0, 2.0) * w).exp();
        (i * w * (-1.0), Complex64::new(1.0, 0.0) - t)
    } else {
        let t = (Complex64::new(0.0, -2.0) * w).exp();
        (i * w, Complex64::new(1.0, 0.0) - t)
    };
    if tail.norm() == 0.0 {
        return Err(SpecialError::Pole);
    }
    let log_half_i = Complex64::new(-(2.0f64.ln()), -std::f64::consts::FRAC_PI_2);
    let sign = if w.im >= 0.0 {
        // −1/(2i) = e^{iπ/2}/2: fold the minus sign into the constant
        Complex64::new(-(2.0f64.ln()), std::f64::consts::FRAC_PI_2)
    } else {
        log_half_i
    };
    Ok(lead + tail.ln() + sign)
}

const BERNOULLI_TERMS: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Digamma ψ(z) = Γ'(z)/Γ(z): reflection, recurrence to Re z ≥ 9, then the
/// Bernoulli asymptotic series.
pub fn digamma(z: Complex64) -> Result<Complex64, SpecialError> {
    if z.re < 0.5 {
        if z.im == 0.0 && z.re == z.re.floor() {
            return Err(SpecialError::Pole);
        }
        let c = cot_pi(z);
        let p = digamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(p - std::f64::consts::PI * c);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 9.0 {
        acc -= w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    // ψ(w) ≈ ln w − 1/(2w) − Σ_n B_{2n}/(2n w^{2n})
    let mut s = w.ln() - 0.5 * inv;
    let mut zpow = inv2;
    for (n, &b) in BERNOULLI_TERMS.iter().enumerate() {
        s -= zpow * (b / (2.0 * (n as f64 + 1.0)));
        zpow *= inv2;
    }
    Ok(s + acc)
}

/// cot(πz), saturating to ∓i for large |Im z|.
fn cot_pi(z: Complex64) -> Complex64 {
    let w = z * std::f64::consts::PI;
    if w.im > 20.0 {
        return Complex64::new(0.0, -1.0);
    }
    if w.im < -20.0 {
        return Complex64::new(0.0, 1.0);
    }
    w.cos() / w.sin()
}

// ---------------------------------------------------------------------------
// Elliptic: AGM, complete integrals, nome, theta series
// ---------------------------------------------------------------------------

/// Arithmetic–geometric mean of two positive reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (na, nb) = (0.5 * (a + b), (a * b).sqrt());
        if (na - nb).abs() <= 1e-16 * na {
            return na;
        }
        a = na;
        b = nb;
    }
    0.5 * (a + b)
}

/// Quarter periods and nome of the Jacobi functions for modulus k ∈ (0,1).
#[derive(Debug, Clone, Copy)]
pub struct EllipticParams {
    pub k: f64,
    pub big_k: f64,
    pub big_k_prime: f64,
    pub nome: f64,
}

impl EllipticParams {
    pub fn new(k: f64) -> Result<Self, SpecialError> {
        if !(0.0 < k && k < 1.0) {
            return Err(SpecialError::BadParameter(format!(
                "elliptic modulus must lie in (0,1), got {k}"
            )));
        }
        let kp = (1.0 - k * k).sqrt();
        let big_k = std::f64::consts::FRAC_PI_2 / agm(1.0, kp);
        let big_k_prime = std::f64::consts::FRAC_PI_2 / agm(1.0, k);
        let nome = (-std::f64::consts::PI * big_k_prime / big_k).exp();
        Ok(EllipticParams { k, big_k, big_k_prime, nome })
    }
}

/// Jacobi theta function θ_j (j = 1..4) with nome `q`, differentiated
/// `deriv` times in the argument, evaluated at complex `v`. Truncated when
/// two consecutive terms fall below 1e-17 of the running magnitude.
pub fn theta(j: u8, deriv: u32, v: Complex64, q: f64) -> Result<Complex64, SpecialError> {
    debug_assert!((1..=4).contains(&j));
    if !(0.0 < q && q < 1.0) {
        return Err(SpecialError::BadParameter(format!("theta nome out of (0,1): {q}")));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    if (j == 3 || j == 4) && deriv == 0 {
        sum = Complex64::new(1.0, 0.0);
    }
    let mut small_streak = 0;
    for n in 0..256u32 {
        let term = match j {
            1 => {
                let m = 2 * n + 1;
                let qe = q.powf((n as f64 + 0.5) * (n as f64 + 0.5));
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * sign * qe * (m as f64).powi(deriv as i32) * trig_deriv_sin(deriv, m as f64 * v)
            }
            2 => {
                let m = 2 * n + 1;
                let qe = q.powf((n as f64 + 0.5) * (n as f64 + 0.5));
                2.0 * qe * (m as f64).powi(deriv as i32) * trig_deriv_cos(deriv, m as f64 * v)
            }
            3 | 4 => {
                let nn = n + 1;
                let m = 2 * nn;
                let qe = q.powf((nn * nn) as f64);
                let sign = if j == 4 && nn % 2 == 1 { -1.0 } else { 1.0 };
                2.0 * sign * qe * (m as f64).powi(deriv as i32) * trig_deriv_cos(deriv, m as f64 * v)
            }
            _ => unreachable!(),
        };
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(SpecialError::Overflow);
        }
        sum += term;
        if term.norm() < 1e-17 * (1.0 + sum.norm()) {
            small_streak += 1;
            if small_streak >= 2 {
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    Ok(sum)
}

/// d-th derivative of sin evaluated at w (cycle sin → cos → −sin → −cos).
fn trig_deriv_sin(d: u32, w: Complex64) -> Complex64 {
    match d % 4 {
        0 => w.sin(),
        1 => w.cos(),
        2 => -w.sin(),
        _ => -w.cos(),
    }
}

fn trig_deriv_cos(d: u32, w: Complex64) -> Complex64 {
    match d % 4 {
        0 => w.cos(),
        1 => -w.sin(),
        2 => -w.cos(),
        _ => w.sin(),
    }
}

/// sn, cn, dn as theta quotients. Returns `Pole` exactly when θ₄ vanishes
/// at the mapped argument.
pub fn jacobi_sn(z: Complex64, p: &EllipticParams) -> Result<Complex64, SpecialError> {
    let v = z * (std::f64::consts::FRAC_PI_2 / p.big_k);
    let t0 = Complex64::new(0.0, 0.0);
    let den = theta(4, 0, v, p.nome)?;
    if den.norm() == 0.0 {
        return Err(SpecialError::Pole);
    }
    let c = theta(3, 0, t0, p.nome)? / theta(2, 0, t0, p.nome)?;
    Ok(c * theta(1, 0, v, p.nome)? / den)
}

pub fn jacobi_cn(z: Complex64, p: &EllipticParams) -> Result<Complex64, SpecialError> {
    let v = z * (std::f64::consts::FRAC_PI_2 / p.big_k);
    let t0 = Complex64::new(0.0, 0.0);
    let den = theta(4, 0, v, p.nome)?;
    if den.norm() == 0.0 {
        return Err(SpecialError::Pole);
    }
    let c = theta(4, 0, t0, p.nome)? / theta(2, 0, t0, p.nome)?;
    Ok(c * theta(2, 0, v, p.nome)? / den)
}

pub fn jacobi_dn(z: Complex64, p: &EllipticParams) -> Result<Complex64, SpecialError> {
    let v = z * (std::f64::consts::FRAC_PI_2 / p.big_k);
    let t0 = Complex64::new(0.0, 0.0);
    let den = theta(4, 0, v, p.nome)?;
    if den.norm() == 0.0 {
        return Err(SpecialError::Pole);
    }
    let c = theta(4, 0, t0, p.nome)? / theta(3, 0, t0, p.nome)?;
    Ok(c * theta(3, 0, v, p.nome)? / den)
}

// ---------------------------------------------------------------------------
// q-products
// ---------------------------------------------------------------------------

/// Either the complex logarithm of a product value, or the marker that a
/// factor vanished exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogProduct {
    Log(Complex64),
    Zero,
}

/// log (a; q)_∞ = log ∏_{k≥0} (1 − a q^k) for |q| < 1, truncated once
/// |a q^k| < 1e-17.
pub fn log_qpochhammer_inf(a: Complex64, q: Complex64) -> Result<LogProduct, SpecialError> {
    if q.norm() >= 1.0 {
        return Err(SpecialError::BadParameter(format!("|q| must be < 1, got {}", q.norm())));
    }
    let mut log_sum = Complex64::new(0.0, 0.0);
    let mut aq = a;
    for _ in 0..20_000 {
        if aq.norm() < 1e-17 {
            return Ok(LogProduct::Log(log_sum));
        }
        let factor = Complex64::new(1.0, 0.0) - aq;
        if factor.norm() == 0.0 {
            return Ok(LogProduct::Zero);
        }
        log_sum += factor.ln();
        aq *= q;
    }
    Err(SpecialError::BadParameter("q-product truncation did not terminate (|q| too close to 1)".into()))
}

/// log ∏_{j≥0} (1 − z/q^j) for |q| > 1, truncated once |z/q^j| < 1e-17.
pub fn log_prod_geometric(z: Complex64, q: Complex64) -> Result<LogProduct, SpecialError> {
    if q.norm() <= 1.0 {
        return Err(SpecialError::BadParameter(format!("|q| must be > 1, got {}", q.norm())));
    }
    log_qpochhammer_inf(z, q.inv())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_small_integers() {
        // Γ(5) = 24, Γ(1) = 1
        let g5 = lgamma(c(5.0, 0.0)).unwrap().exp();
        assert!((g5 - c(24.0, 0.0)).norm() < 1e-11 * 24.0);
        let g1 = lgamma(c(1.0, 0.0)).unwrap().exp();
        assert!((g1 - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn gamma_half() {
        let v = lgamma(c(0.5, 0.0)).unwrap().exp();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((v - c(sqrt_pi, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn gamma_recurrence_complex() {
        // Γ(z+1) = z Γ(z) on a small complex grid
        for &(re, im) in &[(0.3, 1.2), (-2.4, 0.7), (3.1, -0.5), (-0.9, -2.2)] {
            let z = c(re, im);
            let lhs = lgamma(z + 1.0).unwrap();
            let rhs = lgamma(z).unwrap() + z.ln();
            // compare as values, phases may differ by 2π
            let ratio = (lhs - rhs).exp();
            assert!((ratio - c(1.0, 0.0)).norm() < 1e-10, "z={z} ratio={ratio}");
        }
    }

    #[test]
    fn gamma_reflection_large_imaginary() {
        // |Γ(iy)|² = π/(y sinh(πy))
        let y = 15.0;
        let lg = lgamma(c(0.0, y)).unwrap();
        let expected = 0.5 * (std::f64::consts::PI / (y * (std::f64::consts::PI * y).sinh())).ln();
        assert!((lg.re - expected).abs() < 1e-10 * expected.abs());
    }

    #[test]
    fn digamma_known_values() {
        const EULER_GAMMA: f64 = 0.5772156649015328606;
        let p1 = digamma(c(1.0, 0.0)).unwrap();
        assert!((p1 - c(-EULER_GAMMA, 0.0)).norm() < 1e-12);
        // ψ(z+1) = ψ(z) + 1/z
        let z = c(0.7, 1.3);
        let lhs = digamma(z + 1.0).unwrap();
        let rhs = digamma(z).unwrap() + z.inv();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn elliptic_quarter_periods() {
        // K(k) for k = 1/√2: K = Γ(1/4)²/(4√π) ≈ 1.85407467730137
        let p = EllipticParams::new(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((p.big_k - 1.85407467730137).abs() < 1e-11);
        assert!((p.big_k_prime - p.big_k).abs() < 1e-11); // self-dual modulus
    }

    #[test]
    fn sn_special_points() {
        let p = EllipticParams::new(0.8).unwrap();
        let z0 = jacobi_sn(c(0.0, 0.0), &p).unwrap();
        assert!(z0.norm() < 1e-14);
        let at_k = jacobi_sn(c(p.big_k, 0.0), &p).unwrap();
        assert!((at_k - c(1.0, 0.0)).norm() < 1e-12, "sn(K) = {at_k}");
        // sn² + cn² = 1 at a complex point
        let z = c(0.31, 0.47);
        let s = jacobi_sn(z, &p).unwrap();
        let cn = jacobi_cn(z, &p).unwrap();
        assert!((s * s + cn * cn - c(1.0, 0.0)).norm() < 1e-12);
        // dn² + k² sn² = 1
        let d = jacobi_dn(z, &p).unwrap();
        assert!((d * d + p.k * p.k * s * s - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sn_periodicity() {
        let p = EllipticParams::new(0.6).unwrap();
        let z = c(0.4, 0.2);
        let a = jacobi_sn(z, &p).unwrap();
        let b = jacobi_sn(z + 4.0 * p.big_k, &p).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn sn_pole_at_i_kprime() {
        let p = EllipticParams::new(0.8).unwrap();
        let r = jacobi_sn(c(0.0, p.big_k_prime), &p);
        assert!(matches!(r, Err(SpecialError::Pole)) || r.unwrap().norm() > 1e12);
    }

    #[test]
    fn euler_product_half() {
        // (1/2; 1/2)_∞ ≈ 0.288788095086602
        match log_qpochhammer_inf(c(0.5, 0.0), c(0.5, 0.0)).unwrap() {
            LogProduct::Log(l) => {
                let v = l.exp();
                assert!((v - c(0.2887880950866024, 0.0)).norm() < 1e-13);
            }
            LogProduct::Zero => panic!("product is not zero"),
        }
    }

    #[test]
    fn geometric_product_functional_equation() {
        // Π(qz) = (1 − qz) Π(z) for Π(z) = ∏ (1 − z/q^j), |q| > 1
        let q = c(3.0, 0.5);
        let z = c(0.4, -0.7);
        let lp = match log_prod_geometric(q * z, q).unwrap() {
            LogProduct::Log(l) => l,
            LogProduct::Zero => panic!(),
        };
        let rp = match log_prod_geometric(z, q).unwrap() {
            LogProduct::Log(l) => l,
            LogProduct::Zero => panic!(),
        };
        let lhs = lp.exp();
        let rhs = (Complex64::new(1.0, 0.0) - q * z) * rp.exp();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }
}
