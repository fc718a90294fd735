//! Hyperplane families and the curve-side constructions: general-position
//! checking by exhaustive minors, the prime-order Vandermonde family,
//! linear forms applied to curves, forward invariance of divisors under
//! shifts and rescalings, Borel partitions by sampled periodicity, and the
//! block sharpness curves built from reciprocal-gamma factors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{Expr, ExprError, ExprRef};
use crate::linalg;
use crate::roots::Divisor;

#[derive(Debug, thiserror::Error)]
pub enum HyperplaneError {
    #[error("hyperplane coefficient vector must not be the zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} is not prime (pass allow_composite to reproduce the degenerate family)")]
    NotPrime(u64),
    #[error("divisor disc radius {have:.6} does not cover the translated inner disc (need ≥ {need:.6})")]
    CoverageInsufficient { need: f64, have: f64 },
    #[error("could not draw nonvanishing sample points for the partition test")]
    SampleDegeneracy,
    #[error("the block-constant linear system has no usable solution: {0}")]
    UnsolvableConstants(String),
    #[error("bad scale parameter: {0}")]
    BadScale(String),
    #[error("curve coordinates are not all provably entire (coordinate {0})")]
    NotEntire(usize),
    #[error("curve coordinates all vanish near z = {at} on the probe grid (reduced representation suspect)")]
    CommonZero { at: Complex64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Coefficient vector (α_0, …, α_n) of a linear form on P^n; scaling by a
/// nonzero constant represents the same hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    coeffs: Vec<Complex64>,
}

impl Hyperplane {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, HyperplaneError> {
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(HyperplaneError::ZeroVector);
        }
        Ok(Hyperplane { coeffs })
    }

    pub fn standard_basis(dim: usize, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Hyperplane { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self, HyperplaneError> {
        if factor.norm() == 0.0 {
            return Err(HyperplaneError::ZeroVector);
        }
        Ok(Hyperplane { coeffs: self.coeffs.iter().map(|c| c * factor).collect() })
    }
}

/// Reduced representation [g_0 : … : g_n] of a holomorphic curve: entire
/// coordinates, no common zero found on the probe grid (a necessary
/// condition, not a proof).
#[derive(Debug, Clone)]
pub struct Curve {
    coords: Vec<ExprRef>,
    pub label: String,
}

impl Curve {
    pub fn new(coords: Vec<ExprRef>, label: impl Into<String>) -> Result<Self, HyperplaneError> {
        assert!(!coords.is_empty());
        for (i, c) in coords.iter().enumerate() {
            if !c.is_entire() {
                return Err(HyperplaneError::NotEntire(i));
            }
        }
        let curve = Curve { coords, label: label.into() };
        curve.probe_common_zero()?;
        Ok(curve)
    }

    pub fn coords(&self) -> &[ExprRef] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    fn probe_common_zero(&self) -> Result<(), HyperplaneError> {
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let mut sup = Vec::new();
        let mut points = Vec::new();
        for i in 0..64u32 {
            let r = if i % 2 == 0 { 1.0 } else { 3.0 };
            let z = Complex64::from_polar(r, golden * i as f64);
            let mut best = f64::NEG_INFINITY;
            let mut all_ok = true;
            for c in &self.coords {
                match c.eval_log(z) {
                    Ok(lc) => best = best.max(lc.log_abs),
                    Err(_) => {
                        all_ok = false;
                        break;
                    }
                }
            }
            if all_ok {
                sup.push(best);
                points.push(z);
            }
        }
        if sup.is_empty() {
            return Ok(());
        }
        let max = sup.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (u, z) in sup.iter().zip(&points) {
            if *u < max - 69.0 {
                return Err(HyperplaneError::CommonZero { at: *z });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// General position
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GeneralPosition {
    pub ok: bool,
    /// Indices of the first singular (n+1)-subset in lexicographic order.
    pub witness: Option<Vec<usize>>,
    /// Smallest |det| / (product of row norms) over all subsets.
    pub min_scaled_det: f64,
    pub subsets_checked: usize,
}

/// Threshold below which a scaled minor counts as singular.
pub const SINGULAR_MINOR_THRESHOLD: f64 = 1e-10;

/// Check that every (n+1)-subset of the coefficient vectors is linearly
/// independent: |det| is compared against the product of the row norms.
pub fn general_position(hs: &[Hyperplane]) -> Result<GeneralPosition, HyperplaneError> {
    let dim = hs.first().map(|h| h.dim()).unwrap_or(0);
    for h in hs {
        if h.dim() != dim {
            return Err(HyperplaneError::DimensionMismatch { expected: dim, got: h.dim() });
        }
    }
    if hs.len() < dim {
        return Err(HyperplaneError::DimensionMismatch { expected: dim, got: hs.len() });
    }
    // all subsets in lexicographic order
    let mut subsets = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        subsets.push(idx.clone());
        if !linalg::next_combination(&mut idx, hs.len()) {
            break;
        }
    }
    let scaled: Vec<f64> = subsets
        .par_iter()
        .map(|subset| {
            let mut m: Vec<Vec<Complex64>> =
                subset.iter().map(|&i| hs[i].coeffs.to_vec()).collect();
            let norm_product: f64 = m
                .iter()
                .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .product();
            let det = linalg::det_in_place(&mut m);
            if norm_product == 0.0 {
                0.0
            } else {
                det.norm() / norm_product
            }
        })
        .collect();
    let mut min_scaled = f64::INFINITY;
    let mut witness = None;
    for (s, &v) in subsets.iter().zip(&scaled) {
        if v < min_scaled {
            min_scaled = v;
        }
        if v < SINGULAR_MINOR_THRESHOLD && witness.is_none() {
            witness = Some(s.clone());
        }
    }
    Ok(GeneralPosition {
        ok: witness.is_none(),
        witness,
        min_scaled_det: min_scaled,
        subsets_checked: subsets.len(),
    })
}

// ---------------------------------------------------------------------------
// Vandermonde family
// ---------------------------------------------------------------------------

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Root of unity ε^k with the exponent reduced mod m (keeps conjugate pairs
/// exact).
fn root_of_unity(m: u64, k: i64) -> Complex64 {
    let k = k.rem_euclid(m as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / m as f64)
}

/// The 2m vectors {e_0, …, e_{m-1}, v_1, …, v_m} ⊂ C^m, where v_ℓ is row ℓ
/// of the Vandermonde matrix (ε^{(ℓ-1)k}). For prime m every m-subset is
/// independent; m = 4 (behind the escape hatch) reproduces the degenerate
/// {1,3}×{1,3} minor.
pub fn vandermonde_family(m: u64, allow_composite: bool) -> Result<Vec<Hyperplane>, HyperplaneError> {
    if !is_prime(m) && !allow_composite {
        return Err(HyperplaneError::NotPrime(m));
    }
    let dim = m as usize;
    let mut out = Vec::with_capacity(2 * dim);
    for k in 0..dim {
        out.push(Hyperplane::standard_basis(dim, k));
    }
    for row in 0..dim {
        let coeffs = (0..dim)
            .map(|k| root_of_unity(m, (row as i64) * (k as i64)))
            .collect();
        out.push(Hyperplane { coeffs });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Linear forms on curves
// ---------------------------------------------------------------------------

/// The entire function (h, f) = Σ_k h_k f_k.
pub fn apply(h: &Hyperplane, f: &Curve) -> Result<ExprRef, HyperplaneError> {
    if h.dim() != f.coords.len() {
        return Err(HyperplaneError::DimensionMismatch { expected: f.coords.len(), got: h.dim() });
    }
    let mut acc: Option<ExprRef> = None;
    for (c, g) in h.coeffs.iter().zip(&f.coords) {
        if c.norm() == 0.0 {
            continue;
        }
        let term = Expr::mul(Expr::constant(*c), g.clone());
        acc = Some(match acc {
            None => term,
            Some(a) => Expr::add(a, term),
        });
    }
    Ok(acc.unwrap_or_else(|| Expr::real(0.0)))
}

// ---------------------------------------------------------------------------
// Forward invariance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Violation {
    pub location: [f64; 2],
    pub target: [f64; 2],
    pub required_multiplicity: u32,
    pub found_multiplicity: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub forward_invariant: bool,
    pub points_checked: usize,
    pub violations: Vec<Violation>,
}

/// Location tolerance for multiset matching: 1e-7·(1+|z|); multiplicities
/// compare exactly as integers.
fn match_tol(z: Complex64) -> f64 {
    1e-7 * (1.0 + z.norm())
}

fn invariance_with_map(
    div: &Divisor,
    inner_radius: f64,
    map: impl Fn(Complex64) -> Complex64,
    required_coverage: f64,
) -> Result<InvarianceReport, HyperplaneError> {
    if div.disc.radius + 1e-12 < required_coverage {
        return Err(HyperplaneError::CoverageInsufficient {
            need: required_coverage,
            have: div.disc.radius,
        });
    }
    let center = div.disc.center_c();
    let mut violations = Vec::new();
    let mut checked = 0;
    for e in &div.entries {
        if (e.location - center).norm() > inner_radius {
            continue;
        }
        checked += 1;
        let target = map(e.location);
        let tol = match_tol(target);
        let found: u32 = div
            .entries
            .iter()
            .filter(|o| o.kind == e.kind && (o.location - target).norm() <= tol)
            .map(|o| o.multiplicity)
            .sum();
        if found < e.multiplicity {
            violations.push(Violation {
                location: [e.location.re, e.location.im],
                target: [target.re, target.im],
                required_multiplicity: e.multiplicity,
                found_multiplicity: found,
            });
        }
    }
    Ok(InvarianceReport { forward_invariant: violations.is_empty(), points_checked: checked, violations })
}

/// Is the multiset forward invariant under z ↦ z + c on the inner disc?
/// Every point of multiplicity m within the inner radius must reappear at
/// z + c with multiplicity ≥ m (empty divisors pass vacuously).
pub fn forward_invariant(
    div: &Divisor,
    c: Complex64,
    inner_radius: f64,
) -> Result<InvarianceReport, HyperplaneError> {
    invariance_with_map(div, inner_radius, |z| z + c, inner_radius + c.norm())
}

/// Forward invariance under the rescaling z ↦ qz.
pub fn forward_invariant_q(
    div: &Divisor,
    q: Complex64,
    inner_radius: f64,
) -> Result<InvarianceReport, HyperplaneError> {
    if q.norm() == 0.0 {
        return Err(HyperplaneError::BadScale("rescale base must be nonzero".into()));
    }
    invariance_with_map(div, inner_radius, |z| q * z, inner_radius * q.norm().max(1.0))
}

// ---------------------------------------------------------------------------
// Borel partition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Partition {
    /// Disjoint index classes covering 0..n, each sorted, ordered by their
    /// smallest element.
    pub classes: Vec<Vec<usize>>,
    /// Worst relative deviation of (g_i/g_j)(z+c) from (g_i/g_j)(z) over
    /// the samples, for every pair.
    pub evidence: Vec<Vec<f64>>,
    /// Pairs joined through transitivity whose direct test failed.
    pub transitivity_violations: Vec<(usize, usize)>,
    /// Per-class residual of Σ_{i∈S} g_i against the coordinate scale, when
    /// the caller asserts the total sum vanishes.
    pub sum_residuals: Option<Vec<f64>>,
}

/// Partition the coordinate indices by sampled c-periodicity of the ratios:
/// i ~ j when |(g_i/g_j)(z+c) − (g_i/g_j)(z)| < tol·|(g_i/g_j)(z)| at all
/// samples. A pass is evidence consistent with periodicity, not a proof.
pub fn borel_partition(
    g: &Curve,
    c: Complex64,
    tol: f64,
    check_sum_zero: bool,
) -> Result<Partition, HyperplaneError> {
    let n = g.coords.len();
    let samples = partition_samples(g, c)?;
    let mut evidence = vec![vec![0.0f64; n]; n];
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let residuals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| pair_residual(&g.coords[i], &g.coords[j], c, &samples))
        .collect();
    for (&(i, j), &r) in pairs.iter().zip(&residuals) {
        evidence[i][j] = r;
        evidence[j][i] = r;
    }

    // union-find on the pass matrix
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for (&(i, j), &r) in pairs.iter().zip(&residuals) {
        if r < tol {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let mut classes_map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        classes_map.entry(r).or_default().push(i);
    }
    let mut classes: Vec<Vec<usize>> = classes_map.into_values().collect();
    for c in classes.iter_mut() {
        c.sort_unstable();
    }
    classes.sort_by_key(|c| c[0]);

    // transitivity violations: same class, direct test failed
    let mut transitivity_violations = Vec::new();
    for &(i, j) in &pairs {
        let same = classes.iter().any(|cl| cl.contains(&i) && cl.contains(&j));
        if same && evidence[i][j] >= tol {
            transitivity_violations.push((i, j));
        }
    }

    let sum_residuals = if check_sum_zero {
        let mut rs = Vec::with_capacity(classes.len());
        for class in &classes {
            let mut worst = 0.0f64;
            for &z in &samples {
                let mut sum = crate::expr::LogComplex::ZERO;
                let mut scale = f64::NEG_INFINITY;
                for &i in class {
                    let lc = g.coords[i].eval_log(z)?;
                    scale = scale.max(lc.log_abs);
                    sum = sum.add(lc);
                }
                let resid = if sum.is_zero() { 0.0 } else { (sum.log_abs - scale).exp() };
                worst = worst.max(resid);
            }
            rs.push(worst);
        }
        Some(rs)
    } else {
        None
    };

    Ok(Partition { classes, evidence, transitivity_violations, sum_residuals })
}

/// 32 quasi-random points on two circles where no coordinate vanishes;
/// candidates that hit a zero are replaced (up to 5 extra rounds).
fn partition_samples(g: &Curve, c: Complex64) -> Result<Vec<Complex64>, HyperplaneError> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let want = 32;
    let mut out = Vec::with_capacity(want);
    let mut i = 0u32;
    while out.len() < want && i < want as u32 * 6 {
        i += 1;
        let r = if i % 2 == 0 { 1.0 } else { 3.0 };
        let z = Complex64::from_polar(r, golden * i as f64 + 0.1);
        let ok = g.coords.iter().all(|gc| {
            matches!(gc.eval_log(z), Ok(lc) if lc.log_abs > -34.0)
                && matches!(gc.eval_log(z + c), Ok(lc) if lc.log_abs > -34.0)
        });
        if ok {
            out.push(z);
        }
    }
    if out.len() < want {
        return Err(HyperplaneError::SampleDegeneracy);
    }
    Ok(out)
}

fn pair_residual(gi: &ExprRef, gj: &ExprRef, c: Complex64, samples: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for &z in samples {
        let r = (|| -> Option<f64> {
            let a = gi.eval_log(z).ok()?.div(gj.eval_log(z).ok()?);
            let b = gi.eval_log(z + c).ok()?.div(gj.eval_log(z + c).ok()?);
            let drift = b.div(a);
            if drift.log_abs > 690.0 {
                return Some(f64::INFINITY);
            }
            let ratio = drift.to_c64()?;
            Some((ratio - Complex64::new(1.0, 0.0)).norm())
        })()
        .unwrap_or(f64::INFINITY);
        worst = worst.max(r);
    }
    worst
}

// ---------------------------------------------------------------------------
// Sharpness curves
// ---------------------------------------------------------------------------

/// The block sharpness construction in P^10 for a given p: s = [10/p]+1
/// reciprocal-gamma factors φ_k, block constants c_i killing the partial
/// geometric sums, and the n+p = 10+p hyperplanes whose applied forms all
/// collapse to single d_j·φ_{k_j} terms.
#[derive(Debug, Clone)]
pub struct SharpnessConstruction {
    pub curve: Curve,
    pub hyperplanes: Vec<Hyperplane>,
    /// d_j with (h_j, f) = d_j φ_{k_j}.
    pub form_factors: Vec<Complex64>,
    /// Index k_j (1-based) of the φ factor each form collapses to.
    pub form_blocks: Vec<usize>,
    pub constants: Vec<Complex64>,
    pub phi: Vec<ExprRef>,
}

/// φ_k(z) = 1/Γ(−z/c + (k−1)/2): entire, zeros on the forward-invariant
/// lattice {c·(j + (k−1)/2) : j ≥ 0}.
pub fn sharpness_phi(c: Complex64, k: usize) -> ExprRef {
    let inner = Expr::add(
        Expr::mul(Expr::constant(-c.inv()), Expr::var()),
        Expr::real((k as f64 - 1.0) / 2.0),
    );
    Expr::gamma_recip(inner)
}

pub fn green_sharpness_curve(p: usize, c: Complex64) -> Result<SharpnessConstruction, HyperplaneError> {
    const N: usize = 10;
    const M: u64 = 11;
    if !(1..=N).contains(&p) {
        return Err(HyperplaneError::UnsolvableConstants(format!(
            "p must lie in 1..={N}, got {p}"
        )));
    }
    if c.norm() == 0.0 {
        return Err(HyperplaneError::BadScale("shift must be nonzero".into()));
    }

    let full_blocks = N / p; // [10/p]
    let s = full_blocks + 1;
    let tail = (N + 1) - p * full_blocks; // 11 − p[10/p], in 1..=p? (< p+1)

    // constants: c_p = 1 and Σ_{i=1}^p ε^{ℓ(i−1)} c_i = 0 for ℓ = 0..p−2
    let constants: Vec<Complex64> = if p == 1 {
        vec![Complex64::new(1.0, 0.0)]
    } else {
        let rows = p - 1;
        let mut a = vec![vec![Complex64::new(0.0, 0.0); rows]; rows];
        let mut b = vec![Complex64::new(0.0, 0.0); rows];
        for (l, row) in a.iter_mut().enumerate() {
            for (i, entry) in row.iter_mut().enumerate() {
                *entry = root_of_unity(M, (l as i64) * (i as i64));
            }
            b[l] = -root_of_unity(M, (l as i64) * (p as i64 - 1));
        }
        let mut cs = linalg::solve(a, b).ok_or_else(|| {
            HyperplaneError::UnsolvableConstants("the Vandermonde system is singular".into())
        })?;
        cs.push(Complex64::new(1.0, 0.0));
        cs
    };
    if constants.iter().any(|c| c.norm() < 1e-12) {
        return Err(HyperplaneError::UnsolvableConstants(
            "a block constant vanished".into(),
        ));
    }

    let phi: Vec<ExprRef> = (1..=s).map(|k| sharpness_phi(c, k)).collect();

    // curve coordinates: full blocks of p, then the partial block
    let mut coords = Vec::with_capacity(N + 1);
    for k in 0..full_blocks {
        for ci in constants.iter().take(p) {
            coords.push(Expr::mul(Expr::constant(*ci), phi[k].clone()));
        }
    }
    for ci in constants.iter().take(tail) {
        coords.push(Expr::mul(Expr::constant(*ci), phi[s - 1].clone()));
    }
    debug_assert_eq!(coords.len(), N + 1);
    let curve = Curve::new(coords, format!("sharpness-9-p{p}"))?;

    // hyperplanes: e_0..e_10 then Vandermonde rows, truncated to 10+p
    let family = vandermonde_family(M, false)?;
    let hyperplanes: Vec<Hyperplane> = family.into_iter().take(N + p).collect();

    // bookkeeping: which φ and which constant each form collapses to
    let mut form_factors = Vec::with_capacity(N + p);
    let mut form_blocks = Vec::with_capacity(N + p);
    for j in 1..=(N + 1) {
        // (e_{j−1}, f) = c_i φ_{k_j}
        let pos = j - 1;
        let (block, offset) = (pos / p, pos % p);
        if block < full_blocks {
            form_factors.push(constants[offset]);
            form_blocks.push(block + 1);
        } else {
            form_factors.push(constants[offset]);
            form_blocks.push(s);
        }
    }
    for j in (N + 2)..=(N + p) {
        // (v_{j−11}, f): full blocks cancel, the tail block survives
        let l = (j - (N + 2)) as i64; // ℓ = j − 12 in 1-based counting
        let mut d = Complex64::new(0.0, 0.0);
        for (i, ci) in constants.iter().take(tail).enumerate() {
            d += root_of_unity(M, l * (p as i64 * full_blocks as i64 + i as i64)) * ci;
        }
        if d.norm() < 1e-12 {
            return Err(HyperplaneError::UnsolvableConstants(format!(
                "form factor d_{j} vanished"
            )));
        }
        form_factors.push(d);
        form_blocks.push(s);
    }

    Ok(SharpnessConstruction { curve, hyperplanes, form_factors, form_blocks, constants, phi })
}

/// φ_j(z) = 1/γ_q(q^{(j−1)/2} z) for the rescaling constructions; zeros at
/// q^{-k-(j-1)/2}, forward invariant under z ↦ qz.
pub fn q_sharpness_function(q: Complex64, j: usize) -> Result<ExprRef, HyperplaneError> {
    let n = q.norm();
    if !(n > 0.0 && n < 1.0) {
        return Err(HyperplaneError::BadScale(format!(
            "q must satisfy 0 < |q| < 1, got |q| = {n}"
        )));
    }
    let scale = q.powc(Complex64::new((j as f64 - 1.0) / 2.0, 0.0));
    let arg = Expr::mul(Expr::constant(scale), Expr::var());
    Expr::qgamma_recip(q, arg).map_err(HyperplaneError::Expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;
    use crate::roots::{catalog_divisor, Disc, DivisorEntry, DivisorMethod, KnownFunction, PointKind};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn example_12_hyperplanes() -> Vec<Hyperplane> {
        let eta5 = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 5.0);
        let eta7 = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 7.0);
        let one = c64(1.0, 0.0);
        let mut hs: Vec<Hyperplane> = (0..4).map(|k| Hyperplane::standard_basis(4, k)).collect();
        hs.push(Hyperplane::new(vec![one, one, one, one]).unwrap());
        hs.push(Hyperplane::new(vec![one, eta5, eta5 * eta5, eta5 * eta5 * eta5]).unwrap());
        hs.push(Hyperplane::new(vec![one, eta7, eta7 * eta7, eta7 * eta7 * eta7]).unwrap());
        hs
    }

    #[test]
    fn seven_hyperplanes_in_general_position() {
        let gp = general_position(&example_12_hyperplanes()).unwrap();
        assert!(gp.ok, "min scaled det {}", gp.min_scaled_det);
        assert_eq!(gp.subsets_checked, 35);
    }

    #[test]
    fn duplicate_basis_vector_fails() {
        let mut hs: Vec<Hyperplane> = (0..3).map(|k| Hyperplane::standard_basis(3, k)).collect();
        hs.push(Hyperplane::standard_basis(3, 0));
        let gp = general_position(&hs).unwrap();
        assert!(!gp.ok);
        assert_eq!(gp.witness, Some(vec![0, 1, 3]));
    }

    #[test]
    fn scaling_leaves_verdict() {
        let hs = example_12_hyperplanes();
        let mut scaled = hs.clone();
        scaled[3] = scaled[3].scaled(c64(0.0, 17.25)).unwrap();
        scaled[5] = scaled[5].scaled(c64(-2.0, 0.3)).unwrap();
        assert_eq!(general_position(&hs).unwrap().ok, general_position(&scaled).unwrap().ok);
    }

    #[test]
    fn vandermonde_prime_families() {
        for m in [2u64, 3, 5] {
            let fam = vandermonde_family(m, false).unwrap();
            assert_eq!(fam.len(), 2 * m as usize);
            let gp = general_position(&fam).unwrap();
            assert!(gp.ok, "m = {m}: min {}", gp.min_scaled_det);
        }
        assert!(matches!(vandermonde_family(4, false), Err(HyperplaneError::NotPrime(4))));
    }

    #[test]
    fn vandermonde_m4_counterexample() {
        let fam = vandermonde_family(4, true).unwrap();
        let gp = general_position(&fam).unwrap();
        assert!(!gp.ok);
        // the specific degenerate subset {e_0, e_2, v_2, v_4}: indices 0, 2
        // (basis rows excluding exponents {1,3}) and 5, 7 (Vandermonde rows
        // with ℓ−1 ∈ {1,3})
        let mut m: Vec<Vec<Complex64>> = [0usize, 2, 5, 7]
            .iter()
            .map(|&i| fam[i].coeffs().to_vec())
            .collect();
        let det = linalg::det_in_place(&mut m);
        assert!(det.norm() < 1e-12, "degenerate minor |det| = {}", det.norm());
    }

    #[test]
    fn apply_picks_coordinates() {
        let curve = Curve::new(
            vec![parse_expr("sin(z)").unwrap(), parse_expr("cos(z)").unwrap()],
            "circle",
        )
        .unwrap();
        let h = Hyperplane::standard_basis(2, 0);
        let f = apply(&h, &curve).unwrap();
        let z = c64(0.3, 0.2);
        assert!((f.eval(z).unwrap() - z.sin()).norm() < 1e-15);
        assert!(Hyperplane::new(vec![c64(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn forward_invariance_empty_and_lattice() {
        let disc = Disc::centered(5.0).unwrap();
        let empty = Divisor { entries: vec![], disc, method: DivisorMethod::Catalog };
        let rep = forward_invariant(&empty, c64(1.0, 0.0), 3.0).unwrap();
        assert!(rep.forward_invariant);
        assert_eq!(rep.points_checked, 0);

        // c-periodic double lattice filling the whole stated disc
        let entries = (-5..=5)
            .map(|k| DivisorEntry {
                location: c64(k as f64, 0.0),
                multiplicity: 2,
                kind: PointKind::Zero,
            })
            .collect();
        let div = Divisor { entries, disc, method: DivisorMethod::Catalog };
        let rep = forward_invariant(&div, c64(1.0, 0.0), 4.0).unwrap();
        assert!(rep.forward_invariant);
        assert_eq!(rep.points_checked, 9);

        // missing translated point
        let div2 = Divisor {
            entries: vec![DivisorEntry { location: c64(1.0, 0.0), multiplicity: 2, kind: PointKind::Zero }],
            disc,
            method: DivisorMethod::Catalog,
        };
        let rep2 = forward_invariant_q(&div2, c64(2.0, 0.0), 2.0).unwrap();
        assert!(!rep2.forward_invariant);
        assert_eq!(rep2.violations.len(), 1);
        assert_eq!(rep2.violations[0].found_multiplicity, 0);
    }

    #[test]
    fn coverage_is_enforced() {
        let disc = Disc::centered(2.0).unwrap();
        let empty = Divisor { entries: vec![], disc, method: DivisorMethod::Catalog };
        assert!(matches!(
            forward_invariant(&empty, c64(1.5, 0.0), 1.0),
            Err(HyperplaneError::CoverageInsufficient { .. })
        ));
    }

    #[test]
    fn borel_partition_periodic_family() {
        let curve = Curve::new(
            vec![
                parse_expr("1").unwrap(),
                parse_expr("exp(z)").unwrap(),
                parse_expr("1 + exp(z)").unwrap(),
            ],
            "periodic",
        )
        .unwrap();
        let c = c64(0.0, 2.0 * std::f64::consts::PI);
        let part = borel_partition(&curve, c, 1e-6, false).unwrap();
        assert_eq!(part.classes, vec![vec![0, 1, 2]]);
        assert!(part.transitivity_violations.is_empty());
    }

    #[test]
    fn borel_partition_singletons() {
        let curve = Curve::new(
            vec![
                parse_expr("1").unwrap(),
                parse_expr("exp(z)").unwrap(),
                parse_expr("exp(z^2)").unwrap(),
            ],
            "independent",
        )
        .unwrap();
        let part = borel_partition(&curve, c64(1.0, 0.0), 1e-6, false).unwrap();
        assert_eq!(part.classes, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn sharpness_p3_constants_and_forms() {
        let c = c64(-1.0, 0.0);
        let s = green_sharpness_curve(3, c).unwrap();
        let eps = root_of_unity(11, 1);
        // c_1 = ε, c_2 = −(ε+1), c_3 = 1
        assert!((s.constants[0] - eps).norm() < 1e-12);
        assert!((s.constants[1] + eps + c64(1.0, 0.0)).norm() < 1e-12);
        assert!((s.constants[2] - c64(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(s.hyperplanes.len(), 13);
        assert_eq!(s.phi.len(), 4);
        // forms 12 and 13 both collapse to −φ₄: ε⁹(c₁+εc₂) = −ε¹¹ = −1
        assert_eq!(s.form_blocks[11], 4);
        assert_eq!(s.form_blocks[12], 4);
        assert!((s.form_factors[11] + c64(1.0, 0.0)).norm() < 1e-12);
        assert!((s.form_factors[12] + c64(1.0, 0.0)).norm() < 1e-12);
        // every stated factor matches the applied form pointwise
        for (j, h) in s.hyperplanes.iter().enumerate() {
            let form = apply(h, &s.curve).unwrap();
            let phi = &s.phi[s.form_blocks[j] - 1];
            for t in 0..5 {
                let z = c64(0.37 + 0.21 * t as f64, 0.4 - 0.13 * t as f64);
                let lhs = form.eval(z).unwrap();
                let rhs = s.form_factors[j] * phi.eval(z).unwrap();
                assert!(
                    (lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()),
                    "form {j} at {z}: {lhs} vs {rhs}"
                );
            }
        }
        // the 13 returned hyperplanes are in general position
        assert!(general_position(&s.hyperplanes).unwrap().ok);
    }

    #[test]
    fn sharpness_image_dimension() {
        let s = green_sharpness_curve(3, c64(-1.0, 0.0)).unwrap();
        // rank of the sample matrix equals the number of φ blocks
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let rows: Vec<Vec<Complex64>> = (0..20)
            .map(|i| {
                let z = Complex64::from_polar(1.0 + 0.1 * i as f64, golden * i as f64);
                s.curve.coords().iter().map(|g| g.eval(z).unwrap()).collect()
            })
            .collect();
        assert_eq!(linalg::rank(rows, 1e-9), 4); // [10/3] + 1
    }

    #[test]
    fn q_sharpness_zero_set_matches_catalog() {
        let q = c64(0.5, 0.0);
        let f = q_sharpness_function(q, 1).unwrap();
        // zeros at 2^k
        for k in 0..3 {
            let z = c64(2.0f64.powi(k), 0.0);
            let lc = f.eval_log(z).unwrap();
            assert!(lc.is_zero(), "expected exact zero at {z}");
        }
        let cat = catalog_divisor(
            KnownFunction::QGammaRecip { q },
            &Disc::centered(5.0).unwrap(),
        )
        .unwrap();
        for e in cat.zeros() {
            let lc = f.eval_log(e.location).unwrap();
            assert!(lc.is_zero() || lc.log_abs < -30.0);
        }
        // γ_q(0) = (q;q)_∞
        let gamma_q = parse_expr("qgamma(0.5; z)").unwrap();
        let v = gamma_q.eval(c64(0.0, 0.0)).unwrap();
        assert!((v - c64(0.2887880950866024, 0.0)).norm() < 1e-12);
    }
}
