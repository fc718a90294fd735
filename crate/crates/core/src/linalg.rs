//! Small dense complex kernels shared by the determinant and hyperplane
//! machinery: LU determinant with partial pivoting, linear solve, and
//! numerical rank by row reduction.

use num_complex::Complex64;

/// Determinant by LU with partial pivoting; consumes the matrix.
pub fn det_in_place(m: &mut [Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[col][col].norm_sqr();
        for row in col + 1..n {
            let v = m[row][col].norm_sqr();
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
            det = -det;
        }
        let d = m[col][col];
        det *= d;
        for row in col + 1..n {
            let f = m[row][col] / d;
            for k in col..n {
                let t = f * m[col][k];
                m[row][k] -= t;
            }
        }
    }
    det
}

/// Solve A x = b by Gaussian elimination with partial pivoting. `None` when
/// a pivot collapses below 1e-14 of the largest remaining entry.
pub fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].norm_sqr();
        for row in col + 1..n {
            let v = a[row][col].norm_sqr();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        let remaining: f64 = (col..n)
            .flat_map(|r| a[r][col..].iter())
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max);
        if best <= 1e-28 * remaining.max(1e-300) {
            return None;
        }
        if pivot != col {
            a.swap(pivot, col);
            b.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let t = f * a[col][k];
                a[row][k] -= t;
            }
            let t = f * b[col];
            b[row] -= t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Numerical rank by row reduction with a relative pivot threshold.
pub fn rank(mut m: Vec<Vec<Complex64>>, rel_tol: f64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let scale = m
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let mut pivot = rank;
        let mut best = m[rank][col].norm_sqr();
        for r in rank + 1..rows {
            let v = m[r][col].norm_sqr();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best.sqrt() <= rel_tol * scale {
            col += 1;
            continue;
        }
        m.swap(pivot, rank);
        for r in rank + 1..rows {
            let f = m[r][col] / m[rank][col];
            for k in col..cols {
                let t = f * m[rank][k];
                m[r][k] -= t;
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Advance a lexicographic k-combination of {0..n}. Returns false when
/// exhausted.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if idx[i] != i + n - k {
            break;
        }
    }
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        let mut idx = [0usize, 1, 2];
        let mut count = 1;
        while next_combination(&mut idx, 6) {
            count += 1;
        }
        assert_eq!(count, 20); // C(6,3)
    }

    #[test]
    fn rank_of_block_matrix() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = vec![
            vec![one, one, zero],
            vec![one * 2.0, one * 2.0, zero],
            vec![zero, zero, one],
        ];
        assert_eq!(rank(m, 1e-10), 2);
    }
}
