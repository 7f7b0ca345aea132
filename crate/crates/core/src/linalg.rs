//! Small dense complex linear algebra: determinants, cofactors, minors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn det(a: &CMat) -> C64 {
    match a.nrows() {
        0 => C64::new(1.0, 0.0),
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        _ => a.clone().lu().determinant(),
    }
}

/// Submatrix with the given rows and columns, in the given order.
pub fn submatrix(a: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn minor(a: &CMat, rows: &[usize], cols: &[usize]) -> C64 {
    det(&submatrix(a, rows, cols))
}

/// Transposed cofactor matrix. Well defined for singular input.
pub fn adjugate(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, C64::new(1.0, 0.0));
    }
    let mut adj = CMat::zeros(n, n);
    let idx: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let rows: Vec<usize> = idx.iter().copied().filter(|&r| r != i).collect();
        for j in 0..n {
            let cols: Vec<usize> = idx.iter().copied().filter(|&c| c != j).collect();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(j, i)] = minor(a, &rows, &cols) * sign;
        }
    }
    adj
}

/// All strictly increasing sequences of length `m` from `0..n`, lexicographic.
pub fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - m + i {
                cur[i] += 1;
                for k in i + 1..m {
                    cur[k] = cur[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Numerical rank via singular values relative to the largest one.
pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn diag(v: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(v))
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

/// Sign of a permutation given as an image vector.
pub fn permutation_sign(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1.0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
