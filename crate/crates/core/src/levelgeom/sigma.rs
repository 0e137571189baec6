//! Elementary symmetric functions of numbers and of symmetric matrices.

use nalgebra::DMatrix;

/// `σ_k(x)`, with `σ_0 = 1` and `σ_k = 0` for `k > len` or `k < 0`.
pub fn sigma_k(x: &[f64], k: isize) -> f64 {
    if k < 0 || k as usize > x.len() {
        return 0.0;
    }
    let k = k as usize;
    // e[j] after processing a prefix holds σ_j of that prefix.
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in x {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

/// `σ_k(x | i)`: the same with `x_i` removed.
pub fn sigma_k_without(x: &[f64], k: isize, i: usize) -> f64 {
    let rest: Vec<f64> = x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
    sigma_k(&rest, k)
}

/// `σ_k` of a square matrix: the sum of its principal `k × k` minors.
pub fn sigma_k_matrix(a: &DMatrix<f64>, k: isize) -> f64 {
    let n = a.nrows();
    if k < 0 || k as usize > n {
        return 0.0;
    }
    let k = k as usize;
    if k == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(k, k, |r, c| a[(idx[r], idx[c])]);
        total += sub.determinant();
    }
    total
}

/// `∂σ_{k+1}(A)/∂A = Σ_{j=0}^{k} (−1)^j σ_{k−j}(A) A^j` for symmetric `A`.
pub fn sigma_derivative(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    let mut power = DMatrix::identity(n, n);
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out += &power * (sign * sigma_k_matrix(a, (k - j) as isize));
        power = &power * a;
    }
    out
}
