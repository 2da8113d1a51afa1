//! Small dense matrices over a scalar backend.
//!
//! Exact rank and solves use fraction-free Gaussian elimination (Bareiss
//! pivoting scheme); the float backend measures rank through singular
//! values from a one-sided Jacobi sweep, so a squared condition number
//! never enters the comparison.

use crate::model::scalar::{is_negligible, max_abs, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vec(&self, r: usize) -> Vec<T> {
        self.row(r).to_vec()
    }

    pub fn set_row(&mut self, r: usize, values: &[T]) {
        assert_eq!(values.len(), self.cols);
        self.data[r * self.cols..(r + 1) * self.cols].clone_from_slice(values);
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row_vec(r)).collect()
    }

    /// First `k` rows as a new matrix.
    pub fn leading_rows(&self, k: usize) -> Mat<T> {
        Mat {
            rows: k,
            cols: self.cols,
            data: self.data[..k * self.cols].to_vec(),
        }
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.get_mut(c, r) = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = a.clone() * other.get(k, c).clone();
                    *out.get_mut(r, c) += v;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn row_mul(&self, row: &[T]) -> Vec<T> {
        assert_eq!(row.len(), self.rows, "inner dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for (k, a) in row.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for c in 0..self.cols {
                out[c] += a.clone() * self.get(k, c).clone();
            }
        }
        out
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.clone() * s.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.data)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&f).collect(),
        }
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }
}

/// Rank of a matrix. Exact backend: fraction-free elimination; float
/// backend: singular values compared against tol * sigma_max.
pub fn rank<T: Scalar>(m: &Mat<T>, tol: &T) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    if T::EXACT {
        rank_exact(m)
    } else {
        let rows: Vec<Vec<f64>> = (0..m.rows())
            .map(|r| m.row(r).iter().map(|v| v.to_f64()).collect())
            .collect();
        let sigma = singular_values(&rows);
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        if sigma_max == 0.0 {
            return 0;
        }
        let cut = tol.to_f64() * sigma_max;
        sigma.iter().filter(|&&s| s > cut).count()
    }
}

/// Fraction-free (Bareiss) elimination rank. Every intermediate entry is
/// produced by the two-by-two determinant update divided by the previous
/// pivot, which is exact over the rational backend.
fn rank_exact<T: Scalar>(m: &Mat<T>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut prev_pivot = T::one();
    let mut rank = 0;
    let mut pivot_col = 0;
    while rank < rows && pivot_col < cols {
        // find a pivot row at or below `rank`
        let Some(pr) = (rank..rows).find(|&r| !a.get(r, pivot_col).is_zero()) else {
            pivot_col += 1;
            continue;
        };
        if pr != rank {
            for c in 0..cols {
                let tmp = a.get(rank, c).clone();
                *a.get_mut(rank, c) = a.get(pr, c).clone();
                *a.get_mut(pr, c) = tmp;
            }
        }
        let pivot = a.get(rank, pivot_col).clone();
        for r in rank + 1..rows {
            let lead = a.get(r, pivot_col).clone();
            for c in pivot_col..cols {
                let num = pivot.clone() * a.get(r, c).clone()
                    - lead.clone() * a.get(rank, c).clone();
                *a.get_mut(r, c) = num / prev_pivot.clone();
            }
        }
        prev_pivot = pivot;
        rank += 1;
        pivot_col += 1;
    }
    rank
}

/// Singular values of a real matrix, descending, via Hestenes one-sided
/// Jacobi on the transpose (no Gram squaring).
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() || rows[0].is_empty() {
        return Vec::new();
    }
    // work on copies of the rows; rotations orthogonalize them in place
    let k = rows.len();
    let mut b: Vec<Vec<f64>> = rows.to_vec();
    let mut converged = false;
    for _sweep in 0..60 {
        converged = true;
        for i in 0..k {
            for j in i + 1..k {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for l in 0..b[i].len() {
                    aii += b[i][l] * b[i][l];
                    ajj += b[j][l] * b[j][l];
                    aij += b[i][l] * b[j][l];
                }
                if aij.abs() <= 1e-30 * (aii * ajj).sqrt().max(f64::MIN_POSITIVE) {
                    continue;
                }
                converged = false;
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for l in 0..b[i].len() {
                    let bi = b[i][l];
                    let bj = b[j][l];
                    b[i][l] = c * bi - s * bj;
                    b[j][l] = s * bi + c * bj;
                }
            }
        }
        if converged {
            break;
        }
    }
    debug_assert!(converged, "jacobi sweep did not converge");
    let mut sigma: Vec<f64> = b
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigma
}

/// Solve a * basis = -target for the row vector a, where `basis` has full
/// row rank and target is known to lie in its row span (the caller's rank
/// test already said so). Returns None if elimination finds the system
/// inconsistent at the working tolerance.
pub fn solve_dependency<T: Scalar>(basis: &Mat<T>, target: &[T], tol: &T) -> Option<Vec<T>> {
    let k = basis.rows();
    if k == 0 {
        return if is_row_significant(target, tol) {
            None
        } else {
            Some(Vec::new())
        };
    }
    assert_eq!(basis.cols(), target.len());
    // augmented system basis^T * a^T = -target^T, solved by elimination
    let m = basis.cols();
    let mut aug = Mat::zeros(m, k + 1);
    for r in 0..m {
        for c in 0..k {
            *aug.get_mut(r, c) = basis.get(c, r).clone();
        }
        *aug.get_mut(r, k) = -target[r].clone();
    }
    let scale = {
        let s = aug.max_abs();
        if s.is_zero() {
            T::one()
        } else {
            s
        }
    };
    let mut pivot_rows = Vec::new();
    let mut row = 0;
    for col in 0..k {
        // partial pivot by magnitude
        let mut best = row;
        for r in row..m {
            if aug.get(r, col).abs() > aug.get(best, col).abs() {
                best = r;
            }
        }
        if is_negligible(aug.get(best, col), tol, &scale) {
            return None; // basis not full rank; caller's invariant broken
        }
        if best != row {
            for c in 0..=k {
                let tmp = aug.get(row, c).clone();
                *aug.get_mut(row, c) = aug.get(best, c).clone();
                *aug.get_mut(best, c) = tmp;
            }
        }
        let pivot = aug.get(row, col).clone();
        for r in 0..m {
            if r == row || aug.get(r, col).is_zero() {
                continue;
            }
            let factor = aug.get(r, col).clone() / pivot.clone();
            for c in col..=k {
                let v = aug.get(row, c).clone() * factor.clone();
                *aug.get_mut(r, c) -= v;
            }
        }
        pivot_rows.push((row, col));
        row += 1;
    }
    // consistency: rows below the pivots must have negligible RHS
    for r in row..m {
        if !is_negligible(aug.get(r, k), tol, &scale) {
            return None;
        }
    }
    let mut a = vec![T::zero(); k];
    for &(r, c) in &pivot_rows {
        a[c] = aug.get(r, k).clone() / aug.get(r, c).clone();
    }
    Some(a)
}

fn is_row_significant<T: Scalar>(row: &[T], tol: &T) -> bool {
    let scale = max_abs(row);
    row.iter().any(|v| !is_negligible(v, tol, &scale)) && !scale.is_zero()
}

/// Symmetric positive definite solve via Cholesky; used by the oracle's
/// normal equations (float only). Overwrites the lower triangle of `a`.
pub fn cholesky_solve(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        for k in 0..j {
            let ajk = a[j][k];
            for i in j..n {
                a[i][j] -= a[i][k] * ajk;
            }
        }
        if a[j][j] <= 0.0 {
            return None;
        }
        let d = a[j][j].sqrt();
        for i in j..n {
            a[i][j] /= d;
        }
    }
    // forward substitution L y = b
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a[i][k] * y[k];
        }
        y[i] /= a[i][i];
    }
    // back substitution L^T x = y
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= a[k][i] * y[k];
        }
        y[i] /= a[i][i];
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn qm(rows: &[&[i64]]) -> Mat<Q> {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Scalar::from_int(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn exact_rank_cases() {
        let z = &Scalar::zero();
        assert_eq!(rank(&qm(&[&[0, 1, -2], &[0, 2, -4]]), z), 1);
        assert_eq!(rank(&qm(&[&[0, 1, -2], &[1, 0, 0]]), z), 2);
        assert_eq!(rank(&Mat::<Q>::zeros(3, 2), z), 0);
        assert_eq!(rank(&Mat::<Q>::identity(4), z), 4);
    }

    #[test]
    fn float_rank_with_tolerance() {
        let m = Mat::from_rows(vec![vec![1.0, 2.0], vec![1.0, 2.0 + 1e-12]]);
        assert_eq!(rank(&m, &1e-9), 1);
        assert_eq!(rank(&m, &1e-15), 2);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let s = singular_values(&[vec![3.0, 0.0, 0.0], vec![0.0, -4.0, 0.0]]);
        assert!((s[0] - 4.0).abs() < 1e-12);
        assert!((s[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dependency_solve_recovers_combination() {
        // target = -(2*row0 - 3*row1): a = (2, -3)
        let basis = qm(&[&[1, 0, 2], &[0, 1, 1]]);
        let target: Vec<Q> = vec![
            Scalar::from_int(-2),
            Scalar::from_int(3),
            Scalar::from_int(-1),
        ];
        let a = solve_dependency(&basis, &target, &Scalar::zero()).unwrap();
        assert_eq!(a, vec![Scalar::from_int(2), Scalar::from_int(-3)]);
    }

    #[test]
    fn dependency_solve_detects_inconsistency() {
        let basis = qm(&[&[1, 0]]);
        let target: Vec<Q> = vec![Scalar::zero(), Scalar::one()];
        assert!(solve_dependency(&basis, &target, &Scalar::zero()).is_none());
    }

    #[test]
    fn cholesky_solves_spd() {
        let mut a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let x = cholesky_solve(&mut a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 0.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }
}
