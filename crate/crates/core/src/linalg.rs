//! Minimal dense linear algebra: row-major matrices, Cholesky, triangular
//! solves, Householder QR. Everything is deterministic given identical
//! input bits; no external numerical backend.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::invalid("matrix", "no rows"));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                let lhs = k * other.cols;
                let dst = i * other.cols;
                for j in 0..other.cols {
                    out.data[dst + j] = out.data[dst + j] + a * other.data[lhs + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot is not strictly
/// positive; callers that want jitter escalation wrap this.
pub fn cholesky_lower<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky needs a square matrix");
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= T::zero() || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite {
                        eigenvalue: s.as_f64(),
                        floor: 0.0,
                    });
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve `L x = b` for lower-triangular `L`.
pub fn solve_lower<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s = s - l.get(i, k) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Solve `L^T x = b` for lower-triangular `L`.
pub fn solve_lower_transpose<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s = s - l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Solve `L L^T X = B` column by column for a matrix right-hand side.
pub fn cholesky_solve_matrix<T: Scalar>(l: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    assert_eq!(n, b.rows(), "rhs row count mismatch");
    let d = b.cols();
    let mut out = Matrix::zeros(n, d);
    let mut col = vec![T::zero(); n];
    for j in 0..d {
        for i in 0..n {
            col[i] = b.get(i, j);
        }
        let y = solve_lower(l, &col);
        let x = solve_lower_transpose(l, &y);
        for i in 0..n {
            out.set(i, j, x[i]);
        }
    }
    out
}

/// Householder QR; returns `(Q, R)` with `Q` orthogonal (rows x rows) and
/// `R` upper triangular.
pub fn qr<T: Scalar>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let n = a.rows();
    let m = a.cols();
    let mut r = a.clone();
    let mut q = Matrix::identity(n);
    let steps = m.min(n.saturating_sub(1));
    let mut v = vec![T::zero(); n];
    for k in 0..steps {
        // Householder vector for column k below the diagonal.
        let mut normx = T::zero();
        for i in k..n {
            let x = r.get(i, k);
            normx = normx + x * x;
        }
        normx = normx.sqrt();
        if normx == T::zero() {
            continue;
        }
        let alpha = if r.get(k, k) > T::zero() { -normx } else { normx };
        let mut vnorm2 = T::zero();
        for i in k..n {
            let mut vi = r.get(i, k);
            if i == k {
                vi = vi - alpha;
            }
            v[i] = vi;
            vnorm2 = vnorm2 + vi * vi;
        }
        if vnorm2 == T::zero() {
            continue;
        }
        let two = cast::<T>(2.0);
        // Apply the reflector to R.
        for j in k..m {
            let mut s = T::zero();
            for i in k..n {
                s = s + v[i] * r.get(i, j);
            }
            let t = two * s / vnorm2;
            for i in k..n {
                let val = r.get(i, j) - t * v[i];
                r.set(i, j, val);
            }
        }
        // Accumulate into Q (apply reflector on the right of Q).
        for i in 0..n {
            let mut s = T::zero();
            for j in k..n {
                s = s + q.get(i, j) * v[j];
            }
            let t = two * s / vnorm2;
            for j in k..n {
                let val = q.get(i, j) - t * v[j];
                q.set(i, j, val);
            }
        }
    }
    (q, r)
}

/// Orthogonal matrix drawn from the Haar measure on O(m): QR of a Gaussian
/// matrix with the R-diagonal sign correction.
pub fn haar_orthogonal<T: Scalar, R: Rng + ?Sized>(m: usize, rng: &mut R) -> Matrix<T> {
    let mut g: Matrix<T> = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let z: f64 = StandardNormal.sample(rng);
            g.set(i, j, cast(z));
        }
    }
    let (mut q, r) = qr(&g);
    for j in 0..m {
        if r.get(j, j) < T::zero() {
            for i in 0..m {
                let v = q.get(i, j);
                q.set(i, j, -v);
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn matmul_identity() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let i = Matrix::identity(2);
        assert_eq!(a.matmul(&i), a);
        assert_eq!(i.matmul(&a), a);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Matrix::from_rows(&[
            vec![4.0, 2.0, 0.6],
            vec![2.0, 5.0, 1.0],
            vec![0.6, 1.0, 3.0],
        ])
        .unwrap();
        let l = cholesky_lower(&a).unwrap();
        let rec = l.matmul(&l.transpose());
        assert!(max_abs_diff(&a, &rec) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky_lower(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn triangular_solves_invert_cholesky() {
        let a = Matrix::from_rows(&[
            vec![6.0, 2.0, 1.0],
            vec![2.0, 5.0, 2.0],
            vec![1.0, 2.0, 4.0],
        ])
        .unwrap();
        let l = cholesky_lower(&a).unwrap();
        let b = vec![1.0f64, -2.0, 3.0];
        let y = solve_lower(&l, &b);
        let x = solve_lower_transpose(&l, &y);
        let back = a.matvec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn qr_orthogonality_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 5;
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, rng.random_range(-1.0..1.0));
                }
            }
            let (q, r) = qr(&a);
            let qtq = q.transpose().matmul(&q);
            assert!(max_abs_diff(&qtq, &Matrix::identity(n)) < 1e-12);
            let rec = q.matmul(&r);
            assert!(max_abs_diff(&rec, &a) < 1e-12);
        }
    }

    #[test]
    fn haar_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q: Matrix<f64> = haar_orthogonal(6, &mut rng);
        let qtq = q.transpose().matmul(&q);
        assert!(max_abs_diff(&qtq, &Matrix::identity(6)) < 1e-12);
    }
}
