//! Spectral functions of symmetric matrices: eigendecomposition, square
//! root, inverse square root, logarithm and exponential.
//!
//! The eigensolver is a self-contained Householder tridiagonalization
//! followed by implicit-shift QL iteration (the classic EISPACK
//! tred2/tql2 pair), deterministic given identical input bits.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{cast, Scalar};

/// Eigenvalues at or below this floor are treated as not positive definite
/// by the `sqrt`, `inv_sqrt` and `log` spectral functions.
pub const EIGEN_FLOOR: f64 = 1e-12;

const MAX_QL_ITERATIONS: usize = 50;

/// Dense symmetric matrix. Construction symmetrizes the input as
/// `(A + A^T)/2`, so `get(i, j) == get(j, i)` holds exactly afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMat<T> {
    /// Build from row-major entries, symmetrizing.
    pub fn new(dim: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("symmetric matrix", "dimension must be >= 1"));
        }
        if values.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix entries"));
        }
        let mut data = values;
        let half = cast::<T>(0.5);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let m = (data[i * dim + j] + data[j * dim + i]) * half;
                data[i * dim + j] = m;
                data[j * dim + i] = m;
            }
        }
        Ok(SymMat { dim, data })
    }

    pub fn from_matrix(m: &Matrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        SymMat::new(m.rows(), m.data().to_vec())
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = T::one();
        }
        SymMat { dim, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut data = vec![T::zero(); dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            data[i * dim + i] = v;
        }
        SymMat { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMat {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Row-major entries.
    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        Matrix::from_vec(self.dim, self.dim, self.data.clone()).expect("square data")
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    pub fn scale(&self, s: T) -> SymMat<T> {
        SymMat {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMat<T>) -> SymMat<T> {
        debug_assert_eq!(self.dim, other.dim);
        SymMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMat<T>) -> SymMat<T> {
        debug_assert_eq!(self.dim, other.dim);
        SymMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// Frobenius inner product `tr(A B)` (both symmetric).
    pub fn frobenius_inner(&self, other: &SymMat<T>) -> T {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Congruence `B * self * B` for symmetric `B`; the result is symmetric.
    pub fn sandwich(&self, b: &SymMat<T>) -> SymMat<T> {
        debug_assert_eq!(self.dim, b.dim);
        let bm = b.to_matrix();
        let prod = bm.matmul(&self.to_matrix()).matmul(&bm);
        // Symmetrize to wash out the last bits of floating-point drift.
        SymMat::new(self.dim, prod.data().to_vec()).expect("finite sandwich product")
    }
}

/// Eigendecomposition of a symmetric matrix: `A = Q diag(eigvals) Q^T`
/// with orthogonal `Q` (eigenvectors in columns) and eigenvalues sorted
/// descending.
#[derive(Debug, Clone)]
pub struct EigPair<T> {
    pub eigvecs: Matrix<T>,
    pub eigvals: Vec<T>,
}

impl<T: Scalar> EigPair<T> {
    /// Reassemble `Q f(Lambda) Q^T` for mapped eigenvalues.
    pub fn assemble(&self, mapped: &[T]) -> SymMat<T> {
        let n = self.eigvals.len();
        debug_assert_eq!(mapped.len(), n);
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = T::zero();
                for (k, &f) in mapped.iter().enumerate() {
                    s = s + self.eigvecs.get(i, k) * f * self.eigvecs.get(j, k);
                }
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        SymMat { dim: n, data }
    }
}

/// Symmetric eigendecomposition with eigenvectors.
pub fn sym_eig<T: Scalar>(a: &SymMat<T>) -> Result<EigPair<T>> {
    let n = a.dim();
    let mut v = a.to_matrix();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut v))?;
    sort_descending(&mut d, Some(&mut v));
    Ok(EigPair {
        eigvecs: v,
        eigvals: d,
    })
}

/// Eigenvalues only (descending); skips eigenvector accumulation in the QL
/// sweep, which is the dominant cost for the loss evaluations.
pub fn sym_eigvals<T: Scalar>(a: &SymMat<T>) -> Result<Vec<T>> {
    let n = a.dim();
    let mut v = a.to_matrix();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, None)?;
    sort_descending(&mut d, None);
    Ok(d)
}

/// Scalar function applied to the spectrum of an SPD (or, for `Exp`, any
/// symmetric) matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdFn {
    Sqrt,
    InvSqrt,
    Log,
    Exp,
}

/// `Q f(Lambda) Q^T` for the eigendecomposition `A = Q Lambda Q^T`.
///
/// `Sqrt`, `InvSqrt` and `Log` require every eigenvalue to exceed
/// [`EIGEN_FLOOR`]; `Exp` accepts any symmetric input.
pub fn spd_fn<T: Scalar>(a: &SymMat<T>, f: SpdFn) -> Result<SymMat<T>> {
    let eig = sym_eig(a)?;
    let mapped = map_eigvals(&eig.eigvals, f)?;
    Ok(eig.assemble(&mapped))
}

pub(crate) fn map_eigvals<T: Scalar>(eigvals: &[T], f: SpdFn) -> Result<Vec<T>> {
    let floor = cast::<T>(EIGEN_FLOOR);
    if f != SpdFn::Exp {
        for &l in eigvals {
            if l <= floor {
                return Err(Error::NotPositiveDefinite {
                    eigenvalue: l.as_f64(),
                    floor: EIGEN_FLOOR,
                });
            }
        }
    }
    Ok(eigvals
        .iter()
        .map(|&l| match f {
            SpdFn::Sqrt => l.sqrt(),
            SpdFn::InvSqrt => l.sqrt().recip(),
            SpdFn::Log => l.ln(),
            SpdFn::Exp => l.exp(),
        })
        .collect())
}

fn sort_descending<T: Scalar>(d: &mut [T], mut v: Option<&mut Matrix<T>>) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().take(n).skip(i + 1) {
            if dj > p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(vm) = v.as_deref_mut() {
                for r in 0..n {
                    let tmp = vm.get(r, i);
                    vm.set(r, i, vm.get(r, k));
                    vm.set(r, k, tmp);
                }
            }
        }
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form, with
/// the accumulated orthogonal transform left in `v` (EISPACK tred2).
fn tred2<T: Scalar>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.rows();
    for (i, di) in d.iter_mut().enumerate().take(n) {
        *di = v.get(n - 1, i);
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
                v.set(j, i, T::zero());
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }

            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in j + 1..i {
                    g = g + v.get(k, j) * d[k];
                    e[k] = e[k] + v.get(k, j) * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, T::one());
        let h = d[i + 1];
        if h != T::zero() {
            for (k, dk) in d.iter_mut().enumerate().take(i + 1) {
                *dk = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v.get(k, i + 1) * v.get(k, j);
                }
                for (k, dk) in d.iter().enumerate().take(i + 1) {
                    let val = v.get(k, j) - g * *dk;
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, T::zero());
        }
    }
    for (j, dj) in d.iter_mut().enumerate().take(n) {
        *dj = v.get(n - 1, j);
        v.set(n - 1, j, T::zero());
    }
    v.set(n - 1, n - 1, T::one());
    e[0] = T::zero();
}

/// Implicit-shift QL iteration on a tridiagonal matrix (EISPACK tql2).
/// When `v` is `Some`, rotations are accumulated into the eigenvector
/// matrix; otherwise only eigenvalues are computed.
fn tql2<T: Scalar>(d: &mut [T], e: &mut [T], mut v: Option<&mut Matrix<T>>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let eps = T::epsilon();
    let two = cast::<T>(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());

        let mut m = l;
        while m < n {
            if e[m].abs() <= tst1 * eps {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::EigenConvergence {
                        index: l,
                        iterations: MAX_QL_ITERATIONS,
                    });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gi = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gi;
                    d[i + 1] = h + s * (c * gi + s * d[i]);

                    if let Some(vm) = v.as_deref_mut() {
                        for k in 0..n {
                            h = vm.get(k, i + 1);
                            vm.set(k, i + 1, s * vm.get(k, i) + c * h);
                            vm.set(k, i, c * vm.get(k, i) - s * h);
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= tst1 * eps {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> SymMat<f64> {
        let mut data = vec![0.0; dim * dim];
        for v in &mut data {
            *v = rng.random_range(-2.0..2.0);
        }
        SymMat::new(dim, data).unwrap()
    }

    fn random_spd(dim: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SymMat<f64> {
        let q: Matrix<f64> = crate::linalg::haar_orthogonal(dim, rng);
        let pair = EigPair {
            eigvecs: q,
            eigvals: vec![0.0; dim],
        };
        let eigs: Vec<f64> = (0..dim)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..1.0);
                lo * (hi / lo).powf(u)
            })
            .collect();
        pair.assemble(&eigs)
    }

    fn rel_frob_err(a: &SymMat<f64>, b: &SymMat<f64>) -> f64 {
        a.sub(b).frobenius_norm() / b.frobenius_norm().max(1e-300)
    }

    #[test]
    fn identity_eigenvalues() {
        let pair = sym_eig(&SymMat::<f64>::identity(3)).unwrap();
        for l in pair.eigvals {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_case_sorted_descending() {
        let a = SymMat::<f64>::from_diag(&[1.0, 4.0]);
        let pair = sym_eig(&a).unwrap();
        assert!((pair.eigvals[0] - 4.0).abs() < 1e-14);
        assert!((pair.eigvals[1] - 1.0).abs() < 1e-14);
        // Eigenvectors are axis permutations up to sign.
        for col in 0..2 {
            let mut mags: Vec<f64> = (0..2).map(|r| pair.eigvecs.get(r, col).abs()).collect();
            mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(mags[0] < 1e-12 && (mags[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_solved_two_by_two() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors
        // (1,1)/sqrt(2) and (1,-1)/sqrt(2).
        let a = SymMat::<f64>::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let pair = sym_eig(&a).unwrap();
        assert!((pair.eigvals[0] - 3.0).abs() < 1e-12);
        assert!((pair.eigvals[1] - 1.0).abs() < 1e-12);
        let s = 1.0 / 2f64.sqrt();
        let v0 = [pair.eigvecs.get(0, 0), pair.eigvecs.get(1, 0)];
        let v1 = [pair.eigvecs.get(0, 1), pair.eigvecs.get(1, 1)];
        assert!(((v0[0] * s + v0[1] * s).abs() - 1.0).abs() < 1e-12);
        assert!(((v1[0] * s - v1[1] * s).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_invariants_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let dim = rng.random_range(2..=10);
            let a = random_symmetric(dim, &mut rng);
            let pair = sym_eig(&a).unwrap();
            // Orthogonality.
            let qtq = pair.eigvecs.transpose().matmul(&pair.eigvecs);
            let mut worst: f64 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((qtq.get(i, j) - target).abs());
                }
            }
            assert!(worst * (dim as f64).sqrt() <= 1e-10 * dim as f64);
            // Reconstruction.
            let rec = pair.assemble(&pair.eigvals);
            assert!(rel_frob_err(&rec, &a) <= 1e-8);
            // Sorted descending.
            for w in pair.eigvals.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigvals_only_matches_full_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let dim = rng.random_range(2..=8);
            let a = random_symmetric(dim, &mut rng);
            let full = sym_eig(&a).unwrap().eigvals;
            let vals = sym_eigvals(&a).unwrap();
            for (x, y) in full.iter().zip(&vals) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        let z = spd_fn(&SymMat::<f64>::identity(3), SpdFn::Log).unwrap();
        assert!(z.frobenius_norm() < 1e-14);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = spd_fn(&SymMat::<f64>::from_diag(&[4.0, 9.0]), SpdFn::Sqrt).unwrap();
        assert!((r.get(0, 0) - 2.0).abs().max((r.get(1, 1) - 3.0).abs()) < 1e-12);
        assert!(r.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn log_of_hand_solved_matrix() {
        // log([[2,1],[1,2]]) = ln(3)/2 * [[1,1],[1,1]] via the hand-solved
        // eigendecomposition (eigenvalues 3 and 1).
        let a = SymMat::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let l = spd_fn(&a, SpdFn::Log).unwrap();
        let h = 3f64.ln() / 2.0;
        for (i, j, want) in [(0, 0, h), (0, 1, h), (1, 1, h)] {
            assert!((l.get(i, j) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn non_pd_rejected_with_offending_eigenvalue() {
        let a = SymMat::from_diag(&[1.0, -1.0]);
        match spd_fn(&a, SpdFn::Sqrt) {
            Err(Error::NotPositiveDefinite { eigenvalue, floor }) => {
                assert!((eigenvalue + 1.0).abs() < 1e-12);
                assert_eq!(floor, EIGEN_FLOOR);
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
        // Exp accepts indefinite input.
        let e = spd_fn(&a, SpdFn::Exp).unwrap();
        assert!((e.get(0, 0) - 1f64.exp()).abs() < 1e-12);
        assert!((e.get(1, 1) - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn exp_log_involution_over_wide_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let dim = rng.random_range(2..=6);
            let a = random_spd(dim, &mut rng, 1e-6, 1e6);
            let back = spd_fn(&spd_fn(&a, SpdFn::Log).unwrap(), SpdFn::Exp).unwrap();
            assert!(rel_frob_err(&back, &a) <= 1e-8);
        }
    }

    #[test]
    fn sqrt_squares_back_and_inv_sqrt_whitens() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let dim = rng.random_range(2..=10);
            let a = random_spd(dim, &mut rng, 0.05, 20.0);
            let s = spd_fn(&a, SpdFn::Sqrt).unwrap();
            let back = SymMat::from_matrix(&s.to_matrix().matmul(&s.to_matrix())).unwrap();
            assert!(rel_frob_err(&back, &a) <= 1e-8);
            let w = spd_fn(&a, SpdFn::InvSqrt).unwrap();
            let white = a.sandwich(&w);
            let diff = white.sub(&SymMat::identity(dim));
            assert!(diff.frobenius_norm() <= 1e-8);
        }
    }

    #[test]
    fn symmetrization_is_exact() {
        let a = SymMat::new(2, vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(a.get(0, 1), a.get(1, 0));
        assert_eq!(a.get(0, 1), 3.0);
    }
}
