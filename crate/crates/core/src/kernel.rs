//! Gaussian-kernel Gram assembly and the ridge score function
//! `alpha(x) = (K + n*lambda*I)^{-1} K_x`.
//!
//! The regularized Gram matrix is factorized once (Cholesky with jitter
//! escalation); scores are two triangular solves per query. The explicit
//! inverse is never formed.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{cast, Scalar};

/// Training inputs: `n` rows of `p` finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMatrix<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> InputMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("input matrix", "need at least one sample"));
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::invalid("input matrix", "inputs must have dimension >= 1"));
        }
        for row in &rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("input matrix row"));
            }
        }
        Ok(InputMatrix { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn subset(&self, idx: &[usize]) -> InputMatrix<T> {
        InputMatrix {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// `exp(-||x - x'||^2 / (2 sigma^2))`.
pub fn gaussian_kernel<T: Scalar>(x: &[T], y: &[T], sigma: T) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if sigma <= T::zero() {
        return Err(Error::invalid("kernel bandwidth", "sigma must be positive"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel input"));
    }
    let two = cast::<T>(2.0);
    let d2 = linalg::squared_distance(x, y);
    Ok((-d2 / (two * sigma * sigma)).exp())
}

/// Fitted ridge score model: stores the training inputs, the bandwidth and
/// regularizer, and the lower Cholesky factor of `K + n*lambda*I` (plus any
/// jitter that was needed).
#[derive(Debug, Clone)]
pub struct ScoreModel<T> {
    inputs: InputMatrix<T>,
    sigma: T,
    lambda: T,
    factor: Matrix<T>,
    jitter: T,
}

impl<T: Scalar> ScoreModel<T> {
    pub fn n(&self) -> usize {
        self.inputs.n()
    }

    pub fn p(&self) -> usize {
        self.inputs.p()
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn inputs(&self) -> &InputMatrix<T> {
        &self.inputs
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.factor
    }

    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Kernel evaluations of `x` against every training input.
    pub fn kernel_vector(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x.len(),
            });
        }
        self.inputs
            .rows()
            .iter()
            .map(|r| gaussian_kernel(r, x, self.sigma))
            .collect()
    }
}

/// Assemble the Gaussian Gram matrix and factorize `K + n*lambda*I`.
///
/// Jitter escalation: try no jitter first, then `1e-12*n` growing by
/// factors of 10 up to `1e-6*n`; if everything fails the error reports the
/// final jitter tried.
pub fn fit_scores<T: Scalar>(inputs: InputMatrix<T>, sigma: T, lambda: T) -> Result<ScoreModel<T>> {
    if sigma <= T::zero() {
        return Err(Error::invalid("kernel bandwidth", "sigma must be positive"));
    }
    if lambda <= T::zero() {
        return Err(Error::invalid("regularizer", "lambda must be positive"));
    }
    let n = inputs.n();
    let nf = cast::<T>(n as f64);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let k = gaussian_kernel(inputs.row(i), inputs.row(j), sigma)?;
            m.set(i, j, k);
            m.set(j, i, k);
        }
        let d = m.get(i, i) + nf * lambda;
        m.set(i, i, d);
    }

    let mut jitters = vec![0.0f64];
    let mut j = 1e-12 * n as f64;
    while j <= 1e-6 * n as f64 * (1.0 + 1e-9) {
        jitters.push(j);
        j *= 10.0;
    }

    let mut last = 0.0;
    for (step, &jit) in jitters.iter().enumerate() {
        last = jit;
        let trial = if step == 0 {
            m.clone()
        } else {
            let mut t = m.clone();
            for i in 0..n {
                t.set(i, i, t.get(i, i) + cast(jit));
            }
            t
        };
        if let Ok(factor) = linalg::cholesky_lower(&trial) {
            return Ok(ScoreModel {
                inputs,
                sigma,
                lambda,
                factor,
                jitter: cast(jit),
            });
        }
    }
    Err(Error::IllConditioned { final_jitter: last })
}

/// Ridge scores `alpha(x)` via two triangular solves against `K_x`.
/// Entries are unconstrained in sign.
pub fn scores<T: Scalar>(model: &ScoreModel<T>, x: &[T]) -> Result<Vec<T>> {
    let kx = model.kernel_vector(x)?;
    let w = linalg::solve_lower(&model.factor, &kx);
    Ok(linalg::solve_lower_transpose(&model.factor, &w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_inputs(n: usize, p: usize, rng: &mut ChaCha8Rng) -> InputMatrix<f64> {
        InputMatrix::new(
            (0..n)
                .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Gauss-Jordan inverse, used as an independent oracle.
    fn dense_inverse(a: &Matrix<f64>) -> Matrix<f64> {
        let n = a.rows();
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, a.get(i, j));
            }
            aug.set(i, n + i, 1.0);
        }
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if aug.get(r, col).abs() > aug.get(piv, col).abs() {
                    piv = r;
                }
            }
            if piv != col {
                for j in 0..2 * n {
                    let tmp = aug.get(col, j);
                    aug.set(col, j, aug.get(piv, j));
                    aug.set(piv, j, tmp);
                }
            }
            let d = aug.get(col, col);
            for j in 0..2 * n {
                aug.set(col, j, aug.get(col, j) / d);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = aug.get(r, col);
                if f == 0.0 {
                    continue;
                }
                for j in 0..2 * n {
                    aug.set(r, j, aug.get(r, j) - f * aug.get(col, j));
                }
            }
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        inv
    }

    fn gram(inputs: &InputMatrix<f64>, sigma: f64, lambda: f64) -> Matrix<f64> {
        let n = inputs.n();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, gaussian_kernel(inputs.row(i), inputs.row(j), sigma).unwrap());
            }
            m.set(i, i, m.get(i, i) + n as f64 * lambda);
        }
        m
    }

    #[test]
    fn kernel_is_one_at_zero_distance() {
        let x = vec![0.3, -0.7];
        assert_eq!(gaussian_kernel(&x, &x, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn kernel_half_at_hand_derived_distance() {
        // ||x - x'||^2 = 2 sigma^2 ln 2 gives k = 1/2.
        let sigma = 1.7;
        let x = vec![0.0];
        let y = vec![sigma * (2.0 * 2f64.ln()).sqrt()];
        assert!((gaussian_kernel(&x, &y, sigma).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn kernel_flat_limit() {
        let x = vec![0.0f64, 0.0];
        let y = vec![1.0, 1.0];
        let k = gaussian_kernel(&x, &y, 1e8).unwrap();
        assert!((k - 1.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_rejects_bad_input() {
        assert!(gaussian_kernel(&[0.0], &[0.0, 1.0], 1.0).is_err());
        assert!(gaussian_kernel(&[f64::NAN], &[0.0], 1.0).is_err());
        assert!(gaussian_kernel(&[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn single_sample_system_is_scalar() {
        let inputs = InputMatrix::<f64>::new(vec![vec![0.4]]).unwrap();
        let lambda = 0.25;
        let model = fit_scores(inputs, 1.0, lambda).unwrap();
        // The factored system is the scalar 1 + lambda.
        let l = model.factor().get(0, 0);
        assert!((l * l - (1.0 + lambda)).abs() < 1e-14);
        let alpha = scores(&model, &[0.4]).unwrap();
        assert!((alpha[0] - 1.0 / (1.0 + lambda)).abs() < 1e-14);
    }

    #[test]
    fn huge_lambda_scores_approach_kx_over_nlambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inputs = random_inputs(5, 2, &mut rng);
        let lambda = 1e6;
        let sigma = 1.0;
        let model = fit_scores(inputs.clone(), sigma, lambda).unwrap();
        let x = vec![0.1, -0.2];
        let alpha = scores(&model, &x).unwrap();
        // Oracle: explicit inversion of the 5x5 system.
        let inv = dense_inverse(&gram(&inputs, sigma, lambda));
        let kx: Vec<f64> = inputs
            .rows()
            .iter()
            .map(|r| gaussian_kernel(r, &x, sigma).unwrap())
            .collect();
        let exact = inv.matvec(&kx);
        for ((a, e), k) in alpha.iter().zip(&exact).zip(&kx) {
            assert!((a - e).abs() <= 1e-10 * e.abs().max(1e-30));
            let approx = k / (5.0 * lambda);
            assert!((a - approx).abs() <= 1e-4 * approx.abs());
        }
    }

    #[test]
    fn factor_reconstructs_regularized_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inputs = random_inputs(10, 3, &mut rng);
        let sigma = 0.8;
        let lambda = 1e-3;
        let model = fit_scores(inputs.clone(), sigma, lambda).unwrap();
        let rec = model.factor().matmul(&model.factor().transpose());
        let m = gram(&inputs, sigma, lambda);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..10 {
            for j in 0..10 {
                num += (rec.get(i, j) - m.get(i, j)).powi(2);
                den += m.get(i, j).powi(2);
            }
        }
        assert!(num.sqrt() <= 1e-8 * den.sqrt());
    }

    #[test]
    fn scores_match_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let n = rng.random_range(2..=8);
            let inputs = random_inputs(n, 3, &mut rng);
            let sigma = rng.random_range(0.5..2.0);
            let lambda = 10f64.powf(rng.random_range(-4.0..0.0));
            let model = fit_scores(inputs.clone(), sigma, lambda).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let alpha = scores(&model, &x).unwrap();
            let inv = dense_inverse(&gram(&inputs, sigma, lambda));
            let kx: Vec<f64> = inputs
                .rows()
                .iter()
                .map(|r| gaussian_kernel(r, &x, sigma).unwrap())
                .collect();
            let exact = inv.matvec(&kx);
            for (a, e) in alpha.iter().zip(&exact) {
                assert!((a - e).abs() <= 1e-10 * (1.0 + e.abs()));
            }
        }
    }

    #[test]
    fn far_query_has_negligible_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let inputs = random_inputs(6, 2, &mut rng);
        let model = fit_scores(inputs, 1e-3, 1e-2).unwrap();
        let alpha = scores(&model, &[50.0, -50.0]).unwrap();
        let norm: f64 = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(norm <= 1e-8);
    }

    #[test]
    fn gram_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let n = rng.random_range(2..=12);
            let inputs = random_inputs(n, 4, &mut rng);
            let mut k = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    k.set(
                        i,
                        j,
                        gaussian_kernel(inputs.row(i), inputs.row(j), 1.0).unwrap(),
                    );
                }
            }
            let sym = crate::matfun::SymMat::from_matrix(&k).unwrap();
            let eigs = crate::matfun::sym_eigvals(&sym).unwrap();
            assert!(eigs[eigs.len() - 1] >= -1e-10);
        }
    }

    #[test]
    fn scores_are_deterministic_in_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let inputs = random_inputs(12, 3, &mut rng);
        let model = fit_scores(inputs, 1.2, 1e-3).unwrap();
        let x = vec![0.3, 0.1, -0.5];
        let a = scores(&model, &x).unwrap();
        let b = scores(&model, &x).unwrap();
        assert_eq!(a, b);
    }
}
