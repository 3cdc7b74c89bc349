//! Synthetic dataset generators, all deterministic given the caller's rng.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::estimator::Dataset;
use crate::kernel::InputMatrix;
use crate::linalg::{self, Matrix};
use crate::manifolds::{ManifoldTag, Point, SimplexPoint, SpdPoint, SpherePoint};
use crate::matfun::EigPair;
use crate::scalar::{cast, Scalar};

/// Eigenvalue floor for synthetic SPD inputs. Sampling eigenvalues all the
/// way down to zero makes the inverse target unbounded; the floor keeps
/// desk-scale targets numerically sane.
pub const INPUT_EIG_FLOOR: f64 = 0.1;

/// Orthogonal matrix from the Haar measure on O(m).
pub fn haar_orthogonal<T: Scalar, R: Rng + ?Sized>(m: usize, rng: &mut R) -> Matrix<T> {
    linalg::haar_orthogonal(m, rng)
}

/// SPD-inverse regression task: inputs are flattened SPD matrices with
/// Haar eigenvectors and Uniform[0.1, 10] eigenvalues; the target is the
/// exact matrix inverse, assembled from the same eigenvectors.
pub fn gen_spd_inverse_dataset<T: Scalar, R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<Dataset<T>> {
    let tag = ManifoldTag::Spd { dim: m };
    let mut rows = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    for _ in 0..n {
        let q = haar_orthogonal::<T, R>(m, rng);
        let eigs: Vec<T> = (0..m)
            .map(|_| cast(rng.random_range(INPUT_EIG_FLOOR..10.0)))
            .collect();
        let inv_eigs: Vec<T> = eigs.iter().map(|&l| T::one() / l).collect();
        let pair = EigPair {
            eigvecs: q,
            eigvals: eigs.clone(),
        };
        let x = pair.assemble(&eigs);
        let y = pair.assemble(&inv_eigs);
        rows.push(x.values().to_vec());
        outputs.push(Point::Spd(SpdPoint::new(y)?));
    }
    Dataset::new(InputMatrix::new(rows)?, outputs, tag)
}

/// Orientation-field toy task on the circle: inputs are planar positions
/// in the unit square, the output angle is a fixed smooth function of the
/// position.
pub fn gen_sphere_toy_dataset<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<Dataset<T>> {
    let tag = ManifoldTag::Sphere { dim: 2 };
    let mut rows = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    let tau = std::f64::consts::TAU;
    for _ in 0..n {
        let x0: f64 = rng.random_range(0.0..1.0);
        let x1: f64 = rng.random_range(0.0..1.0);
        let theta = 0.9 * (tau * x0).sin() + 0.7 * (tau * x1).cos() + 0.4 * x0 * x1;
        rows.push(vec![cast(x0), cast(x1)]);
        outputs.push(Point::Sphere(SpherePoint::new(vec![
            cast(theta.cos()),
            cast(theta.sin()),
        ])?));
    }
    Dataset::new(InputMatrix::new(rows)?, outputs, tag)
}

/// Multilabel-style task on the simplex: a random smooth map (affine plus
/// a sine warp, parameters drawn from the rng) from Gaussian inputs
/// through a softmax into the epsilon interior.
pub fn gen_simplex_dataset<T: Scalar, R: Rng + ?Sized>(
    m: usize,
    input_dim: usize,
    eps: T,
    n: usize,
    rng: &mut R,
) -> Result<Dataset<T>> {
    let tag = ManifoldTag::Simplex { dim: m, eps };
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..input_dim).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    let b: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..input_dim).map(|_| StandardNormal.sample(rng)).collect();
        let logits: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(row, bi)| {
                let lin: f64 = row.iter().zip(&x).map(|(w, xi)| w * xi).sum();
                lin + bi + 0.5 * lin.sin()
            })
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let probs: Vec<T> = exps.iter().map(|&e| cast(e / sum)).collect();
        let point = crate::manifolds::project_ambient(&tag, &probs)?;
        rows.push(x.into_iter().map(cast).collect());
        outputs.push(point);
    }
    Dataset::new(InputMatrix::new(rows)?, outputs, tag)
}

/// Binary relevance mask used by the ranking metric: labels are the
/// outcomes carrying at least the uniform share of probability mass.
pub fn labels_from_simplex<T: Scalar>(p: &SimplexPoint<T>) -> Vec<bool> {
    let uniform = T::one() / cast::<T>(p.dim() as f64);
    p.probs().iter().map(|&x| x >= uniform).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_m1_hits_both_signs() {
        let mut plus = 0usize;
        let mut minus = 0usize;
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q: Matrix<f64> = haar_orthogonal(1, &mut rng);
            let v = q.get(0, 0);
            assert!((v.abs() - 1.0).abs() < 1e-12);
            if v > 0.0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
        assert!(plus >= 60 && minus >= 60, "plus={plus} minus={minus}");
    }

    #[test]
    fn haar_orthogonality_over_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let q: Matrix<f64> = haar_orthogonal(6, &mut rng);
            let qtq = q.transpose().matmul(&q);
            for i in 0..6 {
                for j in 0..6 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq.get(i, j) - target).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn haar_first_coordinate_mean_is_zero() {
        // Monte-Carlo rotation-invariance check: E[Q_00] = 0, Var = 1/3.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 10_000usize;
        let mut sum = 0.0;
        for _ in 0..n {
            let q: Matrix<f64> = haar_orthogonal(3, &mut rng);
            sum += q.get(0, 0);
        }
        let mean = sum / n as f64;
        let stderr = (1.0f64 / 3.0).sqrt() / (n as f64).sqrt();
        assert!(mean.abs() <= 3.0 * stderr, "mean={mean} stderr={stderr}");
    }

    #[test]
    fn spd_inverse_outputs_invert_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Dataset<f64> = gen_spd_inverse_dataset(4, 10, &mut rng).unwrap();
        for i in 0..data.n() {
            let x = Matrix::from_vec(4, 4, data.inputs().row(i).to_vec()).unwrap();
            let Point::Spd(y) = &data.outputs()[i] else { unreachable!() };
            let prod = x.matmul(&y.mat().to_matrix());
            for r in 0..4 {
                for c in 0..4 {
                    let target = if r == c { 1.0 } else { 0.0 };
                    assert!((prod.get(r, c) - target).abs() <= 1e-8);
                }
            }
            // Input eigenvalues live in [0.1, 10].
            let sym = crate::matfun::SymMat::new(4, data.inputs().row(i).to_vec()).unwrap();
            let eigs = crate::matfun::sym_eigvals(&sym).unwrap();
            assert!(eigs[0] <= 10.0 + 1e-9);
            assert!(eigs[3] >= INPUT_EIG_FLOOR - 1e-9);
        }
    }

    #[test]
    fn spd_inverse_scalar_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Dataset<f64> = gen_spd_inverse_dataset(1, 5, &mut rng).unwrap();
        for i in 0..5 {
            let u = data.inputs().row(i)[0];
            let Point::Spd(y) = &data.outputs()[i] else { unreachable!() };
            assert!((y.mat().get(0, 0) - 1.0 / u).abs() <= 1e-12);
        }
    }

    #[test]
    fn generated_datasets_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sphere: Dataset<f64> = gen_sphere_toy_dataset(20, &mut rng).unwrap();
        for p in sphere.outputs() {
            p.validate_on(sphere.tag()).unwrap();
        }
        let simplex: Dataset<f64> = gen_simplex_dataset(4, 3, 1e-5, 20, &mut rng).unwrap();
        for p in simplex.outputs() {
            p.validate_on(simplex.tag()).unwrap();
        }
    }
}
