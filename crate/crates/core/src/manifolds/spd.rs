//! SPD cone with the affine-invariant metric.
//!
//! Squared geodesic distance `||log(Y^{-1/2} Z Y^{-1/2})||_F^2`; the
//! gradient of the weighted objective uses
//! `log(Y^{1/2} Z^{-1} Y^{1/2}) = -log(Y^{-1/2} Z Y^{-1/2})`, so each
//! anchor costs one small symmetric eigendecomposition and no explicit
//! inverse.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matfun::{sym_eig, sym_eigvals, SymMat};
use crate::scalar::{cast, Scalar};

use super::{Point, SpdPoint, SPD_FLOOR};

fn sym_from_ambient<T: Scalar>(dim: usize, ambient: &[T]) -> Result<SymMat<T>> {
    SymMat::new(dim, ambient.to_vec())
}

/// Strictly positive spectrum or bust. Points projected to the SPD floor
/// carry eigenvalues at 1e-12 exactly, and the geodesic loss must remain
/// computable there, so this is a positivity check rather than the
/// spectral-function floor.
fn require_positive<T: Scalar>(eigvals: &[T]) -> Result<()> {
    for &l in eigvals {
        if l <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: l.as_f64(),
                floor: 0.0,
            });
        }
    }
    Ok(())
}

/// Square root and inverse square root from one eigendecomposition.
fn half_powers<T: Scalar>(y: &SymMat<T>) -> Result<(SymMat<T>, SymMat<T>)> {
    let eig = sym_eig(y)?;
    require_positive(&eig.eigvals)?;
    let sqrt: Vec<T> = eig.eigvals.iter().map(|&l| l.sqrt()).collect();
    let inv_sqrt: Vec<T> = sqrt.iter().map(|&s| s.recip()).collect();
    Ok((eig.assemble(&sqrt), eig.assemble(&inv_sqrt)))
}

fn log_squared_eigsum<T: Scalar>(whitened: &SymMat<T>) -> Result<T> {
    let eigs = sym_eigvals(whitened)?;
    require_positive(&eigs)?;
    Ok(eigs.iter().fold(T::zero(), |acc, &l| {
        let ll = l.ln();
        acc + ll * ll
    }))
}

pub fn loss<T: Scalar>(y: &SpdPoint<T>, z: &SpdPoint<T>) -> Result<T> {
    let (_, w) = half_powers(y.mat())?;
    log_squared_eigsum(&z.mat().sandwich(&w))
}

/// `F(Y) = sum_i alpha_i ||log(Y^{-1/2} Z_i Y^{-1/2})||_F^2` with the
/// whitening of `Y` hoisted out of the anchor loop.
pub fn weighted_objective<T: Scalar>(
    y: &SpdPoint<T>,
    anchors: &[Point<T>],
    alpha: &[T],
) -> Result<T> {
    let (_, w) = half_powers(y.mat())?;
    let mut f = T::zero();
    for (z, &a) in anchors.iter().zip(alpha) {
        if a == T::zero() {
            continue;
        }
        let Point::Spd(zp) = z else { unreachable!() };
        f = f + a * log_squared_eigsum(&zp.mat().sandwich(&w))?;
    }
    Ok(f)
}

/// Riemannian gradient `-2 Y^{1/2} (sum_i alpha_i log(Y^{-1/2} Z_i
/// Y^{-1/2})) Y^{1/2}` in ambient (flattened symmetric) coordinates.
pub fn grad<T: Scalar>(y: &SpdPoint<T>, anchors: &[Point<T>], alpha: &[T]) -> Result<Vec<T>> {
    let dim = y.dim();
    let (s, w) = half_powers(y.mat())?;
    let mut acc = SymMat::zeros(dim);
    for (z, &a) in anchors.iter().zip(alpha) {
        if a == T::zero() {
            continue;
        }
        let Point::Spd(zp) = z else { unreachable!() };
        let whitened = zp.mat().sandwich(&w);
        let eig = sym_eig(&whitened)?;
        require_positive(&eig.eigvals)?;
        let logs: Vec<T> = eig.eigvals.iter().map(|&l| l.ln()).collect();
        acc = acc.add(&eig.assemble(&logs).scale(a));
    }
    let g = acc.sandwich(&s).scale(cast(-2.0));
    Ok(g.values().to_vec())
}

/// Exact exponential map `Y^{1/2} exp(Y^{-1/2} V Y^{-1/2}) Y^{1/2}`.
pub fn retract<T: Scalar>(y: &SpdPoint<T>, v: &[T]) -> Result<SpdPoint<T>> {
    let dim = y.dim();
    let vm = sym_from_ambient(dim, v)?;
    let (s, w) = half_powers(y.mat())?;
    let inner = vm.sandwich(&w);
    let eig = sym_eig(&inner)?;
    let exps: Vec<T> = eig.eigvals.iter().map(|&l| l.exp()).collect();
    let e = eig.assemble(&exps);
    let out = e.sandwich(&s);
    if !out.values().iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("spd retraction"));
    }
    // PD by construction: a congruence of a matrix exponential.
    Ok(SpdPoint::new_unchecked(out))
}

/// Symmetrize, clamp eigenvalues below the floor up to the floor,
/// reassemble. Valid points are returned unchanged (after exact
/// symmetrization), which makes the projection idempotent.
pub fn project<T: Scalar>(dim: usize, p: &[T]) -> Result<SpdPoint<T>> {
    let sym = sym_from_ambient(dim, p)?;
    let eig = sym_eig(&sym)?;
    let floor = cast::<T>(SPD_FLOOR);
    if eig.eigvals.iter().all(|&l| l >= floor) {
        return Ok(SpdPoint::new_unchecked(sym));
    }
    let clamped: Vec<T> = eig.eigvals.iter().map(|&l| l.max(floor)).collect();
    Ok(SpdPoint::new_unchecked(eig.assemble(&clamped)))
}

/// Haar eigenvectors with log-uniform eigenvalues in [0.1, 10].
pub fn random_point<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SpdPoint<T> {
    let q = linalg::haar_orthogonal::<T, R>(dim, rng);
    let eigs: Vec<T> = (0..dim)
        .map(|_| {
            let u: f64 = rng.random_range(0.0..1.0);
            cast(0.1 * 100f64.powf(u))
        })
        .collect();
    let pair = crate::matfun::EigPair {
        eigvecs: q,
        eigvals: eigs.clone(),
    };
    SpdPoint::new_unchecked(pair.assemble(&eigs))
}

/// Gaussian symmetric matrix, flattened; every symmetric matrix is tangent.
pub fn random_tangent<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    let g = super::euclidean::gaussian_vec::<T, R>(dim * dim, rng);
    let sym = SymMat::new(dim, g).expect("gaussian entries are finite");
    sym.values().to_vec()
}

/// Affine-invariant inner product `tr(Y^{-1} U Y^{-1} V)` evaluated as
/// `tr((W U W)(W V W))` with `W = Y^{-1/2}`.
pub fn inner<T: Scalar>(y: &SpdPoint<T>, u: &[T], v: &[T]) -> Result<T> {
    let dim = y.dim();
    let (_, w) = half_powers(y.mat())?;
    let mu = sym_from_ambient(dim, u)?.sandwich(&w);
    let mv = sym_from_ambient(dim, v)?.sandwich(&w);
    Ok(mu.frobenius_inner(&mv))
}
