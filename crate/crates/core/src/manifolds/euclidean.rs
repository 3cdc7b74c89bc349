//! Flat space: the baseline geometry used for testing the solvers.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cast, Scalar};

use super::Point;

pub fn loss<T: Scalar>(y: &[T], z: &[T]) -> T {
    linalg::squared_distance(y, z)
}

pub fn grad<T: Scalar>(y: &[T], anchors: &[Point<T>], alpha: &[T]) -> Vec<T> {
    let two = cast::<T>(2.0);
    let mut g = vec![T::zero(); y.len()];
    for (z, &a) in anchors.iter().zip(alpha) {
        let Point::Euclidean(zv) = z else { unreachable!() };
        for (gi, (&yi, &zi)) in g.iter_mut().zip(y.iter().zip(zv)) {
            *gi = *gi + two * a * (yi - zi);
        }
    }
    g
}

pub fn retract<T: Scalar>(y: &[T], v: &[T]) -> Vec<T> {
    y.iter().zip(v).map(|(&a, &b)| a + b).collect()
}

pub fn project<T: Scalar>(p: &[T]) -> Result<Vec<T>> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("euclidean projection input"));
    }
    Ok(p.to_vec())
}

pub fn random_point<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    gaussian_vec(dim, rng)
}

pub fn random_tangent<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    gaussian_vec(dim, rng)
}

pub(super) fn gaussian_vec<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            cast(z)
        })
        .collect()
}
