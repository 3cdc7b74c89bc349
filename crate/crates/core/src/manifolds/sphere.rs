//! Unit sphere `S^{d-1}` with the arc-length metric.
//!
//! The squared geodesic distance is `arccos(<z, y>)^2`. Its gradient in
//! the tangent space at `y` is `-2 arccos(u)/sqrt(1-u^2) * (z - u y)` with
//! `u = <z, y>`; the ratio has a removable singularity at `u = 1` (limit 1)
//! and blows up at the cut locus `u = -1`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cast, Scalar};

use super::{Point, SpherePoint, CUT_GUARD, SINGULAR_TOL, SPHERE_NORM_TOL};

fn clamp_unit<T: Scalar>(u: T) -> T {
    u.max(-T::one()).min(T::one())
}

pub fn loss<T: Scalar>(y: &[T], z: &[T]) -> T {
    let u = clamp_unit(linalg::dot(z, y));
    let theta = u.acos();
    theta * theta
}

/// `arccos(u) / sqrt(1 - u^2)` evaluated stably near `u = 1`.
fn acos_ratio<T: Scalar>(u: T) -> T {
    let s = T::one() - u;
    if s < cast(1e-9) {
        // theta/sin(theta) = 1 + s/3 + O(s^2) for u = 1 - s.
        T::one() + s / cast(3.0)
    } else {
        u.acos() / (s * (T::one() + u)).sqrt()
    }
}

/// Accumulate the Riemannian gradient of `sum_i alpha_i arccos(<z_i,y>)^2`
/// over anchor coordinate slices. Shared with the simplex, which evaluates
/// it in the sphere chart.
pub(super) fn grad_terms<'a, T: Scalar>(
    y: &[T],
    anchors: impl Iterator<Item = &'a [T]>,
    alpha: &[T],
) -> Result<Vec<T>> {
    let cut = cast::<T>(CUT_GUARD);
    let singular = cast::<T>(SINGULAR_TOL);
    let two = cast::<T>(2.0);
    let mut g = vec![T::zero(); y.len()];
    for (i, (z, &a)) in anchors.zip(alpha).enumerate() {
        let u = clamp_unit(linalg::dot(z, y));
        if u <= -T::one() + cut {
            return Err(Error::CutLocus { index: i });
        }
        if T::one() - u <= singular {
            // Coincident anchor: the term's gradient vanishes with the
            // distance.
            continue;
        }
        let w = -two * a * acos_ratio(u);
        for (gj, (&zj, &yj)) in g.iter_mut().zip(z.iter().zip(y)) {
            *gj = *gj + w * (zj - u * yj);
        }
    }
    // Re-project: individual terms are tangent only up to rounding.
    let yg = linalg::dot(y, &g);
    for (gj, &yj) in g.iter_mut().zip(y) {
        *gj = *gj - yg * yj;
    }
    Ok(g)
}

pub fn grad<T: Scalar>(y: &SpherePoint<T>, anchors: &[Point<T>], alpha: &[T]) -> Result<Vec<T>> {
    grad_terms(
        y.coords(),
        anchors.iter().map(|z| {
            let Point::Sphere(zp) = z else { unreachable!() };
            zp.coords()
        }),
        alpha,
    )
}

/// Projection retraction `(y + v) / ||y + v||`.
pub fn retract<T: Scalar>(y: &SpherePoint<T>, v: &[T]) -> Result<SpherePoint<T>> {
    let w: Vec<T> = y.coords().iter().zip(v).map(|(&a, &b)| a + b).collect();
    let n = linalg::norm(&w);
    if !n.is_finite() || n < cast(1e-8) {
        return Err(Error::DegenerateStep("sphere retraction hit the origin"));
    }
    SpherePoint::new(w.into_iter().map(|x| x / n).collect())
}

pub fn project<T: Scalar>(p: &[T]) -> Result<SpherePoint<T>> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sphere projection input"));
    }
    let n = linalg::norm(p);
    if n == T::zero() {
        return Err(Error::invalid(
            "sphere projection",
            "zero vector has no direction",
        ));
    }
    if (n - T::one()).abs() <= cast(SPHERE_NORM_TOL) {
        // Already on the sphere; fix it exactly so projection is idempotent.
        return Ok(SpherePoint {
            coords: p.to_vec(),
        });
    }
    SpherePoint::new(p.iter().map(|&x| x / n).collect())
}

pub fn random_point<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SpherePoint<T> {
    loop {
        let g = super::euclidean::gaussian_vec::<T, R>(dim, rng);
        let n = linalg::norm(&g);
        if n > cast(1e-6) {
            return SpherePoint {
                coords: g.into_iter().map(|x| x / n).collect(),
            };
        }
    }
}

pub fn random_tangent<T: Scalar, R: Rng + ?Sized>(
    y: &SpherePoint<T>,
    rng: &mut R,
) -> Vec<T> {
    let g = super::euclidean::gaussian_vec::<T, R>(y.dim(), rng);
    project_to_tangent(y.coords(), &g)
}

pub(super) fn project_to_tangent<T: Scalar>(y: &[T], g: &[T]) -> Vec<T> {
    let gy = linalg::dot(g, y);
    g.iter().zip(y).map(|(&gi, &yi)| gi - gy * yi).collect()
}
