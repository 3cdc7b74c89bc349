//! Epsilon-interior probability simplex under the Fisher information
//! metric.
//!
//! The coordinate-wise square-root map sends the simplex isometrically
//! onto the positive orthant of the sphere, so distance, gradient and
//! retraction are all evaluated in the sphere chart and pulled back.
//! The geodesic convention is `arccos(sum_i sqrt(y_i z_i))` without a
//! leading factor 2; a global rescaling of the loss does not move the
//! weighted minimizer.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

use super::{Point, SimplexPoint, SpherePoint, SIMPLEX_SUM_TOL};

pub fn to_sphere<T: Scalar>(y: &SimplexPoint<T>) -> SpherePoint<T> {
    SpherePoint::new(y.probs().iter().map(|&p| p.sqrt()).collect())
        .expect("sqrt of a probability vector is a unit vector")
}

pub fn from_sphere<T: Scalar>(s: &SpherePoint<T>, eps: T) -> Result<SimplexPoint<T>> {
    if s.coords().iter().any(|&c| c <= T::zero()) {
        return Err(Error::invalid(
            "sphere-to-simplex map",
            "point has a non-positive coordinate",
        ));
    }
    SimplexPoint::new(s.coords().iter().map(|&c| c * c).collect(), eps)
}

pub fn loss<T: Scalar>(y: &SimplexPoint<T>, z: &SimplexPoint<T>) -> T {
    let mut bc = T::zero();
    for (&a, &b) in y.probs().iter().zip(z.probs()) {
        bc = bc + (a * b).sqrt();
    }
    let theta = bc.max(-T::one()).min(T::one()).acos();
    theta * theta
}

/// Push `y` and the anchors through the square-root map, accumulate the
/// sphere gradient, pull back through the inverse differential
/// `v_i = 2 sqrt(y_i) g_i`.
pub fn grad<T: Scalar>(
    y: &SimplexPoint<T>,
    anchors: &[Point<T>],
    alpha: &[T],
) -> Result<Vec<T>> {
    let s = to_sphere(y);
    let images: Vec<Vec<T>> = anchors
        .iter()
        .map(|z| {
            let Point::Simplex(zp) = z else { unreachable!() };
            zp.probs().iter().map(|&p| p.sqrt()).collect()
        })
        .collect();
    let g = super::sphere::grad_terms(s.coords(), images.iter().map(|v| v.as_slice()), alpha)?;
    let two = cast::<T>(2.0);
    Ok(s.coords()
        .iter()
        .zip(&g)
        .map(|(&si, &gi)| two * si * gi)
        .collect())
}

/// Retract on the sphere through the square-root map, pull back, and
/// re-clip to the epsilon interior.
pub fn retract<T: Scalar>(y: &SimplexPoint<T>, v: &[T]) -> Result<SimplexPoint<T>> {
    let s = to_sphere(y);
    let half = cast::<T>(0.5);
    let pushed: Vec<T> = s
        .coords()
        .iter()
        .zip(v)
        .map(|(&si, &vi)| half * vi / si)
        .collect();
    let moved = super::sphere::retract(&s, &pushed)?;
    let squared: Vec<T> = moved.coords().iter().map(|&c| c * c).collect();
    project(&squared, y.eps())
}

/// Clamp entries to at least `eps` and renormalize the surplus mass so the
/// result sums to one while keeping every entry at or above `eps`. Valid
/// points are returned unchanged.
pub fn project<T: Scalar>(p: &[T], eps: T) -> Result<SimplexPoint<T>> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("simplex projection input"));
    }
    let m = cast::<T>(p.len() as f64);
    let sum = p.iter().fold(T::zero(), |a, &b| a + b);
    if (sum - T::one()).abs() <= cast(SIMPLEX_SUM_TOL) && p.iter().all(|&x| x >= eps) {
        return Ok(SimplexPoint {
            probs: p.to_vec(),
            eps,
        });
    }
    let clamped: Vec<T> = p.iter().map(|&x| x.max(eps)).collect();
    let clamped_sum = clamped.iter().fold(T::zero(), |a, &b| a + b);
    let free = clamped_sum - m * eps;
    if free <= cast(1e-300) {
        // All mass sits at the floor; fall back to the uniform vector.
        let u = T::one() / m;
        return SimplexPoint::new(vec![u; p.len()], eps);
    }
    let t = (T::one() - m * eps) / free;
    let probs: Vec<T> = clamped.iter().map(|&c| eps + t * (c - eps)).collect();
    Ok(SimplexPoint { probs, eps })
}

/// Flat Dirichlet sample (normalized unit exponentials) clipped to the
/// epsilon interior.
pub fn random_point<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    eps: T,
    rng: &mut R,
) -> SimplexPoint<T> {
    let draws: Vec<T> = (0..dim)
        .map(|_| {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            cast(-u.ln())
        })
        .collect();
    let sum = draws.iter().fold(T::zero(), |a, &b| a + b);
    let probs: Vec<T> = draws.iter().map(|&d| d / sum).collect();
    project(&probs, eps).expect("normalized exponentials project cleanly")
}

/// Pull a sphere tangent at the image point back through the chart; the
/// result sums to zero.
pub fn random_tangent<T: Scalar, R: Rng + ?Sized>(y: &SimplexPoint<T>, rng: &mut R) -> Vec<T> {
    let s = to_sphere(y);
    let u = super::sphere::random_tangent(&s, rng);
    let two = cast::<T>(2.0);
    s.coords()
        .iter()
        .zip(&u)
        .map(|(&si, &ui)| two * si * ui)
        .collect()
}

/// Fisher inner product in the paper's normalization:
/// `<u, v>_y = sum_i u_i v_i / (4 y_i)` (the pullback of the sphere metric
/// through the square-root map).
pub fn inner<T: Scalar>(y: &SimplexPoint<T>, u: &[T], v: &[T]) -> T {
    let quarter = cast::<T>(0.25);
    y.probs()
        .iter()
        .zip(u.iter().zip(v))
        .fold(T::zero(), |acc, (&yi, (&ui, &vi))| {
            acc + quarter * ui * vi / yi
        })
}
