//! Output-space geometry: squared geodesic losses, Riemannian gradients of
//! the score-weighted objective, retractions and projections for the SPD
//! cone, the unit sphere, the epsilon-interior probability simplex under
//! the Fisher metric, and Euclidean space.
//!
//! All operations dispatch on a [`ManifoldTag`] and work on immutable
//! [`Point`] values; tangent vectors carry ambient coordinates paired with
//! their base point.

mod euclidean;
mod simplex;
mod sphere;
mod spd;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matfun::SymMat;
use crate::scalar::{cast, Scalar};

/// Guard distance from the cut locus: inner products within this of -1 on
/// the sphere raise a singular-configuration error instead of producing a
/// meaningless gradient.
pub const CUT_GUARD: f64 = 1e-8;

/// Anchors whose inner product with the evaluation point is within this of
/// +1 are treated as coincident and contribute zero to the gradient.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Unit-norm tolerance for sphere points.
pub const SPHERE_NORM_TOL: f64 = 1e-10;

/// Sum-to-one tolerance for simplex points.
pub const SIMPLEX_SUM_TOL: f64 = 1e-10;

/// Eigenvalue floor for SPD points (matches the projection constant).
pub const SPD_FLOOR: f64 = 1e-12;

/// Tangency tolerance for sphere tangent vectors.
pub const TANGENCY_TOL: f64 = 1e-8;

/// Which manifold a point lives on, with its dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManifoldTag<T> {
    /// `R^d`.
    Euclidean { dim: usize },
    /// Unit sphere `S^{d-1}` embedded in `R^d`.
    Sphere { dim: usize },
    /// Symmetric positive definite `m x m` matrices.
    Spd { dim: usize },
    /// Probability vectors over `m` outcomes with every entry >= eps,
    /// carrying the Fisher information metric.
    Simplex { dim: usize, eps: T },
}

impl<T: Scalar> ManifoldTag<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldTag::Euclidean { dim }
            | ManifoldTag::Sphere { dim }
            | ManifoldTag::Spd { dim } => {
                if dim == 0 {
                    return Err(Error::invalid("manifold tag", "dimension must be >= 1"));
                }
            }
            ManifoldTag::Simplex { dim, eps } => {
                if dim == 0 {
                    return Err(Error::invalid("manifold tag", "dimension must be >= 1"));
                }
                let inv_m = T::one() / cast::<T>(dim as f64);
                if eps <= T::zero() || eps >= inv_m {
                    return Err(Error::invalid(
                        "manifold tag",
                        format!("simplex eps must lie in (0, 1/{dim})"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the ambient coordinate vector points flatten to.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldTag::Euclidean { dim } | ManifoldTag::Sphere { dim } => dim,
            ManifoldTag::Spd { dim } => dim * dim,
            ManifoldTag::Simplex { dim, .. } => dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ManifoldTag::Euclidean { .. } => "euclidean",
            ManifoldTag::Sphere { .. } => "sphere",
            ManifoldTag::Spd { .. } => "spd",
            ManifoldTag::Simplex { .. } => "simplex",
        }
    }
}

/// Unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T> {
    coords: Vec<T>,
}

impl<T: Scalar> SpherePoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("sphere point", "empty coordinates"));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sphere point"));
        }
        let n = linalg::norm(&coords);
        if (n - T::one()).abs() > cast(SPHERE_NORM_TOL) {
            return Err(Error::invalid(
                "sphere point",
                format!("norm {} is not 1 within {SPHERE_NORM_TOL:e}", n.as_f64()),
            ));
        }
        Ok(SpherePoint { coords })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Point on the SPD cone; eigenvalues are checked against [`SPD_FLOOR`] on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdPoint<T> {
    mat: SymMat<T>,
}

impl<T: Scalar> SpdPoint<T> {
    pub fn new(mat: SymMat<T>) -> Result<Self> {
        let eigs = crate::matfun::sym_eigvals(&mat)?;
        let min = eigs[eigs.len() - 1];
        // Cushion for the eigensolver's measurement error (eps * ||A||):
        // points clamped exactly to the floor must re-validate.
        let cushion = cast::<T>(1e-15) * (T::one() + mat.frobenius_norm());
        if min < cast::<T>(SPD_FLOOR) - cushion {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: min.as_f64(),
                floor: SPD_FLOOR,
            });
        }
        Ok(SpdPoint { mat })
    }

    /// Construction paths that produce PD matrices by formula (retractions,
    /// spectral clamps) skip the eigenvalue re-check.
    pub(crate) fn new_unchecked(mat: SymMat<T>) -> Self {
        SpdPoint { mat }
    }

    pub fn mat(&self) -> &SymMat<T> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

/// Probability vector in the epsilon-interior of the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    probs: Vec<T>,
    eps: T,
}

impl<T: Scalar> SimplexPoint<T> {
    pub fn new(probs: Vec<T>, eps: T) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("simplex point", "empty probabilities"));
        }
        if probs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("simplex point"));
        }
        let sum = probs.iter().fold(T::zero(), |a, &b| a + b);
        if (sum - T::one()).abs() > cast(SIMPLEX_SUM_TOL) {
            return Err(Error::invalid(
                "simplex point",
                format!("probabilities sum to {}, not 1", sum.as_f64()),
            ));
        }
        // Tiny absolute cushion for sqrt/square round trips through the
        // sphere chart.
        let cushion = cast::<T>(1e-15);
        if probs.iter().any(|&p| p + cushion < eps) {
            return Err(Error::invalid(
                "simplex point",
                format!("an entry is below the interior floor {:e}", eps.as_f64()),
            ));
        }
        Ok(SimplexPoint { probs, eps })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }
}

/// A point on one of the supported manifolds.
#[derive(Debug, Clone, PartialEq)]
pub enum Point<T> {
    Euclidean(Vec<T>),
    Sphere(SpherePoint<T>),
    Spd(SpdPoint<T>),
    Simplex(SimplexPoint<T>),
}

impl<T: Scalar> Point<T> {
    /// Flatten to ambient coordinates (row-major for SPD).
    pub fn ambient(&self) -> Vec<T> {
        match self {
            Point::Euclidean(v) => v.clone(),
            Point::Sphere(p) => p.coords().to_vec(),
            Point::Spd(p) => p.mat().values().to_vec(),
            Point::Simplex(p) => p.probs().to_vec(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Point::Euclidean(v) => v.len(),
            Point::Sphere(p) => p.dim(),
            Point::Spd(p) => p.dim() * p.dim(),
            Point::Simplex(p) => p.dim(),
        }
    }

    /// Check that the point lives on the manifold described by `tag`,
    /// re-validating the type invariants.
    pub fn validate_on(&self, tag: &ManifoldTag<T>) -> Result<()> {
        match (self, tag) {
            (Point::Euclidean(v), ManifoldTag::Euclidean { dim }) => {
                expect_dim(*dim, v.len())?;
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("euclidean point"));
                }
                Ok(())
            }
            (Point::Sphere(p), ManifoldTag::Sphere { dim }) => {
                expect_dim(*dim, p.dim())?;
                SpherePoint::new(p.coords().to_vec()).map(|_| ())
            }
            (Point::Spd(p), ManifoldTag::Spd { dim }) => {
                expect_dim(*dim, p.dim())?;
                SpdPoint::new(p.mat().clone()).map(|_| ())
            }
            (Point::Simplex(p), ManifoldTag::Simplex { dim, eps }) => {
                expect_dim(*dim, p.dim())?;
                SimplexPoint::new(p.probs().to_vec(), *eps).map(|_| ())
            }
            _ => Err(Error::invalid(
                "point",
                format!("point does not match manifold tag {}", tag.name()),
            )),
        }
    }
}

/// Tangent vector in ambient coordinates, paired with its base point.
#[derive(Debug, Clone)]
pub struct TangentVector<T> {
    pub base: Point<T>,
    pub ambient: Vec<T>,
}

impl<T: Scalar> TangentVector<T> {
    pub fn zero(base: Point<T>) -> Self {
        let dim = base.ambient_dim();
        TangentVector {
            base,
            ambient: vec![T::zero(); dim],
        }
    }

    /// Euclidean norm of the ambient coordinates (Frobenius for SPD).
    pub fn norm(&self) -> T {
        linalg::norm(&self.ambient)
    }

    pub fn scale(&self, s: T) -> TangentVector<T> {
        TangentVector {
            base: self.base.clone(),
            ambient: self.ambient.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ambient.iter().all(|v| *v == T::zero())
    }
}

pub(crate) fn expect_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn check_pair<T: Scalar>(tag: &ManifoldTag<T>, y: &Point<T>, z: &Point<T>) -> Result<()> {
    expect_dim(tag.ambient_dim(), y.ambient_dim())?;
    expect_dim(tag.ambient_dim(), z.ambient_dim())?;
    if !matches_variant(tag, y) || !matches_variant(tag, z) {
        return Err(Error::invalid("point", "manifold kind does not match tag"));
    }
    Ok(())
}

fn matches_variant<T: Scalar>(tag: &ManifoldTag<T>, p: &Point<T>) -> bool {
    matches!(
        (tag, p),
        (ManifoldTag::Euclidean { .. }, Point::Euclidean(_))
            | (ManifoldTag::Sphere { .. }, Point::Sphere(_))
            | (ManifoldTag::Spd { .. }, Point::Spd(_))
            | (ManifoldTag::Simplex { .. }, Point::Simplex(_))
    )
}

/// Squared geodesic distance between two points on the same manifold.
pub fn loss<T: Scalar>(tag: &ManifoldTag<T>, y: &Point<T>, z: &Point<T>) -> Result<T> {
    check_pair(tag, y, z)?;
    match (y, z) {
        (Point::Euclidean(a), Point::Euclidean(b)) => Ok(euclidean::loss(a, b)),
        (Point::Sphere(a), Point::Sphere(b)) => Ok(sphere::loss(a.coords(), b.coords())),
        (Point::Spd(a), Point::Spd(b)) => spd::loss(a, b),
        (Point::Simplex(a), Point::Simplex(b)) => Ok(simplex::loss(a, b)),
        _ => unreachable!("check_pair verified the variants"),
    }
}

/// Score-weighted objective `F(y) = sum_i alpha_i * loss(y, anchors[i])`.
/// Alphas may be negative; ridge scores are unconstrained.
pub fn weighted_objective<T: Scalar>(
    tag: &ManifoldTag<T>,
    y: &Point<T>,
    anchors: &[Point<T>],
    alpha: &[T],
) -> Result<T> {
    expect_dim(anchors.len(), alpha.len())?;
    for z in anchors {
        check_pair(tag, y, z)?;
    }
    match y {
        Point::Spd(yp) => spd::weighted_objective(yp, anchors, alpha),
        _ => {
            let mut f = T::zero();
            for (z, &a) in anchors.iter().zip(alpha) {
                f = f + a * loss(tag, y, z)?;
            }
            Ok(f)
        }
    }
}

/// Riemannian gradient of the weighted objective at `y`, in ambient
/// coordinates.
pub fn grad_weighted_objective<T: Scalar>(
    tag: &ManifoldTag<T>,
    y: &Point<T>,
    anchors: &[Point<T>],
    alpha: &[T],
) -> Result<TangentVector<T>> {
    expect_dim(anchors.len(), alpha.len())?;
    for z in anchors {
        check_pair(tag, y, z)?;
    }
    let ambient = match y {
        Point::Euclidean(yv) => euclidean::grad(yv, anchors, alpha),
        Point::Sphere(yp) => sphere::grad(yp, anchors, alpha)?,
        Point::Spd(yp) => spd::grad(yp, anchors, alpha)?,
        Point::Simplex(yp) => simplex::grad(yp, anchors, alpha)?,
    };
    Ok(TangentVector {
        base: y.clone(),
        ambient,
    })
}

/// Retraction: step from `y` along tangent vector `v` and land on the
/// manifold. The SPD retraction is the exact exponential map.
pub fn retract<T: Scalar>(
    tag: &ManifoldTag<T>,
    y: &Point<T>,
    v: &TangentVector<T>,
) -> Result<Point<T>> {
    expect_dim(tag.ambient_dim(), y.ambient_dim())?;
    expect_dim(y.ambient_dim(), v.ambient.len())?;
    if v.is_zero() {
        return Ok(y.clone());
    }
    match y {
        Point::Euclidean(yv) => Ok(Point::Euclidean(euclidean::retract(yv, &v.ambient))),
        Point::Sphere(yp) => Ok(Point::Sphere(sphere::retract(yp, &v.ambient)?)),
        Point::Spd(yp) => Ok(Point::Spd(spd::retract(yp, &v.ambient)?)),
        Point::Simplex(yp) => Ok(Point::Simplex(simplex::retract(yp, &v.ambient)?)),
    }
}

/// Project arbitrary ambient coordinates onto the manifold. Idempotent,
/// and fixes points that already satisfy the invariants.
pub fn project_ambient<T: Scalar>(tag: &ManifoldTag<T>, p: &[T]) -> Result<Point<T>> {
    expect_dim(tag.ambient_dim(), p.len())?;
    match *tag {
        ManifoldTag::Euclidean { .. } => euclidean::project(p).map(Point::Euclidean),
        ManifoldTag::Sphere { .. } => sphere::project(p).map(Point::Sphere),
        ManifoldTag::Spd { dim } => spd::project(dim, p).map(Point::Spd),
        ManifoldTag::Simplex { eps, .. } => simplex::project(p, eps).map(Point::Simplex),
    }
}

/// Riemannian inner product of two tangent vectors (given in ambient
/// coordinates) at `y`. Pairs with [`grad_weighted_objective`] so that
/// `inner(tag, y, grad, v)` is the directional derivative along `v`.
pub fn inner<T: Scalar>(tag: &ManifoldTag<T>, y: &Point<T>, u: &[T], v: &[T]) -> Result<T> {
    expect_dim(tag.ambient_dim(), y.ambient_dim())?;
    expect_dim(y.ambient_dim(), u.len())?;
    expect_dim(y.ambient_dim(), v.len())?;
    match y {
        Point::Euclidean(_) | Point::Sphere(_) => Ok(linalg::dot(u, v)),
        Point::Spd(yp) => spd::inner(yp, u, v),
        Point::Simplex(yp) => Ok(simplex::inner(yp, u, v)),
    }
}

/// Sample a point uniformly enough for testing: normalized Gaussian on the
/// sphere, Haar eigenvectors with log-uniform eigenvalues in [0.1, 10] on
/// the SPD cone, flat Dirichlet clipped to the interior on the simplex.
pub fn random_point<T: Scalar, R: Rng + ?Sized>(tag: &ManifoldTag<T>, rng: &mut R) -> Point<T> {
    match *tag {
        ManifoldTag::Euclidean { dim } => Point::Euclidean(euclidean::random_point(dim, rng)),
        ManifoldTag::Sphere { dim } => Point::Sphere(sphere::random_point(dim, rng)),
        ManifoldTag::Spd { dim } => Point::Spd(spd::random_point(dim, rng)),
        ManifoldTag::Simplex { dim, eps } => Point::Simplex(simplex::random_point(dim, eps, rng)),
    }
}

/// Sample a Gaussian tangent vector at `y` (projected to the tangent
/// space where the manifold requires it).
pub fn random_tangent<T: Scalar, R: Rng + ?Sized>(
    tag: &ManifoldTag<T>,
    y: &Point<T>,
    rng: &mut R,
) -> TangentVector<T> {
    debug_assert_eq!(tag.ambient_dim(), y.ambient_dim());
    let ambient = match y {
        Point::Euclidean(v) => euclidean::random_tangent(v.len(), rng),
        Point::Sphere(p) => sphere::random_tangent(p, rng),
        Point::Spd(p) => spd::random_tangent(p.dim(), rng),
        Point::Simplex(p) => simplex::random_tangent(p, rng),
    };
    TangentVector {
        base: y.clone(),
        ambient,
    }
}

/// Coordinate-wise square root map from the simplex onto the positive
/// orthant of the sphere.
pub fn simplex_to_sphere<T: Scalar>(y: &SimplexPoint<T>) -> SpherePoint<T> {
    simplex::to_sphere(y)
}

/// Inverse of [`simplex_to_sphere`]: coordinate-wise square. Fails when a
/// coordinate is not strictly positive.
pub fn sphere_to_simplex<T: Scalar>(s: &SpherePoint<T>, eps: T) -> Result<SimplexPoint<T>> {
    simplex::from_sphere(s, eps)
}
