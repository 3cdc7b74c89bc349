//! Structured prediction with manifold-valued outputs.
//!
//! Training fits a Gaussian-kernel ridge score function by solving one
//! factorized linear system; prediction minimizes the score-weighted sum
//! of squared geodesic distances to the training outputs with Riemannian
//! gradient descent, so every prediction lands on the output manifold by
//! construction. A per-coordinate kernel least-squares baseline (predict
//! in the ambient space, project afterwards) and a benchmark harness with
//! synthetic tasks round out the crate.
//!
//! Supported geometries: the SPD cone under the affine-invariant metric,
//! the unit sphere, the epsilon-interior probability simplex under the
//! Fisher metric (through the square-root chart), and flat space.
//!
//! The numerical core is generic over the scalar type (`f32`/`f64`) via
//! [`Scalar`]; the `*64` aliases below pin the usual instantiation.

pub mod baseline;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod manifolds;
pub mod matfun;
pub mod persist;
pub mod rgd;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations (the default working precision).
pub type Matrix64 = linalg::Matrix<f64>;
pub type SymMat64 = matfun::SymMat<f64>;
pub type EigPair64 = matfun::EigPair<f64>;
pub type ManifoldTag64 = manifolds::ManifoldTag<f64>;
pub type Point64 = manifolds::Point<f64>;
pub type TangentVector64 = manifolds::TangentVector<f64>;
pub type SpherePoint64 = manifolds::SpherePoint<f64>;
pub type SpdPoint64 = manifolds::SpdPoint<f64>;
pub type SimplexPoint64 = manifolds::SimplexPoint<f64>;
pub type InputMatrix64 = kernel::InputMatrix<f64>;
pub type ScoreModel64 = kernel::ScoreModel<f64>;
pub type RgdConfig64 = rgd::RgdConfig<f64>;
pub type RgdTrace64 = rgd::RgdTrace<f64>;
pub type Dataset64 = estimator::Dataset<f64>;
pub type PredictorModel64 = estimator::PredictorModel<f64>;
pub type CvGrid64 = estimator::CvGrid<f64>;
pub type KrlsModel64 = baseline::KrlsModel<f64>;

/// `f32` instantiations of the numerical core.
pub type Matrix32 = linalg::Matrix<f32>;
pub type SymMat32 = matfun::SymMat<f32>;
pub type ManifoldTag32 = manifolds::ManifoldTag<f32>;
pub type Point32 = manifolds::Point<f32>;
pub type TangentVector32 = manifolds::TangentVector<f32>;
