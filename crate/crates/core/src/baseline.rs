//! Kernel regularized least squares baseline: one ridge regression per
//! flattened output coordinate, then projection onto the manifold.
//!
//! A single factorization of `K + n*lambda*I` is shared across all output
//! coordinates (one factorization, D solves).

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::estimator::{make_split, select_best, CvGrid, CvTableEntry, Dataset};
use crate::kernel::{fit_scores, ScoreModel};
use crate::linalg::{self, Matrix};
use crate::manifolds::{project_ambient, ManifoldTag, Point};
use crate::scalar::{cast, Scalar};

/// Fitted per-coordinate ridge model. `weights` is `n x D` with `D` the
/// flattened output dimension (row-major `m^2` for SPD, the coordinates
/// for sphere and simplex).
#[derive(Debug, Clone)]
pub struct KrlsModel<T> {
    pub(crate) score_side: ScoreModel<T>,
    pub(crate) weights: Matrix<T>,
    pub(crate) tag: ManifoldTag<T>,
    pub(crate) train_outputs: Vec<Point<T>>,
}

impl<T: Scalar> KrlsModel<T> {
    pub fn tag(&self) -> &ManifoldTag<T> {
        &self.tag
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn score_side(&self) -> &ScoreModel<T> {
        &self.score_side
    }

    pub fn train_outputs(&self) -> &[Point<T>] {
        &self.train_outputs
    }

    pub fn sigma(&self) -> T {
        self.score_side.sigma()
    }

    pub fn lambda(&self) -> T {
        self.score_side.lambda()
    }
}

/// Flatten outputs row-wise and solve `(K + n*lambda*I) W = Y_hat` against
/// all coordinates at once.
pub fn krls_train<T: Scalar>(data: &Dataset<T>, sigma: T, lambda: T) -> Result<KrlsModel<T>> {
    let score_side = fit_scores(data.inputs().clone(), sigma, lambda)?;
    let n = data.n();
    let d = data.tag().ambient_dim();
    let mut rhs = Matrix::zeros(n, d);
    for (i, out) in data.outputs().iter().enumerate() {
        for (j, v) in out.ambient().into_iter().enumerate() {
            rhs.set(i, j, v);
        }
    }
    let weights = linalg::cholesky_solve_matrix(score_side.factor(), &rhs);
    Ok(KrlsModel {
        score_side,
        weights,
        tag: *data.tag(),
        train_outputs: data.outputs().to_vec(),
    })
}

/// Ambient prediction `W^T K_x` before any projection.
pub fn krls_predict_ambient<T: Scalar>(model: &KrlsModel<T>, x: &[T]) -> Result<Vec<T>> {
    let kx = model.score_side.kernel_vector(x)?;
    let d = model.weights.cols();
    let mut out = vec![T::zero(); d];
    for (i, &k) in kx.iter().enumerate() {
        if k == T::zero() {
            continue;
        }
        let row = model.weights.row(i);
        for (o, &w) in out.iter_mut().zip(row) {
            *o = *o + w * k;
        }
    }
    Ok(out)
}

/// Predict and project onto the manifold; the returned point satisfies the
/// manifold invariants.
pub fn krls_predict<T: Scalar>(model: &KrlsModel<T>, x: &[T]) -> Result<Point<T>> {
    let ambient = krls_predict_ambient(model, x)?;
    project_ambient(&model.tag, &ambient)
}

/// Grid-search the baseline's hyperparameters on its native objective: the
/// squared ambient error of the raw prediction, normalized by the flattened
/// output dimension. Same split protocol and tie rule as the structured
/// estimator.
pub fn krls_cross_validate<T: Scalar, R: Rng + ?Sized>(
    data: &Dataset<T>,
    grid: &CvGrid<T>,
    rng: &mut R,
) -> Result<(T, T, Vec<CvTableEntry>)> {
    grid.validate()?;
    let (train_idx, val_idx) = make_split(data.n(), &grid.split, rng)?;
    let train_set = data.subset(&train_idx);
    let val_set = data.subset(&val_idx);
    let d = data.tag().ambient_dim();
    let df = cast::<T>(d as f64);

    let mut table = Vec::with_capacity(grid.sigmas.len() * grid.lambdas.len());
    for &sigma in &grid.sigmas {
        for &lambda in &grid.lambdas {
            let model = krls_train(&train_set, sigma, lambda)?;
            let errs: Vec<T> = val_idx
                .par_iter()
                .zip(val_set.outputs().par_iter())
                .map(|(&i, truth)| {
                    let amb = krls_predict_ambient(&model, data.inputs().row(i))?;
                    Ok(linalg::squared_distance(&amb, &truth.ambient()) / df)
                })
                .collect::<Result<_>>()?;
            let mean =
                errs.iter().fold(T::zero(), |a, &b| a + b) / cast(errs.len() as f64);
            table.push(CvTableEntry {
                sigma: sigma.as_f64(),
                lambda: lambda.as_f64(),
                mean_val_loss: mean.as_f64(),
            });
        }
    }
    let (bs, bl) = select_best(&table)?;
    Ok((cast(bs), cast(bl), table))
}
