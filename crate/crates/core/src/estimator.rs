//! The structured predictor: training fits the ridge scores, prediction
//! minimizes the score-weighted geodesic objective per query, and
//! hyperparameters come from a held-out validation split.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{fit_scores, scores, InputMatrix, ScoreModel};
use crate::manifolds::{loss, ManifoldTag, Point};
use crate::rgd::{minimize, RgdConfig, RgdTrace};
use crate::scalar::Scalar;

/// Seed for the rng used only by the solver's documented cut-locus
/// perturbation retry, keeping `predict` a pure function of its inputs.
const RETRY_RNG_SEED: u64 = 0x9e3779b97f4a7c15;

/// Paired inputs and manifold-valued outputs.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    inputs: InputMatrix<T>,
    outputs: Vec<Point<T>>,
    tag: ManifoldTag<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: InputMatrix<T>, outputs: Vec<Point<T>>, tag: ManifoldTag<T>) -> Result<Self> {
        tag.validate()?;
        if outputs.len() != inputs.n() {
            return Err(Error::DimensionMismatch {
                expected: inputs.n(),
                got: outputs.len(),
            });
        }
        for out in &outputs {
            out.validate_on(&tag)?;
        }
        Ok(Dataset {
            inputs,
            outputs,
            tag,
        })
    }

    pub fn n(&self) -> usize {
        self.inputs.n()
    }

    pub fn inputs(&self) -> &InputMatrix<T> {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Point<T>] {
        &self.outputs
    }

    pub fn tag(&self) -> &ManifoldTag<T> {
        &self.tag
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset<T> {
        Dataset {
            inputs: self.inputs.subset(idx),
            outputs: idx.iter().map(|&i| self.outputs[i].clone()).collect(),
            tag: self.tag,
        }
    }
}

/// The deployable estimator: a fitted score model plus the training
/// outputs, the manifold tag, and the solver configuration.
#[derive(Debug, Clone)]
pub struct PredictorModel<T> {
    pub(crate) score_model: ScoreModel<T>,
    pub(crate) train_outputs: Vec<Point<T>>,
    pub(crate) tag: ManifoldTag<T>,
    pub(crate) rgd: RgdConfig<T>,
}

impl<T: Scalar> PredictorModel<T> {
    pub fn score_model(&self) -> &ScoreModel<T> {
        &self.score_model
    }

    pub fn train_outputs(&self) -> &[Point<T>] {
        &self.train_outputs
    }

    pub fn tag(&self) -> &ManifoldTag<T> {
        &self.tag
    }

    pub fn rgd(&self) -> &RgdConfig<T> {
        &self.rgd
    }
}

/// Fit the score model; no manifold computation happens at training time.
pub fn train<T: Scalar>(
    data: &Dataset<T>,
    sigma: T,
    lambda: T,
    rgd: RgdConfig<T>,
) -> Result<PredictorModel<T>> {
    rgd.validate()?;
    let score_model = fit_scores(data.inputs().clone(), sigma, lambda)?;
    Ok(PredictorModel {
        score_model,
        train_outputs: data.outputs().to_vec(),
        tag: *data.tag(),
        rgd,
    })
}

/// Predict at `x`: compute the scores, start from the training output with
/// the largest score (ties to the lowest index), and run the solver. The
/// returned point always satisfies its manifold invariants.
pub fn predict<T: Scalar>(model: &PredictorModel<T>, x: &[T]) -> Result<Point<T>> {
    predict_with_trace(model, x).map(|(y, _)| y)
}

/// Like [`predict`], also returning the solver trace.
pub fn predict_with_trace<T: Scalar>(
    model: &PredictorModel<T>,
    x: &[T],
) -> Result<(Point<T>, RgdTrace<T>)> {
    let alpha = scores(&model.score_model, x)?;
    let y0 = &model.train_outputs[argmax(&alpha)];
    let mut rng = ChaCha8Rng::seed_from_u64(RETRY_RNG_SEED);
    minimize(
        &model.tag,
        &model.train_outputs,
        &alpha,
        y0,
        &model.rgd,
        &mut rng,
    )
}

/// Predict a batch of queries in parallel; results are ordered like the
/// queries, so the output is independent of thread scheduling.
pub fn predict_batch<T: Scalar>(
    model: &PredictorModel<T>,
    queries: &[Vec<T>],
) -> Result<Vec<(Point<T>, RgdTrace<T>)>> {
    queries
        .par_iter()
        .map(|x| predict_with_trace(model, x))
        .collect()
}

/// Ridge scores of the model's score function at a query point.
pub fn scores_for_query<T: Scalar>(model: &PredictorModel<T>, x: &[T]) -> Result<Vec<T>> {
    scores(&model.score_model, x)
}

fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// How the validation split is formed from a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    /// Shuffle with the provided rng, hold out this fraction.
    Fraction(f64),
    /// Hold out the last `k` samples without shuffling.
    HoldoutLast(usize),
}

/// Hyperparameter grid plus the validation protocol.
#[derive(Debug, Clone)]
pub struct CvGrid<T> {
    pub sigmas: Vec<T>,
    pub lambdas: Vec<T>,
    pub split: SplitSpec,
}

impl<T: Scalar> CvGrid<T> {
    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() || self.lambdas.is_empty() {
            return Err(Error::invalid("cv grid", "sigma and lambda lists must be nonempty"));
        }
        if self.sigmas.iter().any(|&s| s <= T::zero())
            || self.lambdas.iter().any(|&l| l <= T::zero())
        {
            return Err(Error::invalid("cv grid", "grid values must be positive"));
        }
        match self.split {
            SplitSpec::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::invalid("cv grid", "fraction must lie in (0, 1)"));
                }
            }
            SplitSpec::HoldoutLast(k) => {
                if k == 0 {
                    return Err(Error::invalid("cv grid", "holdout size must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CvTableEntry {
    pub sigma: f64,
    pub lambda: f64,
    pub mean_val_loss: f64,
}

/// Build (train, validation) index sets for `n` samples.
pub(crate) fn make_split<R: Rng + ?Sized>(
    n: usize,
    split: &SplitSpec,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (train, val): (Vec<usize>, Vec<usize>) = match *split {
        SplitSpec::Fraction(f) => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let k = ((n as f64 * f).round() as usize).max(1);
            let val = idx[n.saturating_sub(k)..].to_vec();
            let train = idx[..n.saturating_sub(k)].to_vec();
            (train, val)
        }
        SplitSpec::HoldoutLast(k) => {
            if k >= n {
                return Err(Error::invalid("validation split", "holdout covers everything"));
            }
            ((0..n - k).collect(), (n - k..n).collect())
        }
    };
    if train.is_empty() || val.is_empty() {
        return Err(Error::invalid("validation split", "empty split"));
    }
    Ok((train, val))
}

/// Grid-search sigma and lambda on a held-out split, scoring by mean
/// geodesic loss on the validation points. Ties break toward the smaller
/// lambda, then the smaller sigma. Returns the winning pair and the full
/// table in grid order (sigma-major).
pub fn cross_validate<T: Scalar, R: Rng + ?Sized>(
    data: &Dataset<T>,
    grid: &CvGrid<T>,
    rgd: &RgdConfig<T>,
    rng: &mut R,
) -> Result<(T, T, Vec<CvTableEntry>)> {
    grid.validate()?;
    rgd.validate()?;
    let (train_idx, val_idx) = make_split(data.n(), &grid.split, rng)?;
    let train_set = data.subset(&train_idx);
    let val_set = data.subset(&val_idx);
    let val_queries: Vec<Vec<T>> = val_idx
        .iter()
        .map(|&i| data.inputs().row(i).to_vec())
        .collect();

    let mut table = Vec::with_capacity(grid.sigmas.len() * grid.lambdas.len());
    for &sigma in &grid.sigmas {
        for &lambda in &grid.lambdas {
            let model = train(&train_set, sigma, lambda, rgd.clone())?;
            let preds = predict_batch(&model, &val_queries)?;
            let mut acc = T::zero();
            for ((y, _), truth) in preds.iter().zip(val_set.outputs()) {
                acc = acc + loss(data.tag(), y, truth)?;
            }
            let mean = acc / crate::scalar::cast(val_queries.len() as f64);
            table.push(CvTableEntry {
                sigma: sigma.as_f64(),
                lambda: lambda.as_f64(),
                mean_val_loss: mean.as_f64(),
            });
        }
    }
    let (best_sigma, best_lambda) = select_best(&table)?;
    Ok((
        crate::scalar::cast(best_sigma),
        crate::scalar::cast(best_lambda),
        table,
    ))
}

/// Argmin over the table with the documented tie rule: smaller loss, then
/// smaller lambda, then smaller sigma. Non-finite losses lose to anything
/// finite.
pub fn select_best(table: &[CvTableEntry]) -> Result<(f64, f64)> {
    let mut best: Option<&CvTableEntry> = None;
    for entry in table {
        let better = match best {
            None => true,
            Some(b) => {
                let (cur, inc) = (
                    (entry.mean_val_loss, entry.lambda, entry.sigma),
                    (b.mean_val_loss, b.lambda, b.sigma),
                );
                let key = |(l, lam, sig): (f64, f64, f64)| {
                    (if l.is_finite() { l } else { f64::INFINITY }, lam, sig)
                };
                key(cur) < key(inc)
            }
        };
        if better {
            best = Some(entry);
        }
    }
    best.map(|b| (b.sigma, b.lambda))
        .ok_or_else(|| Error::invalid("cv table", "no grid cells evaluated"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::random_point;
    use rand::SeedableRng;

    fn sphere_dataset(n: usize, seed: u64) -> Dataset<f64> {
        let tag = ManifoldTag::Sphere { dim: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = InputMatrix::new(
            (0..n)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect(),
        )
        .unwrap();
        let outputs = (0..n).map(|_| random_point(&tag, &mut rng)).collect();
        Dataset::new(inputs, outputs, tag).unwrap()
    }

    #[test]
    fn single_point_model_recovers_its_output() {
        let tag = ManifoldTag::<f64>::Sphere { dim: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = random_point(&tag, &mut rng);
        let data = Dataset::new(
            InputMatrix::new(vec![vec![0.2, 0.4]]).unwrap(),
            vec![y.clone()],
            tag,
        )
        .unwrap();
        let model = train(&data, 1.0, 0.1, RgdConfig::default()).unwrap();
        let pred = predict(&model, &[5.0, -3.0]).unwrap();
        let d = loss(&tag, &pred, &y).unwrap().sqrt();
        assert!(d <= 1e-6);
    }

    #[test]
    fn training_ignores_output_geometry() {
        let a = sphere_dataset(8, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tag = *a.tag();
        let other_outputs: Vec<_> = (0..8).map(|_| random_point(&tag, &mut rng)).collect();
        let b = Dataset::new(a.inputs().clone(), other_outputs, tag).unwrap();
        let ma = train(&a, 1.3, 0.05, RgdConfig::default()).unwrap();
        let mb = train(&b, 1.3, 0.05, RgdConfig::default()).unwrap();
        assert_eq!(ma.score_model.factor().data(), mb.score_model.factor().data());
    }

    #[test]
    fn small_bandwidth_memorizes_training_points() {
        let data = sphere_dataset(6, 3);
        // sigma = 1e-3 * the minimum pairwise input distance.
        let mut min_d = f64::INFINITY;
        for i in 0..data.n() {
            for j in 0..i {
                let d = crate::linalg::squared_distance(
                    data.inputs().row(i),
                    data.inputs().row(j),
                )
                .sqrt();
                min_d = min_d.min(d);
            }
        }
        let model = train(&data, 1e-3 * min_d, 0.1, RgdConfig::default()).unwrap();
        for j in 0..data.n() {
            let pred = predict(&model, data.inputs().row(j)).unwrap();
            let d = loss(data.tag(), &pred, &data.outputs()[j]).unwrap().sqrt();
            assert!(d <= 1e-4, "training point {j} reproduced to {d}");
        }
    }

    #[test]
    fn cv_single_pair_returns_it() {
        let data = sphere_dataset(10, 4);
        let grid = CvGrid {
            sigmas: vec![0.7],
            lambdas: vec![0.01],
            split: SplitSpec::HoldoutLast(3),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (s, l, table) =
            cross_validate(&data, &grid, &RgdConfig::default(), &mut rng).unwrap();
        assert_eq!((s, l), (0.7, 0.01));
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn cv_duplicate_entries_tie_break_deterministically() {
        let data = sphere_dataset(10, 5);
        let grid = CvGrid {
            sigmas: vec![0.9, 0.9],
            lambdas: vec![0.05, 0.05],
            split: SplitSpec::HoldoutLast(3),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (s, l, table) =
            cross_validate(&data, &grid, &RgdConfig::default(), &mut rng).unwrap();
        assert_eq!(table.len(), 4);
        assert_eq!(table[0].mean_val_loss, table[3].mean_val_loss);
        assert_eq!((s, l), (0.9, 0.05));
    }

    #[test]
    fn cv_returns_argmin_of_its_table() {
        let data = sphere_dataset(24, 6);
        let grid = CvGrid {
            sigmas: vec![0.3, 1.0, 3.0],
            lambdas: vec![1e-3, 1e-1],
            split: SplitSpec::HoldoutLast(6),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (s, l, table) =
            cross_validate(&data, &grid, &RgdConfig::default(), &mut rng).unwrap();
        let best = table
            .iter()
            .min_by(|a, b| {
                (a.mean_val_loss, a.lambda, a.sigma)
                    .partial_cmp(&(b.mean_val_loss, b.lambda, b.sigma))
                    .unwrap()
            })
            .unwrap();
        assert_eq!((s, l), (best.sigma, best.lambda));
    }

    #[test]
    fn empty_split_is_rejected() {
        let data = sphere_dataset(4, 7);
        let grid = CvGrid {
            sigmas: vec![1.0],
            lambdas: vec![0.1],
            split: SplitSpec::HoldoutLast(4),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(cross_validate(&data, &grid, &RgdConfig::default(), &mut rng).is_err());
    }
}
