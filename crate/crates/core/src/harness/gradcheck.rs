//! Finite-difference validation of the Riemannian gradients: for random
//! weighted configurations, the directional derivative of the objective
//! along a retraction curve is compared against the metric pairing of the
//! analytic gradient with the direction.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifolds::{
    grad_weighted_objective, inner, random_point, random_tangent, retract, weighted_objective,
    ManifoldTag,
};
use crate::scalar::cast;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Pass threshold on the relative error.
pub const FD_TOLERANCE: f64 = 1e-5;

/// Result of a finite-difference sweep over one manifold.
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub manifold: String,
    pub trials: usize,
    pub directions_per_trial: usize,
    pub checked: usize,
    /// Configurations skipped because an anchor sat within the cut-locus
    /// guard of the evaluation point.
    pub excluded: usize,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Run `trials` random configurations (3 to 6 anchors, mixed-sign weights)
/// on `tag`, checking 10 random directions per configuration.
pub fn run_gradcheck<R: Rng + ?Sized>(
    tag: &ManifoldTag<f64>,
    trials: usize,
    rng: &mut R,
) -> Result<GradCheckReport> {
    if trials == 0 {
        return Err(Error::invalid("gradcheck", "trials must be >= 1"));
    }
    tag.validate()?;
    let directions = 10usize;
    let h = FD_STEP;
    let mut max_rel_err = 0.0f64;
    let mut checked = 0usize;
    let mut excluded = 0usize;

    for _ in 0..trials {
        let y = random_point(tag, rng);
        let n_anchors = rng.random_range(3..=6);
        let anchors: Vec<_> = (0..n_anchors).map(|_| random_point(tag, rng)).collect();
        let alpha: Vec<f64> = (0..n_anchors).map(|_| rng.random_range(-1.0..1.0)).collect();

        let grad = match grad_weighted_objective(tag, &y, &anchors, &alpha) {
            Ok(g) => g,
            Err(Error::CutLocus { .. }) => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };

        for _ in 0..directions {
            let v = random_tangent(tag, &y, rng);
            let analytic = inner(tag, &y, &grad.ambient, &v.ambient)?;
            let plus = weighted_objective(tag, &retract(tag, &y, &v.scale(cast(h)))?, &anchors, &alpha)?;
            let minus =
                weighted_objective(tag, &retract(tag, &y, &v.scale(cast(-h)))?, &anchors, &alpha)?;
            let fd = (plus - minus) / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6);
            max_rel_err = max_rel_err.max(rel);
            checked += 1;
        }
    }

    Ok(GradCheckReport {
        manifold: tag.name().to_string(),
        trials,
        directions_per_trial: directions,
        checked,
        excluded,
        max_rel_err,
        tolerance: FD_TOLERANCE,
        pass: max_rel_err <= FD_TOLERANCE,
    })
}

/// The default sweep: sphere d in {2, 3, 10}, SPD m in {2, 3, 5},
/// simplex m in {3, 5}, plus flat space as the exact-gradient control.
pub fn default_gradcheck_tags() -> Vec<ManifoldTag<f64>> {
    vec![
        ManifoldTag::Euclidean { dim: 4 },
        ManifoldTag::Sphere { dim: 2 },
        ManifoldTag::Sphere { dim: 3 },
        ManifoldTag::Sphere { dim: 10 },
        ManifoldTag::Spd { dim: 2 },
        ManifoldTag::Spd { dim: 3 },
        ManifoldTag::Spd { dim: 5 },
        ManifoldTag::Simplex { dim: 3, eps: 1e-5 },
        ManifoldTag::Simplex { dim: 5, eps: 1e-5 },
    ]
}
