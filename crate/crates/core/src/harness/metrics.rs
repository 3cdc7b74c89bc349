//! Evaluation metrics: normalized squared ambient loss, geodesic loss,
//! angular error on the circle, and micro-averaged ranking AUC on the
//! simplex.

use crate::error::{Error, Result};
use crate::linalg;
use crate::manifolds::{loss, ManifoldTag, Point, SimplexPoint, SpherePoint};
use crate::scalar::{cast, Scalar};

/// Squared ambient (Frobenius for SPD) distance divided by the ambient
/// dimension count.
pub fn metric_frobenius_sq<T: Scalar>(
    tag: &ManifoldTag<T>,
    pred: &Point<T>,
    truth: &Point<T>,
) -> Result<T> {
    let (a, b) = (pred.ambient(), truth.ambient());
    if a.len() != b.len() || a.len() != tag.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: tag.ambient_dim(),
            got: a.len(),
        });
    }
    Ok(linalg::squared_distance(&a, &b) / cast(tag.ambient_dim() as f64))
}

/// Squared geodesic distance.
pub fn metric_delta<T: Scalar>(
    tag: &ManifoldTag<T>,
    pred: &Point<T>,
    truth: &Point<T>,
) -> Result<T> {
    loss(tag, pred, truth)
}

/// Absolute angular error in degrees between two points on the circle.
pub fn metric_angular_degrees<T: Scalar>(
    pred: &SpherePoint<T>,
    truth: &SpherePoint<T>,
) -> Result<T> {
    if pred.dim() != 2 || truth.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pred.dim().max(truth.dim()),
        });
    }
    let u = linalg::dot(pred.coords(), truth.coords())
        .max(-T::one())
        .min(T::one());
    Ok(u.acos() * cast(180.0 / std::f64::consts::PI))
}

/// Micro-averaged ranking AUC: over every (sample, positive label,
/// negative label) triple, the fraction where the predicted probability of
/// the positive label exceeds the negative's, ties counting one half.
pub fn metric_auc<T: Scalar>(items: &[(SimplexPoint<T>, Vec<bool>)]) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::invalid("auc", "no samples"));
    }
    let mut wins = 0.0f64;
    let mut total = 0u64;
    for (pred, labels) in items {
        if labels.len() != pred.dim() {
            return Err(Error::DimensionMismatch {
                expected: pred.dim(),
                got: labels.len(),
            });
        }
        for (j, &pos) in labels.iter().enumerate() {
            if !pos {
                continue;
            }
            for (k, &neg_is_pos) in labels.iter().enumerate() {
                if neg_is_pos {
                    continue;
                }
                total += 1;
                let pj = pred.probs()[j];
                let pk = pred.probs()[k];
                if pj > pk {
                    wins += 1.0;
                } else if pj == pk {
                    wins += 0.5;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::invalid(
            "auc",
            "need at least one positive and one negative label overall",
        ));
    }
    Ok(wins / total as f64)
}

/// Mean and (population) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::SpdPoint;
    use crate::matfun::SymMat;

    fn simplex(p: &[f64]) -> SimplexPoint<f64> {
        SimplexPoint::new(p.to_vec(), 1e-6).unwrap()
    }

    #[test]
    fn zero_errors_for_identical_points() {
        let tag = ManifoldTag::<f64>::Spd { dim: 2 };
        let p = Point::Spd(
            SpdPoint::new(SymMat::new(2, vec![2.0, 0.2, 0.2, 1.0]).unwrap()).unwrap(),
        );
        assert_eq!(metric_frobenius_sq(&tag, &p, &p).unwrap(), 0.0);
        assert!(metric_delta(&tag, &p, &p).unwrap().abs() < 1e-20);
    }

    #[test]
    fn scalar_spd_forms() {
        let tag = ManifoldTag::Spd { dim: 1 };
        let e = std::f64::consts::E;
        let p = Point::Spd(SpdPoint::new(SymMat::new(1, vec![e]).unwrap()).unwrap());
        let t = Point::Spd(SpdPoint::new(SymMat::new(1, vec![1.0]).unwrap()).unwrap());
        let f = metric_frobenius_sq(&tag, &p, &t).unwrap();
        assert!((f - (e - 1.0) * (e - 1.0)).abs() < 1e-12);
        let d = metric_delta(&tag, &p, &t).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_is_symmetric() {
        use crate::manifolds::random_point;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let tags: [ManifoldTag<f64>; 3] = [
            ManifoldTag::Sphere { dim: 4 },
            ManifoldTag::Spd { dim: 3 },
            ManifoldTag::Simplex { dim: 4, eps: 1e-5 },
        ];
        for tag in tags {
            for _ in 0..20 {
                let a = random_point(&tag, &mut rng);
                let b = random_point(&tag, &mut rng);
                let d1 = metric_delta(&tag, &a, &b).unwrap();
                let d2 = metric_delta(&tag, &b, &a).unwrap();
                assert!((d1 - d2).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn angular_degrees_basics() {
        let p = SpherePoint::<f64>::new(vec![1.0, 0.0]).unwrap();
        let q = SpherePoint::<f64>::new(vec![0.0, 1.0]).unwrap();
        let anti = SpherePoint::<f64>::new(vec![-1.0, 0.0]).unwrap();
        assert!(metric_angular_degrees(&p, &p).unwrap().abs() < 1e-12);
        assert!((metric_angular_degrees(&p, &q).unwrap() - 90.0).abs() < 1e-12);
        assert!((metric_angular_degrees(&p, &anti).unwrap() - 180.0).abs() < 1e-12);
    }

    #[test]
    fn auc_perfect_and_tied() {
        let perfect = vec![
            (simplex(&[0.7, 0.2, 0.1]), vec![true, false, false]),
            (simplex(&[0.1, 0.6, 0.3]), vec![false, true, false]),
        ];
        assert_eq!(metric_auc(&perfect).unwrap(), 1.0);

        let third = 1.0 / 3.0;
        let tied = vec![(
            simplex(&[third, third, third]),
            vec![true, false, false],
        )];
        assert_eq!(metric_auc(&tied).unwrap(), 0.5);
    }

    #[test]
    fn auc_matches_hand_enumeration() {
        // Three samples, three labels. Triples enumerated by hand:
        // s1: pos {0}, neg {1, 2}: 0.5>0.3 win, 0.5>0.2 win.
        // s2: pos {0, 1}, neg {2}: 0.2<0.5 loss, 0.3<0.5 loss.
        // s3: pos {2}, neg {0, 1}: 0.25=0.25 tie (0.5), 0.25<0.5 loss.
        // wins = 2 + 0 + 0.5 out of 6 triples.
        let items = vec![
            (simplex(&[0.5, 0.3, 0.2]), vec![true, false, false]),
            (simplex(&[0.2, 0.3, 0.5]), vec![true, true, false]),
            (simplex(&[0.25, 0.5, 0.25]), vec![false, false, true]),
        ];
        let auc = metric_auc(&items).unwrap();
        assert!((auc - 2.5 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn auc_rejects_degenerate_labels() {
        let items = vec![(simplex(&[0.5, 0.5]), vec![true, true])];
        assert!(metric_auc(&items).is_err());
    }
}
