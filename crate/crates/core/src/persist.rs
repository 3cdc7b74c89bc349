//! JSON persistence: model documents, JSON-lines datasets, and the
//! orientation-field CSV format.
//!
//! Models serialize as a single JSON document
//! `{version, kind, tag, sigma, lambda, rgd?, train_inputs, train_outputs}`;
//! factorizations and baseline weights are refit on load. Points serialize
//! as flat arrays (sphere, simplex, euclidean) or `{"dim", "values"}`
//! (SPD, row-major).

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::{krls_train, KrlsModel};
use crate::error::{Error, Result};
use crate::estimator::{train, Dataset, PredictorModel};
use crate::kernel::InputMatrix;
use crate::manifolds::{ManifoldTag, Point, SimplexPoint, SpdPoint, SpherePoint};
use crate::matfun::SymMat;
use crate::rgd::RgdConfig;
use crate::scalar::{cast, Scalar};

pub const MODEL_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TagDoc {
    Euclidean { dim: usize },
    Sphere { dim: usize },
    Spd { dim: usize },
    Simplex { dim: usize, eps: f64 },
}

impl TagDoc {
    pub fn from_tag<T: Scalar>(tag: &ManifoldTag<T>) -> TagDoc {
        match *tag {
            ManifoldTag::Euclidean { dim } => TagDoc::Euclidean { dim },
            ManifoldTag::Sphere { dim } => TagDoc::Sphere { dim },
            ManifoldTag::Spd { dim } => TagDoc::Spd { dim },
            ManifoldTag::Simplex { dim, eps } => TagDoc::Simplex {
                dim,
                eps: eps.as_f64(),
            },
        }
    }

    pub fn to_tag<T: Scalar>(self) -> ManifoldTag<T> {
        match self {
            TagDoc::Euclidean { dim } => ManifoldTag::Euclidean { dim },
            TagDoc::Sphere { dim } => ManifoldTag::Sphere { dim },
            TagDoc::Spd { dim } => ManifoldTag::Spd { dim },
            TagDoc::Simplex { dim, eps } => ManifoldTag::Simplex {
                dim,
                eps: cast(eps),
            },
        }
    }
}

/// Point on the wire: an object for SPD, a flat array otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDoc {
    Mat { dim: usize, values: Vec<f64> },
    Flat(Vec<f64>),
}

impl PointDoc {
    pub fn from_point<T: Scalar>(p: &Point<T>) -> PointDoc {
        match p {
            Point::Spd(sp) => PointDoc::Mat {
                dim: sp.dim(),
                values: sp.mat().values().iter().map(|v| v.as_f64()).collect(),
            },
            other => PointDoc::Flat(other.ambient().iter().map(|v| v.as_f64()).collect()),
        }
    }

    pub fn to_point<T: Scalar>(&self, tag: &ManifoldTag<T>) -> Result<Point<T>> {
        let as_t = |v: &[f64]| -> Vec<T> { v.iter().map(|&x| cast(x)).collect() };
        match (self, tag) {
            (PointDoc::Flat(v), ManifoldTag::Euclidean { .. }) => {
                Ok(Point::Euclidean(as_t(v)))
            }
            (PointDoc::Flat(v), ManifoldTag::Sphere { .. }) => {
                Ok(Point::Sphere(SpherePoint::new(as_t(v))?))
            }
            (PointDoc::Flat(v), ManifoldTag::Simplex { eps, .. }) => {
                Ok(Point::Simplex(SimplexPoint::new(as_t(v), *eps)?))
            }
            (PointDoc::Mat { dim, values }, ManifoldTag::Spd { .. }) => Ok(Point::Spd(
                SpdPoint::new(SymMat::new(*dim, as_t(values))?)?,
            )),
            _ => Err(Error::invalid(
                "point document",
                "wire shape does not match the manifold tag",
            )),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDoc {
    version: String,
    kind: String,
    tag: TagDoc,
    sigma: f64,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rgd: Option<RgdConfig<f64>>,
    train_inputs: Vec<Vec<f64>>,
    train_outputs: Vec<PointDoc>,
}

fn inputs_to_doc<T: Scalar>(inputs: &InputMatrix<T>) -> Vec<Vec<f64>> {
    inputs
        .rows()
        .iter()
        .map(|r| r.iter().map(|v| v.as_f64()).collect())
        .collect()
}

fn dataset_from_docs<T: Scalar>(
    tag: TagDoc,
    inputs: Vec<Vec<f64>>,
    outputs: &[PointDoc],
) -> Result<Dataset<T>> {
    let tag: ManifoldTag<T> = tag.to_tag();
    let rows: Vec<Vec<T>> = inputs
        .into_iter()
        .map(|r| r.into_iter().map(cast).collect())
        .collect();
    let inputs = InputMatrix::new(rows)?;
    let outputs: Vec<Point<T>> = outputs.iter().map(|p| p.to_point(&tag)).collect::<Result<_>>()?;
    Dataset::new(inputs, outputs, tag)
}

/// Serialize a structured predictor. The Cholesky factor is not stored;
/// loading refits it from the inputs.
pub fn predictor_to_json<T: Scalar>(model: &PredictorModel<T>) -> Result<String> {
    let rgd = RgdConfig {
        max_iters: model.rgd().max_iters,
        grad_tol: model.rgd().grad_tol.as_f64(),
        init_step: model.rgd().init_step.as_f64(),
        armijo_c: model.rgd().armijo_c.as_f64(),
        backtrack_factor: model.rgd().backtrack_factor.as_f64(),
        max_backtracks: model.rgd().max_backtracks,
    };
    let doc = ModelDoc {
        version: MODEL_VERSION.to_string(),
        kind: "sp".to_string(),
        tag: TagDoc::from_tag(model.tag()),
        sigma: model.score_model().sigma().as_f64(),
        lambda: model.score_model().lambda().as_f64(),
        rgd: Some(rgd),
        train_inputs: inputs_to_doc(model.score_model().inputs()),
        train_outputs: model
            .train_outputs()
            .iter()
            .map(PointDoc::from_point)
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn predictor_from_json<T: Scalar>(json: &str) -> Result<PredictorModel<T>> {
    let doc: ModelDoc = serde_json::from_str(json)?;
    check_version_kind(&doc, "sp")?;
    let data = dataset_from_docs::<T>(doc.tag, doc.train_inputs, &doc.train_outputs)?;
    let r = doc
        .rgd
        .ok_or_else(|| Error::invalid("model document", "missing rgd config"))?;
    let rgd = RgdConfig {
        max_iters: r.max_iters,
        grad_tol: cast(r.grad_tol),
        init_step: cast(r.init_step),
        armijo_c: cast(r.armijo_c),
        backtrack_factor: cast(r.backtrack_factor),
        max_backtracks: r.max_backtracks,
    };
    train(&data, cast(doc.sigma), cast(doc.lambda), rgd)
}

/// Serialize a KRLS baseline model (same envelope, `kind = "krls"`; the
/// weight matrix is refit on load).
pub fn krls_to_json<T: Scalar>(model: &KrlsModel<T>) -> Result<String> {
    let doc = ModelDoc {
        version: MODEL_VERSION.to_string(),
        kind: "krls".to_string(),
        tag: TagDoc::from_tag(model.tag()),
        sigma: model.sigma().as_f64(),
        lambda: model.lambda().as_f64(),
        rgd: None,
        train_inputs: inputs_to_doc(model.score_side().inputs()),
        train_outputs: model
            .train_outputs()
            .iter()
            .map(PointDoc::from_point)
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn krls_from_json<T: Scalar>(json: &str) -> Result<KrlsModel<T>> {
    let doc: ModelDoc = serde_json::from_str(json)?;
    check_version_kind(&doc, "krls")?;
    let data = dataset_from_docs::<T>(doc.tag, doc.train_inputs, &doc.train_outputs)?;
    krls_train(&data, cast(doc.sigma), cast(doc.lambda))
}

/// Peek at the `kind` field of a model document.
pub fn model_kind(json: &str) -> Result<String> {
    #[derive(Deserialize)]
    struct Head {
        version: String,
        kind: String,
    }
    let head: Head = serde_json::from_str(json)?;
    if head.version != MODEL_VERSION {
        return Err(Error::invalid(
            "model document",
            format!("unsupported version {:?}", head.version),
        ));
    }
    Ok(head.kind)
}

fn check_version_kind(doc: &ModelDoc, kind: &str) -> Result<()> {
    if doc.version != MODEL_VERSION {
        return Err(Error::invalid(
            "model document",
            format!("unsupported version {:?}", doc.version),
        ));
    }
    if doc.kind != kind {
        return Err(Error::invalid(
            "model document",
            format!("expected kind {kind:?}, found {:?}", doc.kind),
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordDoc {
    x: Vec<f64>,
    y: PointDoc,
    tag: TagDoc,
}

/// Write a dataset as JSON lines, one `{x, y, tag}` record per sample.
pub fn dataset_to_jsonl<T: Scalar>(data: &Dataset<T>, w: &mut impl Write) -> Result<()> {
    let tag = TagDoc::from_tag(data.tag());
    for i in 0..data.n() {
        let rec = RecordDoc {
            x: data.inputs().row(i).iter().map(|v| v.as_f64()).collect(),
            y: PointDoc::from_point(&data.outputs()[i]),
            tag,
        };
        serde_json::to_writer(&mut *w, &rec)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Read a JSON-lines dataset; all records must carry the same tag.
pub fn dataset_from_jsonl<T: Scalar>(r: impl BufRead) -> Result<Dataset<T>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut outputs: Vec<PointDoc> = Vec::new();
    let mut tag: Option<TagDoc> = None;
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordDoc = serde_json::from_str(&line)?;
        match tag {
            None => tag = Some(rec.tag),
            Some(t) if t == rec.tag => {}
            Some(_) => {
                return Err(Error::invalid(
                    "dataset",
                    "records carry inconsistent manifold tags",
                ))
            }
        }
        rows.push(rec.x);
        outputs.push(rec.y);
    }
    let tag = tag.ok_or_else(|| Error::invalid("dataset", "no records"))?;
    dataset_from_docs::<T>(tag, rows, &outputs)
}

pub fn save_dataset<T: Scalar>(data: &Dataset<T>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    dataset_to_jsonl(data, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_dataset<T: Scalar>(path: &Path) -> Result<Dataset<T>> {
    let file = fs::File::open(path)?;
    dataset_from_jsonl(BufReader::new(file))
}

/// Orientation-field CSV: one `x,y,theta_radians` row per sample, mapping
/// to 2-d inputs and points on the circle `(cos theta, sin theta)`.
pub fn orientation_to_csv<T: Scalar>(data: &Dataset<T>, w: &mut impl Write) -> Result<()> {
    let ManifoldTag::Sphere { dim: 2 } = data.tag() else {
        return Err(Error::invalid(
            "orientation export",
            "dataset must live on the circle (sphere with dim 2)",
        ));
    };
    writeln!(w, "x,y,theta_radians")?;
    for i in 0..data.n() {
        let row = data.inputs().row(i);
        if row.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: row.len(),
            });
        }
        let Point::Sphere(p) = &data.outputs()[i] else { unreachable!() };
        let theta = p.coords()[1].as_f64().atan2(p.coords()[0].as_f64());
        writeln!(w, "{},{},{}", row[0].as_f64(), row[1].as_f64(), theta)?;
    }
    Ok(())
}

/// Parse an orientation-field CSV (an optional `x,y,theta_radians` header
/// is detected and skipped).
pub fn orientation_from_csv<T: Scalar>(r: impl BufRead) -> Result<Dataset<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut outputs: Vec<Point<T>> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if lineno == 0 && trimmed.chars().any(|c| c.is_ascii_alphabetic()) {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(
                "orientation csv",
                format!("line {} has {} fields, expected 3", lineno + 1, parts.len()),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid("orientation csv", format!("line {}: {e}", lineno + 1)))
        };
        let x = parse(parts[0])?;
        let y = parse(parts[1])?;
        let theta = parse(parts[2])?;
        rows.push(vec![cast(x), cast(y)]);
        outputs.push(Point::Sphere(SpherePoint::new(vec![
            cast(theta.cos()),
            cast(theta.sin()),
        ])?));
    }
    if rows.is_empty() {
        return Err(Error::invalid("orientation csv", "no records"));
    }
    Dataset::new(
        InputMatrix::new(rows)?,
        outputs,
        ManifoldTag::Sphere { dim: 2 },
    )
}

pub fn load_orientation_csv<T: Scalar>(path: &Path) -> Result<Dataset<T>> {
    let file = fs::File::open(path)?;
    orientation_from_csv(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::random_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_dataset(tag: ManifoldTag<f64>, n: usize, p: usize, seed: u64) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = InputMatrix::new(
            (0..n)
                .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
        )
        .unwrap();
        let outputs = (0..n).map(|_| random_point(&tag, &mut rng)).collect();
        Dataset::new(inputs, outputs, tag).unwrap()
    }

    #[test]
    fn jsonl_round_trip_preserves_points() {
        for tag in [
            ManifoldTag::Sphere { dim: 3 },
            ManifoldTag::Spd { dim: 2 },
            ManifoldTag::Simplex { dim: 3, eps: 1e-5 },
        ] {
            let data = toy_dataset(tag, 5, 2, 3);
            let mut buf = Vec::new();
            dataset_to_jsonl(&data, &mut buf).unwrap();
            let back: Dataset<f64> = dataset_from_jsonl(&buf[..]).unwrap();
            assert_eq!(back.n(), data.n());
            for (a, b) in back.outputs().iter().zip(data.outputs()) {
                let (av, bv) = (a.ambient(), b.ambient());
                for (x, y) in av.iter().zip(&bv) {
                    // serde_json prints shortest round-trip decimals.
                    assert!((x - y).abs() <= 1e-15 * y.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn model_version_is_checked() {
        let data = toy_dataset(ManifoldTag::Sphere { dim: 3 }, 4, 2, 5);
        let model = train(&data, 1.0, 0.1, RgdConfig::default()).unwrap();
        let json = predictor_to_json(&model).unwrap();
        assert_eq!(model_kind(&json).unwrap(), "sp");
        let bad = json.replace("\"version\": \"1\"", "\"version\": \"7\"");
        assert!(predictor_from_json::<f64>(&bad).is_err());
    }

    #[test]
    fn orientation_csv_round_trip() {
        let data = toy_dataset(ManifoldTag::Sphere { dim: 2 }, 6, 2, 9);
        let mut buf = Vec::new();
        orientation_to_csv(&data, &mut buf).unwrap();
        let back: Dataset<f64> = orientation_from_csv(&buf[..]).unwrap();
        assert_eq!(back.n(), 6);
        for (a, b) in back.outputs().iter().zip(data.outputs()) {
            for (x, y) in a.ambient().iter().zip(&b.ambient()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
