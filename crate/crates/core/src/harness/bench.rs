//! Experiment orchestration: generate (or load) a dataset, cross-validate
//! both methods on their native objectives, evaluate on a held-out test
//! split, and emit machine-readable reports.

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{krls_cross_validate, krls_predict_ambient, krls_train};
use crate::error::{Error, Result};
use crate::estimator::{
    cross_validate, predict_batch, scores_for_query, train, CvGrid, CvTableEntry, Dataset,
    SplitSpec,
};
use crate::harness::gen::{
    gen_simplex_dataset, gen_sphere_toy_dataset, gen_spd_inverse_dataset, labels_from_simplex,
    INPUT_EIG_FLOOR,
};
use crate::harness::metrics::{
    mean_std, metric_angular_degrees, metric_auc, metric_delta, metric_frobenius_sq,
};
use crate::manifolds::{project_ambient, weighted_objective, ManifoldTag, Point};
use crate::persist::{load_dataset, load_orientation_csv};
use crate::rgd::RgdConfig;

/// Which benchmark task to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    SpdInverse,
    SphereToy,
    SimplexMultilabel,
    CustomFile,
}

impl TaskKind {
    pub fn parse(s: &str) -> Result<TaskKind> {
        match s {
            "spd_inverse" => Ok(TaskKind::SpdInverse),
            "sphere_toy" => Ok(TaskKind::SphereToy),
            "simplex_multilabel" => Ok(TaskKind::SimplexMultilabel),
            "custom_file" => Ok(TaskKind::CustomFile),
            other => Err(Error::invalid("task", format!("unknown task {other:?}"))),
        }
    }
}

fn default_eps() -> f64 {
    1e-5
}

fn default_input_dim() -> usize {
    3
}

/// Full experiment description; everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    /// Matrix size for SPD, coordinate count for sphere/simplex.
    pub dim: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Input dimension for the simplex task.
    #[serde(default = "default_input_dim")]
    pub input_dim: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    #[serde(default = "default_sigma_grid")]
    pub sigmas: Vec<f64>,
    #[serde(default = "default_lambda_grid")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub rgd: RgdConfig<f64>,
    pub seed: u64,
    #[serde(default)]
    pub data_path: Option<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// Seven log-spaced bandwidths over [0.1, 1000].
pub fn default_sigma_grid() -> Vec<f64> {
    log_space(0.1, 1000.0, 7)
}

/// Seven log-spaced regularizers over [1e-6, 1].
pub fn default_lambda_grid() -> Vec<f64> {
    log_space(1e-6, 1.0, 7)
}

pub fn log_space(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (llo + (lhi - llo) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

impl ExperimentConfig {
    /// Desk-scale defaults: 200/50/50 samples, the paper-range CV grids.
    pub fn desk_default(task: TaskKind, dim: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            task,
            dim,
            eps: default_eps(),
            input_dim: default_input_dim(),
            n_train: 200,
            n_val: 50,
            n_test: 50,
            sigmas: default_sigma_grid(),
            lambdas: default_lambda_grid(),
            rgd: RgdConfig::default(),
            seed,
            data_path: None,
            out_dir: None,
        }
    }

    /// Full-scale split sizes (1000/100/100).
    pub fn paper_scale(mut self) -> ExperimentConfig {
        self.n_train = 1000;
        self.n_val = 100;
        self.n_test = 100;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return Err(Error::invalid("experiment config", "split sizes must be positive"));
        }
        if self.dim == 0 {
            return Err(Error::invalid("experiment config", "dim must be >= 1"));
        }
        if self.sigmas.is_empty() || self.lambdas.is_empty() {
            return Err(Error::invalid("experiment config", "empty cv grid"));
        }
        if self.task == TaskKind::CustomFile && self.data_path.is_none() {
            return Err(Error::invalid(
                "experiment config",
                "custom_file task needs data_path",
            ));
        }
        self.rgd.validate()?;
        Ok(())
    }

    /// Generate or load the sample pool (train + val + test, in order).
    pub fn build_pool(&self) -> Result<Dataset<f64>> {
        let total = self.n_train + self.n_val + self.n_test;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.task {
            TaskKind::SpdInverse => gen_spd_inverse_dataset(self.dim, total, &mut rng),
            TaskKind::SphereToy => gen_sphere_toy_dataset(total, &mut rng),
            TaskKind::SimplexMultilabel => {
                gen_simplex_dataset(self.dim, self.input_dim, self.eps, total, &mut rng)
            }
            TaskKind::CustomFile => {
                let path = self.data_path.as_ref().expect("validated");
                let data = if path.extension().is_some_and(|e| e == "csv") {
                    load_orientation_csv::<f64>(path)?
                } else {
                    load_dataset::<f64>(path)?
                };
                if data.n() < total {
                    return Err(Error::invalid(
                        "experiment config",
                        format!("dataset has {} samples, need {}", data.n(), total),
                    ));
                }
                let idx: Vec<usize> = (0..total).collect();
                Ok(data.subset(&idx))
            }
        }
    }
}

/// Per-method evaluation summary. Standard deviations are over test
/// points; aggregation across repetitions is the caller's business.
#[derive(Debug, Clone, Serialize)]
pub struct MethodMetrics {
    pub method: String,
    pub sigma: f64,
    pub lambda: f64,
    pub frobenius_sq_mean: f64,
    pub frobenius_sq_std: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_degrees_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_degrees_std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    pub wall_clock_seconds: f64,
    /// Predictions that satisfy the manifold invariants before any
    /// projection is applied.
    pub raw_on_manifold: usize,
    /// Returned predictions that satisfy the manifold invariants.
    pub final_on_manifold: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RgdSummary {
    pub mean_iterations: f64,
    pub converged_fraction: f64,
    pub mean_final_grad_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub config: ExperimentConfig,
    pub n_test: usize,
    pub sp: MethodMetrics,
    pub krls: MethodMetrics,
    pub sp_cv_table: Vec<CvTableEntry>,
    pub krls_cv_table: Vec<CvTableEntry>,
    pub rgd_summary: RgdSummary,
    /// Test queries where the structured prediction achieves a weighted
    /// objective no worse than the projected baseline prediction.
    pub sp_objective_wins: usize,
    pub notes: Vec<String>,
}

pub const CSV_HEADER: &str = "method,metric,mean,stddev,n_test,seed";

impl BenchmarkReport {
    /// Fixed-schema CSV: `method,metric,mean,stddev,n_test,seed`, methods
    /// in (sp, krls) order, metrics in a fixed order, wall clock last.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for m in [&self.sp, &self.krls] {
            let mut push = |metric: &str, mean: f64, std: f64| {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    m.method, metric, mean, std, self.n_test, self.config.seed
                ));
            };
            push("frobenius_sq", m.frobenius_sq_mean, m.frobenius_sq_std);
            push("delta", m.delta_mean, m.delta_std);
            if let (Some(am), Some(astd)) = (m.angular_degrees_mean, m.angular_degrees_std) {
                push("angular_degrees", am, astd);
            }
            if let Some(auc) = m.auc {
                push("auc", auc, 0.0);
            }
            push("wall_clock_seconds", m.wall_clock_seconds, 0.0);
        }
        out
    }

    /// CSV with the timing rows removed; two runs with the same seed are
    /// byte-identical here.
    pub fn to_csv_without_timing(&self) -> String {
        self.to_csv()
            .lines()
            .filter(|l| !l.contains(",wall_clock_seconds,"))
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

/// Whether raw ambient coordinates already satisfy the manifold
/// invariants (no projection needed): the projection must fix them to
/// within a tight relative tolerance.
fn raw_on_manifold(tag: &ManifoldTag<f64>, raw: &[f64]) -> bool {
    match project_ambient(tag, raw) {
        Ok(p) => {
            let proj = p.ambient();
            raw.iter()
                .zip(&proj)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()))
        }
        Err(_) => false,
    }
}

/// Run the full benchmark described by `cfg`. Deterministic given the
/// config (timing aside). Artifacts (`report.csv`, `report.json`, plus
/// `cv_tables.json` flushed as soon as model selection finishes) land in
/// `cfg.out_dir` when set.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let pool = cfg.build_pool()?;
    let tag = *pool.tag();
    let n_trainval = cfg.n_train + cfg.n_val;
    let trainval_idx: Vec<usize> = (0..n_trainval).collect();
    let train_idx: Vec<usize> = (0..cfg.n_train).collect();
    let test_idx: Vec<usize> = (n_trainval..n_trainval + cfg.n_test).collect();
    let trainval = pool.subset(&trainval_idx);
    let train_set = pool.subset(&train_idx);
    let test_set = pool.subset(&test_idx);

    let grid = CvGrid {
        sigmas: cfg.sigmas.clone(),
        lambdas: cfg.lambdas.clone(),
        split: SplitSpec::HoldoutLast(cfg.n_val),
    };

    // Model selection, each method on its native objective.
    let mut cv_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0ffee);
    let (sp_sigma, sp_lambda, sp_table) = cross_validate(&trainval, &grid, &cfg.rgd, &mut cv_rng)?;
    let (kr_sigma, kr_lambda, kr_table) = krls_cross_validate(&trainval, &grid, &mut cv_rng)?;

    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        let partial = serde_json::json!({
            "sp_cv_table": sp_table,
            "krls_cv_table": kr_table,
            "sp_selected": {"sigma": sp_sigma, "lambda": sp_lambda},
            "krls_selected": {"sigma": kr_sigma, "lambda": kr_lambda},
        });
        std::fs::write(dir.join("cv_tables.json"), serde_json::to_string_pretty(&partial)?)?;
    }

    let test_queries: Vec<Vec<f64>> = (0..test_set.n())
        .map(|i| test_set.inputs().row(i).to_vec())
        .collect();

    // Structured predictor: train + predict, timed.
    let sp_start = Instant::now();
    let sp_model = train(&train_set, sp_sigma, sp_lambda, cfg.rgd.clone())?;
    let sp_preds = predict_batch(&sp_model, &test_queries)?;
    let sp_wall = sp_start.elapsed().as_secs_f64();

    // Baseline: train + raw ambient predictions + projection, timed.
    let kr_start = Instant::now();
    let kr_model = krls_train(&train_set, kr_sigma, kr_lambda)?;
    let kr_raw: Vec<Vec<f64>> = test_queries
        .par_iter()
        .map(|x| krls_predict_ambient(&kr_model, x))
        .collect::<Result<_>>()?;
    let kr_preds: Vec<Point<f64>> = kr_raw
        .iter()
        .map(|amb| project_ambient(&tag, amb))
        .collect::<Result<_>>()?;
    let kr_wall = kr_start.elapsed().as_secs_f64();

    // Per-query metrics.
    let truths = test_set.outputs();
    let mut sp_frob = Vec::with_capacity(truths.len());
    let mut sp_delta = Vec::with_capacity(truths.len());
    let mut kr_frob = Vec::with_capacity(truths.len());
    let mut kr_delta = Vec::with_capacity(truths.len());
    let mut sp_ang = Vec::new();
    let mut kr_ang = Vec::new();
    let mut sp_auc_items = Vec::new();
    let mut kr_auc_items = Vec::new();
    let mut sp_raw_ok = 0usize;
    let mut sp_final_ok = 0usize;
    let mut kr_raw_ok = 0usize;
    let mut kr_final_ok = 0usize;
    let mut objective_wins = 0usize;

    for (i, truth) in truths.iter().enumerate() {
        let sp_pred = &sp_preds[i].0;
        let kr_pred = &kr_preds[i];
        sp_frob.push(metric_frobenius_sq(&tag, sp_pred, truth)?);
        sp_delta.push(metric_delta(&tag, sp_pred, truth)?);
        kr_frob.push(metric_frobenius_sq(&tag, kr_pred, truth)?);
        kr_delta.push(metric_delta(&tag, kr_pred, truth)?);

        if sp_pred.validate_on(&tag).is_ok() {
            sp_final_ok += 1;
        }
        if raw_on_manifold(&tag, &sp_pred.ambient()) {
            sp_raw_ok += 1;
        }
        if kr_pred.validate_on(&tag).is_ok() {
            kr_final_ok += 1;
        }
        if raw_on_manifold(&tag, &kr_raw[i]) {
            kr_raw_ok += 1;
        }

        match (&tag, sp_pred, kr_pred, truth) {
            (
                ManifoldTag::Sphere { dim: 2 },
                Point::Sphere(sp),
                Point::Sphere(kp),
                Point::Sphere(tp),
            ) => {
                sp_ang.push(metric_angular_degrees(sp, tp)?);
                kr_ang.push(metric_angular_degrees(kp, tp)?);
            }
            (
                ManifoldTag::Simplex { .. },
                Point::Simplex(sp),
                Point::Simplex(kp),
                Point::Simplex(tp),
            ) => {
                let labels = labels_from_simplex(tp);
                sp_auc_items.push((sp.clone(), labels.clone()));
                kr_auc_items.push((kp.clone(), labels));
            }
            _ => {}
        }

        // The structured solver should not be beaten at its own objective
        // by the projected baseline.
        let alpha = scores_for_query(&sp_model, test_set.inputs().row(i))?;
        let f_sp = weighted_objective(&tag, sp_pred, sp_model.train_outputs(), &alpha)?;
        let f_kr = weighted_objective(&tag, kr_pred, sp_model.train_outputs(), &alpha)?;
        if f_sp <= f_kr {
            objective_wins += 1;
        }
    }

    let (sp_fm, sp_fs) = mean_std(&sp_frob);
    let (sp_dm, sp_ds) = mean_std(&sp_delta);
    let (kr_fm, kr_fs) = mean_std(&kr_frob);
    let (kr_dm, kr_ds) = mean_std(&kr_delta);

    let (sp_am, sp_as) = if sp_ang.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&sp_ang);
        (Some(m), Some(s))
    };
    let (kr_am, kr_as) = if kr_ang.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&kr_ang);
        (Some(m), Some(s))
    };
    let sp_auc = if sp_auc_items.is_empty() {
        None
    } else {
        Some(metric_auc(&sp_auc_items)?)
    };
    let kr_auc = if kr_auc_items.is_empty() {
        None
    } else {
        Some(metric_auc(&kr_auc_items)?)
    };

    let iters: Vec<f64> = sp_preds
        .iter()
        .map(|(_, t)| t.iterations_run as f64)
        .collect();
    let grads: Vec<f64> = sp_preds.iter().map(|(_, t)| t.final_grad_norm).collect();
    let converged = sp_preds.iter().filter(|(_, t)| t.converged).count();
    let rgd_summary = RgdSummary {
        mean_iterations: mean_std(&iters).0,
        converged_fraction: converged as f64 / sp_preds.len() as f64,
        mean_final_grad_norm: mean_std(&grads).0,
    };

    let mut notes = vec![
        format!(
            "synthetic SPD inputs draw eigenvalues from Uniform[{INPUT_EIG_FLOOR}, 10] \
             (floored away from zero so inverse targets stay bounded)"
        ),
        "stddev columns are over test points; aggregate across seeds externally".to_string(),
        "auc is micro-averaged over (sample, positive label, negative label) triples".to_string(),
    ];
    if matches!(tag, ManifoldTag::Simplex { .. }) {
        notes.push("multilabel relevance = probability at or above the uniform share".to_string());
    }

    let report = BenchmarkReport {
        config: cfg.clone(),
        n_test: cfg.n_test,
        sp: MethodMetrics {
            method: "sp".to_string(),
            sigma: sp_sigma,
            lambda: sp_lambda,
            frobenius_sq_mean: sp_fm,
            frobenius_sq_std: sp_fs,
            delta_mean: sp_dm,
            delta_std: sp_ds,
            angular_degrees_mean: sp_am,
            angular_degrees_std: sp_as,
            auc: sp_auc,
            wall_clock_seconds: sp_wall,
            raw_on_manifold: sp_raw_ok,
            final_on_manifold: sp_final_ok,
        },
        krls: MethodMetrics {
            method: "krls".to_string(),
            sigma: kr_sigma,
            lambda: kr_lambda,
            frobenius_sq_mean: kr_fm,
            frobenius_sq_std: kr_fs,
            delta_mean: kr_dm,
            delta_std: kr_ds,
            angular_degrees_mean: kr_am,
            angular_degrees_std: kr_as,
            auc: kr_auc,
            wall_clock_seconds: kr_wall,
            raw_on_manifold: kr_raw_ok,
            final_on_manifold: kr_final_ok,
        },
        sp_cv_table: sp_table,
        krls_cv_table: kr_table,
        rgd_summary,
        sp_objective_wins: objective_wins,
        notes,
    };

    if let Some(dir) = &cfg.out_dir {
        std::fs::write(dir.join("report.csv"), report.to_csv())?;
        std::fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg(seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk_default(TaskKind::SpdInverse, 2, seed);
        cfg.n_train = 24;
        cfg.n_val = 8;
        cfg.n_test = 8;
        cfg.sigmas = vec![5.0, 50.0];
        cfg.lambdas = vec![1e-4, 1e-2];
        cfg
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.1, 1000.0, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 0.1).abs() < 1e-12);
        assert!((g[6] - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn benchmark_smoke_and_feasibility() {
        let report = run_benchmark(&tiny_cfg(7)).unwrap();
        assert_eq!(report.sp.final_on_manifold, 8);
        assert_eq!(report.sp.raw_on_manifold, 8);
        assert_eq!(report.krls.final_on_manifold, 8);
        assert!(report.sp.delta_mean.is_finite());
        assert_eq!(report.sp_cv_table.len(), 4);
    }

    #[test]
    fn benchmark_is_deterministic_modulo_timing() {
        let a = run_benchmark(&tiny_cfg(11)).unwrap();
        let b = run_benchmark(&tiny_cfg(11)).unwrap();
        assert_eq!(a.to_csv_without_timing(), b.to_csv_without_timing());
    }

    #[test]
    fn csv_schema_is_stable() {
        let report = run_benchmark(&tiny_cfg(3)).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for line in lines {
            assert_eq!(line.split(',').count(), 6);
        }
    }
}
