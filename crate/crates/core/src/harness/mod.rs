//! Benchmark harness: synthetic data generation, evaluation metrics,
//! gradient checking and experiment orchestration.

pub mod bench;
pub mod gen;
pub mod gradcheck;
pub mod metrics;

pub use bench::{
    default_lambda_grid, default_sigma_grid, log_space, run_benchmark, BenchmarkReport,
    ExperimentConfig, MethodMetrics, RgdSummary, TaskKind, CSV_HEADER,
};
pub use gen::{
    gen_simplex_dataset, gen_sphere_toy_dataset, gen_spd_inverse_dataset, haar_orthogonal,
    labels_from_simplex, INPUT_EIG_FLOOR,
};
pub use gradcheck::{
    default_gradcheck_tags, run_gradcheck, GradCheckReport, FD_STEP, FD_TOLERANCE,
};
pub use metrics::{
    mean_std, metric_angular_degrees, metric_auc, metric_delta, metric_frobenius_sq,
};
