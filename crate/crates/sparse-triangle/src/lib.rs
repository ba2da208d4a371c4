//! Sparse-recovery toolkit built around the soft-thresholding operator, the
//! l0/l1/linf triangle of a vector, and DCA solvers for l1/linf and l1/l2
//! ratio minimization under linear equality constraints, plus seeded
//! Monte-Carlo and recovery benchmarks that emit CSV.

pub mod error;
pub mod experiments;
pub mod problem;
pub mod quad;
pub mod shrinkage;
pub mod solver;
pub mod triangle;
pub mod vector;

pub use error::{Error, Result};
pub use experiments::{
    matrix_seed_for, montecarlo_csv, montecarlo_tanbeta, recovery_benchmark, success_rate_sweep,
    sweep_csv, trial_signal_seed, MonteCarloRow, MonteCarloSpec, RecoveryReport, RecoveryRow,
    SweepRow,
};
pub use problem::{
    generate_problem, ProblemInstance, SensingMatrix, SignalDistribution, SparseSignalSpec,
};
pub use shrinkage::{phi, phi_curve, phi_right_derivative, soft_threshold, support_staircase, PhiCurve};
pub use solver::{
    dca_l1_over_l2, dca_l1_over_linf, dinkelbach_alpha, inner_solve, kkt_certificate,
    linf_subgradient, relative_error, verify_certificate, DcaConfig, InitialPoint, InnerConfig,
    InnerSolution, KktResiduals, RatioMethod, SolveStatus, SolveTrace, TraceRow,
};
pub use triangle::{
    beta_arith, beta_geom, sparse_metric_table, sparsity_from_angle, triangle_metrics,
    SparseMetricRow, SparseMetricTable, TriangleMetrics,
};
pub use vector::{DenseVector, DEFAULT_ZERO_TOL};
