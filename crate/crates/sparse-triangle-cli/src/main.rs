//! Command-line front end: every subcommand is seeded and prints
//! deterministic CSV (or a one-line report), so identical invocations give
//! byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use sparse_triangle::{
    dca_l1_over_l2, dca_l1_over_linf, generate_problem, matrix_seed_for, montecarlo_csv,
    montecarlo_tanbeta, phi_curve, recovery_benchmark, sparse_metric_table, success_rate_sweep,
    support_staircase, sweep_csv, triangle_metrics, DcaConfig, DenseVector, Error, InnerConfig,
    MonteCarloSpec, ProblemInstance, RatioMethod, SolveTrace, SparseSignalSpec,
};

/// Comma-separated floats, or `@path` to read them from a file.
#[derive(Debug, Clone)]
struct VectorArg(Vec<f64>);

impl FromStr for VectorArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let body = match s.strip_prefix('@') {
            Some(path) => {
                fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?
            }
            None => s.to_string(),
        };
        let entries = body
            .split([',', '\n', ' '])
            .filter(|tok| !tok.trim().is_empty())
            .map(|tok| tok.trim().parse::<f64>().map_err(|e| format!("bad entry '{tok}': {e}")))
            .collect::<Result<Vec<f64>, String>>()?;
        if entries.is_empty() {
            return Err("vector must contain at least one entry".into());
        }
        Ok(VectorArg(entries))
    }
}

fn parse_method(s: &str) -> Result<RatioMethod, String> {
    s.parse()
}

#[derive(Parser)]
#[command(
    name = "sparse-triangle",
    version,
    about = "Shrinkage-curve analysis, l0/l1/linf triangle metrics, and DCA sparse recovery"
)]
struct Cli {
    /// Write the primary output to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Breakpoints of sigma -> l1 norm of the soft-thresholded vector, plus
    /// the support-count staircase sampled on a uniform sigma grid.
    Phi {
        /// Comma-separated entries, or @file.
        #[arg(long)]
        vector: VectorArg,
        /// Number of staircase samples over [0, max |y_i|].
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// One-line report of the triangle metrics of a vector.
    Triangle {
        /// Comma-separated entries, or @file.
        #[arg(long)]
        vector: VectorArg,
        /// Entries at or below this magnitude do not count as support.
        #[arg(long, default_value_t = 1e-10)]
        zero_tol: f64,
    },
    /// Arithmetic and geometric sparse-metric means on an s grid (CSV).
    Means {
        #[arg(long, default_value_t = 1.0)]
        s_min: f64,
        #[arg(long, default_value_t = 100.0)]
        s_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Seeded sparse-recovery benchmark via DCA ratio minimization (CSV).
    Recover {
        /// Signal dimension.
        #[arg(long, default_value_t = 250)]
        n: usize,
        /// Number of measurements (rows of A).
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Sparsity of the planted signal.
        #[arg(long, default_value_t = 10)]
        s: usize,
        #[arg(long, default_value = "l1-over-linf", value_parser = parse_method)]
        method: RatioMethod,
        /// Quadratic augmentation weight of the inner subproblem.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        /// Initial ratio estimate.
        #[arg(long, default_value_t = 3.0)]
        gamma0: f64,
        /// First signal seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of consecutive seeds to run, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// Relative error at or below which a run counts as a success.
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        #[arg(long, default_value_t = 50)]
        max_outer: usize,
        #[arg(long, default_value_t = 1e-6)]
        outer_tol: f64,
        #[arg(long, default_value_t = 20000)]
        inner_max_iter: usize,
        /// Fill the wall_time_s column with real timings (breaks
        /// byte-for-byte reproducibility of the output).
        #[arg(long)]
        timing: bool,
        /// Also write the per-iteration trace of the first seed to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Average tan(beta) of random s-sparse Gaussian signals per sparsity (CSV).
    Montecarlo {
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        s_min: usize,
        #[arg(long, default_value_t = 100)]
        s_max: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical recovery rate per sparsity level (CSV).
    Sweep {
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Comma-separated ascending sparsity levels.
        #[arg(long, required = true, value_delimiter = ',')]
        s_list: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value = "l1-over-linf", value_parser = parse_method)]
        method: RatioMethod,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 3.0)]
        gamma0: f64,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidInput(_) | Error::DimensionMismatch(_) => Failure::Usage(err.to_string()),
            Error::NotConverged { .. } | Error::DcaAborted { .. } => {
                Failure::Solver(err.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = init_thread_pool() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(solver_trouble) => {
            if solver_trouble {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(message)) | Err(Failure::Solver(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

/// SPARSE_TRIANGLE_THREADS caps worker parallelism; 0 or unset means auto.
fn init_thread_pool() -> Result<(), String> {
    match std::env::var("SPARSE_TRIANGLE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let count: usize = raw
                .trim()
                .parse()
                .map_err(|_| format!("SPARSE_TRIANGLE_THREADS must be an integer, got '{raw}'"))?;
            if count == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build_global()
                .map_err(|e| format!("cannot configure thread pool: {e}"))
        }
    }
}

/// Runs the subcommand; Ok(true) signals solver non-convergence (exit 1)
/// after output has still been written.
fn run(cli: Cli) -> Result<bool, Failure> {
    let mut solver_trouble = false;
    let payload = match cli.command {
        Command::Phi { vector, grid } => {
            if grid < 2 {
                return Err(Failure::Usage("grid must be at least 2".into()));
            }
            let y = DenseVector::new(vector.0).map_err(Failure::from)?;
            if y.is_zero() {
                return Err(Failure::Usage("vector must be nonzero".into()));
            }
            render_phi(&y, grid)
        }
        Command::Triangle { vector, zero_tol } => {
            let y = DenseVector::new(vector.0).map_err(Failure::from)?;
            let m = triangle_metrics(&y, zero_tol).map_err(Failure::from)?;
            format!(
                "s={} t={} tan_beta={} sin_beta={} cos_beta={} side_ab={} side_ac={} side_bc={}\n",
                m.s, m.t, m.tan_beta, m.sin_beta, m.cos_beta, m.side_ab, m.side_ac, m.side_bc
            )
        }
        Command::Means { s_min, s_max, steps } => {
            let table = sparse_metric_table(s_min, s_max, steps).map_err(Failure::from)?;
            table.to_csv()
        }
        Command::Recover {
            n,
            m,
            s,
            method,
            rho,
            gamma0,
            seed,
            seeds,
            threshold,
            max_outer,
            outer_tol,
            inner_max_iter,
            timing,
            trace,
        } => {
            if seeds == 0 {
                return Err(Failure::Usage("--seeds must be at least 1".into()));
            }
            let cfg = DcaConfig {
                rho,
                gamma0,
                max_outer,
                outer_tol,
                inner: InnerConfig { max_iter: inner_max_iter, ..InnerConfig::default() },
                ..DcaConfig::default()
            };
            let seed_list: Vec<u64> = (0..seeds as u64).map(|k| seed.wrapping_add(k)).collect();
            let report = recovery_benchmark(n, m, s, &seed_list, method, &cfg, threshold)
                .map_err(Failure::from)?;
            solver_trouble = report.any_aborted();
            if let Some(path) = trace {
                let trace_csv = first_seed_trace(n, m, s, seed, method, &cfg)?;
                fs::write(&path, trace_csv).map_err(|e| {
                    Failure::Runtime(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            report.to_csv(timing)
        }
        Command::Montecarlo { n, s_min, s_max, trials, seed } => {
            if s_min > s_max {
                return Err(Failure::Usage("--s-min must not exceed --s-max".into()));
            }
            let spec = MonteCarloSpec::new(n, (s_min..=s_max).collect(), trials, seed)
                .map_err(Failure::from)?;
            let rows = montecarlo_tanbeta(&spec).map_err(Failure::from)?;
            montecarlo_csv(&rows, trials)
        }
        Command::Sweep { n, m, s_list, trials, method, rho, gamma0, threshold, seed } => {
            let cfg = DcaConfig { rho, gamma0, ..DcaConfig::default() };
            let rows = success_rate_sweep(n, m, &s_list, trials, method, &cfg, threshold, seed)
                .map_err(Failure::from)?;
            sweep_csv(&rows, trials)
        }
    };

    match cli.output {
        Some(path) => fs::write(&path, payload)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{payload}"),
    }
    Ok(solver_trouble)
}

/// Breakpoint table of the shrinkage curve followed by the staircase CSV.
fn render_phi(y: &DenseVector, grid: usize) -> String {
    let curve = phi_curve(y);
    let mut out = String::from("breakpoint,phi,slope_right\n");
    let breakpoints = curve.breakpoints();
    let values = curve.values_at_breakpoints();
    let slopes = curve.segment_slopes();
    for (j, &b) in breakpoints.iter().enumerate() {
        // the curve is flat past sigma_max, so the last right slope is 0
        let slope = slopes.get(j).copied().unwrap_or(0);
        let _ = writeln!(out, "{},{},{}", b, values[j], slope);
    }
    out.push('\n');
    out.push_str("sigma,support_count\n");
    for (sigma, count) in support_staircase(y, grid) {
        let _ = writeln!(out, "{sigma},{count}");
    }
    out
}

/// Re-runs the first seed's solve to capture its per-iteration trace; on a
/// solver abort the partial trace is written instead.
fn first_seed_trace(
    n: usize,
    m: usize,
    s: usize,
    seed: u64,
    method: RatioMethod,
    cfg: &DcaConfig,
) -> Result<String, Failure> {
    let spec = SparseSignalSpec::new(n, s, seed).map_err(Failure::from)?;
    let problem: ProblemInstance =
        generate_problem(&spec, m, matrix_seed_for(seed)).map_err(Failure::from)?;
    let solve = match method {
        RatioMethod::L1OverLinf => dca_l1_over_linf,
        RatioMethod::L1OverL2 => dca_l1_over_l2,
    };
    let trace: SolveTrace = match solve(&problem, cfg) {
        Ok(trace) => trace,
        Err(Error::DcaAborted { partial, .. }) => *partial,
        Err(other) => return Err(Failure::from(other)),
    };
    Ok(trace.to_csv())
}
