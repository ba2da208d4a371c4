//! Equality-constrained inner subproblem solver and the two DCA outer loops
//! for l1/linf and l1/l2 ratio minimization.
//!
//! The inner subproblem is
//!
//! ```text
//! minimize ||x||_1 + (rho/2) ||x - v||_2^2   subject to A x = b.
//! ```
//!
//! It is solved by operator splitting: a soft-threshold proximal step on the
//! l1 term, an affine projection onto {A x = b} (A A^T is factored once per
//! problem and reused), and a dual ascent update. Accepted solutions are
//! certified, not trusted: a solution passes when `||A x - b||_2 <=
//! feas_tol * max(1, ||b||_2)` and there exist a multiplier `nu` and a
//! subgradient `g` (g_i = sign(x_i) on the support, g_i in [-1, 1] off it)
//! with `||g + rho (x - v) + A^T nu||_inf <= kkt_tol`, where `nu` comes from
//! a least-squares fit of the stationarity residual.

use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::Cholesky;
use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::problem::{ProblemInstance, SensingMatrix};
use crate::vector::{DenseVector, DEFAULT_ZERO_TOL};

/// Which norm ratio the DCA minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMethod {
    L1OverLinf,
    L1OverL2,
}

impl fmt::Display for RatioMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioMethod::L1OverLinf => write!(f, "l1-over-linf"),
            RatioMethod::L1OverL2 => write!(f, "l1-over-l2"),
        }
    }
}

impl FromStr for RatioMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l1-over-linf" => Ok(RatioMethod::L1OverLinf),
            "l1-over-l2" => Ok(RatioMethod::L1OverL2),
            other => Err(format!("unknown method '{other}' (expected l1-over-linf or l1-over-l2)")),
        }
    }
}

/// Tunables of the inner splitting iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerConfig {
    /// Splitting penalty coupling the proximal and projection blocks.
    pub penalty: f64,
    pub max_iter: usize,
    /// Relative feasibility tolerance: accepted x satisfies
    /// ||A x - b|| <= feas_tol * max(1, ||b||).
    pub feas_tol: f64,
    /// Bound on the stationarity residual of the KKT certificate.
    pub kkt_tol: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self { penalty: 1.0, max_iter: 20_000, feas_tol: 1e-8, kkt_tol: 1e-6 }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.penalty > 0.0
            && self.penalty.is_finite()
            && self.max_iter > 0
            && self.feas_tol > 0.0
            && self.kkt_tol > 0.0;
        if !all_positive {
            return Err(Error::InvalidInput("inner config fields must all be positive".into()));
        }
        Ok(())
    }
}

/// Starting point of the outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPoint {
    AllOnes,
    Custom(DenseVector),
}

/// Configuration of the DCA outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DcaConfig {
    /// Quadratic augmentation weight of the inner subproblem.
    pub rho: f64,
    /// Initial ratio estimate gamma_0.
    pub gamma0: f64,
    pub max_outer: usize,
    /// Stop when ||x_{k+1} - x_k|| / max(1, ||x_k||) falls below this.
    pub outer_tol: f64,
    pub inner: InnerConfig,
    pub x0: InitialPoint,
}

impl Default for DcaConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            gamma0: 3.0,
            max_outer: 50,
            outer_tol: 1e-6,
            inner: InnerConfig::default(),
            x0: InitialPoint::AllOnes,
        }
    }
}

impl DcaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInput("rho must be positive".into()));
        }
        if !(self.gamma0 >= 1.0 && self.gamma0.is_finite()) {
            return Err(Error::InvalidInput("gamma0 must be >= 1".into()));
        }
        if self.max_outer == 0 || self.outer_tol.is_nan() || self.outer_tol <= 0.0 {
            return Err(Error::InvalidInput("max_outer and outer_tol must be positive".into()));
        }
        if let InitialPoint::Custom(x0) = &self.x0 {
            if x0.is_zero() {
                return Err(Error::InvalidInput("custom initial point must be nonzero".into()));
            }
        }
        self.inner.validate()
    }
}

/// Termination state of a DCA run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Converged => write!(f, "converged"),
            SolveStatus::MaxIterations => write!(f, "max-iterations"),
        }
    }
}

/// One outer iteration of a DCA run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// Ratio of the iterate, clamped to its admissible range before reuse.
    pub gamma: f64,
    /// Raw ratio objective at the iterate.
    pub objective: f64,
    /// Relative error against the ground truth, when one is attached.
    pub rel_err: Option<f64>,
    pub inner_kkt_residual: f64,
    /// ||A x_k - b||_2 at the iterate.
    pub feasibility: f64,
}

/// Per-iteration record of a DCA run plus the final iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    pub solution: DenseVector,
    pub status: SolveStatus,
}

impl SolveTrace {
    /// CSV with header `k,gamma,objective,rel_err,kkt_residual,feasibility`;
    /// the rel_err column is empty when no ground truth was available.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,gamma,objective,rel_err,kkt_residual,feasibility\n");
        for row in &self.rows {
            let rel = row.rel_err.map(|e| e.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.k, row.gamma, row.objective, rel, row.inner_kkt_residual, row.feasibility
            ));
        }
        out
    }

    pub fn outer_iterations(&self) -> usize {
        self.rows.len()
    }
}

/// Residuals of the inner-solution certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// ||A x - b||_2 (absolute).
    pub feasibility: f64,
    /// ||g + rho (x - v) + A^T nu||_inf for the fitted multiplier nu.
    pub stationarity: f64,
}

/// A certified solution of the inner subproblem, together with the
/// multiplier that witnesses its stationarity.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub x: DenseVector,
    /// Equality-constraint multiplier nu of the certificate.
    pub multiplier: DenseVector,
    pub feasibility: f64,
    pub stationarity: f64,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// Inner subproblem machinery
// ---------------------------------------------------------------------------

/// Affine projection onto {x : A x = b} with A A^T factored once.
struct EqualityProjector {
    a: DMatrix<f64>,
    b: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    /// max(1, ||b||_2), the scale of the relative feasibility bound.
    feas_scale: f64,
}

impl EqualityProjector {
    fn new(matrix: &SensingMatrix, b: &DenseVector) -> Result<Self> {
        if b.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "measurement has length {} but matrix has {} rows",
                b.len(),
                matrix.nrows()
            )));
        }
        let a = matrix.dmatrix().clone();
        let gram = &a * a.transpose();
        let chol = Cholesky::new(gram).ok_or_else(|| {
            Error::InvalidInput("sensing matrix must have full row rank (A A^T is not positive definite)".into())
        })?;
        let bv = b.to_dvector();
        let feas_scale = bv.norm().max(1.0);
        Ok(Self { a, b: bv, chol, feas_scale })
    }

    fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        let residual = &self.a * y - &self.b;
        y - self.a.tr_mul(&self.chol.solve(&residual))
    }
}

fn soft_threshold_vec(w: &DVector<f64>, t: f64) -> DVector<f64> {
    w.map(|wi| wi.signum() * (wi.abs() - t).max(0.0))
}

/// Min-norm least-squares solution of `design * nu ~ rhs` via SVD.
fn least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let svd = design.clone().svd(true, true);
    let cutoff = (svd.singular_values.max() * 1e-13).max(f64::MIN_POSITIVE);
    svd.solve(rhs, cutoff).expect("svd was computed with u and v_t")
}

/// ||A||_F^2, an upper bound on the largest eigenvalue of A A^T.
fn frobenius_sq(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Stationarity residual ||g + h + A^T nu||_inf given p = h + A^T nu, with
/// the subgradient g completed optimally: fixed to sign(x_i) on the support,
/// clamped to [-1, 1] elsewhere.
fn stationarity_from_p(p: &DVector<f64>, support_sign: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, &sign) in support_sign.iter().enumerate() {
        let r = if sign != 0.0 { (sign + p[i]).abs() } else { (p[i].abs() - 1.0).max(0.0) };
        worst = worst.max(r);
    }
    worst
}

fn stationarity_residual(
    a: &DMatrix<f64>,
    h: &DVector<f64>,
    support_sign: &[f64],
    nu: &DVector<f64>,
) -> f64 {
    stationarity_from_p(&(h + a.tr_mul(nu)), support_sign)
}

/// Estimate of the largest eigenvalue of A A^T by power iteration, used to
/// size dual-ascent steps. Falls back to the Frobenius bound when the
/// iteration degenerates.
fn spectral_sq_estimate(a: &DMatrix<f64>) -> f64 {
    let m = a.nrows();
    let mut w = DVector::repeat(m, 1.0 / (m as f64).sqrt());
    let mut lambda = 0.0_f64;
    for _ in 0..40 {
        let next = a * a.tr_mul(&w);
        lambda = next.norm();
        if lambda <= f64::MIN_POSITIVE {
            return frobenius_sq(a).max(f64::MIN_POSITIVE);
        }
        w = next / lambda;
    }
    lambda.max(f64::MIN_POSITIVE)
}

/// Best multiplier found for the stationarity residual of `x`, scanning the
/// provided hints, a least-squares fit of the support equations with
/// violated-box refinement, and (when still above `kkt_tol`) gradient ascent
/// on the Lagrangian dual, whose optima all certify the exact minimizer.
#[allow(clippy::too_many_arguments)]
fn fit_multiplier(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    v: &DVector<f64>,
    rho: f64,
    h: &DVector<f64>,
    support_sign: &[f64],
    kkt_tol: f64,
    hints: &[&DVector<f64>],
) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let m = a.nrows();
    let support: Vec<usize> = (0..n).filter(|&i| support_sign[i] != 0.0).collect();

    let mut best_nu = DVector::zeros(m);
    let mut best = stationarity_residual(a, h, support_sign, &best_nu);
    let consider = |nu: &DVector<f64>, best: &mut f64, best_nu: &mut DVector<f64>| {
        let residual = stationarity_residual(a, h, support_sign, nu);
        if residual < *best {
            *best = residual;
            *best_nu = nu.clone();
        }
        residual
    };

    for hint in hints {
        consider(hint, &mut best, &mut best_nu);
    }

    if best > kkt_tol {
        let fit = |rows: &[usize], targets: &DVector<f64>| -> DVector<f64> {
            let design = DMatrix::from_fn(rows.len(), m, |r, c| a[(c, rows[r])]);
            least_squares(&design, targets)
        };

        // Support equations sign(x_i) + h_i + a_i^T nu = 0, then re-fits
        // with violated off-support boxes pulled to their nearest boundary;
        // the min-norm support solution alone can violate them badly when
        // |support| < m.
        let support_targets: Vec<f64> =
            support.iter().map(|&i| -(support_sign[i] + h[i])).collect();
        if !support.is_empty() {
            let mut nu = fit(&support, &DVector::from_column_slice(&support_targets));
            consider(&nu, &mut best, &mut best_nu);
            for _ in 0..8 {
                if best <= kkt_tol.min(1e-12) {
                    break;
                }
                let p = h + a.tr_mul(&nu);
                let mut rows = support.clone();
                let mut targets = support_targets.clone();
                let mut violations = 0;
                for i in 0..n {
                    if support_sign[i] == 0.0 && p[i].abs() > 1.0 {
                        rows.push(i);
                        targets.push(p[i].signum() - h[i]);
                        violations += 1;
                    }
                }
                if violations == 0 {
                    break;
                }
                nu = fit(&rows, &DVector::from_vec(targets));
                consider(&nu, &mut best, &mut best_nu);
            }
        }
    }

    if best > kkt_tol {
        // Walk toward a dual optimum: the dual gradient is A x(nu) - b with
        // x(nu) the prox point S_{1/rho}(v - A^T nu / rho).
        let step = rho / spectral_sq_estimate(a);
        let mut nu = best_nu.clone();
        for iter in 1..=800 {
            let x_nu = soft_threshold_vec(&(v - a.tr_mul(&nu) / rho), 1.0 / rho);
            nu += step * (a * x_nu - b);
            if iter % 25 == 0 || iter == 800 {
                let residual = consider(&nu, &mut best, &mut best_nu);
                if residual <= 0.5 * kkt_tol {
                    break;
                }
            }
        }
    }

    (best_nu, best)
}

fn classify_support(x: &DVector<f64>, zero_tol: f64) -> Vec<f64> {
    x.iter().map(|&xi| if xi.abs() > zero_tol { xi.signum() } else { 0.0 }).collect()
}

#[allow(clippy::too_many_arguments)]
fn certificate_impl(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    v: &DVector<f64>,
    rho: f64,
    x: &DVector<f64>,
    zero_tol: f64,
    kkt_tol: f64,
    hints: &[&DVector<f64>],
) -> (KktResiduals, DVector<f64>) {
    let feasibility = (a * x - b).norm();
    let h = rho * (x - v);
    let support_sign = classify_support(x, zero_tol);
    let (nu, stationarity) =
        fit_multiplier(a, b, v, rho, &h, &support_sign, kkt_tol, hints);
    (KktResiduals { feasibility, stationarity }, nu)
}

/// Checks the KKT certificate of a candidate solution of the inner
/// subproblem, fitting the multiplier from scratch; `feasibility` is
/// returned as an absolute l2 residual.
pub fn kkt_certificate(
    matrix: &SensingMatrix,
    b: &DenseVector,
    v: &DenseVector,
    rho: f64,
    x: &DenseVector,
    zero_tol: f64,
) -> Result<KktResiduals> {
    if b.len() != matrix.nrows() || v.len() != matrix.ncols() || x.len() != matrix.ncols() {
        return Err(Error::DimensionMismatch(
            "certificate inputs must match the matrix shape".into(),
        ));
    }
    let (residuals, _) = certificate_impl(
        matrix.dmatrix(),
        &b.to_dvector(),
        &v.to_dvector(),
        rho,
        &x.to_dvector(),
        zero_tol,
        InnerConfig::default().kkt_tol,
        &[],
    );
    Ok(residuals)
}

/// Evaluates the certificate residuals of (x, nu) directly, with no fitting:
/// the subgradient is sign(x_i) on the support and the clamp of
/// -(rho (x_i - v_i) + a_i^T nu) elsewhere.
pub fn verify_certificate(
    matrix: &SensingMatrix,
    b: &DenseVector,
    v: &DenseVector,
    rho: f64,
    x: &DenseVector,
    multiplier: &DenseVector,
    zero_tol: f64,
) -> Result<KktResiduals> {
    if b.len() != matrix.nrows()
        || v.len() != matrix.ncols()
        || x.len() != matrix.ncols()
        || multiplier.len() != matrix.nrows()
    {
        return Err(Error::DimensionMismatch(
            "certificate inputs must match the matrix shape".into(),
        ));
    }
    let a = matrix.dmatrix();
    let xv = x.to_dvector();
    let feasibility = (a * &xv - b.to_dvector()).norm();
    let h = rho * (&xv - v.to_dvector());
    let support_sign = classify_support(&xv, zero_tol);
    let stationarity = stationarity_residual(a, &h, &support_sign, &multiplier.to_dvector());
    Ok(KktResiduals { feasibility, stationarity })
}

/// Solves the support-restricted KKT system exactly for a trial support and
/// sign pattern: on the support, rho (x - v) + sign + A_S^T nu = 0 together
/// with A_S x_S = b; off the support x is zero. With the right support this
/// reproduces the exact minimizer regardless of which least-squares
/// multiplier the singular system returns.
fn polish(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    v: &DVector<f64>,
    rho: f64,
    support: &[usize],
    signs: &[f64],
) -> (DVector<f64>, DVector<f64>) {
    let n = a.ncols();
    let m = a.nrows();
    if support.is_empty() {
        return (DVector::zeros(n), DVector::zeros(m));
    }
    let k = support.len();
    let a_s = DMatrix::from_fn(m, k, |r, c| a[(r, support[c])]);
    let v_s = DVector::from_fn(k, |r, _| v[support[r]]);
    let sigma = DVector::from_column_slice(signs);
    let gram = &a_s * a_s.transpose();
    let rhs = rho * (&a_s * &v_s - b) - &a_s * &sigma;
    let nu = least_squares(&gram, &rhs);
    let x_s = v_s - (sigma + a_s.tr_mul(&nu)) / rho;
    let mut x = DVector::zeros(n);
    for (slot, &i) in support.iter().enumerate() {
        x[i] = x_s[slot];
    }
    (x, nu)
}

struct AdmmState {
    z: DVector<f64>,
    u: DVector<f64>,
}

struct CandidateTracker {
    feas_bound: f64,
    kkt_tol: f64,
    best: Option<(DVector<f64>, KktResiduals)>,
}

impl CandidateTracker {
    fn score(&self, res: &KktResiduals) -> f64 {
        (res.feasibility / self.feas_bound).max(res.stationarity / self.kkt_tol)
    }

    fn offer(&mut self, x: &DVector<f64>, res: KktResiduals) -> bool {
        let better = match &self.best {
            None => true,
            Some((_, old)) => self.score(&res) < self.score(old),
        };
        if better {
            self.best = Some((x.clone(), res));
        }
        self.score(&res) <= 1.0
    }
}

fn inner_solve_impl(
    proj: &EqualityProjector,
    v: &DVector<f64>,
    rho: f64,
    cfg: &InnerConfig,
    warm: Option<AdmmState>,
) -> std::result::Result<(InnerSolution, AdmmState), Error> {
    let n = proj.a.ncols();
    let mut lam = cfg.penalty;
    let feas_bound = cfg.feas_tol * proj.feas_scale;

    let mut state = match warm {
        Some(s) if s.z.len() == n => s,
        _ => AdmmState { z: DVector::zeros(n), u: DVector::zeros(n) },
    };
    let mut tracker = CandidateTracker { feas_bound, kkt_tol: cfg.kkt_tol, best: None };

    for iter in 1..=cfg.max_iter {
        let xhat = (rho * v + lam * (&state.z - &state.u)) / (rho + lam);
        let x = proj.project(&xhat);
        let w = &x + &state.u;
        let z_new = soft_threshold_vec(&w, 1.0 / lam);
        let primal = (&x - &z_new).amax();
        let dual = lam * (&z_new - &state.z).amax();
        state.u = w - &z_new;
        state.z = z_new;

        let scale = x.amax().max(1.0);
        let deep = primal.max(dual) <= 1e-12 * scale;
        if !(iter % 25 == 0 || deep || iter == cfg.max_iter) {
            continue;
        }

        // Residual balancing: a lopsided primal/dual pair means the penalty
        // is mistuned for the data scale and the iteration crawls.
        if iter % 25 == 0 && !deep {
            let bounds = (cfg.penalty * 1e-6, cfg.penalty * 1e6);
            if primal > 10.0 * dual && lam < bounds.1 {
                lam *= 2.0;
                state.u /= 2.0;
            } else if dual > 10.0 * primal && lam > bounds.0 {
                lam /= 2.0;
                state.u *= 2.0;
            }
        }

        // Three candidates, sparse ones first:
        //  - the prox point of a multiplier fitted to the dual state by
        //    least squares over all stationarity rows (A A^T nu = A c); the
        //    prox structure makes its stationarity residual vanish for its
        //    own multiplier, so only feasibility is at stake;
        //  - the exact solve on the support suggested by the sparse iterate;
        //  - the projected iterate itself.
        let c = -(lam * &state.u + rho * (&state.z - v));
        let nu_dual = proj.chol.solve(&(&proj.a * c));
        let dual_point = soft_threshold_vec(&(v - proj.a.tr_mul(&nu_dual) / rho), 1.0 / rho);

        let support: Vec<usize> = (0..n).filter(|&i| state.z[i] != 0.0).collect();
        let signs: Vec<f64> = support.iter().map(|&i| state.z[i].signum()).collect();
        let (polished, nu_polish) = polish(&proj.a, &proj.b, v, rho, &support, &signs);

        for (candidate, hints) in [
            (&dual_point, [&nu_dual, &nu_polish]),
            (&polished, [&nu_polish, &nu_dual]),
            (&x, [&nu_dual, &nu_polish]),
        ] {
            // cheap gate first: fitting a multiplier is pointless while the
            // candidate is not even feasible
            let feasibility = (&proj.a * candidate - &proj.b).norm();
            if feasibility > feas_bound {
                continue;
            }
            let (res, nu) = certificate_impl(
                &proj.a,
                &proj.b,
                v,
                rho,
                candidate,
                DEFAULT_ZERO_TOL,
                cfg.kkt_tol,
                &hints,
            );
            if tracker.offer(candidate, res) {
                let solution = InnerSolution {
                    x: DenseVector::from_dvector(candidate),
                    multiplier: DenseVector::from_dvector(&nu),
                    feasibility: res.feasibility,
                    stationarity: res.stationarity,
                    iterations: iter,
                };
                return Ok((solution, state));
            }
        }
        if tracker.best.is_none() {
            // keep something reportable even while infeasible
            let res = KktResiduals {
                feasibility: (&proj.a * &x - &proj.b).norm(),
                stationarity: f64::INFINITY,
            };
            tracker.best = Some((x.clone(), res));
        }
    }

    let (best_x, best_res) = tracker.best.expect("final iteration always offers candidates");
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        feasibility: best_res.feasibility,
        stationarity: best_res.stationarity,
        best: DenseVector::from_dvector(&best_x),
    })
}

/// Solves `min ||x||_1 + (rho/2) ||x - v||_2^2 s.t. A x = b` and certifies
/// the result; see the module docs for the certificate.
pub fn inner_solve(
    matrix: &SensingMatrix,
    b: &DenseVector,
    v: &DenseVector,
    rho: f64,
    cfg: &InnerConfig,
) -> Result<InnerSolution> {
    cfg.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput("rho must be positive".into()));
    }
    if v.len() != matrix.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "pull point has length {} but matrix has {} columns",
            v.len(),
            matrix.ncols()
        )));
    }
    let proj = EqualityProjector::new(matrix, b)?;
    inner_solve_impl(&proj, &v.to_dvector(), rho, cfg, None).map(|(sol, _)| sol)
}

// ---------------------------------------------------------------------------
// Outer DCA loops
// ---------------------------------------------------------------------------

/// A deterministic element of the linf-norm subdifferential: sign(x_j) e_j
/// for the lowest index j attaining max |x_i| within zero_tol. The result
/// satisfies <xi, x> = ||x||_inf and ||xi||_1 = 1.
pub fn linf_subgradient(x: &DenseVector, zero_tol: f64) -> Result<DenseVector> {
    let linf = x.norm_linf();
    if linf == 0.0 {
        return Err(Error::InvalidInput(
            "the linf subdifferential selection requires a nonzero vector".into(),
        ));
    }
    let j = x
        .entries()
        .iter()
        .position(|v| v.abs() >= linf - zero_tol)
        .expect("some entry attains the maximum");
    let mut entries = vec![0.0; x.len()];
    entries[j] = x.entries()[j].signum();
    Ok(DenseVector::new(entries).expect("unit basis vector is finite"))
}

/// Ratio coefficient of the parameterized difference problem:
/// (beta_s + t) / (1 - beta_s t) with t = ||x||_1 / ||x||_inf.
pub fn dinkelbach_alpha(x: &DenseVector, beta_s: f64) -> Result<f64> {
    if beta_s.is_nan() || beta_s < 0.0 {
        return Err(Error::InvalidInput("beta_s must be nonnegative".into()));
    }
    if x.is_zero() {
        return Err(Error::InvalidInput("x must be nonzero".into()));
    }
    let t = x.norm_l1() / x.norm_linf();
    let denom = 1.0 - beta_s * t;
    if denom <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "1 - beta_s * t must be positive, got {denom}"
        )));
    }
    Ok((beta_s + t) / denom)
}

/// ||recovered - truth||_2 / ||truth||_2.
pub fn relative_error(recovered: &DenseVector, truth: &DenseVector) -> Result<f64> {
    if recovered.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "recovered has length {} but truth has length {}",
            recovered.len(),
            truth.len()
        )));
    }
    let truth_norm = truth.norm_l2();
    if truth_norm == 0.0 {
        return Err(Error::InvalidInput("truth must be nonzero".into()));
    }
    let diff: f64 = recovered
        .entries()
        .iter()
        .zip(truth.entries())
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    Ok(diff.sqrt() / truth_norm)
}

fn run_dca(problem: &ProblemInstance, cfg: &DcaConfig, method: RatioMethod) -> Result<SolveTrace> {
    cfg.validate()?;
    if problem.measurement.is_zero() {
        return Err(Error::InvalidInput("dca requires a nonzero measurement b".into()));
    }
    let n = problem.matrix.ncols();
    let proj = EqualityProjector::new(&problem.matrix, &problem.measurement)?;
    let gamma_cap = match method {
        RatioMethod::L1OverLinf => n as f64,
        RatioMethod::L1OverL2 => (n as f64).sqrt(),
    };

    let mut x: DVector<f64> = match &cfg.x0 {
        InitialPoint::AllOnes => DVector::repeat(n, 1.0),
        InitialPoint::Custom(x0) => {
            if x0.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "initial point has length {} but the problem has {n} columns",
                    x0.len()
                )));
            }
            x0.to_dvector()
        }
    };
    let mut gamma = cfg.gamma0.clamp(1.0, gamma_cap);
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut warm: Option<AdmmState> = None;
    let mut status = SolveStatus::MaxIterations;

    for k in 1..=cfg.max_outer {
        let pull: DVector<f64> = match method {
            RatioMethod::L1OverLinf => {
                let xi = linf_subgradient(&DenseVector::from_dvector(&x), DEFAULT_ZERO_TOL)?;
                xi.to_dvector()
            }
            RatioMethod::L1OverL2 => &x / x.norm(),
        };
        let v = &x + (gamma / cfg.rho) * pull;

        let (inner, admm_state) = match inner_solve_impl(&proj, &v, cfg.rho, &cfg.inner, warm.take())
        {
            Ok(ok) => ok,
            Err(source) => {
                let partial = SolveTrace {
                    rows,
                    solution: DenseVector::from_dvector(&x),
                    status: SolveStatus::MaxIterations,
                };
                return Err(Error::DcaAborted {
                    outer: k,
                    partial: Box::new(partial),
                    source: Box::new(source),
                });
            }
        };
        warm = Some(admm_state);

        let x_new = inner.x.to_dvector();
        let l1 = inner.x.norm_l1();
        let objective = match method {
            RatioMethod::L1OverLinf => l1 / inner.x.norm_linf(),
            RatioMethod::L1OverL2 => l1 / inner.x.norm_l2(),
        };
        gamma = objective.clamp(1.0, gamma_cap);
        let rel_err = match &problem.truth {
            Some(truth) => Some(relative_error(&inner.x, truth)?),
            None => None,
        };
        rows.push(TraceRow {
            k,
            gamma,
            objective,
            rel_err,
            inner_kkt_residual: inner.stationarity,
            feasibility: inner.feasibility,
        });

        let step = (&x_new - &x).norm() / x.norm().max(1.0);
        x = x_new;
        if step <= cfg.outer_tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    Ok(SolveTrace { rows, solution: DenseVector::from_dvector(&x), status })
}

/// DCA for min ||x||_1 / ||x||_inf s.t. A x = b: each outer step solves the
/// inner subproblem at v = x_k + (gamma_k / rho) xi_k with xi_k a linf
/// subgradient, then updates gamma_{k+1} = ||x_{k+1}||_1 / ||x_{k+1}||_inf.
pub fn dca_l1_over_linf(problem: &ProblemInstance, cfg: &DcaConfig) -> Result<SolveTrace> {
    run_dca(problem, cfg, RatioMethod::L1OverLinf)
}

/// DCA for min ||x||_1 / ||x||_2 s.t. A x = b: the pull direction is
/// x_k / ||x_k||_2 and gamma tracks the l1/l2 ratio.
pub fn dca_l1_over_l2(problem: &ProblemInstance, cfg: &DcaConfig) -> Result<SolveTrace> {
    run_dca(problem, cfg, RatioMethod::L1OverL2)
}
