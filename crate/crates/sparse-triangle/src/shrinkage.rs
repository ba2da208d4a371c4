//! Soft-thresholding operator and the piecewise-linear curve
//! `phi(sigma) = ||S_sigma(y)||_1` it induces.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Componentwise soft threshold: sign(y_i) * max(|y_i| - sigma, 0).
///
/// Equals `y` at sigma = 0 and the zero vector for sigma >= ||y||_inf.
pub fn soft_threshold(y: &DenseVector, sigma: f64) -> DenseVector {
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    let entries = y
        .entries()
        .iter()
        .map(|&v| v.signum() * (v.abs() - sigma).max(0.0))
        .collect();
    DenseVector::new(entries).expect("soft threshold preserves finiteness")
}

fn check_domain(y: &DenseVector, sigma: f64) -> Result<f64> {
    if y.is_zero() {
        return Err(Error::InvalidInput("phi is defined for nonzero y only".into()));
    }
    let sigma_max = y.norm_linf();
    if !(0.0..=sigma_max).contains(&sigma) {
        return Err(Error::InvalidInput(format!(
            "sigma = {sigma} outside [0, {sigma_max}]"
        )));
    }
    Ok(sigma_max)
}

/// l1 norm of the soft-thresholded vector, evaluated by the closed
/// componentwise formula sum_i max(|y_i| - sigma, 0).
pub fn phi(y: &DenseVector, sigma: f64) -> Result<f64> {
    check_domain(y, sigma)?;
    Ok(y.entries().iter().map(|&v| (v.abs() - sigma).max(0.0)).sum())
}

/// Right derivative of `phi` at sigma: exactly -||S_sigma(y)||_0, the
/// negated count of entries with |y_i| - sigma > 0.
pub fn phi_right_derivative(y: &DenseVector, sigma: f64) -> Result<i64> {
    check_domain(y, sigma)?;
    let count = y.entries().iter().filter(|v| v.abs() - sigma > 0.0).count();
    Ok(-(count as i64))
}

/// Exact breakpoint representation of `phi` on [0, ||y||_inf].
///
/// Breakpoints are {0} union {|y_i| : y_i != 0} with ties merged; the slope
/// of the segment starting at breakpoint j is the negated support count of
/// the shrunken vector there, so slopes are nonpositive and nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiCurve {
    sigma_max: f64,
    breakpoints: Vec<f64>,
    segment_slopes: Vec<i64>,
    values_at_breakpoints: Vec<f64>,
}

impl PhiCurve {
    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// One slope per segment [b_j, b_{j+1}), so one entry fewer than
    /// `breakpoints`.
    pub fn segment_slopes(&self) -> &[i64] {
        &self.segment_slopes
    }

    pub fn values_at_breakpoints(&self) -> &[f64] {
        &self.values_at_breakpoints
    }

    /// Evaluates the piecewise-linear curve at sigma.
    pub fn eval(&self, sigma: f64) -> Result<f64> {
        if !(0.0..=self.sigma_max).contains(&sigma) {
            return Err(Error::InvalidInput(format!(
                "sigma = {sigma} outside [0, {}]",
                self.sigma_max
            )));
        }
        // index of the segment whose left breakpoint is <= sigma
        let j = match self.breakpoints.binary_search_by(|b| b.partial_cmp(&sigma).unwrap()) {
            Ok(exact) => return Ok(self.values_at_breakpoints[exact]),
            Err(ins) => ins - 1,
        };
        Ok(self.values_at_breakpoints[j] + self.segment_slopes[j] as f64 * (sigma - self.breakpoints[j]))
    }
}

/// Builds the exact breakpoint form of `phi` for a nonzero vector.
pub fn phi_curve(y: &DenseVector) -> PhiCurve {
    assert!(!y.is_zero(), "phi_curve is defined for nonzero y only");
    let mut magnitudes: Vec<f64> = y
        .entries()
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .collect();
    magnitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    magnitudes.dedup();

    let mut breakpoints = Vec::with_capacity(magnitudes.len() + 1);
    breakpoints.push(0.0);
    breakpoints.extend_from_slice(&magnitudes);

    let values_at_breakpoints: Vec<f64> = breakpoints
        .iter()
        .map(|&b| y.entries().iter().map(|&v| (v.abs() - b).max(0.0)).sum())
        .collect();
    let segment_slopes: Vec<i64> = breakpoints[..breakpoints.len() - 1]
        .iter()
        .map(|&b| -(y.entries().iter().filter(|v| v.abs() > b).count() as i64))
        .collect();

    PhiCurve {
        sigma_max: *breakpoints.last().unwrap(),
        breakpoints,
        segment_slopes,
        values_at_breakpoints,
    }
}

/// Support count ||S_sigma(y)||_0 sampled on a uniform grid over
/// [0, ||y||_inf]; the sequence is nonincreasing, starts at ||y||_0 and
/// ends at 0.
pub fn support_staircase(y: &DenseVector, grid: usize) -> Vec<(f64, usize)> {
    assert!(grid >= 2, "grid must have at least 2 points");
    let sigma_max = y.norm_linf();
    (0..grid)
        .map(|j| {
            let sigma = sigma_max * j as f64 / (grid - 1) as f64;
            let count = y.entries().iter().filter(|v| v.abs() > sigma).count();
            (sigma, count)
        })
        .collect()
}
