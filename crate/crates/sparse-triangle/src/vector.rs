//! Real dense vectors with the norm queries used throughout the toolkit.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Default tolerance below which an entry of a computed vector counts as
/// zero. Freshly generated sparse signals carry exact zeros and should be
/// counted with a tolerance of 0 instead.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// A finite real vector of dimension >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must have dimension >= 1".into()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry {bad}")));
        }
        Ok(Self { entries })
    }

    /// All-zero vector of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be >= 1");
        Self { entries: vec![0.0; n] }
    }

    /// All-ones vector of dimension `n`.
    pub fn ones(n: usize) -> Self {
        assert!(n >= 1, "dimension must be >= 1");
        Self { entries: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Number of entries with |x_i| > zero_tol.
    pub fn norm_l0(&self, zero_tol: f64) -> usize {
        assert!(zero_tol >= 0.0, "zero_tol must be nonnegative");
        self.entries.iter().filter(|v| v.abs() > zero_tol).count()
    }

    /// Sum of absolute values.
    pub fn norm_l1(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    /// Euclidean norm.
    pub fn norm_l2(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn norm_linf(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// (l1, l2, linf) in one pass-friendly bundle.
    pub fn norms(&self) -> (f64, f64, f64) {
        (self.norm_l1(), self.norm_l2(), self.norm_linf())
    }

    /// True when every entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    pub(crate) fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.entries)
    }

    pub(crate) fn from_dvector(v: &DVector<f64>) -> Self {
        Self { entries: v.as_slice().to_vec() }
    }
}

impl AsRef<[f64]> for DenseVector {
    fn as_ref(&self) -> &[f64] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn l0_counts_entries_above_tolerance() {
        let zero = DenseVector::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(zero.norm_l0(0.0), 0);

        let dense = DenseVector::new(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(dense.norm_l0(0.0), 3);

        let screened = DenseVector::new(vec![1e-13, 5.0, 0.0]).unwrap();
        assert_eq!(screened.norm_l0(1e-12), 1);
    }

    #[test]
    fn norms_match_hand_values() {
        let x = DenseVector::new(vec![2.0, 1.0, 1.0]).unwrap();
        let (l1, l2, linf) = x.norms();
        assert_eq!(l1, 4.0);
        assert_eq!(l2, 6.0_f64.sqrt());
        assert_eq!(linf, 2.0);

        let zero = DenseVector::zeros(5);
        assert_eq!(zero.norms(), (0.0, 0.0, 0.0));

        let single = DenseVector::new(vec![-3.0]).unwrap();
        assert_eq!(single.norms(), (3.0, 3.0, 3.0));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(DenseVector::new(vec![]).is_err());
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
    }

    // linf <= l2 <= l1 <= l0 * linf on random vectors.
    #[test]
    fn norm_chain_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(1..=100);
            let entries: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let x = DenseVector::new(entries).unwrap();
            let (l1, l2, linf) = x.norms();
            let slack = 1e-12 * l1.max(1.0);
            assert!(linf <= l2 + slack);
            assert!(l2 <= l1 + slack);
            assert!(l1 <= x.norm_l0(0.0) as f64 * linf + slack);
        }
    }
}
