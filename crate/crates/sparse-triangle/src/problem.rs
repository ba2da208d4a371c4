//! Sensing matrices, random sparse test signals, and linear-system instances.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Dense m x n real matrix used as the measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    data: DMatrix<f64>,
}

impl SensingMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be >= 1".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry {bad}")));
        }
        Ok(Self { data: DMatrix::from_row_slice(rows, cols, &entries) })
    }

    /// Matrix with i.i.d. standard Gaussian entries, filled row by row from
    /// a ChaCha8 stream seeded with `seed`.
    pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self { data: DMatrix::from_row_slice(rows, cols, &entries) })
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[(row, col)]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    /// Standard matrix-vector product.
    pub fn matvec(&self, x: &DenseVector) -> Result<DenseVector> {
        if x.len() != self.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns but vector has length {}",
                self.ncols(),
                x.len()
            )));
        }
        Ok(DenseVector::from_dvector(&(&self.data * x.to_dvector())))
    }

    pub(crate) fn dmatrix(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Distribution of the nonzero entries of a generated sparse signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalDistribution {
    #[default]
    StandardGaussian,
}

/// Recipe for an exactly s-sparse random signal of dimension n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSignalSpec {
    pub dimension: usize,
    pub sparsity: usize,
    pub seed: u64,
    pub distribution: SignalDistribution,
}

impl SparseSignalSpec {
    pub fn new(dimension: usize, sparsity: usize, seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if sparsity == 0 || sparsity > dimension {
            return Err(Error::InvalidInput(format!(
                "sparsity must satisfy 1 <= s <= n, got s={sparsity}, n={dimension}"
            )));
        }
        Ok(Self { dimension, sparsity, seed, distribution: SignalDistribution::StandardGaussian })
    }

    /// Draws the signal: support chosen by shuffling [0, n) and keeping the
    /// first s indices, values drawn i.i.d. from the declared distribution.
    pub fn generate(&self) -> DenseVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut indices: Vec<usize> = (0..self.dimension).collect();
        indices.shuffle(&mut rng);
        let mut entries = vec![0.0; self.dimension];
        for &idx in indices.iter().take(self.sparsity) {
            let mut value: f64 = rng.sample(StandardNormal);
            // an exact-zero draw would break the exact-sparsity invariant
            while value == 0.0 {
                value = rng.sample(StandardNormal);
            }
            entries[idx] = value;
        }
        DenseVector::new(entries).expect("generated entries are finite")
    }
}

/// A linear system b = A x with an optional ground-truth signal.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub matrix: SensingMatrix,
    pub measurement: DenseVector,
    pub truth: Option<DenseVector>,
}

impl ProblemInstance {
    /// Consistency bound enforced when a ground truth is attached.
    pub const CONSISTENCY_TOL: f64 = 1e-10;

    pub fn new(
        matrix: SensingMatrix,
        measurement: DenseVector,
        truth: Option<DenseVector>,
    ) -> Result<Self> {
        if measurement.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "measurement has length {} but matrix has {} rows",
                measurement.len(),
                matrix.nrows()
            )));
        }
        if let Some(t) = &truth {
            if t.len() != matrix.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "truth has length {} but matrix has {} columns",
                    t.len(),
                    matrix.ncols()
                )));
            }
            let residual = (matrix.dmatrix() * t.to_dvector() - measurement.to_dvector()).norm();
            let bound = Self::CONSISTENCY_TOL * measurement.norm_l2().max(1.0);
            if residual > bound {
                return Err(Error::InvalidInput(format!(
                    "truth is inconsistent with the measurement: |A t - b| = {residual:.3e}"
                )));
            }
        }
        Ok(Self { matrix, measurement, truth })
    }
}

/// Builds a random recovery instance: Gaussian A (from `matrix_seed`),
/// s-sparse Gaussian truth (from `spec`), and b = A * truth.
pub fn generate_problem(
    spec: &SparseSignalSpec,
    measurements: usize,
    matrix_seed: u64,
) -> Result<ProblemInstance> {
    let matrix = SensingMatrix::gaussian(measurements, spec.dimension, matrix_seed)?;
    let truth = spec.generate();
    let measurement = matrix.matvec(&truth)?;
    ProblemInstance::new(matrix, measurement, Some(truth))
}
