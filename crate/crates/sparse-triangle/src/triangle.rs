//! The l0/l1/linf triangle of a nonzero vector and the per-sparsity scalar
//! metrics derived from its angle.
//!
//! For nonzero y put A = (0, ||y||_1), B = (||y||_1/||y||_0, 0) and
//! C = (||y||_inf, 0). The angle beta at A measures the gap between the
//! norm ratio t = ||y||_1/||y||_inf and the support size s = ||y||_0:
//! tan(beta) = (s - t)/(1 + s t).

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::vector::DenseVector;

/// Side lengths and angle data of the triangle attached to one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMetrics {
    /// Support count ||y||_0 (tolerance-screened).
    pub s: usize,
    /// Norm ratio ||y||_1 / ||y||_inf, in [1, s].
    pub t: f64,
    pub side_ab: f64,
    pub side_ac: f64,
    pub side_bc: f64,
    pub sin_beta: f64,
    pub cos_beta: f64,
    pub tan_beta: f64,
}

/// Computes the triangle of a nonzero vector.
///
/// Entries with |y_i| <= zero_tol do not count toward s. A degenerate
/// triangle (t = s, so B = C and beta = 0) is returned as valid metrics.
pub fn triangle_metrics(y: &DenseVector, zero_tol: f64) -> Result<TriangleMetrics> {
    let s = y.norm_l0(zero_tol);
    if s == 0 {
        return Err(Error::InvalidInput(
            "triangle metrics require a vector with at least one entry above zero_tol".into(),
        ));
    }
    let (l1, _, linf) = y.norms();
    let t = l1 / linf;
    let s_f = s as f64;

    // s - t is nonnegative up to tolerance screening noise; snap tiny or
    // negative gaps to the degenerate triangle.
    let mut gap = s_f - t;
    if gap.abs() <= zero_tol || gap < 0.0 {
        gap = 0.0;
    }
    let denom = ((1.0 + s_f * s_f) * (1.0 + t * t)).sqrt();

    Ok(TriangleMetrics {
        s,
        t,
        side_ab: (l1 * l1 + (l1 / s_f) * (l1 / s_f)).sqrt(),
        side_ac: (l1 * l1 + linf * linf).sqrt(),
        side_bc: (linf - l1 / s_f).max(0.0),
        sin_beta: gap / denom,
        cos_beta: (1.0 + s_f * t) / denom,
        tan_beta: gap / (1.0 + s_f * t),
    })
}

/// Inverts the angle formula: recovers the support size from tan(beta) and
/// the norm ratio t as (tan(beta) + t) / (1 - tan(beta) * t).
pub fn sparsity_from_angle(tan_beta: f64, t: f64) -> Result<f64> {
    if t < 1.0 {
        return Err(Error::InvalidInput(format!("norm ratio t must be >= 1, got {t}")));
    }
    let denom = 1.0 - tan_beta * t;
    if denom <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "1 - tan_beta * t must be positive, got {denom}"
        )));
    }
    Ok((tan_beta + t) / denom)
}

fn check_sparsity_is_at_least_one(s: f64) -> Result<()> {
    if !s.is_finite() || s < 1.0 {
        return Err(Error::InvalidInput(format!("sparsity must be >= 1, got {s}")));
    }
    Ok(())
}

/// Arithmetic mean of tan(beta) over t in [1, s]:
/// (1/(s-1)) * integral of (s - t)/(1 + s t) dt, and 0 at s = 1.
///
/// Evaluated in closed form,
/// [(s^2+1) ln((1+s^2)/(1+s)) - s(s-1)] / (s^2 (s-1)).
pub fn beta_arith(s: f64) -> Result<f64> {
    check_sparsity_is_at_least_one(s)?;
    if s == 1.0 {
        return Ok(0.0);
    }
    let s2 = s * s;
    Ok(((s2 + 1.0) * ((1.0 + s2) / (1.0 + s)).ln() - s * (s - 1.0)) / (s2 * (s - 1.0)))
}

/// Width of the slice next to the singular endpoint that `beta_geom`
/// integrates with exact antiderivatives.
const GEOM_SPLIT: f64 = 1e-6;

/// Exact value of integral over [0, upper] of ln(u) - ln(1 + s(s - u)) du,
/// using u ln u - u and the antiderivative of the shifted logarithm.
fn geom_exponent_exact_piece(s: f64, upper: f64) -> f64 {
    let primitive = |w: f64| w * w.ln() - w;
    let w0 = 1.0 + s * s;
    let w1 = 1.0 + s * s - s * upper;
    let singular = if upper > 0.0 { upper * upper.ln() - upper } else { 0.0 };
    singular + (primitive(w1) - primitive(w0)) / s
}

/// Geometric mean of tan(beta) over t in [1, s]:
/// exp((1/(s-1)) * integral of ln((s - t)/(1 + s t)) dt), and 0 at s = 1.
///
/// After substituting u = s - t the integrand ln(u) - ln(1 + s(s - u)) has
/// an integrable logarithmic singularity at u = 0. The leading slice
/// (0, delta] is integrated with exact antiderivatives and the rest with
/// adaptive quadrature.
pub fn beta_geom(s: f64) -> Result<f64> {
    check_sparsity_is_at_least_one(s)?;
    if s == 1.0 {
        return Ok(0.0);
    }
    let upper = s - 1.0;
    let exponent = if upper <= GEOM_SPLIT {
        geom_exponent_exact_piece(s, upper)
    } else {
        let smooth = |u: f64| u.ln() - (1.0 + s * (s - u)).ln();
        geom_exponent_exact_piece(s, GEOM_SPLIT)
            + adaptive_simpson(&smooth, GEOM_SPLIT, upper, 1e-12)
    };
    Ok((exponent / upper).exp())
}

/// One row of the sparse-metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMetricRow {
    pub s: f64,
    pub beta_arith: f64,
    pub beta_geom: f64,
}

/// Both means tabulated on an evenly spaced sparsity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMetricTable {
    pub rows: Vec<SparseMetricRow>,
}

impl SparseMetricTable {
    /// CSV with header `s,beta_arith,beta_geom`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,beta_arith,beta_geom\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.s, row.beta_arith, row.beta_geom));
        }
        out
    }
}

/// Evaluates both means on `steps` evenly spaced values from s_from to s_to.
pub fn sparse_metric_table(s_from: f64, s_to: f64, steps: usize) -> Result<SparseMetricTable> {
    if !(1.0 <= s_from && s_from <= s_to) {
        return Err(Error::InvalidInput(format!(
            "need 1 <= s_from <= s_to, got s_from={s_from}, s_to={s_to}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    let rows = (0..steps)
        .map(|i| {
            let s = if steps == 1 {
                s_from
            } else {
                s_from + (s_to - s_from) * i as f64 / (steps - 1) as f64
            };
            Ok(SparseMetricRow { s, beta_arith: beta_arith(s)?, beta_geom: beta_geom(s)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseMetricTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn vec_of(entries: &[f64]) -> DenseVector {
        DenseVector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn metrics_of_small_example() {
        // y = (2, 1, 1): s = 3, t = 2, and the angle formulas give
        // tan = 1/7, sin = 1/sqrt(50), cos = 7/sqrt(50); BC = 2 - 4/3.
        let m = triangle_metrics(&vec_of(&[2.0, 1.0, 1.0]), 0.0).unwrap();
        assert_eq!(m.s, 3);
        assert_eq!(m.t, 2.0);
        assert!((m.tan_beta - 1.0 / 7.0).abs() < 1e-15);
        assert!((m.sin_beta - 1.0 / 50.0_f64.sqrt()).abs() < 1e-15);
        assert!((m.cos_beta - 7.0 / 50.0_f64.sqrt()).abs() < 1e-15);
        assert!((m.side_bc - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.side_ab - (16.0 + 16.0 / 9.0_f64).sqrt()).abs() < 1e-14);
        assert!((m.side_ac - 20.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn one_sparse_and_constant_vectors_are_degenerate() {
        let m = triangle_metrics(&vec_of(&[5.0, 0.0, 0.0]), 0.0).unwrap();
        assert_eq!(m.s, 1);
        assert_eq!(m.t, 1.0);
        assert_eq!(m.tan_beta, 0.0);
        assert_eq!(m.side_bc, 0.0);

        let m = triangle_metrics(&vec_of(&[1.0, 1.0, 1.0, 1.0]), 0.0).unwrap();
        assert_eq!(m.s, 4);
        assert_eq!(m.t, 4.0);
        assert_eq!(m.tan_beta, 0.0);
        assert_eq!(m.sin_beta, 0.0);
    }

    #[test]
    fn rejects_all_zero_vectors() {
        assert!(triangle_metrics(&DenseVector::zeros(3), 0.0).is_err());
        assert!(triangle_metrics(&vec_of(&[1e-14, 0.0]), 1e-10).is_err());
    }

    // The (s, t) trig formulas must agree with the same expressions written
    // in the raw norms, and satisfy the Pythagorean identity.
    #[test]
    fn trig_formulations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=60);
            let entries: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            if entries.iter().all(|v| *v == 0.0) {
                continue;
            }
            let y = vec_of(&entries);
            let m = triangle_metrics(&y, 0.0).unwrap();

            let (l1, _, linf) = y.norms();
            let l0 = y.norm_l0(0.0) as f64;
            let norm_denom = ((1.0 + 1.0 / (l0 * l0)) * (1.0 + (l1 / linf) * (l1 / linf))).sqrt();
            let sin_norms = (1.0 - l1 / (l0 * linf)) / norm_denom;
            let cos_norms = (l1 / linf + 1.0 / l0) / norm_denom;
            let tan_norms = (1.0 - l1 / (l0 * linf)) / (l1 / linf + 1.0 / l0);

            assert!((m.sin_beta - sin_norms).abs() <= 1e-12);
            assert!((m.cos_beta - cos_norms).abs() <= 1e-12);
            assert!((m.tan_beta - tan_norms).abs() <= 1e-12);
            assert!((m.sin_beta * m.sin_beta + m.cos_beta * m.cos_beta - 1.0).abs() <= 1e-12);
            assert!((m.tan_beta * m.cos_beta - m.sin_beta).abs() <= 1e-12);

            // range checks
            let bound = 1.0 / (1.0 + m.t * m.t).sqrt();
            assert!(m.sin_beta >= 0.0 && m.sin_beta <= bound + 1e-12);
            assert!(m.cos_beta >= m.t * bound - 1e-12 && m.cos_beta <= 1.0 + 1e-12);
            assert!(m.tan_beta >= 0.0 && m.tan_beta <= 1.0 / m.t + 1e-12);
        }
    }

    #[test]
    fn angle_inversion_examples() {
        assert!((sparsity_from_angle(1.0 / 7.0, 2.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(sparsity_from_angle(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(sparsity_from_angle(0.0, 7.5).unwrap(), 7.5);
        assert!(sparsity_from_angle(0.5, 2.0).is_err());
        assert!(sparsity_from_angle(0.0, 0.5).is_err());
    }

    #[test]
    fn angle_inversion_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let n = rng.random_range(2..=80);
            let s = rng.random_range(1..=n);
            let spec = crate::problem::SparseSignalSpec::new(n, s, rng.random()).unwrap();
            let y = spec.generate();
            let m = triangle_metrics(&y, 0.0).unwrap();
            let recovered = sparsity_from_angle(m.tan_beta, m.t).unwrap();
            assert!(
                (recovered - m.s as f64).abs() <= 1e-9 * m.s as f64,
                "s = {}, recovered = {recovered}",
                m.s
            );
        }
    }

    // Midpoint-rule oracle for the arithmetic-mean integral.
    fn beta_arith_midpoint(s: f64, panels: usize) -> f64 {
        if s == 1.0 {
            return 0.0;
        }
        let h = (s - 1.0) / panels as f64;
        let sum: f64 = (0..panels)
            .map(|k| {
                let t = 1.0 + (k as f64 + 0.5) * h;
                (s - t) / (1.0 + s * t)
            })
            .sum();
        sum * h / (s - 1.0)
    }

    #[test]
    fn arith_mean_matches_midpoint_oracle() {
        let oracle = beta_arith_midpoint(2.0, 1_000_000);
        let closed = beta_arith(2.0).unwrap();
        assert!((closed - oracle).abs() < 1e-9, "{closed} vs {oracle}");
        assert!((closed - 0.138532029707488).abs() < 1e-12);

        for s in [1.5, 5.0, 10.0, 50.0, 100.0] {
            let oracle = beta_arith_midpoint(s, 1_000_000);
            assert!((beta_arith(s).unwrap() - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn means_match_published_values_at_100() {
        assert!((beta_arith(100.0).unwrap() - 0.036422).abs() < 1e-5);
        assert!((beta_geom(100.0).unwrap() - 0.00944564).abs() < 1e-5);
    }

    #[test]
    fn means_vanish_at_one_and_reject_below() {
        assert_eq!(beta_arith(1.0).unwrap(), 0.0);
        assert_eq!(beta_geom(1.0).unwrap(), 0.0);
        assert!(beta_arith(0.5).is_err());
        assert!(beta_geom(0.99).is_err());
    }

    // Fully closed-form oracle for the geometric-mean exponent, obtained by
    // integrating both logarithm terms analytically over the whole interval.
    fn geom_exponent_closed(s: f64) -> f64 {
        let primitive = |w: f64| w * w.ln() - w;
        let upper = s - 1.0;
        upper * upper.ln() - upper + (primitive(1.0 + s) - primitive(1.0 + s * s)) / s
    }

    #[test]
    fn geom_mean_matches_closed_form_oracle() {
        for s in [1.0 + 1e-9, 1.0001, 1.5, 2.0, 5.0, 10.0, 50.0, 100.0, 1000.0] {
            let expect = (geom_exponent_closed(s) / (s - 1.0)).exp();
            let got = beta_geom(s).unwrap();
            // the quadrature error in the exponent is amplified by 1/(s-1)
            let tol = (1e-12 / (s - 1.0).min(1.0)).min(1e-8) * expect.max(1e-9);
            assert!((got - expect).abs() <= tol, "s = {s}: {got} vs {expect}");
        }
    }

    #[test]
    fn geometric_mean_never_exceeds_arithmetic_mean() {
        for k in 0..200 {
            let s = 1.0 + k as f64 * 0.5;
            assert!(beta_geom(s).unwrap() <= beta_arith(s).unwrap() + 1e-15);
        }
    }

    #[test]
    fn table_covers_requested_grid() {
        let table = sparse_metric_table(1.0, 100.0, 100).unwrap();
        assert_eq!(table.rows.len(), 100);
        assert_eq!(table.rows[0].s, 1.0);
        assert_eq!(table.rows[0].beta_arith, 0.0);
        let last = table.rows.last().unwrap();
        assert_eq!(last.s, 100.0);
        assert!((last.beta_arith - 0.036422).abs() < 1e-5);
        assert!((last.beta_geom - 0.0094456).abs() < 1e-5);
        for row in &table.rows {
            assert!(row.beta_geom <= row.beta_arith + 1e-15);
            assert!(row.beta_geom >= 0.0 && row.beta_arith >= 0.0);
        }

        let degenerate = sparse_metric_table(1.0, 1.0, 1).unwrap();
        assert_eq!(degenerate.rows.len(), 1);
        assert_eq!(degenerate.rows[0].beta_arith, 0.0);
        assert_eq!(degenerate.rows[0].beta_geom, 0.0);
    }

    // Each mean rises to a single peak and then decreases on the integer grid.
    #[test]
    fn means_are_unimodal_on_integer_grid() {
        for mean in [beta_arith as fn(f64) -> Result<f64>, beta_geom] {
            let values: Vec<f64> = (1..=100).map(|s| mean(s as f64).unwrap()).collect();
            let peaks = values
                .windows(3)
                .filter(|w| w[1] > w[0] && w[1] >= w[2])
                .count();
            let boundary_peak = values[0] > values[1]
                || values[values.len() - 1] > values[values.len() - 2];
            assert_eq!(peaks, 1);
            assert!(!boundary_peak);
        }
    }
}
