//! Gaussian RBF kernel and bandwidth selection.

use serde::Serialize;

use crate::data::Sample;
use crate::stats::StatError;

/// How the RBF bandwidth gets its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GammaMode {
    /// User-supplied gamma.
    Fixed,
    /// `gamma = 1/2`, the `1/(2 sigma^2)` default with `sigma = 1` on
    /// standardized data.
    UnitVarianceDefault,
    /// `gamma = 1 / (2 * median^2)` of pairwise Euclidean distances over a
    /// pooled subsample.
    MedianHeuristic,
}

/// Resolved RBF kernel configuration: `k(x, y) = exp(-gamma * ||x - y||^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConfig {
    pub gamma: f64,
    pub gamma_mode: GammaMode,
}

impl KernelConfig {
    pub fn fixed(gamma: f64) -> Result<Self, StatError> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(StatError::InvalidGamma(gamma));
        }
        Ok(KernelConfig {
            gamma,
            gamma_mode: GammaMode::Fixed,
        })
    }

    pub fn unit_variance_default() -> Self {
        KernelConfig {
            gamma: 0.5,
            gamma_mode: GammaMode::UnitVarianceDefault,
        }
    }

    /// Resolve gamma from the median heuristic over `rows`. Rows beyond
    /// `MEDIAN_HEURISTIC_MAX_ROWS` are thinned by even striding so the
    /// quadratic distance pass stays cheap and deterministic.
    pub fn median_heuristic(rows: &Sample) -> Result<Self, StatError> {
        let gamma = median_heuristic_gamma(rows)?;
        Ok(KernelConfig {
            gamma,
            gamma_mode: GammaMode::MedianHeuristic,
        })
    }
}

/// Largest subsample used by the median heuristic distance pass.
pub const MEDIAN_HEURISTIC_MAX_ROWS: usize = 512;

/// `1 / (2 * median^2)` of the pairwise Euclidean distances among an evenly
/// strided subsample of `rows`. Errors when fewer than two rows are given or
/// the median distance is zero.
pub fn median_heuristic_gamma(rows: &Sample) -> Result<f64, StatError> {
    if rows.n() < 2 {
        return Err(StatError::SampleTooSmall { n: rows.n(), min: 2 });
    }
    let stride = rows.n().div_ceil(MEDIAN_HEURISTIC_MAX_ROWS);
    let picked: Vec<&[f64]> = (0..rows.n()).step_by(stride).map(|i| rows.row(i)).collect();
    let mut dists = Vec::with_capacity(picked.len() * (picked.len() - 1) / 2);
    for i in 0..picked.len() {
        for j in (i + 1)..picked.len() {
            dists.push(squared_distance(picked[i], picked[j]).sqrt());
        }
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if median == 0.0 {
        return Err(StatError::DegenerateMedianDistance);
    }
    Ok(1.0 / (2.0 * median * median))
}

/// Squared Euclidean distance, accumulated dimension by dimension.
#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        acc += d * d;
    }
    acc
}

/// RBF kernel value in `(0, 1]`; exactly 1 iff `x == y`.
pub fn rbf_kernel(x: &[f64], y: &[f64], config: &KernelConfig) -> Result<f64, StatError> {
    if x.len() != y.len() {
        return Err(StatError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(rbf(x, y, config.gamma))
}

#[inline]
pub(crate) fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(x, y)).exp()
}
