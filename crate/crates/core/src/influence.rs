//! Row-normalized influence matrix: each individual splits one unit of
//! attention between its own opinion (weight `d`) and its neighbors
//! (weights `|S_ij|`), keeping the sign of every interaction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::SignedNetwork;

/// Slack allowed on `|x| ≤ 1` for rounding in a matrix-vector product.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    w: DMatrix<f64>,
    row_abs_sums: Vec<f64>,
    d: f64,
}

impl InfluenceMatrix {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.w
    }

    /// `|S|_i`, the row sums of `|S|` the weights were normalized by.
    pub fn row_abs_sums(&self) -> &[f64] {
        &self.row_abs_sums
    }

    pub fn self_confidence(&self) -> f64 {
        self.d
    }

    /// Largest deviation of any row sum of `|W|` from one.
    pub fn max_row_sum_error(&self) -> f64 {
        self.w
            .row_iter()
            .map(|r| (r.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Wraps a hand-written influence matrix. Rows must have a positive
    /// diagonal and `|W|` row sums of one; the implied `|S|_i` are reported
    /// on the scale `d = 1`.
    pub fn from_weights(w: DMatrix<f64>) -> Result<Self> {
        let n = w.nrows();
        if n == 0 || w.ncols() != n {
            return Err(Error::InvalidNetwork(format!("influence matrix must be square and nonempty, got {}x{}", n, w.ncols())));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite influence weight".into()));
        }
        let mut row_abs_sums = Vec::with_capacity(n);
        for i in 0..n {
            let wii = w[(i, i)];
            if !(wii > 0.0) {
                return Err(Error::InvalidNetwork(format!("self weight of row {i} is {wii}, must be positive")));
            }
            let total: f64 = w.row(i).iter().map(|v| v.abs()).sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidNetwork(format!("row {i} of |W| sums to {total}, not 1")));
            }
            row_abs_sums.push(1.0 / wii - 1.0);
        }
        Ok(Self { w, row_abs_sums, d: 1.0 })
    }
}

/// Accepted deviation of a `|W|` row sum from one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// `W_ij = S_ij/(d+|S|_i)` off the diagonal and `W_ii = d/(d+|S|_i)`.
pub fn build_influence(net: &SignedNetwork, d: f64) -> Result<InfluenceMatrix> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NonPositiveConfidence(d));
    }
    let s = net.entries();
    let n = net.n();
    let row_abs_sums = net.row_abs_sums();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let denom = d + row_abs_sums[i];
        for j in 0..n {
            w[(i, j)] = if i == j { d / denom } else { s[(i, j)] / denom };
        }
    }
    Ok(InfluenceMatrix { w, row_abs_sums, d })
}

/// Whether `W·x` stays in `[−1, 1]ⁿ`.
pub fn opinion_bound_check(w: &InfluenceMatrix, x: &DVector<f64>) -> bool {
    within_bounds(&(w.matrix() * x))
}

pub(crate) fn within_bounds(x: &DVector<f64>) -> bool {
    x.iter().all(|v| v.abs() <= 1.0 + BOUND_SLACK)
}
