//! Nugget-regularized Cholesky factorizations.

use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::{Mat, Par, Side};

use crate::error::{Error, Result};

/// Factor by which the nugget grows after a failed factorization.
pub const NUGGET_ESCALATION: f64 = 100.0;

/// Lower Cholesky factor of `K + η·diag(K)`.
#[derive(Clone, Debug)]
pub struct Factor {
    l: Mat<f64>,
    nugget: f64,
}

fn diag_range(k: &Mat<f64>) -> (f64, f64) {
    (0..k.nrows()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        (lo.min(k[(i, i)]), hi.max(k[(i, i)]))
    })
}

fn try_factor(k: &Mat<f64>, eta: f64, extra_diag: &[f64]) -> Option<Mat<f64>> {
    let mut a = k.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += eta * k[(i, i)] + extra_diag.get(i).copied().unwrap_or(0.0);
    }
    a.llt(Side::Lower).ok().map(|llt| llt.L().to_owned())
}

impl Factor {
    /// Factors `K + η·diag(K)`; on failure retries once with `100η`.
    pub fn new(k: &Mat<f64>, eta: f64) -> Result<Self> {
        Self::with_extra_diagonal(k, eta, &[])
    }

    /// As [`Factor::new`] with a further fixed diagonal `extra` added (not
    /// scaled by the nugget).
    pub fn with_extra_diagonal(k: &Mat<f64>, eta: f64, extra: &[f64]) -> Result<Self> {
        if k.nrows() != k.ncols() {
            return Err(Error::DimensionMismatch {
                expected: k.nrows(),
                got: k.ncols(),
            });
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nugget must be ≥ 0, got {eta}"
            )));
        }
        if let Some(l) = try_factor(k, eta, extra) {
            return Ok(Self { l, nugget: eta });
        }
        let escalated = if eta > 0.0 {
            eta * NUGGET_ESCALATION
        } else {
            f64::EPSILON
        };
        log::warn!(
            "Cholesky of a {n}x{n} Gram matrix failed with nugget {eta:e}; retrying with {escalated:e}",
            n = k.nrows()
        );
        if let Some(l) = try_factor(k, escalated, extra) {
            return Ok(Self {
                l,
                nugget: escalated,
            });
        }
        let (min_diag, max_diag) = diag_range(k);
        Err(Error::Factorization {
            size: k.nrows(),
            nugget: escalated,
            min_diag,
            max_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Nugget actually used, after any escalation.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn lower(&self) -> &Mat<f64> {
        &self.l
    }

    /// `L⁻¹ b`.
    pub fn half_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        solve_lower_triangular_in_place(self.l.as_ref(), rhs.as_mut(), Par::Seq);
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// `L⁻¹ B` column by column.
    pub fn half_solve_mat(&self, b: &Mat<f64>) -> Mat<f64> {
        let mut rhs = b.clone();
        solve_lower_triangular_in_place(self.l.as_ref(), rhs.as_mut(), Par::Seq);
        rhs
    }

    /// `(LLᵀ)⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        solve_lower_triangular_in_place(self.l.as_ref(), rhs.as_mut(), Par::Seq);
        solve_upper_triangular_in_place(self.l.transpose(), rhs.as_mut(), Par::Seq);
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// `√(bᵀ(LLᵀ)⁻¹b)`.
    pub fn norm(&self, b: &[f64]) -> f64 {
        self.half_solve(b).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
