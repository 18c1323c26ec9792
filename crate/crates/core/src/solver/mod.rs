//! Minimum-norm collocation solvers and the representer solution they return.

mod gauss_newton;
pub mod linalg;
mod lto;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functionals::DualFunctional;
use crate::geometry::CollocationSet;
use crate::kernels::KernelSpec;
use crate::problems::PdeProblem;
pub use gauss_newton::{solve_gn_eliminate, solve_gn_relaxed};
pub use linalg::Factor;
pub use lto::solve_lto;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SolverVariant {
    Lto,
    GnEliminate,
    GnRelaxed { beta_relax: f64 },
}

impl std::fmt::Display for SolverVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Lto => write!(f, "lto"),
            Self::GnEliminate => write!(f, "gn_eliminate"),
            Self::GnRelaxed { beta_relax } => write!(f, "gn_relaxed(beta={beta_relax})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub variant: SolverVariant,
    /// Relative nugget: `η·diag(K)` is added to the Gram matrix.
    pub nugget_eta: f64,
    pub max_iters: usize,
    /// Gauss-Newton step length in `(0, 1]`.
    pub step_size: f64,
    /// Stop once the relative change between successive iterates is below
    /// this; `0` runs all `max_iters` iterations.
    pub convergence_tol: f64,
    /// Halve the Gauss-Newton step while the residual increases.
    pub backtracking: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            variant: SolverVariant::Lto,
            nugget_eta: 1e-10,
            max_iters: 3,
            step_size: 1.0,
            convergence_tol: 0.0,
            backtracking: false,
        }
    }
}

impl SolverConfig {
    pub fn with_variant(variant: SolverVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nugget_eta.is_finite() && self.nugget_eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nugget_eta must be > 0, got {}",
                self.nugget_eta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be ≥ 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "step_size must lie in (0, 1], got {}",
                self.step_size
            )));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidArgument("convergence_tol must be ≥ 0".into()));
        }
        if let SolverVariant::GnRelaxed { beta_relax } = self.variant {
            if !(beta_relax.is_finite() && beta_relax > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "beta_relax must be > 0, got {beta_relax}"
                )));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `|F(z) − y|₂` over all collocation points after the iteration.
    pub residual_norm: f64,
    /// Relative change of the collocation values `z`.
    pub update_norm: f64,
    /// `zᵀ(K + η diag K)⁻¹z` after the iteration.
    pub objective: f64,
}

/// `u(s) = K(s, φ) c` with `c = (K(φ, φ) + η diag K)⁻¹ z`.
#[derive(Clone, Debug)]
pub struct Solution {
    kernel: KernelSpec,
    functionals: Vec<DualFunctional>,
    targets: Vec<f64>,
    coefficients: Vec<f64>,
    factor: Arc<Factor>,
    history: Vec<IterationRecord>,
}

impl Solution {
    /// Minimum-norm interpolant of `targets` under `functionals`.
    pub fn interpolate(
        kernel: &KernelSpec,
        functionals: Vec<DualFunctional>,
        targets: Vec<f64>,
        eta: f64,
    ) -> Result<Self> {
        check_dim(functionals.len(), targets.len())?;
        if functionals.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let gram = kernel.gram(&functionals)?;
        let factor = Factor::new(&gram, eta)?;
        Ok(Self::from_factor(
            kernel.clone(),
            functionals,
            targets,
            factor,
        ))
    }

    pub(crate) fn from_factor(
        kernel: KernelSpec,
        functionals: Vec<DualFunctional>,
        targets: Vec<f64>,
        factor: Factor,
    ) -> Self {
        let coefficients = factor.solve(&targets);
        Self {
            kernel,
            functionals,
            targets,
            coefficients,
            factor: Arc::new(factor),
            history: Vec::new(),
        }
    }

    pub(crate) fn with_history(mut self, history: Vec<IterationRecord>) -> Self {
        self.history = history;
        self
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn functionals(&self) -> &[DualFunctional] {
        &self.functionals
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    /// Nugget used in the final factorization.
    pub fn nugget(&self) -> f64 {
        self.factor.nugget()
    }

    /// `u(s)` at each point.
    pub fn evaluate(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let rows = points
            .iter()
            .map(|p| {
                check_dim(self.kernel.dimension(), p.len())?;
                Ok(DualFunctional::point_eval(p.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.apply(&rows)
    }

    /// `(u(s), ∇u(s))` at each point.
    pub fn evaluate_gradient(&self, points: &[Vec<f64>]) -> Result<Vec<(f64, Vec<f64>)>> {
        self.kernel
            .representer_value_and_gradient(points, &self.functionals, &self.coefficients)
    }

    /// `[F, u]` for each functional `F`.
    pub fn apply(&self, rows: &[DualFunctional]) -> Result<Vec<f64>> {
        self.kernel
            .apply_cross(rows, &self.functionals, &self.coefficients)
    }

    /// `F(z) − y` of this solution at every point of `colloc`, interior
    /// rows first.
    pub fn pde_residual(&self, prob: &PdeProblem, colloc: &CollocationSet) -> Result<Vec<f64>> {
        let ops = prob.operator_functionals(colloc)?;
        let values = lto::operator_values(prob, colloc, &ops, self)?;
        prob.residual(colloc, &values)
    }

    /// `√(zᵀ(K + η diag K)⁻¹z)`, the nugget-regularized RKHS norm.
    pub fn rkhs_norm(&self) -> f64 {
        self.factor.norm(&self.targets)
    }
}

/// Dispatches on `cfg.variant`.
pub fn solve(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    kernel: &KernelSpec,
    cfg: &SolverConfig,
) -> Result<Solution> {
    match cfg.variant {
        SolverVariant::Lto => solve_lto(prob, colloc, kernel, cfg),
        SolverVariant::GnRelaxed { .. } => solve_gn_relaxed(prob, colloc, kernel, cfg),
        SolverVariant::GnEliminate => solve_gn_eliminate(prob, colloc, kernel, cfg),
    }
}

pub(crate) fn check_inputs(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    kernel: &KernelSpec,
    cfg: &SolverConfig,
) -> Result<()> {
    cfg.validate()?;
    check_dim(prob.dimension(), kernel.dimension())?;
    if colloc.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in colloc.all_points() {
        check_dim(prob.dimension(), p.len())?;
    }
    let needed = 2 * prob.max_order();
    let budget = kernel.family().derivative_budget();
    if needed > budget {
        return Err(Error::UnsupportedOrder {
            family: kernel.family().to_string(),
            requested: needed,
            budget,
        });
    }
    Ok(())
}

/// Relative change `|a − b| / max(|b|, 1e−300)`.
pub(crate) fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff: f64 = new
        .iter()
        .zip(old)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let base = linalg::norm2(new).max(1e-300);
    diff / base
}
