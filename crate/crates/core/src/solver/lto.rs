//! Linearize-then-optimize: each iteration solves the linear minimum-norm
//! problem for the PDE linearized at the previous iterate.

use crate::error::{Error, Result};
use crate::functionals::DualFunctional;
use crate::geometry::CollocationSet;
use crate::kernels::KernelSpec;
use crate::problems::{OperatorValues, PdeProblem};

use super::linalg::{norm2, Factor};
use super::{check_inputs, relative_change, IterationRecord, Solution, SolverConfig};

/// Operator values `L_q u` at every collocation point for a representer `u`.
pub(crate) fn operator_values(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    ops: &[Vec<DualFunctional>],
    sol: &Solution,
) -> Result<OperatorValues> {
    let flat: Vec<DualFunctional> = ops.iter().flatten().cloned().collect();
    let vals = sol.apply(&flat)?;
    let mut it = vals.into_iter();
    let mut take = |q: usize| -> Vec<f64> { it.by_ref().take(q).collect() };
    Ok(OperatorValues {
        interior: (0..colloc.interior.len())
            .map(|_| take(prob.q_interior()))
            .collect(),
        boundary: (0..colloc.boundary.len())
            .map(|_| take(prob.q_boundary()))
            .collect(),
    })
}

fn flatten(values: &OperatorValues) -> Vec<f64> {
    values
        .interior
        .iter()
        .chain(&values.boundary)
        .flatten()
        .copied()
        .collect()
}

pub fn solve_lto(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    kernel: &KernelSpec,
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_inputs(prob, colloc, kernel, cfg)?;
    if cfg.step_size != 1.0 || cfg.backtracking {
        return Err(Error::InvalidArgument(
            "linearize-then-optimize takes full steps; use a Gauss-Newton variant for damping"
                .into(),
        ));
    }
    let ops = prob.operator_functionals(colloc)?;
    let mut values = OperatorValues::zeros(prob.q_interior(), prob.q_boundary(), colloc);
    let mut history = Vec::with_capacity(cfg.max_iters);
    let mut current: Option<Solution> = None;

    for iteration in 1..=cfg.max_iters {
        let sys = prob.linearize(colloc, &values)?;
        let gram = kernel.gram(&sys.functionals)?;
        let factor = Factor::new(&gram, cfg.nugget_eta)?;
        let sol = Solution::from_factor(kernel.clone(), sys.functionals, sys.targets, factor);

        let new_values = operator_values(prob, colloc, &ops, &sol)?;
        let residual = prob.residual(colloc, &new_values)?;
        let update = relative_change(&flatten(&new_values), &flatten(&values));
        let objective = sol.rkhs_norm().powi(2);
        history.push(IterationRecord {
            iteration,
            residual_norm: norm2(&residual),
            update_norm: update,
            objective,
        });
        log::debug!(
            "lto iteration {iteration}: residual {:.3e}, update {update:.3e}",
            norm2(&residual)
        );
        values = new_values;
        current = Some(sol);
        if update < cfg.convergence_tol {
            break;
        }
    }
    let sol = current.ok_or(Error::InvalidArgument("no iterations performed".into()))?;
    Ok(sol.with_history(history))
}
