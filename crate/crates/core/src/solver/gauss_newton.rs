//! Gauss-Newton on the finite-dimensional collocation values `z = [φ, u]`,
//! with the constraints either relaxed into a penalty or eliminated.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use crate::error::{Error, Result};
use crate::functionals::DualFunctional;
use crate::geometry::CollocationSet;
use crate::kernels::KernelSpec;
use crate::problems::{Combiner, PdeProblem};

use super::linalg::{norm2, Factor};
use super::{
    check_inputs, relative_change, IterationRecord, Solution, SolverConfig, SolverVariant,
};

/// Maximum number of step halvings when backtracking.
const MAX_HALVINGS: usize = 20;

/// Full functional set `φ` with the block layout of each collocation point.
struct Layout<'a> {
    functionals: Vec<DualFunctional>,
    /// `(offset into z, block length, combiner, datum)` per point.
    blocks: Vec<(usize, usize, &'a Combiner, f64)>,
}

impl<'a> Layout<'a> {
    fn new(prob: &'a PdeProblem, colloc: &CollocationSet) -> Result<Self> {
        let grouped = prob.operator_functionals(colloc)?;
        let mut blocks = Vec::with_capacity(grouped.len());
        let mut offset = 0;
        for s in &colloc.interior {
            blocks.push((
                offset,
                prob.q_interior(),
                &prob.combiner_p,
                (prob.source)(s),
            ));
            offset += prob.q_interior();
        }
        for s in &colloc.boundary {
            blocks.push((
                offset,
                prob.q_boundary(),
                &prob.combiner_b,
                (prob.boundary_data)(s),
            ));
            offset += prob.q_boundary();
        }
        Ok(Self {
            functionals: grouped.into_iter().flatten().collect(),
            blocks,
        })
    }

    fn len(&self) -> usize {
        self.functionals.len()
    }

    /// `F(z) − y`.
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|&(o, q, c, y)| c.value(&z[o..o + q]) - y)
            .collect()
    }
}

fn finish(
    kernel: &KernelSpec,
    layout: Layout<'_>,
    z: Vec<f64>,
    factor: Factor,
    history: Vec<IterationRecord>,
) -> Solution {
    Solution::from_factor(kernel.clone(), layout.functionals, z, factor).with_history(history)
}

/// Minimizes `½zᵀK⁻¹z + |F(z) − y|²/(2β²)` by Gauss-Newton over the full
/// functional set.
pub fn solve_gn_relaxed(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    kernel: &KernelSpec,
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_inputs(prob, colloc, kernel, cfg)?;
    let SolverVariant::GnRelaxed { beta_relax } = cfg.variant else {
        return Err(Error::InvalidArgument(format!(
            "solve_gn_relaxed called with variant {}",
            cfg.variant
        )));
    };
    let layout = Layout::new(prob, colloc)?;
    let n = layout.len();
    let m = layout.blocks.len();
    let gram = kernel.gram(&layout.functionals)?;
    let factor = Factor::new(&gram, cfg.nugget_eta)?;
    let mut k_reg = gram.clone();
    for i in 0..n {
        k_reg[(i, i)] += factor.nugget() * gram[(i, i)];
    }

    let mut z = vec![0.0; n];
    let mut history = Vec::with_capacity(cfg.max_iters);
    for iteration in 1..=cfg.max_iters {
        // J: one sparse row per point, r = y − F(z) + Jz
        let jac: Vec<Vec<f64>> = layout
            .blocks
            .iter()
            .map(|&(o, q, c, _)| c.gradient(&z[o..o + q]))
            .collect();
        let res0 = layout.residual(&z);
        let r: Vec<f64> = layout
            .blocks
            .iter()
            .zip(&jac)
            .zip(&res0)
            .map(|((&(o, q, _, _), g), f)| {
                -f + g.iter().zip(&z[o..o + q]).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();

        // JK̃ (m × n), then S = JK̃Jᵀ
        let jk = Mat::from_fn(m, n, |row, col| {
            let (o, q, _, _) = layout.blocks[row];
            (0..q)
                .map(|t| jac[row][t] * k_reg[(o + t, col)])
                .sum::<f64>()
        });
        let s = Mat::from_fn(m, m, |a, b| {
            let (o, q, _, _) = layout.blocks[b];
            (0..q).map(|t| jac[b][t] * jk[(a, o + t)]).sum::<f64>()
        });
        let s_factor =
            Factor::with_extra_diagonal(&s, cfg.nugget_eta, &vec![beta_relax * beta_relax; m])?;
        let w = s_factor.solve(&r);
        // z' = K̃Jᵀw = (JK̃)ᵀw
        let z_full: Vec<f64> = (0..n)
            .map(|col| (0..m).map(|row| jk[(row, col)] * w[row]).sum())
            .collect();

        let base_res = norm2(&res0);
        let mut alpha = cfg.step_size;
        let mut candidate: Vec<f64>;
        let mut halvings = 0;
        loop {
            candidate = z
                .iter()
                .zip(&z_full)
                .map(|(a, b)| a + alpha * (b - a))
                .collect();
            if !cfg.backtracking
                || halvings >= MAX_HALVINGS
                || norm2(&layout.residual(&candidate)) <= base_res
            {
                break;
            }
            alpha *= 0.5;
            halvings += 1;
        }
        let update = relative_change(&candidate, &z);
        z = candidate;
        let residual_norm = norm2(&layout.residual(&z));
        let objective = factor.norm(&z).powi(2);
        log::debug!("gn_relaxed iteration {iteration}: residual {residual_norm:.3e}, step {alpha}");
        history.push(IterationRecord {
            iteration,
            residual_norm,
            update_norm: update,
            objective,
        });
        if update < cfg.convergence_tol {
            break;
        }
    }
    Ok(finish(kernel, layout, z, factor, history))
}

/// Gauss-Newton on the free values `w` with `z = F̄(w, y)` solving the
/// constraints exactly: each step minimizes `|L⁻¹(z + Gδ)|` with `G = ∂z/∂w`.
pub fn solve_gn_eliminate(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    kernel: &KernelSpec,
    cfg: &SolverConfig,
) -> Result<Solution> {
    check_inputs(prob, colloc, kernel, cfg)?;
    if !prob.has_elimination() {
        return Err(Error::UnsupportedVariant(format!(
            "gn_eliminate ({} has no elimination map)",
            prob.name
        )));
    }
    let layout = Layout::new(prob, colloc)?;
    let n = layout.len();
    let gram = kernel.gram(&layout.functionals)?;
    let factor = Factor::new(&gram, cfg.nugget_eta)?;

    // free coordinates: all but the last entry of each block
    let free: Vec<usize> = layout
        .blocks
        .iter()
        .flat_map(|&(o, q, _, _)| o..o + q - 1)
        .collect();
    let n_free = free.len();

    let lift = |w: &[f64]| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut z = vec![0.0; n];
        let mut derivs = Vec::with_capacity(layout.blocks.len());
        let mut wi = 0;
        for &(o, q, c, y) in &layout.blocks {
            let head = &w[wi..wi + q - 1];
            z[o..o + q - 1].copy_from_slice(head);
            let (last, d) = c
                .eliminate(head, y)
                .ok_or_else(|| Error::UnsupportedVariant("gn_eliminate".into()))?;
            z[o + q - 1] = last;
            derivs.push(d);
            wi += q - 1;
        }
        Ok((z, derivs))
    };

    let mut w = vec![0.0; n_free];
    let (mut z, mut derivs) = lift(&w)?;
    let mut history = Vec::with_capacity(cfg.max_iters);
    if n_free == 0 {
        history.push(IterationRecord {
            iteration: 1,
            residual_norm: norm2(&layout.residual(&z)),
            update_norm: 0.0,
            objective: factor.norm(&z).powi(2),
        });
        return Ok(finish(kernel, layout, z, factor, history));
    }

    for iteration in 1..=cfg.max_iters {
        let mut g = Mat::<f64>::zeros(n, n_free);
        let mut wi = 0;
        for (&(o, q, _, _), d) in layout.blocks.iter().zip(&derivs) {
            for h in 0..q - 1 {
                g[(o + h, wi + h)] = 1.0;
                g[(o + q - 1, wi + h)] = d[h];
            }
            wi += q - 1;
        }
        let a = factor.half_solve_mat(&g);
        let lz = factor.half_solve(&z);
        let b = Mat::from_fn(n, 1, |i, _| -lz[i]);
        let delta_mat = a.qr().solve_lstsq(&b);
        let delta: Vec<f64> = (0..n_free).map(|i| delta_mat[(i, 0)]).collect();

        let base = norm2(&lz);
        let mut alpha = cfg.step_size;
        let mut halvings = 0;
        let (w_new, z_new, d_new) = loop {
            let cand: Vec<f64> = w.iter().zip(&delta).map(|(a, b)| a + alpha * b).collect();
            let (zc, dc) = lift(&cand)?;
            if !cfg.backtracking || halvings >= MAX_HALVINGS || factor.norm(&zc) <= base {
                break (cand, zc, dc);
            }
            alpha *= 0.5;
            halvings += 1;
        };
        let update = relative_change(&z_new, &z);
        w = w_new;
        z = z_new;
        derivs = d_new;
        let objective = factor.norm(&z).powi(2);
        log::debug!(
            "gn_eliminate iteration {iteration}: objective {objective:.6e}, update {update:.3e}"
        );
        history.push(IterationRecord {
            iteration,
            residual_norm: norm2(&layout.residual(&z)),
            update_norm: update,
            objective,
        });
        if update < cfg.convergence_tol {
            break;
        }
    }
    Ok(finish(kernel, layout, z, factor, history))
}
