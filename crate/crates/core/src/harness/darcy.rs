//! Parametric Darcy study: vanilla versus regularity-adapted Gaussian kernels,
//! scored against a finite-difference reference.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_interior, CollocationSet, Point};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::problems::{darcy_coefficient, make_parametric_darcy, PdeProblem};
use crate::solver::{solve, SolverConfig};

use super::config::ExperimentConfig;
use super::convergence::{run_cell, slopes_from_rows, CellSpec, ConvergenceReport};
use super::output::{write_rows, Manifest};
use super::stats::rms;

const VALIDATION_STREAM: u64 = 0x0a11_da7e_0000_0001;

/// Solution of `−(A u′)′ = x`, `u(0) = u(1) = 0` on a uniform grid.
#[derive(Clone, Debug)]
pub struct DarcyReference {
    pub u: Vec<f64>,
}

impl DarcyReference {
    pub fn grid_n(&self) -> usize {
        self.u.len() - 1
    }

    /// Piecewise-linear interpolation; `x` is clamped to `[0, 1]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.grid_n();
        let t = x.clamp(0.0, 1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let w = t - i as f64;
        (1.0 - w) * self.u[i] + w * self.u[i + 1]
    }
}

/// Conservative three-point scheme with `A` sampled at cell midpoints,
/// solved by the Thomas algorithm. `theta = (θ₀, θ₁, …, θ_p)`.
pub fn reference_darcy_1d(theta: &[f64], grid_n: usize, k_decay: f64) -> Result<DarcyReference> {
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid_n must be ≥ 16, got {grid_n}"
        )));
    }
    if theta.is_empty() {
        return Err(Error::InvalidArgument("theta must contain θ₀".into()));
    }
    let h = 1.0 / grid_n as f64;
    let mut s = Vec::with_capacity(theta.len() + 1);
    s.push(0.0);
    s.extend_from_slice(theta);
    let a: Vec<f64> = (0..grid_n)
        .map(|i| {
            s[0] = (i as f64 + 0.5) * h;
            darcy_coefficient(&s, k_decay)
        })
        .collect();
    if let Some(v) = a.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "coefficient must stay positive for a well-posed problem, got {v}"
        )));
    }

    // Row i (node i+1): −a[i] u_i + (a[i] + a[i+1]) u_{i+1} − a[i+1] u_{i+2} = h² x.
    let m = grid_n - 1;
    let mut diag: Vec<f64> = (0..m).map(|i| a[i] + a[i + 1]).collect();
    let mut rhs: Vec<f64> = (0..m).map(|i| h * h * (i + 1) as f64 * h).collect();
    for i in 1..m {
        let w = a[i] / diag[i - 1];
        diag[i] -= w * a[i];
        rhs[i] += w * rhs[i - 1];
    }
    let mut u = vec![0.0; grid_n + 1];
    u[m] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        u[i + 1] = (rhs[i] + a[i + 1] * u[i + 2]) / diag[i];
    }
    Ok(DarcyReference { u })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DarcyKernel {
    /// Isotropic in `θ` with lengthscale `base·√p`.
    Vanilla,
    /// Lengthscale `base` with weight `j^{−2k}` on `θⱼ`, `j ≥ 1`.
    Adapted,
}

impl fmt::Display for DarcyKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vanilla => "vanilla",
            Self::Adapted => "adapted",
        })
    }
}

/// Kernel on `(x, θ₀, …, θ_p)`.
pub fn darcy_kernel(
    kind: DarcyKernel,
    family: KernelFamily,
    p: usize,
    x_lengthscale: f64,
    theta_lengthscale: f64,
    k_decay: f64,
) -> Result<KernelSpec> {
    let mut ls = vec![x_lengthscale];
    let mut weights = vec![1.0];
    match kind {
        DarcyKernel::Vanilla => {
            ls.extend(std::iter::repeat_n(
                theta_lengthscale * (p as f64).sqrt(),
                p + 1,
            ));
            weights.extend(std::iter::repeat_n(1.0, p + 1));
        }
        DarcyKernel::Adapted => {
            ls.extend(std::iter::repeat_n(theta_lengthscale, p + 1));
            weights.push(1.0);
            weights.extend((1..=p).map(|j| (j as f64).powf(-2.0 * k_decay)));
        }
    }
    KernelSpec::with_weights(family, ls, weights)
}

/// Hyperparameters chosen for one `(kernel, p, M)` triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub label: String,
    pub dim: usize,
    pub m_interior: usize,
    pub x_lengthscale: f64,
    pub theta_lengthscale: f64,
    pub validation_residual: f64,
}

#[derive(Clone, Debug, Default)]
pub struct DarcyReport {
    pub convergence: ConvergenceReport,
    pub selections: Vec<SelectionRow>,
}

impl DarcyReport {
    /// Median test error of `label` at the given `p` and `M`.
    pub fn median_error(&self, label: &str, p: usize, m_interior: usize) -> Option<f64> {
        self.convergence
            .medians()
            .get(&(label.to_string(), p))?
            .iter()
            .find(|pt| pt.m_interior == m_interior)
            .map(|pt| pt.error)
    }

    pub fn write(&self, dir: &std::path::Path, stem: &str, mut manifest: Manifest) -> Result<()> {
        self.convergence.write(dir, stem, manifest.clone())?;
        let name = format!("{stem}_selection.csv");
        write_rows(dir.join(&name), &self.selections)?;
        manifest.cells = self.convergence.cells.clone();
        manifest.failed_cells = self.convergence.failed_cells();
        manifest.outputs = vec![
            format!("{stem}.csv"),
            format!("{stem}_slopes.csv"),
            format!("{stem}_timings.csv"),
            name,
        ];
        manifest.write(dir.join(format!("{stem}_manifest.json")))
    }
}

/// Reference values at `(x, θ)` points, one solve per point.
pub fn reference_values(points: &[Point], grid_n: usize, k_decay: f64) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|s| Ok(reference_darcy_1d(&s[1..], grid_n, k_decay)?.interpolate(s[0])))
        .collect()
}

/// RMS interior PDE residual on held-out points of a solve with `kernel`.
fn validation_residual(
    prob: &PdeProblem,
    colloc: &CollocationSet,
    kernel: &KernelSpec,
    solver: &SolverConfig,
    held_out: &CollocationSet,
) -> Result<f64> {
    let sol = solve(prob, colloc, kernel, solver)?;
    Ok(rms(&sol.pde_residual(prob, held_out)?))
}

fn select_lengthscales(
    cfg: &ExperimentConfig,
    prob: &PdeProblem,
    kind: DarcyKernel,
    p: usize,
    m: usize,
    k_decay: f64,
) -> Result<SelectionRow> {
    let seed = cfg.seeds[0];
    let colloc = CollocationSet::sample(&prob.domain, m, cfg.m_boundary(m), seed);
    let held_out = CollocationSet {
        interior: sample_interior(
            &prob.domain,
            cfg.darcy.validation_points,
            seed ^ VALIDATION_STREAM,
        ),
        boundary: Vec::new(),
        seed,
    };
    let mut best: Option<SelectionRow> = None;
    for &xl in &cfg.darcy.x_lengthscales {
        for &tl in &cfg.darcy.theta_lengthscales {
            let kernel = darcy_kernel(kind, cfg.kernel.family, p, xl, tl, k_decay)?;
            let score = match validation_residual(prob, &colloc, &kernel, &cfg.solver, &held_out) {
                Ok(r) if r.is_finite() => r,
                Ok(_) => continue,
                Err(e) => {
                    log::warn!("{kind} p={p} M={m} σx={xl} σθ={tl}: {e}");
                    continue;
                }
            };
            log::debug!("{kind} p={p} M={m} σx={xl} σθ={tl}: residual {score:.3e}");
            if best.as_ref().is_none_or(|b| score < b.validation_residual) {
                best = Some(SelectionRow {
                    label: kind.to_string(),
                    dim: p,
                    m_interior: m,
                    x_lengthscale: xl,
                    theta_lengthscale: tl,
                    validation_residual: score,
                });
            }
        }
    }
    best.ok_or_else(|| {
        Error::Config(format!(
            "no lengthscale candidate succeeded for {kind} p={p} M={m}"
        ))
    })
}

/// For every `p` in `cfg.dims`, selects lengthscales for both kernels by
/// held-out PDE residual on the first seed, then solves every `(M, seed)`
/// cell and scores it against [`reference_darcy_1d`].
pub fn run_param_darcy(cfg: &ExperimentConfig) -> Result<DarcyReport> {
    cfg.validate()?;
    let k_decay = match cfg.problem {
        super::config::ProblemSpec::ParametricDarcy { k_decay } => k_decay,
        ref other => {
            return Err(Error::Config(format!(
                "param-darcy needs the parametric_darcy problem, got {other:?}"
            )))
        }
    };
    if cfg.darcy.x_lengthscales.is_empty() || cfg.darcy.theta_lengthscales.is_empty() {
        return Err(Error::Config(
            "lengthscale candidate lists must be nonempty".into(),
        ));
    }
    let grid_n = cfg.darcy.reference_grid;
    let mut report = DarcyReport::default();
    for &p in &cfg.dims {
        let prob = make_parametric_darcy(p, k_decay)?;
        for kind in [DarcyKernel::Vanilla, DarcyKernel::Adapted] {
            let label = kind.to_string();
            for &m in &cfg.m_interior {
                let sel = select_lengthscales(cfg, &prob, kind, p, m, k_decay)?;
                log::info!(
                    "{label} p={p} M={m}: σx={} σθ={} (residual {:.3e})",
                    sel.x_lengthscale,
                    sel.theta_lengthscale,
                    sel.validation_residual
                );
                let kernel = darcy_kernel(
                    kind,
                    cfg.kernel.family,
                    p,
                    sel.x_lengthscale,
                    sel.theta_lengthscale,
                    k_decay,
                )?;
                report.selections.push(sel);
                for &seed in &cfg.seeds {
                    let spec = CellSpec {
                        label: &label,
                        dim: p,
                        m_interior: m,
                        m_boundary: cfg.m_boundary(m),
                        seed,
                        test_points: cfg.test_points,
                        fill_probes: cfg.fill_probes,
                    };
                    let truth = |pts: &[Point]| reference_values(pts, grid_n, k_decay);
                    let outcome = run_cell(&spec, &prob, &kernel, &cfg.solver, truth);
                    log::info!(
                        "{label} p={p} M={m} seed={seed}: error {:.3e} ({:.1}s)",
                        outcome.row.l2_error,
                        outcome.record.wall_seconds
                    );
                    report.convergence.push(outcome);
                }
            }
        }
    }
    report.convergence.slopes = slopes_from_rows(&report.convergence.rows);
    Ok(report)
}
