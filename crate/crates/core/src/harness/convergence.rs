//! Manufactured-solution convergence studies.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fill_distance_estimate, sample_interior, CollocationSet, Point};
use crate::kernels::KernelSpec;
use crate::problems::PdeProblem;
use crate::solver::{solve, Solution, SolverConfig};

use super::config::ExperimentConfig;
use super::output::{write_rows, CellRecord, CellStatus, Manifest};
use super::stats::{fit_slope, median, rms_diff};

/// Seed offsets deriving independent test and probe streams from a cell seed.
pub(crate) const TEST_STREAM: u64 = 0x7e57_0000_0000_0001;
pub(crate) const PROBE_STREAM: u64 = 0xf111_0000_0000_0001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub label: String,
    pub dim: usize,
    pub m_interior: usize,
    pub m_boundary: usize,
    pub seed: u64,
    pub l2_error: f64,
    pub fill_distance: f64,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub label: String,
    pub dim: usize,
    pub m_interior: usize,
    pub seed: u64,
    pub wall_seconds: f64,
}

/// Log-log fit of median error against `m` (collocation count) or `h`
/// (median fill distance).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub label: String,
    pub dim: usize,
    pub variable: String,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_points: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub slopes: Vec<SlopeRow>,
    pub timings: Vec<TimingRow>,
    pub cells: Vec<CellRecord>,
}

/// Median error and fill distance per collocation count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianPoint {
    pub m_interior: usize,
    pub error: f64,
    pub fill_distance: f64,
}

/// Per-`(label, dim)` medians over successful rows, sorted by `m_interior`.
pub fn medians(rows: &[ConvergenceRow]) -> BTreeMap<(String, usize), Vec<MedianPoint>> {
    let mut grouped: BTreeMap<(String, usize), BTreeMap<usize, (Vec<f64>, Vec<f64>)>> =
        BTreeMap::new();
    for r in rows.iter().filter(|r| r.status == CellStatus::Ok.as_str()) {
        let e = grouped
            .entry((r.label.clone(), r.dim))
            .or_default()
            .entry(r.m_interior)
            .or_default();
        e.0.push(r.l2_error);
        e.1.push(r.fill_distance);
    }
    grouped
        .into_iter()
        .map(|(k, by_m)| {
            let pts = by_m
                .into_iter()
                .map(|(m, (errs, hs))| MedianPoint {
                    m_interior: m,
                    error: median(&errs),
                    fill_distance: median(&hs),
                })
                .collect();
            (k, pts)
        })
        .collect()
}

/// Slope fits from rows; identical whether rows come from memory or a CSV.
pub fn slopes_from_rows(rows: &[ConvergenceRow]) -> Vec<SlopeRow> {
    let mut out = Vec::new();
    for ((label, dim), pts) in medians(rows) {
        let pts: Vec<_> = pts
            .into_iter()
            .filter(|p| p.error > 0.0 && p.error.is_finite())
            .collect();
        let errs: Vec<f64> = pts.iter().map(|p| p.error).collect();
        let ms: Vec<f64> = pts.iter().map(|p| p.m_interior as f64).collect();
        let hs: Vec<f64> = pts.iter().map(|p| p.fill_distance).collect();
        for (variable, xs) in [("m", &ms), ("h", &hs)] {
            if let Ok(fit) = fit_slope(xs, &errs) {
                out.push(SlopeRow {
                    label: label.clone(),
                    dim,
                    variable: variable.into(),
                    slope: fit.slope,
                    intercept: fit.intercept,
                    stderr: fit.stderr,
                    n_points: xs.len(),
                });
            }
        }
    }
    out
}

impl ConvergenceReport {
    pub fn slope(&self, label: &str, dim: usize, variable: &str) -> Option<&SlopeRow> {
        self.slopes
            .iter()
            .find(|s| s.label == label && s.dim == dim && s.variable == variable)
    }

    pub fn medians(&self) -> BTreeMap<(String, usize), Vec<MedianPoint>> {
        medians(&self.rows)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.status == CellStatus::Failed)
            .count()
    }

    /// Writes `<stem>.csv`, `<stem>_slopes.csv`, `<stem>_timings.csv` and
    /// `<stem>_manifest.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str, mut manifest: Manifest) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let names = [
            format!("{stem}.csv"),
            format!("{stem}_slopes.csv"),
            format!("{stem}_timings.csv"),
        ];
        write_rows(dir.join(&names[0]), &self.rows)?;
        write_rows(dir.join(&names[1]), &self.slopes)?;
        write_rows(dir.join(&names[2]), &self.timings)?;
        manifest.cells = self.cells.clone();
        manifest.failed_cells = self.failed_cells();
        manifest.outputs = names.to_vec();
        manifest.write(dir.join(format!("{stem}_manifest.json")))
    }
}

/// Collocation set, solve, and error for one cell.
pub(crate) struct CellOutcome {
    pub row: ConvergenceRow,
    pub record: CellRecord,
}

pub(crate) struct CellSpec<'a> {
    pub label: &'a str,
    pub dim: usize,
    pub m_interior: usize,
    pub m_boundary: usize,
    pub seed: u64,
    pub test_points: usize,
    pub fill_probes: usize,
}

pub(crate) fn run_cell<F>(
    spec: &CellSpec<'_>,
    prob: &PdeProblem,
    kernel: &KernelSpec,
    solver: &SolverConfig,
    truth: F,
) -> CellOutcome
where
    F: Fn(&[Point]) -> Result<Vec<f64>>,
{
    let start = Instant::now();
    let colloc = CollocationSet::sample(&prob.domain, spec.m_interior, spec.m_boundary, spec.seed);
    let result = (|| -> Result<(f64, f64)> {
        let sol = solve(prob, &colloc, kernel, solver)?;
        let error = test_error(&sol, prob, spec, &truth)?;
        let h = fill_distance_estimate(
            &colloc.interior,
            &prob.domain,
            spec.fill_probes,
            spec.seed ^ PROBE_STREAM,
        )?;
        Ok((error, h))
    })();
    let wall = start.elapsed().as_secs_f64();
    let (status, message, error, h) = match result {
        Ok((e, h)) => (CellStatus::Ok, None, e, h),
        Err(err) => {
            log::error!(
                "{} d={} M={} seed={} failed: {err}",
                spec.label,
                spec.dim,
                spec.m_interior,
                spec.seed
            );
            (
                CellStatus::Failed,
                Some(err.to_string()),
                f64::NAN,
                f64::NAN,
            )
        }
    };
    CellOutcome {
        row: ConvergenceRow {
            label: spec.label.into(),
            dim: spec.dim,
            m_interior: spec.m_interior,
            m_boundary: spec.m_boundary,
            seed: spec.seed,
            l2_error: error,
            fill_distance: h,
            status: status.as_str().into(),
        },
        record: CellRecord {
            label: spec.label.into(),
            dim: spec.dim,
            m_interior: spec.m_interior,
            seed: spec.seed,
            status,
            message,
            wall_seconds: wall,
        },
    }
}

/// Root-mean-square error on fresh uniform interior points.
fn test_error<F>(sol: &Solution, prob: &PdeProblem, spec: &CellSpec<'_>, truth: &F) -> Result<f64>
where
    F: Fn(&[Point]) -> Result<Vec<f64>>,
{
    let pts = sample_interior(&prob.domain, spec.test_points, spec.seed ^ TEST_STREAM);
    let approx = sol.evaluate(&pts)?;
    let exact = truth(&pts)?;
    Ok(rms_diff(&approx, &exact))
}

impl ConvergenceReport {
    pub(crate) fn push(&mut self, outcome: CellOutcome) {
        self.timings.push(TimingRow {
            label: outcome.row.label.clone(),
            dim: outcome.row.dim,
            m_interior: outcome.row.m_interior,
            seed: outcome.row.seed,
            wall_seconds: outcome.record.wall_seconds,
        });
        self.rows.push(outcome.row);
        self.cells.push(outcome.record);
    }
}

/// Solves every `(d, M, seed)` cell against the problem's manufactured
/// solution and fits convergence slopes.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let label = cfg.kernel.family.to_string();
    let mut report = ConvergenceReport::default();
    for &dim in &cfg.dims {
        let prob = cfg.problem.build(dim)?;
        let u_star = prob.true_solution.clone().ok_or_else(|| {
            Error::Config(format!(
                "{} has no manufactured solution; use param-darcy",
                prob.name
            ))
        })?;
        let kernel = cfg.kernel.build(dim)?;
        for &m in &cfg.m_interior {
            for &seed in &cfg.seeds {
                let spec = CellSpec {
                    label: &label,
                    dim,
                    m_interior: m,
                    m_boundary: cfg.m_boundary(m),
                    seed,
                    test_points: cfg.test_points,
                    fill_probes: cfg.fill_probes,
                };
                let truth = |pts: &[Point]| Ok(pts.iter().map(|p| u_star.value(p)).collect());
                let outcome = run_cell(&spec, &prob, &kernel, &cfg.solver, truth);
                log::info!(
                    "{label} d={dim} M={m} seed={seed}: error {:.3e}, h {:.3e} ({:.1}s)",
                    outcome.row.l2_error,
                    outcome.row.fill_distance,
                    outcome.record.wall_seconds
                );
                report.push(outcome);
            }
        }
    }
    report.slopes = slopes_from_rows(&report.rows);
    Ok(report)
}
