//! Empirical scaling of the fill distance of uniform samples with `M`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{fill_distance_estimate, sample_interior, Domain};

use super::config::FillDistConfig;
use super::convergence::PROBE_STREAM;
use super::output::{write_rows, CellRecord, CellStatus, Manifest};
use super::stats::{fit_slope, median};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillDistRow {
    pub dim: usize,
    pub m: usize,
    pub seed: u64,
    pub fill_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillSlopeRow {
    pub dim: usize,
    pub slope: f64,
    pub expected: f64,
    pub intercept: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FillDistReport {
    pub rows: Vec<FillDistRow>,
    pub slopes: Vec<FillSlopeRow>,
    pub cells: Vec<CellRecord>,
}

impl FillDistReport {
    pub fn slope(&self, dim: usize) -> Option<&FillSlopeRow> {
        self.slopes.iter().find(|s| s.dim == dim)
    }

    pub fn write(&self, dir: &Path, stem: &str, mut manifest: Manifest) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let names = [format!("{stem}.csv"), format!("{stem}_slopes.csv")];
        write_rows(dir.join(&names[0]), &self.rows)?;
        write_rows(dir.join(&names[1]), &self.slopes)?;
        manifest.cells = self.cells.clone();
        manifest.outputs = names.to_vec();
        manifest.write(dir.join(format!("{stem}_manifest.json")))
    }
}

/// Fits `log median h` against `log M` per dimension.
pub fn fill_slopes_from_rows(rows: &[FillDistRow]) -> Vec<FillSlopeRow> {
    let mut grouped: BTreeMap<usize, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        grouped
            .entry(r.dim)
            .or_default()
            .entry(r.m)
            .or_default()
            .push(r.fill_distance);
    }
    grouped
        .into_iter()
        .filter_map(|(dim, by_m)| {
            let (ms, hs): (Vec<f64>, Vec<f64>) =
                by_m.iter().map(|(m, h)| (*m as f64, median(h))).unzip();
            let fit = fit_slope(&ms, &hs).ok()?;
            Some(FillSlopeRow {
                dim,
                slope: fit.slope,
                expected: -1.0 / dim as f64,
                intercept: fit.intercept,
                stderr: fit.stderr,
            })
        })
        .collect()
}

/// For each `(d, seed)` draws `max M` uniform points in `[0,1]^d` and
/// measures every prefix against one fixed probe set, so estimates are
/// nonincreasing in `M`.
pub fn run_filldist_study(cfg: &FillDistConfig) -> Result<FillDistReport> {
    cfg.validate()?;
    let m_max = *cfg.m_values.iter().max().unwrap_or(&1);
    let mut ms = cfg.m_values.clone();
    ms.sort_unstable();
    let mut report = FillDistReport::default();
    for &dim in &cfg.dims {
        let dom = Domain::cube(dim, 0.0, 1.0)?;
        for &seed in &cfg.seeds {
            let start = Instant::now();
            let pts = sample_interior(&dom, m_max, seed);
            for &m in &ms {
                let h = fill_distance_estimate(&pts[..m], &dom, cfg.probes, seed ^ PROBE_STREAM)?;
                report.rows.push(FillDistRow {
                    dim,
                    m,
                    seed,
                    fill_distance: h,
                });
            }
            let wall = start.elapsed().as_secs_f64();
            log::info!("filldist d={dim} seed={seed} ({wall:.1}s)");
            report.cells.push(CellRecord {
                label: "filldist".into(),
                dim,
                m_interior: m_max,
                seed,
                status: CellStatus::Ok,
                message: None,
                wall_seconds: wall,
            });
        }
    }
    report.slopes = fill_slopes_from_rows(&report.rows);
    Ok(report)
}
