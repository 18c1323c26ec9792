//! HJB runs over a list of lengthscales.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hjb::{solve_hjb, HjbConfig, HjbResult};

use super::config::HjbRunConfig;
use super::output::{write_rows, CellRecord, CellStatus, Manifest};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HjbRow {
    pub sigma: f64,
    pub value: f64,
    /// `|V − V_ref| / |V_ref|`; NaN without a reference.
    pub rel_error: f64,
    pub status: String,
}

#[derive(Clone, Debug, Default)]
pub struct HjbReport {
    pub rows: Vec<HjbRow>,
    pub results: Vec<Option<HjbResult>>,
    pub cells: Vec<CellRecord>,
}

impl HjbReport {
    pub fn row(&self, sigma: f64) -> Option<&HjbRow> {
        self.rows.iter().find(|r| r.sigma == sigma)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.status == CellStatus::Failed)
            .count()
    }

    /// `<stem>.csv`, one `<stem>_sigma<σ>_steps.csv` per successful run, and
    /// the manifest.
    pub fn write(&self, dir: &Path, stem: &str, mut manifest: Manifest) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut outputs = vec![format!("{stem}.csv")];
        write_rows(dir.join(&outputs[0]), &self.rows)?;
        for (row, res) in self.rows.iter().zip(&self.results) {
            if let Some(res) = res {
                let name = format!("{stem}_sigma{}_steps.csv", row.sigma);
                res.write_diagnostics_csv(dir.join(&name))?;
                outputs.push(name);
            }
        }
        manifest.cells = self.cells.clone();
        manifest.failed_cells = self.failed_cells();
        manifest.outputs = outputs;
        manifest.write(dir.join(format!("{stem}_manifest.json")))
    }
}

pub fn run_hjb(cfg: &HjbRunConfig) -> Result<HjbReport> {
    cfg.base.validate()?;
    let mut report = HjbReport::default();
    for &sigma in &cfg.sigmas {
        let run = HjbConfig {
            sigma,
            ..cfg.base.clone()
        };
        let start = Instant::now();
        let result = solve_hjb(&run);
        let wall = start.elapsed().as_secs_f64();
        let (value, status, message) = match &result {
            Ok(r) => (r.value, CellStatus::Ok, None),
            Err(e) => {
                log::error!("hjb σ={sigma} failed: {e}");
                (f64::NAN, CellStatus::Failed, Some(e.to_string()))
            }
        };
        let rel_error = cfg
            .reference
            .map_or(f64::NAN, |r| (value - r).abs() / r.abs());
        log::info!("hjb σ={sigma}: V = {value:.6}, relative error {rel_error:.3e} ({wall:.1}s)");
        report.rows.push(HjbRow {
            sigma,
            value,
            rel_error,
            status: status.as_str().into(),
        });
        report.results.push(result.ok());
        report.cells.push(CellRecord {
            label: format!("sigma={sigma}"),
            dim: run.d,
            m_interior: run.n_paths,
            seed: run.seed,
            status,
            message,
            wall_seconds: wall,
        });
    }
    Ok(report)
}
