//! JSON experiment configurations with desk-scale and full-scale presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hjb::HjbConfig;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::problems::{
    make_darcy_tanh, make_nonlinear_elliptic, make_parametric_darcy, PdeProblem,
};
use crate::solver::SolverConfig;

/// Built-in problem selected by name; `dim` comes from the experiment's
/// dimension list (spatial `d`, or parameter count `p` for Darcy).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum ProblemSpec {
    NonlinearElliptic { beta: f64 },
    DarcyTanh { beta_tau: f64 },
    ParametricDarcy { k_decay: f64 },
}

impl ProblemSpec {
    pub fn build(&self, dim: usize) -> Result<PdeProblem> {
        match self {
            Self::NonlinearElliptic { beta } => make_nonlinear_elliptic(dim, *beta),
            Self::DarcyTanh { beta_tau } => make_darcy_tanh(dim, *beta_tau),
            Self::ParametricDarcy { k_decay } => make_parametric_darcy(dim, *k_decay),
        }
    }
}

/// Isotropic kernel with lengthscale `lengthscale`, times `√d` if
/// `scale_sqrt_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub lengthscale: f64,
    #[serde(default)]
    pub scale_sqrt_dim: bool,
}

impl KernelConfig {
    pub fn lengthscale_for(&self, dim: usize) -> f64 {
        if self.scale_sqrt_dim {
            self.lengthscale * (dim as f64).sqrt()
        } else {
            self.lengthscale
        }
    }

    pub fn build(&self, dim: usize) -> Result<KernelSpec> {
        KernelSpec::isotropic(self.family, dim, self.lengthscale_for(dim))
    }
}

/// Settings specific to the parametric Darcy comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DarcyOptions {
    /// Candidate lengthscales in `x`.
    pub x_lengthscales: Vec<f64>,
    /// Candidate base lengthscales in `θ`; the vanilla kernel multiplies them
    /// by `√p`, the adapted kernel uses them with weights `j^{−2k}`.
    pub theta_lengthscales: Vec<f64>,
    /// Held-out interior points scoring each candidate by PDE residual.
    pub validation_points: usize,
    /// Intervals of the finite-difference reference solve.
    pub reference_grid: usize,
}

impl Default for DarcyOptions {
    fn default() -> Self {
        Self {
            x_lengthscales: vec![0.2, 0.3, 0.5],
            theta_lengthscales: vec![0.5, 1.0, 2.0, 4.0],
            validation_points: 400,
            reference_grid: 1024,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub kernel: KernelConfig,
    /// Spatial dimensions, or parameter counts for parametric Darcy.
    pub dims: Vec<usize>,
    pub m_interior: Vec<usize>,
    /// `M_∂ = round(ratio · M_Ω)`.
    pub boundary_ratio: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub test_points: usize,
    #[serde(default = "default_probes")]
    pub fill_probes: usize,
    #[serde(default)]
    pub darcy: DarcyOptions,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_probes() -> usize {
    100_000
}

impl ExperimentConfig {
    /// Elliptic `u³` study: `d = 2`, Matérn 7/2, `σ = 0.25√d`, solves iterated
    /// to convergence.
    pub fn elliptic_desk() -> Self {
        Self {
            problem: ProblemSpec::NonlinearElliptic { beta: 1.0 },
            kernel: KernelConfig {
                family: KernelFamily::Matern { nu: 3.5 },
                lengthscale: 0.25,
                scale_sqrt_dim: true,
            },
            dims: vec![2],
            m_interior: vec![250, 500, 1000, 2000],
            boundary_ratio: 0.2,
            seeds: (0..5).collect(),
            // Three steps from zero leave a Newton error near 1e-2 here, which
            // hides the discretization error; iterate to convergence instead.
            solver: SolverConfig {
                max_iters: 10,
                convergence_tol: 1e-8,
                ..SolverConfig::default()
            },
            test_points: 1000,
            fill_probes: default_probes(),
            darcy: DarcyOptions::default(),
            output_dir: None,
        }
    }

    /// The larger ladders and ten replications of the original study.
    pub fn elliptic_full() -> Self {
        Self {
            dims: vec![2, 3, 4, 5, 6],
            m_interior: vec![1000, 2000, 4000, 8000],
            seeds: (0..10).collect(),
            ..Self::elliptic_desk()
        }
    }

    pub fn param_darcy_desk() -> Self {
        Self {
            problem: ProblemSpec::ParametricDarcy { k_decay: 3.0 },
            kernel: KernelConfig {
                family: KernelFamily::Gaussian,
                lengthscale: 1.0,
                scale_sqrt_dim: false,
            },
            dims: vec![2, 3],
            m_interior: vec![100, 200, 400, 800],
            boundary_ratio: 0.1,
            seeds: (0..3).collect(),
            solver: SolverConfig {
                max_iters: 1,
                ..SolverConfig::default()
            },
            test_points: 500,
            fill_probes: 20_000,
            darcy: DarcyOptions::default(),
            output_dir: None,
        }
    }

    pub fn param_darcy_full() -> Self {
        Self {
            dims: vec![2, 3, 4, 5, 6],
            m_interior: vec![250, 500, 1000, 2000, 4000],
            seeds: (0..5).collect(),
            ..Self::param_darcy_desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be a nonempty list of positive integers");
        }
        if self.m_interior.is_empty() || self.m_interior.contains(&0) {
            return bad("m_interior must be a nonempty list of positive counts");
        }
        if self.seeds.is_empty() {
            return bad("seeds must be nonempty");
        }
        if !(self.boundary_ratio > 0.0 && self.boundary_ratio.is_finite()) {
            return bad("boundary_ratio must be > 0");
        }
        if self.test_points == 0 || self.fill_probes == 0 {
            return bad("test_points and fill_probes must be ≥ 1");
        }
        self.solver.validate()
    }

    pub fn m_boundary(&self, m_interior: usize) -> usize {
        ((m_interior as f64 * self.boundary_ratio).round() as usize).max(1)
    }
}

/// Fill-distance scaling study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FillDistConfig {
    pub dims: Vec<usize>,
    pub m_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub probes: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for FillDistConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            m_values: (5..=12).map(|k| 1usize << k).collect(),
            seeds: (0..10).collect(),
            probes: 100_000,
            output_dir: None,
        }
    }
}

impl FillDistConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Config("dims must be nonempty and positive".into()));
        }
        if self.m_values.len() < 2 || self.m_values.contains(&0) {
            return Err(Error::Config(
                "need at least two positive point counts".into(),
            ));
        }
        if self.seeds.is_empty() || self.probes == 0 {
            return Err(Error::Config("seeds and probes must be nonempty".into()));
        }
        Ok(())
    }
}

/// HJB run over one or more lengthscales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HjbRunConfig {
    pub base: HjbConfig,
    pub sigmas: Vec<f64>,
    /// Reference value for error reporting.
    pub reference: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl Default for HjbRunConfig {
    fn default() -> Self {
        Self {
            base: HjbConfig::default(),
            sigmas: vec![10.0, 25.0, 50.0, 100.0],
            reference: Some(HJB_REFERENCE_VALUE),
            output_dir: None,
        }
    }
}

/// `V(0, 0)` for `d = 100`, `T = 1` and `g = log(½ + ½|x|²)`.
pub const HJB_REFERENCE_VALUE: f64 = 4.589992;

pub fn load_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path.as_ref())?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))
}

/// SHA-256 of the canonical JSON serialization.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
