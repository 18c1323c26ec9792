//! Backward kernel solver for `∂ₜV + ΔV − |∇V|² = 0`, `V(·, T) = g`, along
//! forward paths `dX = √2 dW`, with a Cole–Hopf Monte Carlo reference.
//!
//! Each backward step enforces, path by path,
//! `u(Xₙ) + Δt|∇u(Xₙ)|² + √(2Δt) ∇u(Xₙ)·ξₙ₊₁ = Vₙ₊₁` by linearize-then-optimize
//! around the gradient of the previous iterate.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functionals::DualFunctional;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::solver::Solution;

/// Terminal condition `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Terminal {
    /// `log(½ + ½|x|²)`
    LogQuadratic,
    /// `a·x + b`
    Linear {
        slope: Vec<f64>,
        intercept: f64,
    },
    Constant {
        value: f64,
    },
}

impl Terminal {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::LogQuadratic => (0.5 + 0.5 * x.iter().map(|v| v * v).sum::<f64>()).ln(),
            Self::Linear { slope, intercept } => {
                intercept + slope.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
            }
            Self::Constant { value } => *value,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::LogQuadratic => {
                let q = 0.5 + 0.5 * x.iter().map(|v| v * v).sum::<f64>();
                x.iter().map(|v| v / q).collect()
            }
            Self::Linear { slope, .. } => slope.clone(),
            Self::Constant { .. } => vec![0.0; x.len()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HjbConfig {
    pub d: usize,
    pub t_final: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    /// Defaults to the origin.
    pub x0: Option<Vec<f64>>,
    pub sigma: f64,
    /// Relative nugget of every step's Gram matrix.
    pub nugget: f64,
    pub seed: u64,
    /// Linearize-then-optimize iterations per backward step.
    pub lto_iters: usize,
    pub terminal: Terminal,
}

impl Default for HjbConfig {
    fn default() -> Self {
        Self {
            d: 100,
            t_final: 1.0,
            n_steps: 20,
            n_paths: 2000,
            x0: None,
            sigma: 100.0,
            nugget: 1e-3,
            seed: 0,
            lto_iters: 2,
            terminal: Terminal::LogQuadratic,
        }
    }
}

impl HjbConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.d == 0 {
            return bad("d must be ≥ 1".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("horizon T must be > 0, got {}", self.t_final));
        }
        if self.n_steps == 0 {
            return bad("n_steps must be ≥ 1".into());
        }
        if self.n_paths < 1 {
            return bad("n_paths must be ≥ 1".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be > 0, got {}", self.sigma));
        }
        if !(self.nugget > 0.0 && self.nugget.is_finite()) {
            return bad(format!("nugget must be > 0, got {}", self.nugget));
        }
        if self.lto_iters == 0 {
            return bad("lto_iters must be ≥ 1".into());
        }
        if let Some(x0) = &self.x0 {
            check_dim(self.d, x0.len())?;
        }
        if let Terminal::Linear { slope, .. } = &self.terminal {
            check_dim(self.d, slope.len())?;
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn start(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![0.0; self.d])
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        KernelSpec::isotropic(KernelFamily::InverseQuadratic, self.d, self.sigma)
    }
}

/// Forward paths: `states[n][j]` is `X^{(j)}_{tₙ}`, `increments[n][j]` is the
/// standard normal `ξ` taking step `n` to `n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBundle {
    pub states: Vec<Vec<Vec<f64>>>,
    pub increments: Vec<Vec<Vec<f64>>>,
}

/// Euler–Maruyama for `dX = √2 dW`, one independent stream per path.
pub fn simulate_paths(cfg: &HjbConfig) -> Result<PathBundle> {
    cfg.validate()?;
    let scale = (2.0 * cfg.dt()).sqrt();
    let x0 = cfg.start();
    let per_path: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(j as u64);
            let mut x = x0.clone();
            let mut states = Vec::with_capacity(cfg.n_steps + 1);
            let mut incs = Vec::with_capacity(cfg.n_steps);
            states.push(x.clone());
            for _ in 0..cfg.n_steps {
                let xi: Vec<f64> = (0..cfg.d)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                for (xv, e) in x.iter_mut().zip(&xi) {
                    *xv += scale * e;
                }
                states.push(x.clone());
                incs.push(xi);
            }
            (states, incs)
        })
        .collect();
    let mut states = vec![Vec::with_capacity(cfg.n_paths); cfg.n_steps + 1];
    let mut increments = vec![Vec::with_capacity(cfg.n_paths); cfg.n_steps];
    for (s, inc) in per_path {
        for (n, x) in s.into_iter().enumerate() {
            states[n].push(x);
        }
        for (n, xi) in inc.into_iter().enumerate() {
            increments[n].push(xi);
        }
    }
    Ok(PathBundle { states, increments })
}

/// Output of one backward step.
#[derive(Clone, Debug)]
pub struct StepResult {
    /// `Vₙ(X^{(j)})` per path.
    pub values: Vec<f64>,
    /// `∇Vₙ(X^{(j)})` per path.
    pub gradients: Vec<Vec<f64>>,
    /// Root-mean-square of the nonlinear per-path constraint residual.
    pub residual_rms: f64,
    pub solution: Solution,
}

/// Linearized constraint functionals, with exactly coincident states merged
/// into the normal equations of their least-squares system.
fn step_system(
    states: &[Vec<f64>],
    directions: &[Vec<f64>],
    targets: &[f64],
) -> Result<(Vec<DualFunctional>, Vec<f64>)> {
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (j, x) in states.iter().enumerate() {
        groups
            .entry(x.iter().map(|v| v.to_bits()).collect())
            .or_default()
            .push(j);
    }
    let mut order: Vec<&Vec<usize>> = groups.values().collect();
    order.sort_by_key(|g| g[0]);

    let mut phis = Vec::with_capacity(states.len());
    let mut rhs = Vec::with_capacity(states.len());
    for group in order {
        let x = &states[group[0]];
        if let [j] = group[..] {
            phis.push(DualFunctional::value_and_directional(
                x.clone(),
                1.0,
                &directions[j],
            )?);
            rhs.push(targets[j]);
            continue;
        }
        // rows (1, cⱼ) of the system u + cⱼ·∇u = τⱼ; emit Aᵀ A [u; ∇u] = Aᵀ τ
        let d = x.len();
        let n = group.len() as f64;
        let mut mean_c = vec![0.0; d];
        let mut second = vec![0.0; d * d];
        let mut mean_tau = 0.0;
        let mut c_tau = vec![0.0; d];
        for &j in group {
            let c = &directions[j];
            mean_tau += targets[j] / n;
            for a in 0..d {
                mean_c[a] += c[a] / n;
                c_tau[a] += c[a] * targets[j] / n;
                for b in 0..d {
                    second[a * d + b] += c[a] * c[b] / n;
                }
            }
        }
        phis.push(DualFunctional::value_and_directional(
            x.clone(),
            1.0,
            &mean_c,
        )?);
        rhs.push(mean_tau);
        for a in 0..d {
            phis.push(DualFunctional::value_and_directional(
                x.clone(),
                mean_c[a],
                &second[a * d..(a + 1) * d],
            )?);
            rhs.push(c_tau[a]);
        }
    }
    Ok((phis, rhs))
}

/// Solves one backward step given the states at `tₙ`, the increments to
/// `tₙ₊₁`, the values `Vₙ₊₁` along each path, and per-path starting gradients.
pub fn backward_step(
    cfg: &HjbConfig,
    states: &[Vec<f64>],
    increments: &[Vec<f64>],
    targets: &[f64],
    warm_gradients: &[Vec<f64>],
) -> Result<StepResult> {
    cfg.validate()?;
    let j = states.len();
    if j == 0 {
        return Err(Error::EmptyPointSet);
    }
    check_dim(j, increments.len())?;
    check_dim(j, targets.len())?;
    check_dim(j, warm_gradients.len())?;
    for v in states.iter().chain(increments).chain(warm_gradients) {
        check_dim(cfg.d, v.len())?;
    }
    let kernel = cfg.kernel()?;
    let dt = cfg.dt();
    let noise = (2.0 * dt).sqrt();

    let mut grads: Vec<Vec<f64>> = warm_gradients.to_vec();
    let mut last = None;
    for _ in 0..cfg.lto_iters {
        // u + (2Δt p + √(2Δt) ξ)·∇u = V + Δt|p|²
        let directions: Vec<Vec<f64>> = grads
            .iter()
            .zip(increments)
            .map(|(p, xi)| {
                p.iter()
                    .zip(xi)
                    .map(|(pv, xv)| 2.0 * dt * pv + noise * xv)
                    .collect()
            })
            .collect();
        let tau: Vec<f64> = grads
            .iter()
            .zip(targets)
            .map(|(p, v)| v + dt * p.iter().map(|x| x * x).sum::<f64>())
            .collect();
        let (phis, rhs) = step_system(states, &directions, &tau)?;
        let sol = Solution::interpolate(&kernel, phis, rhs, cfg.nugget)?;
        let vg = sol.evaluate_gradient(states)?;
        grads = vg.iter().map(|(_, g)| g.clone()).collect();
        last = Some((sol, vg));
    }
    let (solution, vg) =
        last.ok_or_else(|| Error::InvalidArgument("lto_iters must be ≥ 1".into()))?;
    let residual_sq: f64 = vg
        .iter()
        .zip(increments)
        .zip(targets)
        .map(|(((u, g), xi), v)| {
            let g2: f64 = g.iter().map(|x| x * x).sum();
            let gx: f64 = g.iter().zip(xi).map(|(a, b)| a * b).sum();
            let r = u + dt * g2 + noise * gx - v;
            r * r
        })
        .sum();
    let (values, gradients) = vg.into_iter().unzip();
    Ok(StepResult {
        values,
        gradients,
        residual_rms: (residual_sq / j as f64).sqrt(),
        solution,
    })
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub residual_rms: f64,
    pub value_at_x0: f64,
}

#[derive(Clone, Debug)]
pub struct HjbResult {
    /// `V(x₀, 0)`.
    pub value: f64,
    /// One row per backward step, from `t_{N−1}` down to `0`.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl HjbResult {
    pub fn write_diagnostics_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.diagnostics {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the backward recursion from `V(·, T) = g` to `V(x₀, 0)`.
pub fn solve_hjb(cfg: &HjbConfig) -> Result<HjbResult> {
    let paths = simulate_paths(cfg)?;
    let x0 = cfg.start();
    let last = &paths.states[cfg.n_steps];
    let mut values: Vec<f64> = last.iter().map(|x| cfg.terminal.value(x)).collect();
    let mut grads: Vec<Vec<f64>> = last.iter().map(|x| cfg.terminal.gradient(x)).collect();
    let mut diagnostics = Vec::with_capacity(cfg.n_steps);
    let mut value_at_x0 = f64::NAN;
    for n in (0..cfg.n_steps).rev() {
        let step = backward_step(cfg, &paths.states[n], &paths.increments[n], &values, &grads)?;
        value_at_x0 = step.solution.evaluate(std::slice::from_ref(&x0))?[0];
        log::info!(
            "hjb step {n}: residual {:.3e}, V(x0) estimate {value_at_x0:.6}",
            step.residual_rms
        );
        diagnostics.push(StepDiagnostics {
            step: n,
            time: n as f64 * cfg.dt(),
            residual_rms: step.residual_rms,
            value_at_x0,
        });
        values = step.values;
        grads = step.gradients;
    }
    Ok(HjbResult {
        value: value_at_x0,
        diagnostics,
    })
}

/// `−log E[exp(−g(x + √(2τ) Z))]` by Monte Carlo, with its delta-method
/// standard error.
pub fn cole_hopf(
    terminal: &Terminal,
    x: &[f64],
    horizon: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be ≥ 0, got {horizon}"
        )));
    }
    if let Terminal::Constant { value } = terminal {
        return Ok((*value, 0.0));
    }
    if horizon == 0.0 {
        return Ok((terminal.value(x), 0.0));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 Monte Carlo samples".into(),
        ));
    }
    let scale = (2.0 * horizon).sqrt();
    const CHUNK: usize = 1 << 14;
    let n_chunks = samples.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut y = vec![0.0; x.len()];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for (yi, xi) in y.iter_mut().zip(x) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *yi = xi + scale * z;
                }
                let e = (-terminal.value(&y)).exp();
                s += e;
                s2 += e * e;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((-mean.ln(), (var / n).sqrt() / mean))
}

/// Cole–Hopf reference for `V(x₀, 0)` under `cfg`.
pub fn cole_hopf_reference(cfg: &HjbConfig, mc_samples: usize, seed: u64) -> Result<(f64, f64)> {
    cfg.validate()?;
    cole_hopf(&cfg.terminal, &cfg.start(), cfg.t_final, mc_samples, seed)
}

/// Writes `value,stderr` style key-value lines for a finished run.
pub fn write_summary(path: impl AsRef<Path>, cfg: &HjbConfig, result: &HjbResult) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "d,n_paths,n_steps,t_final,sigma,nugget,seed,value")?;
    writeln!(
        f,
        "{},{},{},{},{},{},{},{}",
        cfg.d, cfg.n_paths, cfg.n_steps, cfg.t_final, cfg.sigma, cfg.nugget, cfg.seed, result.value
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(d: usize, n_paths: usize, n_steps: usize) -> HjbConfig {
        HjbConfig {
            d,
            n_paths,
            n_steps,
            sigma: 1.0,
            ..HjbConfig::default()
        }
    }

    #[test]
    fn single_path_single_step_recursion() {
        let cfg = small(3, 1, 1);
        let p = simulate_paths(&cfg).unwrap();
        let s = (2.0 * cfg.dt()).sqrt();
        for i in 0..3 {
            assert_eq!(p.states[1][0][i], 0.0 + s * p.increments[0][0][i]);
        }
        assert_eq!(p.states[0][0], vec![0.0; 3]);
    }

    #[test]
    fn paths_are_deterministic() {
        let cfg = small(2, 10, 3);
        assert_eq!(simulate_paths(&cfg).unwrap(), simulate_paths(&cfg).unwrap());
    }

    #[test]
    fn terminal_gradient_matches_finite_difference() {
        let g = Terminal::LogQuadratic;
        let x = [0.3, -1.2, 0.7];
        let grad = g.gradient(&x);
        for i in 0..3 {
            let mut p = x;
            let mut m = x;
            p[i] += 1e-6;
            m[i] -= 1e-6;
            assert!(((g.value(&p) - g.value(&m)) / 2e-6 - grad[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn cole_hopf_degenerate_cases() {
        let x = [0.5, 0.5];
        let g = Terminal::LogQuadratic;
        assert_eq!(cole_hopf(&g, &x, 0.0, 1000, 0).unwrap().0, g.value(&x));
        let c = Terminal::Constant { value: 1.25 };
        assert_eq!(cole_hopf(&c, &x, 1.0, 1000, 0).unwrap().0, 1.25);
    }

    #[test]
    fn cole_hopf_linear_terminal() {
        // V = a·x + b − τ|a|²
        let g = Terminal::Linear {
            slope: vec![0.3, -0.1],
            intercept: 0.2,
        };
        let (v, se) = cole_hopf(&g, &[0.0, 0.0], 0.5, 200_000, 1).unwrap();
        let exact = 0.2 - 0.5 * 0.1;
        assert!(
            (v - exact).abs() < 4.0 * se + 1e-12,
            "{v} vs {exact} ± {se}"
        );
    }

    #[test]
    fn linearization_iterations_drive_residual_down() {
        let cfg = HjbConfig {
            nugget: 1e-8,
            ..small(2, 30, 4)
        };
        let paths = simulate_paths(&cfg).unwrap();
        let n = 2;
        let targets = vec![1.7; cfg.n_paths];
        let zeros = vec![vec![0.0; 2]; cfg.n_paths];
        let residual = |iters| {
            let c = HjbConfig {
                lto_iters: iters,
                ..cfg.clone()
            };
            backward_step(&c, &paths.states[n], &paths.increments[n], &targets, &zeros)
                .unwrap()
                .residual_rms
        };
        let r: Vec<f64> = (1..=4).map(residual).collect();
        for w in r.windows(2) {
            assert!(w[1] < 0.2 * w[0], "{r:?}");
        }
        assert!(residual(6) < 1e-6);
    }
}
