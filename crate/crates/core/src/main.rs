use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kernel_colloc::geometry::sample_interior;
use kernel_colloc::harness::{
    load_json, rms, rms_diff, run_convergence, run_filldist_study, run_hjb, run_param_darcy,
    ExperimentConfig, FillDistConfig, HjbRunConfig, Manifest, ProblemSpec,
};
use kernel_colloc::{solve, CollocationSet, KernelFamily, Result, SolverConfig, SolverVariant};

#[derive(Parser)]
#[command(
    name = "kernel-colloc",
    version,
    about = "Kernel collocation PDE solver and experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem instance and print test error and residual.
    Solve(SolveArgs),
    /// Manufactured-solution convergence study.
    Convergence(StudyArgs),
    /// Vanilla versus adapted kernels on the parametric Darcy problem.
    ParamDarcy(StudyArgs),
    /// Fill-distance scaling of uniform samples.
    Filldist(FillArgs),
    /// Backward HJB solve in high dimension.
    Hjb(HjbArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemName {
    NonlinearElliptic,
    DarcyTanh,
    ParametricDarcy,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Gaussian,
    Matern,
    InverseQuadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantName {
    Lto,
    GnEliminate,
    GnRelaxed,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// Matérn smoothness `p + 1/2`.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    lengthscale: Option<f64>,
    /// Multiply the lengthscale by √d.
    #[arg(long)]
    scale_sqrt_dim: Option<bool>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum)]
    variant: Option<VariantName>,
    /// Relaxation β for `gn-relaxed`.
    #[arg(long, default_value_t = 1e-6)]
    beta_relax: f64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    nugget: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "nonlinear-elliptic")]
    problem: ProblemName,
    /// Spatial dimension, or parameter count for parametric Darcy.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Frequency β of the elliptic problem, `β_τ` of Darcy-tanh, or `k` of
    /// parametric Darcy.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 500)]
    m_interior: usize,
    #[arg(long)]
    m_boundary: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    test_points: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct StudyArgs {
    /// JSON experiment configuration; replaces the preset and all flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the full-size ladders instead of the desk-scale preset.
    #[arg(long)]
    full_scale: bool,
    /// Elliptic β, Darcy-tanh `β_τ`, or parametric Darcy `k`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    m_interior: Option<Vec<usize>>,
    #[arg(long)]
    boundary_ratio: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    test_points: Option<usize>,
    #[arg(long)]
    fill_probes: Option<usize>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct FillArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    probes: Option<usize>,
}

#[derive(Args)]
struct HjbArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    nugget: Option<f64>,
    #[arg(long)]
    lto_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reference value for the relative error column.
    #[arg(long)]
    reference: Option<f64>,
}

impl KernelArgs {
    fn family(&self, current: KernelFamily) -> Result<KernelFamily> {
        Ok(match self.family {
            None => match (current, self.nu) {
                (KernelFamily::Matern { .. }, Some(nu)) => KernelFamily::matern(nu)?,
                _ => current,
            },
            Some(FamilyName::Gaussian) => KernelFamily::Gaussian,
            Some(FamilyName::Matern) => KernelFamily::matern(self.nu.unwrap_or(2.5))?,
            Some(FamilyName::InverseQuadratic) => KernelFamily::InverseQuadratic,
        })
    }
}

impl SolverArgs {
    fn apply(&self, cfg: &mut SolverConfig) {
        if let Some(v) = self.variant {
            cfg.variant = match v {
                VariantName::Lto => SolverVariant::Lto,
                VariantName::GnEliminate => SolverVariant::GnEliminate,
                VariantName::GnRelaxed => SolverVariant::GnRelaxed {
                    beta_relax: self.beta_relax,
                },
            };
        }
        if let Some(n) = self.max_iters {
            cfg.max_iters = n;
        }
        if let Some(eta) = self.nugget {
            cfg.nugget_eta = eta;
        }
    }
}

fn study_config(
    args: &StudyArgs,
    desk: ExperimentConfig,
    full: ExperimentConfig,
) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        return load_json(path);
    }
    let mut cfg = if args.full_scale { full } else { desk };
    if let Some(b) = args.beta {
        cfg.problem = match cfg.problem {
            ProblemSpec::NonlinearElliptic { .. } => ProblemSpec::NonlinearElliptic { beta: b },
            ProblemSpec::DarcyTanh { .. } => ProblemSpec::DarcyTanh { beta_tau: b },
            ProblemSpec::ParametricDarcy { .. } => ProblemSpec::ParametricDarcy { k_decay: b },
        };
    }
    if let Some(v) = &args.dims {
        cfg.dims = v.clone();
    }
    if let Some(v) = &args.m_interior {
        cfg.m_interior = v.clone();
    }
    if let Some(v) = args.boundary_ratio {
        cfg.boundary_ratio = v;
    }
    if let Some(v) = &args.seeds {
        cfg.seeds = v.clone();
    }
    if let Some(v) = args.test_points {
        cfg.test_points = v;
    }
    if let Some(v) = args.fill_probes {
        cfg.fill_probes = v;
    }
    cfg.kernel.family = args.kernel.family(cfg.kernel.family)?;
    if let Some(l) = args.kernel.lengthscale {
        cfg.kernel.lengthscale = l;
    }
    if let Some(s) = args.kernel.scale_sqrt_dim {
        cfg.kernel.scale_sqrt_dim = s;
    }
    args.solver.apply(&mut cfg.solver);
    Ok(cfg)
}

fn output_dir(flag: &Option<PathBuf>, from_config: &Option<PathBuf>, default: &str) -> PathBuf {
    flag.clone()
        .or_else(|| from_config.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(default))
}

fn run_solve(args: &SolveArgs) -> Result<bool> {
    let problem = match args.problem {
        ProblemName::NonlinearElliptic => ProblemSpec::NonlinearElliptic { beta: args.beta },
        ProblemName::DarcyTanh => ProblemSpec::DarcyTanh {
            beta_tau: args.beta,
        },
        ProblemName::ParametricDarcy => ProblemSpec::ParametricDarcy { k_decay: args.beta },
    };
    let prob = problem.build(args.dim)?;
    let family = args.kernel.family(KernelFamily::matern(2.5)?)?;
    let d = prob.dimension();
    let ls = args.kernel.lengthscale.unwrap_or(0.25)
        * if args.kernel.scale_sqrt_dim.unwrap_or(true) {
            (d as f64).sqrt()
        } else {
            1.0
        };
    let kernel = kernel_colloc::KernelSpec::isotropic(family, d, ls)?;
    let mut solver = SolverConfig::default();
    args.solver.apply(&mut solver);
    let mb = args
        .m_boundary
        .unwrap_or_else(|| ((args.m_interior as f64 * 0.2).round() as usize).max(1));
    let colloc = CollocationSet::sample(&prob.domain, args.m_interior, mb, args.seed);
    let start = Instant::now();
    let sol = solve(&prob, &colloc, &kernel, &solver)?;
    let wall = start.elapsed().as_secs_f64();
    println!("problem: {}", prob.name);
    println!("kernel: {family} lengthscale {ls}");
    println!("solver: {}", solver.variant);
    println!("collocation: {} interior, {mb} boundary", args.m_interior);
    for rec in sol.history() {
        println!(
            "iteration {}: residual {:.3e}, update {:.3e}",
            rec.iteration, rec.residual_norm, rec.update_norm
        );
    }
    println!(
        "collocation residual (rms): {:.3e}",
        rms(&sol.pde_residual(&prob, &colloc)?)
    );
    if let Some(u) = &prob.true_solution {
        let pts = sample_interior(
            &prob.domain,
            args.test_points,
            args.seed ^ 0x7e57_0000_0000_0001,
        );
        let approx = sol.evaluate(&pts)?;
        let exact: Vec<f64> = pts.iter().map(|p| u.value(p)).collect();
        println!("test L2 error (rms): {:.3e}", rms_diff(&approx, &exact));
    }
    println!("rkhs norm: {:.6e}", sol.rkhs_norm());
    println!("wall seconds: {wall:.2}");
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    let command = std::env::args().collect::<Vec<_>>().join(" ");
    match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Convergence(args) => {
            let cfg = study_config(
                &args,
                ExperimentConfig::elliptic_desk(),
                ExperimentConfig::elliptic_full(),
            )?;
            let dir = output_dir(&args.out, &cfg.output_dir, "convergence");
            let start = Instant::now();
            let report = run_convergence(&cfg)?;
            let mut manifest = Manifest::new(&command, &cfg, cfg.seeds.clone())?;
            manifest.fill_probes = Some(cfg.fill_probes);
            manifest.total_wall_seconds = start.elapsed().as_secs_f64();
            report.write(&dir, "convergence", manifest)?;
            for s in &report.slopes {
                println!(
                    "{} d={} slope vs {}: {:.3} ± {:.3}",
                    s.label, s.dim, s.variable, s.slope, s.stderr
                );
            }
            println!("outputs in {}", dir.display());
            Ok(report.failed_cells() == 0)
        }
        Command::ParamDarcy(args) => {
            let cfg = study_config(
                &args,
                ExperimentConfig::param_darcy_desk(),
                ExperimentConfig::param_darcy_full(),
            )?;
            let dir = output_dir(&args.out, &cfg.output_dir, "param_darcy");
            let start = Instant::now();
            let report = run_param_darcy(&cfg)?;
            let mut manifest = Manifest::new(&command, &cfg, cfg.seeds.clone())?;
            manifest.fill_probes = Some(cfg.fill_probes);
            manifest.total_wall_seconds = start.elapsed().as_secs_f64();
            report.write(&dir, "param_darcy", manifest)?;
            for ((label, p), pts) in report.convergence.medians() {
                for pt in pts {
                    println!(
                        "{label} p={p} M={}: median error {:.3e}",
                        pt.m_interior, pt.error
                    );
                }
            }
            println!("outputs in {}", dir.display());
            Ok(report.convergence.failed_cells() == 0)
        }
        Command::Filldist(args) => {
            let mut cfg: FillDistConfig = match &args.config {
                Some(p) => load_json(p)?,
                None => FillDistConfig::default(),
            };
            if args.config.is_none() {
                if let Some(v) = &args.dims {
                    cfg.dims = v.clone();
                }
                if let Some(v) = &args.m_values {
                    cfg.m_values = v.clone();
                }
                if let Some(v) = &args.seeds {
                    cfg.seeds = v.clone();
                }
                if let Some(v) = args.probes {
                    cfg.probes = v;
                }
            }
            let dir = output_dir(&args.out, &cfg.output_dir, "filldist");
            let start = Instant::now();
            let report = run_filldist_study(&cfg)?;
            let mut manifest = Manifest::new(&command, &cfg, cfg.seeds.clone())?;
            manifest.fill_probes = Some(cfg.probes);
            manifest.total_wall_seconds = start.elapsed().as_secs_f64();
            report.write(&dir, "filldist", manifest)?;
            for s in &report.slopes {
                println!(
                    "d={} slope {:.3} (expected {:.3})",
                    s.dim, s.slope, s.expected
                );
            }
            println!("outputs in {}", dir.display());
            Ok(true)
        }
        Command::Hjb(args) => {
            let mut cfg: HjbRunConfig = match &args.config {
                Some(p) => load_json(p)?,
                None => HjbRunConfig::default(),
            };
            if args.config.is_none() {
                let b = &mut cfg.base;
                if let Some(v) = &args.sigmas {
                    cfg.sigmas = v.clone();
                }
                if let Some(v) = args.d {
                    b.d = v;
                }
                if let Some(v) = args.n_paths {
                    b.n_paths = v;
                }
                if let Some(v) = args.n_steps {
                    b.n_steps = v;
                }
                if let Some(v) = args.t_final {
                    b.t_final = v;
                }
                if let Some(v) = args.nugget {
                    b.nugget = v;
                }
                if let Some(v) = args.lto_iters {
                    b.lto_iters = v;
                }
                if let Some(v) = args.seed {
                    b.seed = v;
                }
                if args.reference.is_some() {
                    cfg.reference = args.reference;
                }
            }
            let dir = output_dir(&args.out, &cfg.output_dir, "hjb");
            let start = Instant::now();
            let report = run_hjb(&cfg)?;
            let mut manifest = Manifest::new(&command, &cfg, vec![cfg.base.seed])?;
            manifest.total_wall_seconds = start.elapsed().as_secs_f64();
            report.write(&dir, "hjb", manifest)?;
            for r in &report.rows {
                println!(
                    "sigma={}: V = {:.6}, relative error {:.3e}",
                    r.sigma, r.value, r.rel_error
                );
            }
            println!("outputs in {}", dir.display());
            Ok(report.failed_cells() == 0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some cells failed; see the manifest");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
