//! C interface to the kernel collocation solvers.
//!
//! Every fallible function returns a [`KcStatus`]; on failure the message is
//! kept per thread and can be read with [`kc_last_error_message`]. Objects are
//! opaque handles released with their `_free` function. Points are passed
//! row-major, `n × dim`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kernel_colloc::geometry::{fill_distance_estimate, Domain};
use kernel_colloc::hjb::{solve_hjb, HjbConfig};
use kernel_colloc::problems::{make_darcy_tanh, make_nonlinear_elliptic, make_parametric_darcy};
use kernel_colloc::{
    solve, CollocationSet, Error, KernelFamily, KernelSpec, PdeProblem, Solution, SolverConfig,
    SolverVariant,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Unsupported = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KcFamily {
    Gaussian = 0,
    Matern = 1,
    InverseQuadratic = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KcVariant {
    Lto = 0,
    GnEliminate = 1,
    GnRelaxed = 2,
}

/// Opaque kernel handle.
pub struct KcKernel(KernelSpec);

/// Opaque problem handle.
pub struct KcProblem(PdeProblem);

/// Opaque solution handle.
pub struct KcSolution(Solution);

/// Solver settings; start from [`kc_solver_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KcSolverOptions {
    pub variant: KcVariant,
    /// Relaxation parameter of `GnRelaxed`.
    pub beta_relax: f64,
    pub nugget: f64,
    pub max_iters: usize,
    /// `0` runs all `max_iters` iterations.
    pub convergence_tol: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KcStatus {
    match e {
        Error::DimensionMismatch { .. } => KcStatus::DimensionMismatch,
        Error::UnsupportedOrder { .. } | Error::UnsupportedVariant(_) => KcStatus::Unsupported,
        Error::Factorization { .. } => KcStatus::Numerical,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => KcStatus::Io,
        _ => KcStatus::InvalidArgument,
    }
}

struct Fail(KcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(KcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            KcStatus::Panic
        }
    }
}

unsafe fn points(data: *const f64, n: usize, dim: usize) -> Result<Vec<Vec<f64>>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(null("points"));
    }
    let flat = slice::from_raw_parts(data, n * dim);
    Ok(flat.chunks(dim).map(<[f64]>::to_vec).collect())
}

/// Boxes `value` only once `out` is known to be writable.
unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Length in bytes of the last error message of this thread, without the
/// terminating NUL; `0` if the last call succeeded.
#[no_mangle]
pub extern "C" fn kc_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len − 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn kc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Isotropic kernel. `nu` is read only for `Matern` and must be a half
/// integer in `{1/2, …, 9/2}`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_kernel_new(
    family: KcFamily,
    nu: f64,
    dim: usize,
    lengthscale: f64,
    out: *mut *mut KcKernel,
) -> KcStatus {
    guard(|| {
        let fam = match family {
            KcFamily::Gaussian => KernelFamily::Gaussian,
            KcFamily::Matern => KernelFamily::matern(nu)?,
            KcFamily::InverseQuadratic => KernelFamily::InverseQuadratic,
        };
        let k = KernelSpec::isotropic(fam, dim, lengthscale)?;
        write_handle(out, KcKernel(k))
    })
}

/// # Safety
/// `k` must be null or a handle from [`kc_kernel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_kernel_free(k: *mut KcKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// `k(s, t)` for two points of length `dim`.
///
/// # Safety
/// `s` and `t` must be valid for `dim` reads, `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_kernel_eval(
    k: *const KcKernel,
    s: *const f64,
    t: *const f64,
    dim: usize,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(|| null("kernel"))?;
        if s.is_null() || t.is_null() {
            return Err(null("point"));
        }
        let v =
            k.0.eval(slice::from_raw_parts(s, dim), slice::from_raw_parts(t, dim))?;
        write_out(out, v)
    })
}

/// Nonlinear elliptic problem `−∇·(A∇u) + u³ = f` on the unit ball.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_problem_nonlinear_elliptic(
    dim: usize,
    beta: f64,
    out: *mut *mut KcProblem,
) -> KcStatus {
    guard(|| write_handle(out, KcProblem(make_nonlinear_elliptic(dim, beta)?)))
}

/// Darcy flow with a `tanh` nonlinearity on the unit ball.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_problem_darcy_tanh(
    dim: usize,
    beta_tau: f64,
    out: *mut *mut KcProblem,
) -> KcStatus {
    guard(|| write_handle(out, KcProblem(make_darcy_tanh(dim, beta_tau)?)))
}

/// One-dimensional Darcy flow with `p` parameters; points are
/// `(x, θ₀, …, θ_p)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_problem_parametric_darcy(
    p: usize,
    k_decay: f64,
    out: *mut *mut KcProblem,
) -> KcStatus {
    guard(|| write_handle(out, KcProblem(make_parametric_darcy(p, k_decay)?)))
}

/// Point dimension of the problem.
///
/// # Safety
/// `p` must be a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn kc_problem_dimension(p: *const KcProblem) -> usize {
    p.as_ref().map_or(0, |p| p.0.dimension())
}

/// # Safety
/// `p` must be null or a problem handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_problem_free(p: *mut KcProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub extern "C" fn kc_solver_options_default() -> KcSolverOptions {
    let d = SolverConfig::default();
    KcSolverOptions {
        variant: KcVariant::Lto,
        beta_relax: 1e-6,
        nugget: d.nugget_eta,
        max_iters: d.max_iters,
        convergence_tol: d.convergence_tol,
    }
}

/// Samples `m_interior` and `m_boundary` collocation points with `seed` and
/// solves. `opts` may be null for the defaults.
///
/// # Safety
/// Handles must be live; `opts` null or valid; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_solve(
    problem: *const KcProblem,
    kernel: *const KcKernel,
    m_interior: usize,
    m_boundary: usize,
    seed: u64,
    opts: *const KcSolverOptions,
    out: *mut *mut KcSolution,
) -> KcStatus {
    guard(|| {
        let prob = &problem.as_ref().ok_or_else(|| null("problem"))?.0;
        let k = &kernel.as_ref().ok_or_else(|| null("kernel"))?.0;
        let o = opts
            .as_ref()
            .copied()
            .unwrap_or_else(|| kc_solver_options_default());
        let variant = match o.variant {
            KcVariant::Lto => SolverVariant::Lto,
            KcVariant::GnEliminate => SolverVariant::GnEliminate,
            KcVariant::GnRelaxed => SolverVariant::GnRelaxed {
                beta_relax: o.beta_relax,
            },
        };
        let cfg = SolverConfig {
            nugget_eta: o.nugget,
            max_iters: o.max_iters,
            convergence_tol: o.convergence_tol,
            ..SolverConfig::with_variant(variant)
        };
        let colloc = CollocationSet::sample(&prob.domain, m_interior, m_boundary, seed);
        let sol = solve(prob, &colloc, k, &cfg)?;
        write_handle(out, KcSolution(sol))
    })
}

/// Writes `u(xᵢ)` for `n` points into `values`.
///
/// # Safety
/// `points` valid for `n·dim` reads, `values` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn kc_solution_evaluate(
    sol: *const KcSolution,
    points_rowmajor: *const f64,
    n: usize,
    dim: usize,
    values: *mut f64,
) -> KcStatus {
    guard(|| {
        let sol = &sol.as_ref().ok_or_else(|| null("solution"))?.0;
        let pts = points(points_rowmajor, n, dim)?;
        let v = sol.evaluate(&pts)?;
        if n > 0 && values.is_null() {
            return Err(null("values"));
        }
        if n > 0 {
            ptr::copy_nonoverlapping(v.as_ptr(), values, n);
        }
        Ok(())
    })
}

/// Nugget-regularized RKHS norm of the solution.
///
/// # Safety
/// `sol` must be live, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_solution_rkhs_norm(sol: *const KcSolution, out: *mut f64) -> KcStatus {
    guard(|| {
        let sol = &sol.as_ref().ok_or_else(|| null("solution"))?.0;
        write_out(out, sol.rkhs_norm())
    })
}

/// # Safety
/// `s` must be null or a solution handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kc_solution_free(s: *mut KcSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `V(0, 0)` of the log-quadratic HJB problem in dimension `d` by kernel
/// backward-SDE steps.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_hjb_value(
    d: usize,
    n_paths: usize,
    n_steps: usize,
    t_final: f64,
    sigma: f64,
    nugget: f64,
    seed: u64,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let cfg = HjbConfig {
            d,
            n_paths,
            n_steps,
            t_final,
            sigma,
            nugget,
            seed,
            ..HjbConfig::default()
        };
        write_out(out, solve_hjb(&cfg)?.value)
    })
}

/// Monte Carlo fill distance of `n` points in `[0,1]^dim`.
///
/// # Safety
/// `points` valid for `n·dim` reads, `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn kc_fill_distance_unit_cube(
    points_rowmajor: *const f64,
    n: usize,
    dim: usize,
    probes: usize,
    seed: u64,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let pts = points(points_rowmajor, n, dim)?;
        let dom = Domain::cube(dim, 0.0, 1.0)?;
        write_out(out, fill_distance_estimate(&pts, &dom, probes, seed)?)
    })
}
