//! Stationary kernels on weighted anisotropic distances, and their pairings
//! under dual functionals.
//!
//! Every kernel here is radial in `ρ = Σ aᵢ (sᵢ − tᵢ)²` with
//! `aᵢ = wᵢ / σᵢ²`. Writing `k(s, t) = F(ρ)` and `u = 2A(s − t)`, a pairing of
//! functionals of order ≤ 2 on each side contracts the derivative tensors
//!
//! ```text
//! ∂ᵢF      = F′ uᵢ
//! ∂ᵢⱼF     = F″ uᵢuⱼ + F′ 2aᵢδᵢⱼ
//! ∂ᵢⱼₖF    = F‴ uᵢuⱼuₖ + F″ (three pair/singleton splits)
//! ∂ᵢⱼₖₗF   = F⁗ uᵢuⱼuₖuₗ + F‴ (six splits) + F″ (three pair/pair splits)
//! ```
//!
//! with the coefficient vectors/matrices of the two functionals, so the cost
//! of one entry is linear in the number of nonzero coefficients.

mod profile;

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functionals::{DualFunctional, Parts};
use profile::{MaternTable, ProfileDerivs, MAX_PROFILE_ORDER};

/// Kernel family. Matérn smoothness is restricted to half-integers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum KernelFamily {
    /// `exp(−r²/2)`
    Gaussian,
    /// Half-integer Matérn `ν = p + 1/2`, `p ∈ 0..=4`.
    Matern { nu: f64 },
    /// `(1 + r²/(2d))⁻¹` with `d` the kernel dimension.
    InverseQuadratic,
}

impl KernelFamily {
    pub fn matern(nu: f64) -> Result<Self> {
        matern_p(nu)?;
        Ok(Self::Matern { nu })
    }

    /// Largest total derivative order (both sides combined) a pairing may use.
    /// Smooth families are capped only by the functional representation.
    pub fn derivative_budget(&self) -> usize {
        match self {
            Self::Gaussian | Self::InverseQuadratic => MAX_PROFILE_ORDER,
            Self::Matern { nu } => matern_p(*nu).map_or(0, |p| 2 * p as usize),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => write!(f, "gaussian"),
            Self::Matern { nu } => write!(f, "matern(nu={nu})"),
            Self::InverseQuadratic => write!(f, "inverse_quadratic"),
        }
    }
}

fn matern_p(nu: f64) -> Result<u32> {
    let p = nu - 0.5;
    if (0.0..=4.0).contains(&p) && p.fract() == 0.0 {
        Ok(p as u32)
    } else {
        Err(Error::InvalidArgument(format!(
            "Matérn smoothness must be one of 1/2, 3/2, ..., 9/2; got {nu}"
        )))
    }
}

/// A positive-definite kernel with per-coordinate lengthscales and weights.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    family: KernelFamily,
    lengthscales: Vec<f64>,
    weights: Vec<f64>,
    /// `wᵢ / σᵢ²`
    scales: Vec<f64>,
    matern: Option<Arc<MaternTable>>,
}

impl PartialEq for KernelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.lengthscales == other.lengthscales
            && self.weights == other.weights
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>) -> Result<Self> {
        let d = lengthscales.len();
        Self::with_weights(family, lengthscales, vec![1.0; d])
    }

    pub fn isotropic(family: KernelFamily, dim: usize, lengthscale: f64) -> Result<Self> {
        Self::new(family, vec![lengthscale; dim])
    }

    pub fn with_weights(
        family: KernelFamily,
        lengthscales: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::InvalidArgument(
                "kernel dimension must be ≥ 1".into(),
            ));
        }
        check_dim(lengthscales.len(), weights.len())?;
        if let Some(s) = lengthscales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "lengthscales must be positive and finite, got {s}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "coordinate weights must be nonnegative and finite, got {w}"
            )));
        }
        let matern = match family {
            KernelFamily::Matern { nu } => Some(Arc::new(MaternTable::new(matern_p(nu)?))),
            _ => None,
        };
        let scales = weights
            .iter()
            .zip(&lengthscales)
            .map(|(w, s)| w / (s * s))
            .collect();
        Ok(Self {
            family,
            lengthscales,
            weights,
            scales,
            matern,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-coordinate `wᵢ/σᵢ²` multiplying the squared differences.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    fn profile(&self, rho: f64, max_order: usize, out: &mut ProfileDerivs) {
        match self.family {
            KernelFamily::Gaussian => profile::gaussian(rho, max_order, out),
            KernelFamily::InverseQuadratic => {
                profile::inverse_quadratic(rho, self.dimension(), max_order, out)
            }
            KernelFamily::Matern { .. } => {
                let table = self.matern.as_ref().expect("matern table");
                debug_assert_eq!(table.p() as usize * 2, self.family.derivative_budget());
                profile::matern(table, rho, max_order, out)
            }
        }
    }

    fn rho(&self, s: &[f64], t: &[f64]) -> f64 {
        s.iter()
            .zip(t)
            .zip(&self.scales)
            .map(|((a, b), w)| {
                let d = a - b;
                w * d * d
            })
            .sum()
    }

    /// `k(s, t)`.
    pub fn eval(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        check_dim(self.dimension(), s.len())?;
        check_dim(self.dimension(), t.len())?;
        let mut out = [0.0; MAX_PROFILE_ORDER + 1];
        self.profile(self.rho(s, t), 0, &mut out);
        Ok(out[0])
    }

    fn check_functional(&self, f: &DualFunctional) -> Result<()> {
        check_dim(self.dimension(), f.dimension())
    }

    fn check_budget(&self, order: usize) -> Result<()> {
        let budget = self.family.derivative_budget();
        if order > budget {
            Err(Error::UnsupportedOrder {
                family: self.family.to_string(),
                requested: order,
                budget,
            })
        } else {
            Ok(())
        }
    }

    /// `(F ⊗ G) k`: `F` acts on the first argument, `G` on the second.
    pub fn eval_pair(&self, f: &DualFunctional, g: &DualFunctional) -> Result<f64> {
        self.check_functional(f)?;
        self.check_functional(g)?;
        self.check_budget(f.order() + g.order())?;
        let mut scratch = PairScratch::new(self.dimension());
        Ok(self.pair_unchecked(f, g, &mut scratch))
    }

    /// Gram matrix `K(φ, φ)`; lower triangle computed, upper mirrored.
    pub fn gram(&self, phis: &[DualFunctional]) -> Result<Mat<f64>> {
        let max_order = self.validate_all(phis)?;
        self.check_budget(2 * max_order)?;
        let n = phis.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map_init(
                || PairScratch::new(self.dimension()),
                |scratch, i| {
                    (0..=i)
                        .map(|j| self.pair_unchecked(&phis[i], &phis[j], scratch))
                        .collect()
                },
            )
            .collect();
        let mut k = Mat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// `K(s, φ)`: the pairing of point evaluation at `s` with each functional.
    pub fn cross_row(&self, s: &[f64], phis: &[DualFunctional]) -> Result<Vec<f64>> {
        check_dim(self.dimension(), s.len())?;
        let max_order = self.validate_all(phis)?;
        self.check_budget(max_order)?;
        let point = DualFunctional::point_eval(s.to_vec());
        let mut scratch = PairScratch::new(self.dimension());
        Ok(phis
            .iter()
            .map(|g| self.pair_unchecked(&point, g, &mut scratch))
            .collect())
    }

    /// Rectangular matrix with entry `(i, j) = (rows[i] ⊗ cols[j]) k`.
    pub fn cross_matrix(
        &self,
        rows: &[DualFunctional],
        cols: &[DualFunctional],
    ) -> Result<Mat<f64>> {
        let row_order = self.validate_all(rows)?;
        let col_order = self.validate_all(cols)?;
        self.check_budget(row_order + col_order)?;
        let data: Vec<Vec<f64>> = rows
            .par_iter()
            .map_init(
                || PairScratch::new(self.dimension()),
                |scratch, f| {
                    cols.iter()
                        .map(|g| self.pair_unchecked(f, g, scratch))
                        .collect()
                },
            )
            .collect();
        Ok(Mat::from_fn(rows.len(), cols.len(), |i, j| data[i][j]))
    }

    /// `Σⱼ coefⱼ (F ⊗ φⱼ) k` for each row functional `F`, without forming the
    /// cross matrix.
    pub fn apply_cross(
        &self,
        rows: &[DualFunctional],
        cols: &[DualFunctional],
        coefficients: &[f64],
    ) -> Result<Vec<f64>> {
        check_dim(cols.len(), coefficients.len())?;
        let row_order = self.validate_all(rows)?;
        let col_order = self.validate_all(cols)?;
        self.check_budget(row_order + col_order)?;
        Ok(rows
            .par_iter()
            .map_init(
                || PairScratch::new(self.dimension()),
                |scratch, f| {
                    cols.iter()
                        .zip(coefficients)
                        .map(|(g, c)| c * self.pair_unchecked(f, g, scratch))
                        .sum()
                },
            )
            .collect())
    }

    /// Value and gradient in `s` of `Σⱼ coefⱼ (δ_s ⊗ φⱼ) k` at every point.
    pub fn representer_value_and_gradient(
        &self,
        points: &[Vec<f64>],
        cols: &[DualFunctional],
        coefficients: &[f64],
    ) -> Result<Vec<(f64, Vec<f64>)>> {
        check_dim(cols.len(), coefficients.len())?;
        let col_order = self.validate_all(cols)?;
        self.check_budget(col_order + 1)?;
        for p in points {
            check_dim(self.dimension(), p.len())?;
        }
        let d = self.dimension();
        Ok(points
            .par_iter()
            .map_init(
                || PairScratch::new(d),
                |scratch, s| {
                    let mut value = 0.0;
                    let mut grad = vec![0.0; d];
                    for (g, &c) in cols.iter().zip(coefficients) {
                        value += c * self.value_and_gradient_unchecked(s, g, c, &mut grad, scratch);
                    }
                    (value, grad)
                },
            )
            .collect())
    }

    fn validate_all(&self, phis: &[DualFunctional]) -> Result<usize> {
        let mut max_order = 0;
        for f in phis {
            self.check_functional(f)?;
            max_order = max_order.max(f.order());
        }
        Ok(max_order)
    }

    fn fill_u(&self, s: &[f64], t: &[f64], u: &mut [f64]) -> f64 {
        let mut rho = 0.0;
        for i in 0..s.len() {
            let d = s[i] - t[i];
            let a = self.scales[i];
            rho += a * d * d;
            u[i] = 2.0 * a * d;
        }
        rho
    }

    pub(crate) fn pair_unchecked(
        &self,
        f: &DualFunctional,
        g: &DualFunctional,
        scratch: &mut PairScratch,
    ) -> f64 {
        let (pf, pg) = (f.parts(), g.parts());
        let order = pf.order + pg.order;
        let rho = self.fill_u(f.location(), g.location(), &mut scratch.u);
        let mut fd = [0.0; MAX_PROFILE_ORDER + 1];
        self.profile(rho, order, &mut fd);
        let PairScratch { u, su_f, su_g } = scratch;
        contract(pf, pg, &fd, u, &self.scales, su_f, su_g)
    }

    /// Adds `coef · ∇ₛ (δ_s ⊗ G) k` into `grad` and returns `(δ_s ⊗ G) k`.
    fn value_and_gradient_unchecked(
        &self,
        s: &[f64],
        g: &DualFunctional,
        coef: f64,
        grad: &mut [f64],
        scratch: &mut PairScratch,
    ) -> f64 {
        let pg = g.parts();
        let rho = self.fill_u(s, g.location(), &mut scratch.u);
        let mut fd = [0.0; MAX_PROFILE_ORDER + 1];
        self.profile(rho, pg.order + 1, &mut fd);
        let u = &scratch.u;
        let a = &self.scales;

        let gu = dot_sparse(&pg.grad, u);
        let (q, tr) = hess_q_tr(&pg.hess, u, a);

        let value = fd[0] * pg.value - fd[1] * gu + fd[2] * q + fd[1] * tr;

        // Coefficient of u in the gradient.
        let mut along_u = fd[1] * pg.value;
        if !pg.grad.is_empty() {
            along_u -= fd[2] * gu;
            for &(i, c) in &pg.grad {
                grad[i] -= coef * fd[1] * 2.0 * a[i] * c;
            }
        }
        if !pg.hess.is_empty() {
            along_u += fd[3] * q + fd[2] * tr;
            hess_times_u(&pg.hess, u, &mut scratch.su_g);
            for &(k, v) in &scratch.su_g {
                grad[k] += coef * fd[2] * 4.0 * a[k] * v;
            }
        }
        let along_u = coef * along_u;
        for (gi, ui) in grad.iter_mut().zip(u) {
            *gi += along_u * ui;
        }
        value
    }
}

/// Reusable buffers for one pairing evaluation thread.
pub(crate) struct PairScratch {
    u: Vec<f64>,
    su_f: Vec<(usize, f64)>,
    su_g: Vec<(usize, f64)>,
}

impl PairScratch {
    pub(crate) fn new(d: usize) -> Self {
        Self {
            u: vec![0.0; d],
            su_f: Vec::new(),
            su_g: Vec::new(),
        }
    }
}

fn dot_sparse(v: &[(usize, f64)], dense: &[f64]) -> f64 {
    v.iter().map(|&(i, c)| c * dense[i]).sum()
}

/// `Σᵢ vᵢ 2aᵢ wᵢ` over two index-sorted sparse vectors.
fn weighted_dot_sparse(v: &[(usize, f64)], w: &[(usize, f64)], a: &[f64]) -> f64 {
    if v.len() == a.len() && w.len() == a.len() {
        // dense fast path
        return v
            .iter()
            .zip(w)
            .map(|(&(i, x), &(_, y))| 2.0 * a[i] * x * y)
            .sum();
    }
    let (mut p, mut q, mut acc) = (0, 0, 0.0);
    while p < v.len() && q < w.len() {
        let (i, x) = v[p];
        let (j, y) = w[q];
        match i.cmp(&j) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                acc += 2.0 * a[i] * x * y;
                p += 1;
                q += 1;
            }
        }
    }
    acc
}

/// `(uᵀSu, tr(2AS))` for the operator `Σ c ∂ᵢ∂ⱼ`.
fn hess_q_tr(hess: &[(usize, usize, f64)], u: &[f64], a: &[f64]) -> (f64, f64) {
    let mut q = 0.0;
    let mut tr = 0.0;
    for &(i, j, c) in hess {
        q += c * u[i] * u[j];
        if i == j {
            tr += 2.0 * a[i] * c;
        }
    }
    (q, tr)
}

/// `S u` as a sparse list (indices may repeat), `S` the symmetric matrix of
/// the operator `Σ c ∂ᵢ∂ⱼ`.
fn hess_times_u(hess: &[(usize, usize, f64)], u: &[f64], out: &mut Vec<(usize, f64)>) {
    out.clear();
    for &(i, j, c) in hess {
        if i == j {
            out.push((i, c * u[i]));
        } else {
            out.push((i, 0.5 * c * u[j]));
            out.push((j, 0.5 * c * u[i]));
        }
    }
}

/// `Σ_k x_k 2a_k y_k` for sparse lists with possibly repeated indices.
fn weighted_dot_lists(x: &[(usize, f64)], y: &[(usize, f64)], a: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &(i, v) in x {
        for &(j, w) in y {
            if i == j {
                acc += 2.0 * a[i] * v * w;
            }
        }
    }
    acc
}

/// `tr(S_F 2A S_G 2A)`.
fn hess_trace_product(sf: &[(usize, usize, f64)], sg: &[(usize, usize, f64)], a: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &(i, j, c) in sf {
        for &(k, l, e) in sg {
            // entries of the symmetric matrices; off-diagonal ops split in half
            let matches = if i == j && k == l {
                if i == k {
                    c * e
                } else {
                    0.0
                }
            } else if i != j && k != l {
                if (i == k && j == l) || (i == l && j == k) {
                    // S_F,ij S_G,ij + S_F,ji S_G,ji
                    2.0 * (0.5 * c) * (0.5 * e)
                } else {
                    0.0
                }
            } else {
                0.0
            };
            if matches != 0.0 {
                acc += matches * 4.0 * a[i] * a[j];
            }
        }
    }
    acc
}

fn contract(
    pf: &Parts,
    pg: &Parts,
    fd: &ProfileDerivs,
    u: &[f64],
    a: &[f64],
    su_f: &mut Vec<(usize, f64)>,
    su_g: &mut Vec<(usize, f64)>,
) -> f64 {
    let f_grad = !pf.grad.is_empty();
    let g_grad = !pg.grad.is_empty();
    let f_hess = !pf.hess.is_empty();
    let g_hess = !pg.hess.is_empty();

    let mut total = fd[0] * pf.value * pg.value;

    let gu_f = if f_grad { dot_sparse(&pf.grad, u) } else { 0.0 };
    let gu_g = if g_grad { dot_sparse(&pg.grad, u) } else { 0.0 };
    let (q_f, tr_f) = if f_hess {
        hess_q_tr(&pf.hess, u, a)
    } else {
        (0.0, 0.0)
    };
    let (q_g, tr_g) = if g_hess {
        hess_q_tr(&pg.hess, u, a)
    } else {
        (0.0, 0.0)
    };

    if f_grad {
        total += fd[1] * gu_f * pg.value;
    }
    if g_grad {
        total -= fd[1] * gu_g * pf.value;
    }
    if f_grad && g_grad {
        total -= fd[2] * gu_f * gu_g + fd[1] * weighted_dot_sparse(&pf.grad, &pg.grad, a);
    }
    if f_hess {
        total += (fd[2] * q_f + fd[1] * tr_f) * pg.value;
        hess_times_u(&pf.hess, u, su_f);
    }
    if g_hess {
        total += (fd[2] * q_g + fd[1] * tr_g) * pf.value;
        hess_times_u(&pg.hess, u, su_g);
    }
    if f_hess && g_grad {
        let cross = weighted_dot_lists(su_f, &pg.grad, a);
        total -= fd[3] * q_f * gu_g + fd[2] * (tr_f * gu_g + 2.0 * cross);
    }
    if g_hess && f_grad {
        let cross = weighted_dot_lists(su_g, &pf.grad, a);
        total += fd[3] * q_g * gu_f + fd[2] * (tr_g * gu_f + 2.0 * cross);
    }
    if f_hess && g_hess {
        let cross = weighted_dot_lists(su_f, su_g, a);
        total += fd[4] * q_f * q_g
            + fd[3] * (tr_f * q_g + tr_g * q_f + 4.0 * cross)
            + fd[2] * (tr_f * tr_g + 2.0 * hess_trace_product(&pf.hess, &pg.hess, a));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::DiffMonomial;

    fn gauss(d: usize, s: f64) -> KernelSpec {
        KernelSpec::isotropic(KernelFamily::Gaussian, d, s).unwrap()
    }

    #[test]
    fn gaussian_at_zero_distance_is_one() {
        let k = gauss(3, 0.7);
        assert_eq!(k.eval(&[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3]).unwrap(), 1.0);
    }

    #[test]
    fn inverse_quadratic_unit_scaled_distance() {
        let d = 100;
        let sigma: f64 = 100.0;
        let k = KernelSpec::isotropic(KernelFamily::InverseQuadratic, d, sigma).unwrap();
        // ‖x − y‖² = 2dσ², spread along the first coordinate
        let mut y = vec![0.0; d];
        y[0] = (2.0 * d as f64).sqrt() * sigma;
        let v = k.eval(&vec![0.0; d], &y).unwrap();
        assert!((v - 0.5).abs() < 1e-14, "{v}");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = gauss(2, 1.0);
        assert!(matches!(
            k.eval(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::isotropic(KernelFamily::Gaussian, 2, 0.0).is_err());
        assert!(KernelSpec::isotropic(KernelFamily::Gaussian, 0, 1.0).is_err());
        assert!(KernelFamily::matern(2.0).is_err());
        assert!(KernelFamily::matern(11.5).is_err());
        assert!(KernelSpec::with_weights(KernelFamily::Gaussian, vec![1.0], vec![-1.0]).is_err());
    }

    #[test]
    fn point_pairing_reduces_to_eval() {
        let k = KernelSpec::isotropic(KernelFamily::matern(3.5).unwrap(), 2, 0.8).unwrap();
        let s = vec![0.3, -0.2];
        let f = DualFunctional::point_eval(s.clone());
        assert_eq!(k.eval_pair(&f, &f).unwrap(), k.eval(&s, &s).unwrap());
    }

    #[test]
    fn budget_exceeded_is_an_error_not_nan() {
        let k = KernelSpec::isotropic(KernelFamily::matern(1.5).unwrap(), 1, 1.0).unwrap();
        let lap = DualFunctional::new(vec![0.2], vec![(1.0, DiffMonomial::laplacian(1))]).unwrap();
        let pt = DualFunctional::point_eval(vec![0.0]);
        assert!(k.eval_pair(&lap, &pt).is_ok());
        assert!(matches!(
            k.eval_pair(&lap, &lap),
            Err(Error::UnsupportedOrder {
                requested: 4,
                budget: 2,
                ..
            })
        ));
        assert!(k.gram(&[lap]).is_err());
    }

    #[test]
    fn gaussian_bilaplacian_at_coincidence() {
        // ∂⁴/∂δ⁴ exp(−δ²/2) at 0 is 3
        let k = gauss(1, 1.0);
        let lap = DualFunctional::new(vec![0.0], vec![(1.0, DiffMonomial::laplacian(1))]).unwrap();
        assert!((k.eval_pair(&lap, &lap).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn small_gram_structure() {
        let k = gauss(2, 1.0);
        let a = vec![0.0, 0.0];
        let b = vec![0.5, -0.25];
        let g = k
            .gram(&[
                DualFunctional::point_eval(a.clone()),
                DualFunctional::point_eval(b.clone()),
            ])
            .unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 1.0);
        assert_eq!(g[(0, 1)], k.eval(&a, &b).unwrap());
        assert_eq!(g[(0, 1)], g[(1, 0)]);
        let one = k.gram(&[DualFunctional::point_eval(a)]).unwrap();
        assert_eq!(one.nrows(), 1);
        assert_eq!(one[(0, 0)], 1.0);
    }

    #[test]
    fn cross_row_at_a_node_matches_gram_row() {
        let k = KernelSpec::isotropic(KernelFamily::InverseQuadratic, 2, 0.5).unwrap();
        let pts = [vec![0.1, 0.2], vec![-0.3, 0.4], vec![0.7, -0.1]];
        let phis: Vec<_> = pts
            .iter()
            .cloned()
            .map(DualFunctional::point_eval)
            .collect();
        let g = k.gram(&phis).unwrap();
        let row = k.cross_row(&pts[1], &phis).unwrap();
        for j in 0..3 {
            assert_eq!(row[j], g[(1, j)]);
        }
        let single = k.cross_row(&pts[0], &phis[..1]).unwrap();
        assert_eq!(single, vec![k.eval(&pts[0], &pts[0]).unwrap()]);
    }

    #[test]
    fn representer_gradient_matches_pairings() {
        let k = KernelSpec::isotropic(KernelFamily::matern(4.5).unwrap(), 2, 0.9).unwrap();
        let cols = vec![
            DualFunctional::point_eval(vec![0.3, 0.1]),
            DualFunctional::new(vec![-0.2, 0.4], vec![(0.7, DiffMonomial::Partial(1))]).unwrap(),
            DualFunctional::new(
                vec![0.5, -0.5],
                vec![
                    (1.0, DiffMonomial::laplacian(2)),
                    (0.3, DiffMonomial::Identity),
                ],
            )
            .unwrap(),
        ];
        let coef = vec![0.4, -1.3, 0.8];
        let s = vec![0.05, 0.2];
        let out = k
            .representer_value_and_gradient(&[s.clone()], &cols, &coef)
            .unwrap();
        let rows = vec![
            DualFunctional::point_eval(s.clone()),
            DualFunctional::new(s.clone(), vec![(1.0, DiffMonomial::Partial(0))]).unwrap(),
            DualFunctional::new(s, vec![(1.0, DiffMonomial::Partial(1))]).unwrap(),
        ];
        let expect = k.apply_cross(&rows, &cols, &coef).unwrap();
        assert!((out[0].0 - expect[0]).abs() < 1e-13);
        assert!((out[0].1[0] - expect[1]).abs() < 1e-12);
        assert!((out[0].1[1] - expect[2]).abs() < 1e-12);
    }
}
