//! PDEs written as nonlinear combiners of linear differential operators,
//! `P(L₁u, …, L_{Q_Ω}u) = f` inside and `B(L_{Q_Ω+1}u, …) = g` on the boundary.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::functionals::{DiffMonomial, DualFunctional};
use crate::geometry::{sample_interior, CollocationSet, Domain};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Residual tolerance for the manufactured solution checked at construction.
pub const MANUFACTURED_TOL: f64 = 1e-8;

/// A function with closed-form first and second derivatives.
pub trait SmoothFunction: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major `d × d`.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
}

/// `exp(sin(β Σⱼ cos xⱼ))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpSinCos {
    pub dim: usize,
    pub beta: f64,
}

impl ExpSinCos {
    fn parts(&self, x: &[f64]) -> (f64, f64, f64) {
        let s: f64 = x.iter().map(|v| v.cos()).sum();
        let bs = self.beta * s;
        (s, bs.sin(), bs.cos())
    }
}

impl SmoothFunction for ExpSinCos {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.parts(x).1.exp()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (_, sn, cs) = self.parts(x);
        let u = sn.exp();
        x.iter().map(|v| -self.beta * u * cs * v.sin()).collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        // u = e^φ, ∂ᵢⱼu = u(∂ᵢφ ∂ⱼφ + ∂ᵢⱼφ)
        let (_, sn, cs) = self.parts(x);
        let u = sn.exp();
        let b = self.beta;
        let d = x.len();
        let dphi: Vec<f64> = x.iter().map(|v| -b * cs * v.sin()).collect();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut ddphi = -b * b * sn * x[i].sin() * x[j].sin();
                if i == j {
                    ddphi -= b * cs * x[i].cos();
                }
                h[i * d + j] = u * (dphi[i] * dphi[j] + ddphi);
            }
        }
        h
    }
}

/// Coefficient multiplying one monomial of a linear operator.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(ScalarFn),
}

impl Coefficient {
    pub fn at(&self, s: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Function(f) => f(s),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// `L = Σ c(s) m` over monomials `m` with variable coefficients.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    pub terms: Vec<(Coefficient, DiffMonomial)>,
}

impl LinearOperator {
    pub fn identity() -> Self {
        Self {
            terms: vec![(Coefficient::Constant(1.0), DiffMonomial::Identity)],
        }
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|(_, m)| m.order()).max().unwrap_or(0)
    }

    /// `δ_s ∘ L` scaled by `weight`, appended to `out`.
    fn push_terms(&self, s: &[f64], weight: f64, out: &mut Vec<(f64, DiffMonomial)>) {
        for (c, m) in &self.terms {
            out.push((weight * c.at(s), m.clone()));
        }
    }

    pub fn functional(&self, s: &[f64]) -> Result<DualFunctional> {
        let mut terms = Vec::with_capacity(self.terms.len());
        self.push_terms(s, 1.0, &mut terms);
        DualFunctional::new(s.to_vec(), terms)
    }

    /// `(L v)(s)` from the value, gradient and row-major Hessian of `v`.
    pub fn apply_exact(&self, s: &[f64], value: f64, grad: &[f64], hess: &[f64]) -> f64 {
        let d = grad.len();
        self.terms
            .iter()
            .map(|(c, m)| {
                let mv = match m {
                    DiffMonomial::Identity => value,
                    DiffMonomial::Partial(i) => grad[*i],
                    DiffMonomial::SecondPartial(i, j) => hess[i * d + j],
                    DiffMonomial::LaplacianOver(set) => set.iter().map(|&i| hess[i * d + i]).sum(),
                };
                c.at(s) * mv
            })
            .sum()
    }
}

/// Scalar nonlinearity in the reaction slot of [`Combiner::Reaction`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reaction {
    /// `z³`
    Cubic,
    /// `1 + tanh(βz)`
    Tanh { beta: f64 },
}

impl Reaction {
    pub fn value(&self, z: f64) -> f64 {
        match self {
            Self::Cubic => z * z * z,
            Self::Tanh { beta } => 1.0 + (beta * z).tanh(),
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            Self::Cubic => 3.0 * z * z,
            Self::Tanh { beta } => {
                let sech = 1.0 / (beta * z).cosh();
                beta * sech * sech
            }
        }
    }
}

type CombinerValue = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type CombinerGradient = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Map `ℝ^Q → ℝ` that combines operator values pointwise.
#[derive(Clone)]
pub enum Combiner {
    /// `offset + Σ w_q t_q`
    Affine { weights: Vec<f64>, offset: f64 },
    /// `τ(t₀) + t₁ + … + t_{arity−1}`
    Reaction { reaction: Reaction, arity: usize },
    /// Arbitrary smooth map; cannot be eliminated.
    Custom {
        arity: usize,
        value: CombinerValue,
        gradient: CombinerGradient,
    },
}

impl fmt::Debug for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Affine { weights, offset } => {
                write!(f, "Affine {{ weights: {weights:?}, offset: {offset} }}")
            }
            Self::Reaction { reaction, arity } => {
                write!(f, "Reaction {{ reaction: {reaction:?}, arity: {arity} }}")
            }
            Self::Custom { arity, .. } => write!(f, "Custom {{ arity: {arity} }}"),
        }
    }
}

impl Combiner {
    pub fn identity() -> Self {
        Self::Affine {
            weights: vec![1.0],
            offset: 0.0,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Self::Affine { weights, .. } => weights.len(),
            Self::Reaction { arity, .. } | Self::Custom { arity, .. } => *arity,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Self::Affine { .. })
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        match self {
            Self::Affine { weights, offset } => {
                offset + weights.iter().zip(t).map(|(w, v)| w * v).sum::<f64>()
            }
            Self::Reaction { reaction, .. } => reaction.value(t[0]) + t[1..].iter().sum::<f64>(),
            Self::Custom { value, .. } => value(t),
        }
    }

    pub fn gradient(&self, t: &[f64]) -> Vec<f64> {
        match self {
            Self::Affine { weights, .. } => weights.clone(),
            Self::Reaction { reaction, arity } => {
                let mut g = vec![1.0; *arity];
                g[0] = reaction.derivative(t[0]);
                g
            }
            Self::Custom { gradient, .. } => gradient(t),
        }
    }

    /// Solves `value([head, last]) = target` for `last`; returns it with its
    /// derivative in each `head` entry. `None` if the last slot does not
    /// enter linearly.
    pub fn eliminate(&self, head: &[f64], target: f64) -> Option<(f64, Vec<f64>)> {
        match self {
            Self::Affine { weights, offset } => {
                let (last, rest) = weights.split_last()?;
                if *last == 0.0 {
                    return None;
                }
                let partial: f64 = rest.iter().zip(head).map(|(w, v)| w * v).sum();
                let value = (target - offset - partial) / last;
                Some((value, rest.iter().map(|w| -w / last).collect()))
            }
            Self::Reaction { reaction, arity } if *arity >= 2 => {
                let value = target - reaction.value(head[0]) - head[1..].iter().sum::<f64>();
                let mut d = vec![-1.0; arity - 1];
                d[0] = -reaction.derivative(head[0]);
                Some((value, d))
            }
            _ => None,
        }
    }

    pub fn can_eliminate(&self) -> bool {
        let head = vec![0.0; self.arity().saturating_sub(1)];
        self.arity() >= 1 && self.eliminate(&head, 0.0).is_some()
    }
}

/// Values of every operator at every collocation point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorValues {
    /// `[L₁u(s), …, L_{Q_Ω}u(s)]` per interior point.
    pub interior: Vec<Vec<f64>>,
    /// Boundary operator values per boundary point.
    pub boundary: Vec<Vec<f64>>,
}

impl OperatorValues {
    pub fn zeros(q_interior: usize, q_boundary: usize, colloc: &CollocationSet) -> Self {
        Self {
            interior: vec![vec![0.0; q_interior]; colloc.interior.len()],
            boundary: vec![vec![0.0; q_boundary]; colloc.boundary.len()],
        }
    }
}

/// One linear constraint per collocation point around the current iterate.
#[derive(Clone, Debug)]
pub struct LinearizationSystem {
    pub functionals: Vec<DualFunctional>,
    pub targets: Vec<f64>,
}

/// A nonlinear PDE with Dirichlet-type boundary data.
#[derive(Clone)]
pub struct PdeProblem {
    pub name: String,
    pub domain: Domain,
    pub interior_ops: Vec<LinearOperator>,
    pub boundary_ops: Vec<LinearOperator>,
    pub combiner_p: Combiner,
    pub combiner_b: Combiner,
    pub source: ScalarFn,
    pub boundary_data: ScalarFn,
    pub true_solution: Option<Arc<dyn SmoothFunction>>,
}

impl fmt::Debug for PdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("q_interior", &self.interior_ops.len())
            .field("q_boundary", &self.boundary_ops.len())
            .field("combiner_p", &self.combiner_p)
            .field("combiner_b", &self.combiner_b)
            .field("has_true_solution", &self.true_solution.is_some())
            .finish()
    }
}

impl PdeProblem {
    /// Checks structure, coefficient finiteness, and that the manufactured
    /// solution (if any) solves the PDE at 100 random interior points.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let d = self.domain.dimension();
        if self.interior_ops.is_empty() || self.boundary_ops.is_empty() {
            return Err(Error::InvalidArgument(
                "a problem needs at least one interior and one boundary operator".into(),
            ));
        }
        check_dim(self.interior_ops.len(), self.combiner_p.arity())?;
        check_dim(self.boundary_ops.len(), self.combiner_b.arity())?;
        for op in self.interior_ops.iter().chain(&self.boundary_ops) {
            if op.terms.is_empty() {
                return Err(Error::InvalidArgument("operator without terms".into()));
            }
            for (_, m) in &op.terms {
                m.validate(d)?;
            }
        }
        let probes = sample_interior(&self.domain, 100, 0x5eed);
        for s in &probes {
            for op in self.interior_ops.iter().chain(&self.boundary_ops) {
                for (c, _) in &op.terms {
                    if !c.at(s).is_finite() {
                        return Err(Error::InvalidArgument(format!(
                            "{}: non-finite operator coefficient at {s:?}",
                            self.name
                        )));
                    }
                }
            }
        }
        if let Some(u) = &self.true_solution {
            check_dim(d, u.dimension())?;
            for s in &probes {
                let r = self.interior_residual_of(u.as_ref(), s);
                if !(r.abs() < MANUFACTURED_TOL) {
                    return Err(Error::InvalidArgument(format!(
                        "{}: manufactured solution leaves residual {r:e} at {s:?}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn q_interior(&self) -> usize {
        self.interior_ops.len()
    }

    pub fn q_boundary(&self) -> usize {
        self.boundary_ops.len()
    }

    /// Highest derivative order among all operators.
    pub fn max_order(&self) -> usize {
        self.interior_ops
            .iter()
            .chain(&self.boundary_ops)
            .map(LinearOperator::order)
            .max()
            .unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.combiner_p.is_affine() && self.combiner_b.is_affine()
    }

    pub fn has_elimination(&self) -> bool {
        self.combiner_p.can_eliminate() && self.combiner_b.can_eliminate()
    }

    fn operator_values_at(ops: &[LinearOperator], v: &dyn SmoothFunction, s: &[f64]) -> Vec<f64> {
        let (val, grad, hess) = (v.value(s), v.gradient(s), v.hessian(s));
        ops.iter()
            .map(|op| op.apply_exact(s, val, &grad, &hess))
            .collect()
    }

    /// `P(L u)(s) − f(s)` from closed-form derivatives of `u`.
    pub fn interior_residual_of(&self, u: &dyn SmoothFunction, s: &[f64]) -> f64 {
        let t = Self::operator_values_at(&self.interior_ops, u, s);
        self.combiner_p.value(&t) - (self.source)(s)
    }

    /// Exact operator values of `v` at every collocation point.
    pub fn operator_values_of(
        &self,
        v: &dyn SmoothFunction,
        colloc: &CollocationSet,
    ) -> OperatorValues {
        OperatorValues {
            interior: colloc
                .interior
                .iter()
                .map(|s| Self::operator_values_at(&self.interior_ops, v, s))
                .collect(),
            boundary: colloc
                .boundary
                .iter()
                .map(|s| Self::operator_values_at(&self.boundary_ops, v, s))
                .collect(),
        }
    }

    /// Functionals `δ_s ∘ L_q`, grouped per point: interior points first.
    pub fn operator_functionals(
        &self,
        colloc: &CollocationSet,
    ) -> Result<Vec<Vec<DualFunctional>>> {
        let interior = colloc.interior.iter().map(|s| {
            self.interior_ops
                .iter()
                .map(|op| op.functional(s))
                .collect::<Result<Vec<_>>>()
        });
        let boundary = colloc.boundary.iter().map(|s| {
            self.boundary_ops
                .iter()
                .map(|op| op.functional(s))
                .collect::<Result<Vec<_>>>()
        });
        interior.chain(boundary).collect()
    }

    fn check_values(&self, colloc: &CollocationSet, values: &OperatorValues) -> Result<()> {
        let missing = |what: &str| {
            Error::InvalidArgument(format!("operator values missing for some {what} points"))
        };
        if values.interior.len() != colloc.interior.len() {
            return Err(missing("interior"));
        }
        if values.boundary.len() != colloc.boundary.len() {
            return Err(missing("boundary"));
        }
        for v in &values.interior {
            check_dim(self.q_interior(), v.len())?;
        }
        for v in &values.boundary {
            check_dim(self.q_boundary(), v.len())?;
        }
        Ok(())
    }

    /// `F(z) − y` per collocation point, interior rows first.
    pub fn residual(&self, colloc: &CollocationSet, values: &OperatorValues) -> Result<Vec<f64>> {
        self.check_values(colloc, values)?;
        let interior = colloc
            .interior
            .iter()
            .zip(&values.interior)
            .map(|(s, t)| self.combiner_p.value(t) - (self.source)(s));
        let boundary = colloc
            .boundary
            .iter()
            .zip(&values.boundary)
            .map(|(s, t)| self.combiner_b.value(t) - (self.boundary_data)(s));
        Ok(interior.chain(boundary).collect())
    }

    /// Linearized constraints `P(v) + ∇P(v)·(L u − v) = f` around operator
    /// values `v`, and the boundary analogue with `B` and `g`.
    pub fn linearize(
        &self,
        colloc: &CollocationSet,
        values: &OperatorValues,
    ) -> Result<LinearizationSystem> {
        self.check_values(colloc, values)?;
        let n = colloc.len();
        let mut functionals = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        let blocks = [
            (
                &colloc.interior,
                &values.interior,
                &self.interior_ops,
                &self.combiner_p,
                &self.source,
            ),
            (
                &colloc.boundary,
                &values.boundary,
                &self.boundary_ops,
                &self.combiner_b,
                &self.boundary_data,
            ),
        ];
        for (points, vals, ops, combiner, data) in blocks {
            for (s, v) in points.iter().zip(vals) {
                let grad = combiner.gradient(v);
                let mut terms = Vec::new();
                for (op, g) in ops.iter().zip(&grad) {
                    op.push_terms(s, *g, &mut terms);
                }
                let lin: f64 = grad.iter().zip(v).map(|(g, t)| g * t).sum();
                functionals.push(DualFunctional::new(s.clone(), terms)?);
                targets.push(data(s) - combiner.value(v) + lin);
            }
        }
        Ok(LinearizationSystem {
            functionals,
            targets,
        })
    }
}

/// `exp(sin(Σ cos xⱼ))` and its gradient, the diffusion coefficient of the
/// elliptic test problems.
fn diffusion(x: &[f64]) -> (f64, f64) {
    let s: f64 = x.iter().map(|v| v.cos()).sum();
    (s.sin().exp(), s)
}

fn elliptic_operators(d: usize) -> Vec<LinearOperator> {
    let grad_terms = (0..d)
        .map(|i| {
            // −∂ᵢA = A cos(S) sin(xᵢ)
            let c: ScalarFn = Arc::new(move |x: &[f64]| {
                let (a, s) = diffusion(x);
                a * s.cos() * x[i].sin()
            });
            (Coefficient::Function(c), DiffMonomial::Partial(i))
        })
        .collect();
    let neg_a: ScalarFn = Arc::new(|x: &[f64]| -diffusion(x).0);
    vec![
        LinearOperator::identity(),
        LinearOperator { terms: grad_terms },
        LinearOperator {
            terms: vec![(Coefficient::Function(neg_a), DiffMonomial::laplacian(d))],
        },
    ]
}

/// `−∇·(A∇u)` for `u = exp(sin(βS))`, `A = exp(sin S)`, `S = Σ cos xⱼ`.
fn elliptic_divergence_term(x: &[f64], beta: f64) -> f64 {
    let (a, s) = diffusion(x);
    let bs = beta * s;
    let u = bs.sin().exp();
    let sin2: f64 = x.iter().map(|v| v.sin().powi(2)).sum();
    let grad_dot = a * u * beta * s.cos() * bs.cos() * sin2;
    let lap = beta * beta * u * (bs.cos().powi(2) - bs.sin()) * sin2 - beta * u * bs.cos() * s;
    -grad_dot - a * lap
}

/// `−∇·(A∇u) + u³ = f` on the unit ball in `d` dimensions with
/// `A = exp(sin Σcos xⱼ)` and manufactured `u* = exp(sin(β Σ cos xⱼ))`.
pub fn make_nonlinear_elliptic(d: usize, beta: f64) -> Result<PdeProblem> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    let u_star = ExpSinCos { dim: d, beta };
    let source: ScalarFn = Arc::new(move |x: &[f64]| {
        let u = u_star.value(x);
        elliptic_divergence_term(x, beta) + u * u * u
    });
    let boundary: ScalarFn = Arc::new(move |x: &[f64]| u_star.value(x));
    let prob = PdeProblem {
        name: format!("nonlinear_elliptic(d={d}, beta={beta})"),
        domain: Domain::unit_ball(d)?,
        interior_ops: elliptic_operators(d),
        boundary_ops: vec![LinearOperator::identity()],
        combiner_p: Combiner::Reaction {
            reaction: Reaction::Cubic,
            arity: 3,
        },
        combiner_b: Combiner::identity(),
        source,
        boundary_data: boundary,
        true_solution: Some(Arc::new(u_star)),
    };
    prob.validate()?;
    Ok(prob)
}

/// `−∇·(exp(a)∇u) + 1 + tanh(β_τ u) = f` with `a = sin(Σ cos xⱼ)` on the
/// unit ball, manufactured `u* = exp(sin Σ cos xⱼ)`.
pub fn make_darcy_tanh(d: usize, beta_tau: f64) -> Result<PdeProblem> {
    if !beta_tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta_tau must be finite, got {beta_tau}"
        )));
    }
    let reaction = Reaction::Tanh { beta: beta_tau };
    let u_star = ExpSinCos { dim: d, beta: 1.0 };
    let source: ScalarFn = Arc::new(move |x: &[f64]| {
        elliptic_divergence_term(x, 1.0) + reaction.value(u_star.value(x))
    });
    let boundary: ScalarFn = Arc::new(move |x: &[f64]| u_star.value(x));
    let prob = PdeProblem {
        name: format!("darcy_tanh(d={d}, beta_tau={beta_tau})"),
        domain: Domain::unit_ball(d)?,
        interior_ops: elliptic_operators(d),
        boundary_ops: vec![LinearOperator::identity()],
        combiner_p: Combiner::Reaction { reaction, arity: 3 },
        combiner_b: Combiner::identity(),
        source,
        boundary_data: boundary,
        true_solution: Some(Arc::new(u_star)),
    };
    prob.validate()?;
    Ok(prob)
}

/// `A(x, θ) = 2 + θ₀ + Σⱼ θⱼ j^{−k} sin(πx + j)` for `s = (x, θ₀, θ₁, …, θ_p)`.
pub fn darcy_coefficient(s: &[f64], k_decay: f64) -> f64 {
    let x = s[0];
    2.0 + s[1]
        + s[2..]
            .iter()
            .enumerate()
            .map(|(i, th)| {
                let j = (i + 1) as f64;
                th * j.powf(-k_decay) * (PI * x + j).sin()
            })
            .sum::<f64>()
}

/// `∂ₓA(x, θ)`.
pub fn darcy_coefficient_dx(s: &[f64], k_decay: f64) -> f64 {
    let x = s[0];
    s[2..]
        .iter()
        .enumerate()
        .map(|(i, th)| {
            let j = (i + 1) as f64;
            th * j.powf(-k_decay) * PI * (PI * x + j).cos()
        })
        .sum()
}

/// `−∂ₓ(A(x, θ) ∂ₓu) = x` on `[0,1] × [0,1]^{p+1}` with `u = 0` at
/// `x ∈ {0, 1}`. Derivatives act on `x` only.
pub fn make_parametric_darcy(p: usize, k_decay: f64) -> Result<PdeProblem> {
    if p == 0 {
        return Err(Error::InvalidArgument(
            "parameter dimension p must be ≥ 1".into(),
        ));
    }
    if !k_decay.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "k_decay must be finite, got {k_decay}"
        )));
    }
    let neg_ax: ScalarFn = Arc::new(move |s: &[f64]| -darcy_coefficient_dx(s, k_decay));
    let neg_a: ScalarFn = Arc::new(move |s: &[f64]| -darcy_coefficient(s, k_decay));
    let prob = PdeProblem {
        name: format!("parametric_darcy(p={p}, k={k_decay})"),
        domain: Domain::product(Domain::cube(1, 0.0, 1.0)?, Domain::cube(p + 1, 0.0, 1.0)?)?,
        interior_ops: vec![
            LinearOperator {
                terms: vec![(Coefficient::Function(neg_ax), DiffMonomial::Partial(0))],
            },
            LinearOperator {
                terms: vec![(
                    Coefficient::Function(neg_a),
                    DiffMonomial::LaplacianOver(vec![0]),
                )],
            },
        ],
        boundary_ops: vec![LinearOperator::identity()],
        combiner_p: Combiner::Affine {
            weights: vec![1.0, 1.0],
            offset: 0.0,
        },
        combiner_b: Combiner::identity(),
        source: Arc::new(|s: &[f64]| s[0]),
        boundary_data: Arc::new(|_: &[f64]| 0.0),
        true_solution: None,
    };
    prob.validate()?;
    Ok(prob)
}

/// Plain interpolation of `target` at interior and boundary points.
pub fn make_interpolation(domain: Domain, target: ScalarFn) -> Result<PdeProblem> {
    let prob = PdeProblem {
        name: "interpolation".into(),
        domain,
        interior_ops: vec![LinearOperator::identity()],
        boundary_ops: vec![LinearOperator::identity()],
        combiner_p: Combiner::identity(),
        combiner_b: Combiner::identity(),
        source: target.clone(),
        boundary_data: target,
        true_solution: None,
    };
    prob.validate()?;
    Ok(prob)
}
