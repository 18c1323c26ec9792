//! Dual functionals `δ_s ∘ L` with `L` a linear combination of differential
//! monomials of order ≤ 2.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// One building block of a linear differential operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMonomial {
    Identity,
    Partial(usize),
    SecondPartial(usize, usize),
    /// Sum of pure second derivatives over a coordinate subset, e.g. `Δₓ` on
    /// a product domain.
    LaplacianOver(Vec<usize>),
}

impl DiffMonomial {
    /// Full Laplacian in `d` coordinates.
    pub fn laplacian(d: usize) -> Self {
        Self::LaplacianOver((0..d).collect())
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Identity => 0,
            Self::Partial(_) => 1,
            Self::SecondPartial(..) | Self::LaplacianOver(_) => 2,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |i: usize| {
            Error::InvalidArgument(format!(
                "coordinate index {i} out of range for dimension {dim}"
            ))
        };
        match self {
            Self::Identity => Ok(()),
            Self::Partial(i) => (*i < dim).then_some(()).ok_or_else(|| bad(*i)),
            Self::SecondPartial(i, j) => {
                if *i >= dim {
                    Err(bad(*i))
                } else if *j >= dim {
                    Err(bad(*j))
                } else {
                    Ok(())
                }
            }
            Self::LaplacianOver(set) => {
                if set.is_empty() {
                    return Err(Error::InvalidArgument(
                        "empty Laplacian coordinate set".into(),
                    ));
                }
                match set.iter().find(|i| **i >= dim) {
                    Some(i) => Err(bad(*i)),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Coefficients of a functional grouped by derivative order, with duplicate
/// monomials merged and exact zeros dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Parts {
    pub(crate) value: f64,
    /// `(i, c)` for `c ∂ᵢ`, sorted by `i`.
    pub(crate) grad: Vec<(usize, f64)>,
    /// `(i, j, c)` with `i ≤ j` for `c ∂ᵢ∂ⱼ`, sorted.
    pub(crate) hess: Vec<(usize, usize, f64)>,
    pub(crate) order: usize,
}

impl Parts {
    fn compile(terms: &[(f64, DiffMonomial)]) -> Self {
        use std::collections::BTreeMap;
        let mut value = 0.0;
        let mut grad: BTreeMap<usize, f64> = BTreeMap::new();
        let mut hess: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (c, m) in terms {
            match m {
                DiffMonomial::Identity => value += c,
                DiffMonomial::Partial(i) => *grad.entry(*i).or_default() += c,
                DiffMonomial::SecondPartial(i, j) => {
                    *hess.entry((*i.min(j), *i.max(j))).or_default() += c
                }
                DiffMonomial::LaplacianOver(set) => {
                    for &i in set {
                        *hess.entry((i, i)).or_default() += c;
                    }
                }
            }
        }
        let grad: Vec<_> = grad.into_iter().filter(|(_, c)| *c != 0.0).collect();
        let hess: Vec<_> = hess
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|((i, j), c)| (i, j, c))
            .collect();
        let order = if !hess.is_empty() {
            2
        } else if !grad.is_empty() {
            1
        } else {
            0
        };
        Self {
            value,
            grad,
            hess,
            order,
        }
    }
}

/// `v ↦ Σ c (m v)(s)` for a list of coefficient/monomial terms at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    location: Vec<f64>,
    terms: Vec<(f64, DiffMonomial)>,
    parts: Parts,
}

impl DualFunctional {
    pub fn new(location: Vec<f64>, terms: Vec<(f64, DiffMonomial)>) -> Result<Self> {
        if location.is_empty() {
            return Err(Error::InvalidArgument(
                "functional location has dimension 0".into(),
            ));
        }
        if terms.is_empty() {
            return Err(Error::InvalidArgument(
                "functional needs at least one term".into(),
            ));
        }
        for (c, m) in &terms {
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {c}"
                )));
            }
            m.validate(location.len())?;
        }
        let parts = Parts::compile(&terms);
        Ok(Self {
            location,
            terms,
            parts,
        })
    }

    /// `δ_s`.
    pub fn point_eval(location: Vec<f64>) -> Self {
        let terms = vec![(1.0, DiffMonomial::Identity)];
        let parts = Parts::compile(&terms);
        Self {
            location,
            terms,
            parts,
        }
    }

    /// `w₀ δ_s + (w·∇)|_s` with a dense gradient weight vector.
    pub fn value_and_directional(
        location: Vec<f64>,
        value: f64,
        direction: &[f64],
    ) -> Result<Self> {
        check_dim(location.len(), direction.len())?;
        let mut terms = Vec::with_capacity(direction.len() + 1);
        terms.push((value, DiffMonomial::Identity));
        terms.extend(
            direction
                .iter()
                .enumerate()
                .map(|(i, &w)| (w, DiffMonomial::Partial(i))),
        );
        Self::new(location, terms)
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn dimension(&self) -> usize {
        self.location.len()
    }

    pub fn terms(&self) -> &[(f64, DiffMonomial)] {
        &self.terms
    }

    /// Highest derivative order with a nonzero coefficient.
    pub fn order(&self) -> usize {
        self.parts.order
    }

    pub(crate) fn parts(&self) -> &Parts {
        &self.parts
    }
}

/// Builds `Σ c_q (δ_s ∘ m_q)`.
pub fn combine(coeffs: &[f64], monos: &[DiffMonomial], s: &[f64]) -> Result<DualFunctional> {
    if coeffs.len() != monos.len() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for {} monomials",
            coeffs.len(),
            monos.len()
        )));
    }
    DualFunctional::new(
        s.to_vec(),
        coeffs.iter().copied().zip(monos.iter().cloned()).collect(),
    )
}

/// Applies `f` to `v` with fourth-order central differences of step `step`.
///
/// Test and diagnostics helper; the solvers never difference numerically.
pub fn apply_fd<V: Fn(&[f64]) -> f64>(f: &DualFunctional, v: V, step: f64) -> f64 {
    let s = f.location();
    let mut x = s.to_vec();
    let mut at = |offsets: &[(usize, f64)]| {
        x.copy_from_slice(s);
        for &(i, o) in offsets {
            x[i] += o;
        }
        v(&x)
    };
    let h = step;
    let mut total = 0.0;
    for (c, m) in f.terms() {
        let mut second = |i: usize, j: usize| {
            if i == j {
                (-at(&[(i, 2.0 * h)]) + 16.0 * at(&[(i, h)]) - 30.0 * at(&[])
                    + 16.0 * at(&[(i, -h)])
                    - at(&[(i, -2.0 * h)]))
                    / (12.0 * h * h)
            } else {
                let mut mixed = |h: f64| {
                    (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                        + at(&[(i, -h), (j, -h)]))
                        / (4.0 * h * h)
                };
                // Richardson step from second to fourth order
                (4.0 * mixed(h) - mixed(2.0 * h)) / 3.0
            }
        };
        let applied = match m {
            DiffMonomial::Identity => at(&[]),
            DiffMonomial::Partial(i) => {
                let i = *i;
                (-at(&[(i, 2.0 * h)]) + 8.0 * at(&[(i, h)]) - 8.0 * at(&[(i, -h)])
                    + at(&[(i, -2.0 * h)]))
                    / (12.0 * h)
            }
            DiffMonomial::SecondPartial(i, j) => second(*i, *j),
            DiffMonomial::LaplacianOver(set) => set.iter().map(|&i| second(i, i)).sum(),
        };
        total += c * applied;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_identity_is_point_evaluation() {
        let s = [0.4, -1.0];
        let f = combine(&[1.0], &[DiffMonomial::Identity], &s).unwrap();
        assert_eq!(f, DualFunctional::point_eval(s.to_vec()));
        assert_eq!(
            apply_fd(&f, |x| x[0] * 3.0 + x[1].exp(), 1e-3),
            0.4 * 3.0 + (-1.0f64).exp()
        );
    }

    #[test]
    fn cancelling_terms_give_the_zero_functional() {
        let f = combine(
            &[1.0, -1.0],
            &[DiffMonomial::Identity, DiffMonomial::Identity],
            &[0.3],
        )
        .unwrap();
        assert_eq!(f.order(), 0);
        assert_eq!(f.parts().value, 0.0);
        assert_eq!(apply_fd(&f, |x| (5.0 * x[0]).sin() + 2.0, 1e-3), 0.0);
    }

    #[test]
    fn value_plus_laplacian_of_squared_norm() {
        // Δ‖x‖² = 2d in d = 3
        let (a, b) = (1.7, -0.6);
        let s = [0.2, -0.4, 0.9];
        let f = combine(
            &[a, b],
            &[DiffMonomial::Identity, DiffMonomial::laplacian(3)],
            &s,
        )
        .unwrap();
        let norm2: f64 = s.iter().map(|x| x * x).sum();
        let got = apply_fd(&f, |x| x.iter().map(|v| v * v).sum(), 1e-3);
        assert!((got - (a * norm2 + 6.0 * b)).abs() < 1e-8, "{got}");
    }

    #[test]
    fn first_derivative_of_linear_function() {
        let f = DualFunctional::new(vec![0.5, 0.5], vec![(1.0, DiffMonomial::Partial(0))]).unwrap();
        let got = apply_fd(&f, |x| 2.5 * x[0] - x[1], 1e-2);
        assert!((got - 2.5).abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_quadratic_form_is_hessian_trace() {
        // v(x) = xᵀQx with Q = [[2, 0.5], [0.5, -1]]: Hessian 2Q, trace 2
        let f =
            DualFunctional::new(vec![0.3, 0.8], vec![(1.0, DiffMonomial::laplacian(2))]).unwrap();
        let v = |x: &[f64]| 2.0 * x[0] * x[0] + x[0] * x[1] - x[1] * x[1];
        assert!((apply_fd(&f, v, 1e-3) - 2.0).abs() < 1e-6);
        let mixed = DualFunctional::new(
            vec![0.3, 0.8],
            vec![(1.0, DiffMonomial::SecondPartial(0, 1))],
        )
        .unwrap();
        assert!((apply_fd(&mixed, v, 1e-3) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn validation_errors() {
        assert!(combine(&[1.0], &[], &[0.0]).is_err());
        assert!(combine(&[f64::NAN], &[DiffMonomial::Identity], &[0.0]).is_err());
        assert!(combine(&[1.0], &[DiffMonomial::Partial(2)], &[0.0, 0.0]).is_err());
        assert!(combine(&[1.0], &[DiffMonomial::LaplacianOver(vec![])], &[0.0]).is_err());
        assert!(DualFunctional::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn duplicate_monomials_merge() {
        let f = DualFunctional::new(
            vec![0.0, 0.0],
            vec![
                (1.0, DiffMonomial::SecondPartial(1, 0)),
                (2.0, DiffMonomial::SecondPartial(0, 1)),
                (1.0, DiffMonomial::LaplacianOver(vec![1])),
                (0.5, DiffMonomial::Partial(1)),
            ],
        )
        .unwrap();
        assert_eq!(f.parts().hess, vec![(0, 1, 3.0), (1, 1, 1.0)]);
        assert_eq!(f.parts().grad, vec![(1, 0.5)]);
        assert_eq!(f.order(), 2);
    }
}
