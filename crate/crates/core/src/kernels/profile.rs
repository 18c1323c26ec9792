//! Radial profiles `F(ρ)` of the supported kernel families, with `ρ` the
//! weighted squared distance, and their derivatives `F⁽ⁿ⁾(ρ)` up to order 4.
//!
//! For half-integer Matérn kernels `k = e^{-z} P(z)` with `z = c·√ρ`,
//! `c = √(2ν)`. Each derivative in `ρ` is `(c²/2) · e^{-z} · (R' − R)/z`
//! applied to the previous Laurent polynomial `R`, so every `F⁽ⁿ⁾` is
//! `(c²/2)ⁿ e^{-z} Rₙ(z)` with `Rₙ` built once in exact rational arithmetic.
//! Negative powers only show up past the smoothness budget; at `ρ = 0` those
//! entries are reported as zero because every pairing term that uses them is
//! multiplied by a vanishing factor of `u = 2A(s − t)`.

use std::collections::BTreeMap;

use num_rational::Rational64;

/// Highest derivative of the radial profile the pairing formulas use.
pub(crate) const MAX_PROFILE_ORDER: usize = 4;

/// Below this weighted squared distance two points are treated as coincident
/// and the `ρ → 0` limits are used.
pub(crate) const RHO_COINCIDENT: f64 = 1e-60;

#[derive(Clone, Debug, PartialEq)]
struct Laurent {
    /// (power, coefficient), powers strictly increasing, no zero coefficients.
    terms: Vec<(i32, f64)>,
}

impl Laurent {
    fn from_exact(map: &BTreeMap<i32, Rational64>) -> Self {
        let terms = map
            .iter()
            .filter(|(_, c)| **c != Rational64::from_integer(0))
            .map(|(p, c)| (*p, *c.numer() as f64 / *c.denom() as f64))
            .collect();
        Self { terms }
    }

    fn min_power(&self) -> i32 {
        self.terms.first().map_or(0, |t| t.0)
    }

    fn eval(&self, z: f64) -> f64 {
        self.terms.iter().map(|&(p, c)| c * z.powi(p)).sum()
    }

    fn constant(&self) -> f64 {
        self.terms.iter().find(|t| t.0 == 0).map_or(0.0, |t| t.1)
    }
}

/// Precomputed derivative table for the Matérn kernel with `ν = p + 1/2`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct MaternTable {
    p: u32,
    c: f64,
    /// `(c²/2)ⁿ` for n = 0..=4.
    prefactor: [f64; MAX_PROFILE_ORDER + 1],
    laurent: Vec<Laurent>,
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}

impl MaternTable {
    pub(crate) fn new(p: u32) -> Self {
        // P(z) = p!/(2p)! Σ_{i=0}^{p} (p+i)!/(i!(p−i)!) (2z)^{p−i}
        let mut poly: BTreeMap<i32, Rational64> = BTreeMap::new();
        let lead = Rational64::new(factorial(p), factorial(2 * p));
        for i in 0..=p {
            let binom = Rational64::new(factorial(p + i), factorial(i) * factorial(p - i));
            let pow = p - i;
            let coeff = lead * binom * Rational64::from_integer(1_i64 << pow);
            *poly
                .entry(pow as i32)
                .or_insert(Rational64::from_integer(0)) += coeff;
        }

        let mut laurent = vec![Laurent::from_exact(&poly)];
        let mut current = poly;
        for _ in 0..MAX_PROFILE_ORDER {
            // (R' − R) / z
            let mut next: BTreeMap<i32, Rational64> = BTreeMap::new();
            for (&pow, &c) in &current {
                if pow != 0 {
                    *next.entry(pow - 2).or_insert(Rational64::from_integer(0)) +=
                        c * Rational64::from_integer(pow as i64);
                }
                *next.entry(pow - 1).or_insert(Rational64::from_integer(0)) -= c;
            }
            next.retain(|_, c| *c != Rational64::from_integer(0));
            laurent.push(Laurent::from_exact(&next));
            current = next;
        }

        let c2 = (2 * p + 1) as f64;
        let mut prefactor = [1.0; MAX_PROFILE_ORDER + 1];
        for n in 1..=MAX_PROFILE_ORDER {
            prefactor[n] = prefactor[n - 1] * c2 / 2.0;
        }
        Self {
            p,
            c: c2.sqrt(),
            prefactor,
            laurent,
        }
    }

    pub(crate) fn p(&self) -> u32 {
        self.p
    }

    fn derivatives(&self, rho: f64, max_order: usize, out: &mut [f64; MAX_PROFILE_ORDER + 1]) {
        if rho < RHO_COINCIDENT {
            for n in 0..=max_order {
                let l = &self.laurent[n];
                out[n] = if l.min_power() < 0 {
                    0.0
                } else {
                    self.prefactor[n] * l.constant()
                };
            }
            return;
        }
        let z = self.c * rho.sqrt();
        let e = (-z).exp();
        for n in 0..=max_order {
            out[n] = self.prefactor[n] * e * self.laurent[n].eval(z);
        }
    }
}

/// Evaluated profile derivatives at one `ρ`.
pub(crate) type ProfileDerivs = [f64; MAX_PROFILE_ORDER + 1];

pub(crate) fn gaussian(rho: f64, max_order: usize, out: &mut ProfileDerivs) {
    let base = (-0.5 * rho).exp();
    let mut factor = 1.0;
    for slot in out.iter_mut().take(max_order + 1) {
        *slot = factor * base;
        factor *= -0.5;
    }
}

/// `F(ρ) = (1 + ρ/(2d))⁻¹`.
pub(crate) fn inverse_quadratic(rho: f64, dim: usize, max_order: usize, out: &mut ProfileDerivs) {
    let scale = 1.0 / (2.0 * dim as f64);
    let base = 1.0 / (1.0 + rho * scale);
    // F⁽ⁿ⁾ = (−1)ⁿ n! scaleⁿ baseⁿ⁺¹
    let mut term = base;
    for (n, slot) in out.iter_mut().take(max_order + 1).enumerate() {
        *slot = term;
        term *= -((n + 1) as f64) * scale * base;
    }
}

pub(crate) fn matern(table: &MaternTable, rho: f64, max_order: usize, out: &mut ProfileDerivs) {
    table.derivatives(rho, max_order, out);
}
