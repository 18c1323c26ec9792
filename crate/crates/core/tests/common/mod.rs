//! Finite-difference oracles and random configurations shared by the
//! integration tests.
#![allow(dead_code)]

use kernel_colloc::functionals::apply_fd;
use kernel_colloc::{DiffMonomial, DualFunctional, KernelFamily, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn families() -> Vec<KernelFamily> {
    vec![
        KernelFamily::Gaussian,
        KernelFamily::InverseQuadratic,
        KernelFamily::Matern { nu: 2.5 },
        KernelFamily::Matern { nu: 3.5 },
        KernelFamily::Matern { nu: 4.5 },
    ]
}

/// Monomial shapes; indices are filled in per configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Identity,
    Partial,
    PureSecond,
    MixedSecond,
    Laplacian,
}

pub const SHAPES: [Shape; 5] = [
    Shape::Identity,
    Shape::Partial,
    Shape::PureSecond,
    Shape::MixedSecond,
    Shape::Laplacian,
];

impl Shape {
    pub fn order(self) -> usize {
        match self {
            Shape::Identity => 0,
            Shape::Partial => 1,
            _ => 2,
        }
    }

    pub fn min_dim(self) -> usize {
        if self == Shape::MixedSecond {
            2
        } else {
            1
        }
    }

    pub fn realize<R: Rng>(self, d: usize, rng: &mut R) -> DiffMonomial {
        match self {
            Shape::Identity => DiffMonomial::Identity,
            Shape::Partial => DiffMonomial::Partial(rng.random_range(0..d)),
            Shape::PureSecond => {
                let i = rng.random_range(0..d);
                DiffMonomial::SecondPartial(i, i)
            }
            Shape::MixedSecond => {
                let i = rng.random_range(0..d);
                let j = (i + rng.random_range(1..d)) % d;
                DiffMonomial::SecondPartial(i, j)
            }
            Shape::Laplacian => DiffMonomial::laplacian(d),
        }
    }
}

/// Step for fourth-order stencils, growing with the total derivative order
/// so that roundoff stays below truncation error.
pub fn fd_step(total_order: usize) -> f64 {
    match total_order {
        0 | 1 => 1e-4,
        2 => 1e-3,
        _ => 1e-2,
    }
}

/// `[F, G]` by nested finite differences of `eval`.
pub fn nested_fd(k: &KernelSpec, f: &DualFunctional, g: &DualFunctional, step: f64) -> f64 {
    apply_fd(f, |s| apply_fd(g, |t| k.eval(s, t).unwrap(), step), step)
}

/// Relative error with a Cauchy–Schwarz floor `1e−3·√([F,F][G,G])` for
/// pairings that vanish by symmetry.
pub fn pairing_rel_err(
    k: &KernelSpec,
    f: &DualFunctional,
    g: &DualFunctional,
    exact: f64,
    approx: f64,
) -> f64 {
    let scale = (k.eval_pair(f, f).unwrap().abs() * k.eval_pair(g, g).unwrap().abs()).sqrt();
    (exact - approx).abs() / exact.abs().max(1e-3 * scale)
}

/// Random kernel on `d` coordinates with lengthscales in `[0.5, 2]` and
/// weights in `[0.5, 1.5]`.
pub fn random_kernel<R: Rng>(family: KernelFamily, d: usize, rng: &mut R) -> KernelSpec {
    let ls = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    let w = (0..d).map(|_| rng.random_range(0.5..1.5)).collect();
    KernelSpec::with_weights(family, ls, w).unwrap()
}

/// Two points at Euclidean distance in `[0.2, 1.5]`.
pub fn random_pair<R: Rng>(d: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let s: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
    let r = rng.random_range(0.2..1.5);
    for v in &mut dir {
        *v *= r / n;
    }
    let t = s.iter().zip(&dir).map(|(a, b)| a + b).collect();
    (s, t)
}

/// Outcome of one `(family, shape pair)` sweep.
pub struct PairSweep {
    pub family: KernelFamily,
    pub left: Shape,
    pub right: Shape,
    pub worst: f64,
}

/// Checks every supported shape pair for every family on `configs` random
/// configurations each.
pub fn derivative_sweep(configs: usize, seed: u64) -> Vec<PairSweep> {
    let mut out = Vec::new();
    let mut r = rng(seed);
    for family in families() {
        for &a in &SHAPES {
            for &b in &SHAPES {
                if a.order() + b.order() > family.derivative_budget() {
                    continue;
                }
                let mut worst = 0.0_f64;
                for _ in 0..configs {
                    let d = r.random_range(a.min_dim().max(b.min_dim())..=3);
                    let k = random_kernel(family, d, &mut r);
                    let (s, t) = random_pair(d, &mut r);
                    let ca = r.random_range(0.5..2.0);
                    let cb = r.random_range(-2.0..-0.5);
                    let f = DualFunctional::new(s, vec![(ca, a.realize(d, &mut r))]).unwrap();
                    let g = DualFunctional::new(t, vec![(cb, b.realize(d, &mut r))]).unwrap();
                    let exact = k.eval_pair(&f, &g).unwrap();
                    let approx = nested_fd(&k, &f, &g, fd_step(a.order() + b.order()));
                    worst = worst.max(pairing_rel_err(&k, &f, &g, exact, approx));
                }
                out.push(PairSweep {
                    family,
                    left: a,
                    right: b,
                    worst,
                });
            }
        }
    }
    out
}
