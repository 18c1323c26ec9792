//! Kernel collocation for nonlinear and parametric PDEs: minimum-norm
//! interpolation of PDE constraints at scattered points in a reproducing
//! kernel Hilbert space.

pub mod error;
pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod hjb;
pub mod kernels;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use functionals::{combine, DiffMonomial, DualFunctional};
pub use geometry::{CollocationSet, Domain};
pub use kernels::{KernelFamily, KernelSpec};
pub use problems::PdeProblem;
pub use solver::{solve, Solution, SolverConfig, SolverVariant};
