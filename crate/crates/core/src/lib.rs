//! Bernstein-type concentration bounds for quadratic forms of Gaussian
//! vectors, `T = zᵀAz + bᵀz` with `z ~ N(0, I_p)`.
//!
//! The crate is organised around four layers:
//!
//! * [`spectral`] symmetrises `A` and diagonalises it with cyclic Jacobi
//!   rotations, turning a matrix form into `T = Σ sₖ z'ₖ² + b'ₖ z'ₖ`.
//! * [`bounds`] evaluates and inverts the two-sided thresholds
//!   `mean ± (2√(u²x) + 2a^±x)` that hold with probability at least `1 − e⁻ˣ`.
//! * [`mgf`] exposes the log-MGF chain behind those thresholds and grid
//!   checkers for every inequality used along the way.
//! * [`oracle`] provides ground truth: a reproducible Monte Carlo sampler with
//!   Clopper–Pearson intervals, the exact `p = 1` CDF and a characteristic
//!   function inversion CDF for general forms.
//!
//! The [`cli`] module wires these into the `quadform` binary.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod mgf;
pub mod oracle;
pub mod quadrature;
pub mod spectral;

pub use bounds::{DiagonalForm, Direction, FormStats, TailBound};
pub use error::{Error, Result};
pub use spectral::{Matrix, QuadraticForm, SpectralReduction};
