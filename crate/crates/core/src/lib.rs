//! Bounds for state-dependent quantum cloning.
//!
//! `clonebound` is a small numerical toolkit built around one idea: compare
//! pure states by the *angle* between them,
//!
//! ```text
//! δ(Φ, Ψ) = arccos |⟨Φ|Ψ⟩|  ∈ [0, π/2],
//! ```
//!
//! and use the spherical triangle inequality for that angle to bound how well
//! any unitary copying machine can clone a known pair of states
//! `{|φ⟩, |ψ⟩}` with overlap `z = |⟨φ|ψ⟩|`.
//!
//! The crate is organised bottom-up:
//!
//! - [`statespace`]: state vectors, projectors, unitaries and the angle metric.
//! - [`geometry`]: the angle inequalities as executable checks plus seeded sweeps.
//! - [`cloning`]: decomposition of a cloner output into ideal part and error,
//!   absolute and relative error.
//! - [`cloners`]: the optimal symmetric, optimal asymmetric and
//!   Wootters–Zurek machines.
//! - [`bounds`]: closed-form lower bounds and curve sampling.
//! - [`search`]: numerical minimisation over all realisable output pairs,
//!   used to confirm the bounds are tight.
//!
//! ```
//! use clonebound::bounds::{ae_lower_bound, re_lower_bound};
//! use clonebound::cloners::{build_asymmetric, Favored};
//! use clonebound::cloning::TwoStateSet;
//!
//! let set = TwoStateSet::canonical(0.5, 2)?;
//! let result = build_asymmetric(&set, Favored::Phi)?;
//! assert!((result.ae - ae_lower_bound(0.5)?).abs() < 1e-12);
//! assert!((result.re.unwrap() - re_lower_bound(0.5)?).abs() < 1e-12);
//! # Ok::<(), clonebound::Error>(())
//! ```

pub mod bounds;
pub mod cloners;
pub mod cloning;
mod error;
pub mod geometry;
pub mod random;
pub mod search;
pub mod statespace;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Tolerance for algebraic identities on unit vectors.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for unitarity of explicit matrices and for realisability checks.
pub const UNITARY_TOL: f64 = 1e-10;
