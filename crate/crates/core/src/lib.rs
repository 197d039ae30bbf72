//! Pseudo-spectral solver for the boundary-driven Stokes resolvent problem on
//! the half-space `{x_d > 0}` with a dynamic (Robin-in-λ) boundary condition:
//!
//! ```text
//! (λ − Δ)u + ∇π = 0,   div u = 0        in Ω,
//! u·n = 0,   (λ + α)u + 2[(Du)n]_τ = φ    on Γ.
//! ```
//!
//! The solution is assembled mode by mode from closed-form Fourier symbols
//! ([`kernels`]), sampled on a periodic tangential grid times a graded
//! wall-normal grid ([`fields`]), and checked against an independent
//! finite-difference boundary-value solver ([`oracle`]). The [`certify`] and
//! [`sweep`] modules turn the multiplier bounds and the resolvent decay law
//! into numeric experiments.
//!
//! ```
//! use halfspace_stokes::kernels::{ResolventParams, RadialKernel};
//! use num_complex::Complex64;
//!
//! let params = ResolventParams::new(Complex64::new(1.0, 0.0), 0.0, 2).unwrap();
//! let k = RadialKernel::new(&params, 0.0);
//! // d_y m0 at s = 0, y = 0 is -1/(α + λ + √λ)
//! assert!((k.dy_m0(0.0) + 0.5).norm() < 1e-15);
//! ```

pub mod banded;
pub mod certify;
pub mod error;
pub mod fields;
pub mod kernels;
pub mod oracle;
pub mod report;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;
