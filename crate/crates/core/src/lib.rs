//! Regularized Cross-Newell energy for striped patterns on a shift-periodic
//! half-strip with mixed Dirichlet/Neumann data along the midline.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: the discretized strip, boundary data, ghost-value rules and
//!   the 5-point Laplacian.
//! * [`energy`]: the discrete energy, its exact gradient and diagnostics.
//! * [`optimize`]: nonlinear conjugate gradients over the pattern and the
//!   asymptotic phase shift, sweeps over the Dirichlet fraction and
//!   transition location.
//! * [`selfdual`]: closed-form and Fourier-constructed self-dual test
//!   functions (knee solution, theta series, zipper test functions).
//! * [`bounds`]: the subordinate vector fields behind the ansatz-free lower
//!   bounds and the certificates evaluated on computed minimizers.
//! * [`io`]: field files and CSV records.

pub mod bounds;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod optimize;
pub mod quad;
pub mod selfdual;

pub use error::{RcnError, Result};
pub use grid::{BoundaryConfig, PhaseField, Reflection, StripGrid};

/// Knee energy on the half-strip, `4π(1-ε²)^{3/2} / (3ε)`.
///
/// This is the exact integral of `2 s⁴ sech⁴(s y)` over one period, with
/// `s = √(1-ε²)`.
pub fn knee_energy(eps: f64) -> f64 {
    let s = (1.0 - eps * eps).max(0.0).sqrt();
    4.0 * std::f64::consts::PI * s * s * s / (3.0 * eps)
}
