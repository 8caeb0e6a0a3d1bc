//! Numerical laboratory for the Ising chain in a complex transverse field.
//!
//! The chain H = −J Σ σ^x_j σ^x_{j+1} − (h + iγ/4) Σ σ^z_j maps to free
//! fermions with a complex dispersion Λ(k). This crate provides the spectrum
//! and Bogoliubov data ([`model`]), special functions ([`specfun`]),
//! panel quadrature ([`quad`]), exact per-mode evolution ([`evolution`]),
//! spin-spin correlations ([`correlations`]), Krylov spread and fidelity
//! ([`krylov`]) and an exact-diagonalization oracle ([`oracle`]).

pub mod correlations;
pub mod error;
pub mod evolution;
pub mod krylov;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{ModelParams, C64};
