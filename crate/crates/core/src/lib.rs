//! Numerical calculus for Sobolev and Besov spaces attached to the Dirichlet and
//! Neumann Laplacians on the half-space.
//!
//! The half-space is realized as the upper half of a staggered periodic box. Operators
//! act through odd (Dirichlet) or even (Neumann) reflection followed by full-space
//! Fourier multipliers, and norms are read back on the half-grid.

pub mod error;
pub mod experiments;
pub mod extension;
pub mod fit;
pub mod grid;
pub mod halfspace_ops;
pub mod io;
pub mod norms;
pub mod quadrature;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
pub use extension::{apply_sign, even_extend, extend, odd_extend, restrict, Parity};
pub use grid::{lp_norm, Bc, GridSpec, HalfField, SampledField, Samples};
pub use halfspace_ops::{
    frac_power, normal_derivative, semigroup, tangential_derivative, Operator,
};
pub use norms::{besov_norm, besov_record, sobolev_norm, sobolev_record, NormRecord, SpaceKind, SpaceSpec};
pub use spectral::bank::{build_bank, DyadicBank};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
