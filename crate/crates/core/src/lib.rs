//! Heat kernels on finite upper half-plane graphs.
//!
//! The crate builds the Cayley graphs `Γ_q(H_q, H_q × S_r)` over a prime field
//! `F_q`, computes their zonal spherical functions from the spectrum of the
//! adjacency algebra, and evaluates the combinatorial-Laplacian heat kernel
//! both as a spherical expansion and as a plain matrix exponential. The
//! closed-form principal/cuspidal spherical functions, the method-of-images
//! lift to `GL(2, F_q)` and the finite theta function are all checked against
//! those spectral computations.
//!
//! Heavy loops (time grids, radius sweeps, the group lift) go through
//! [`exec::Exec`], which uses rayon when the `parallel` feature is enabled and
//! falls back to plain iteration otherwise. Results never depend on which
//! path ran.

pub mod characters;
pub mod error;
pub mod exec;
pub mod field;
pub mod graph;
pub mod heat;
pub mod linalg;
pub mod spherical;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::{ExtElement, FieldCtx};
pub use graph::{Point, UhpGraph};
pub use heat::HeatKernelResult;
pub use num_complex::Complex64;
pub use spherical::SphericalTable;

/// Version string embedded in every exported document.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
