//! Boundary integral solvers for time-harmonic diffraction by an aperture in
//! an infinitely thin, perfectly conducting planar screen.
//!
//! The aperture lies in the plane `r₃ = 0`; waves arrive from `r₃ > 0`.
//! Two problems are solved on a triangulated aperture:
//!
//! - the scalar sound-hard problem, for a piecewise-constant density on cells
//!   ([`scalar_bie`]);
//! - the electromagnetic problem, for the tangential field `W = e₃ × E` on
//!   lowest-order Raviart–Thomas edge functions ([`vector_bie`]), either
//!   directly or through a divergence-constrained saddle-point system.
//!
//! Galerkin matrices are assembled either by singular spatial quadrature or as
//! sums over a polar grid in the Fourier plane ([`spectra`]); the two paths are
//! independent and serve as mutual checks. [`fields`] reconstructs fields,
//! far fields and transmitted power, [`probes`] estimates stability constants
//! and [`validation`] bundles the acceptance checks.
//!
//! All numerics are generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod error;
pub mod fields;
pub mod geometry;
pub mod greens;
pub mod linalg;
pub mod potentials;
pub mod probes;
pub mod scalar;
pub mod scalar_bie;
pub(crate) mod singular_rules;
pub mod solver;
pub mod spectra;
pub mod validation;
pub mod vector_bie;

pub use error::{Error, Result};
pub use geometry::{build_mesh, build_mesh_with, ApertureSpec, DofTable, MeshOptions};
pub use potentials::QuadratureSettings;
pub use scalar::Real;
pub use scalar_bie::Region;
pub use solver::SolveReport;
pub use spectra::Branch;

/// Double-precision complex number.
pub type Complex64 = scalar::C<f64>;
pub type Mesh = geometry::ApertureMesh<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type Grid = spectra::SpectralGrid<f64>;
pub type ScalarWave = scalar_bie::ScalarWave<f64>;
pub type ScalarDensity = scalar_bie::ScalarDensity<f64>;
pub type WaveContext = vector_bie::WaveContext<f64>;
pub type VectorDensity = vector_bie::VectorDensity<f64>;
pub type SaddleState = vector_bie::SaddleState<f64>;
pub type FieldSample = fields::FieldSample<f64>;
