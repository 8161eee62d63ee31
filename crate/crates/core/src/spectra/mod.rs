//! Fourier-side calculus on the aperture plane.
//!
//! Convention: `f̂(ξ) = ∫ e^{−i x·ξ} f(x) dx`, `f(x) = (1/4π²) ∫ e^{i x·ξ} f̂(ξ) dξ`.

pub(crate) mod assembly;
mod grid;
mod sobolev;
mod symbol;
pub mod transform;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub use assembly::{resolution_warning, MIN_RESOLUTION};
pub use grid::{
    build_spectral_grid, build_spectral_grid_with, weyl_check, weyl_check_with, SpectralGrid, SpectralNode, WeylCheck,
};
pub use sobolev::{discrete_transform, sobolev_norm, PaddedField, MIN_PADDING};
pub use symbol::{default_exclusion, symbol_g0, symbol_g0_with, Branch};
pub use transform::{exp_divided_difference, triangle_moments, triangle_transform, CellTransforms};

/// `(1/4π²)`, the inverse-transform prefactor.
pub fn inverse_prefactor<T: Real>() -> T {
    T::one() / (T::lit(4.0) * T::PI() * T::PI())
}

/// Longitudinal and transverse parts of a tangential field's transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzComponents<T> {
    /// Component along `ξ̂`.
    pub a1: C<T>,
    /// Component along `ξ̂⊥ = (ξ₂, −ξ₁)/|ξ|`.
    pub a2: C<T>,
}

/// Unit frame `(ξ̂, ξ̂⊥)` at a nonzero frequency.
pub fn frame<T: Real>(xi: [T; 2]) -> Result<([T; 2], [T; 2])> {
    let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    if r == T::zero() {
        return Err(Error::Singular("Helmholtz frame undefined at ξ = 0".into()));
    }
    Ok(([xi[0] / r, xi[1] / r], [xi[1] / r, -xi[0] / r]))
}

/// `a₁ = V̂·ξ̂`, `a₂ = V̂·ξ̂⊥` (no conjugation).
pub fn helmholtz_decompose<T: Real>(v: [C<T>; 2], xi: [T; 2]) -> Result<HelmholtzComponents<T>> {
    let (l, t) = frame(xi)?;
    Ok(HelmholtzComponents {
        a1: v[0] * l[0] + v[1] * l[1],
        a2: v[0] * t[0] + v[1] * t[1],
    })
}

impl<T: Real> HelmholtzComponents<T> {
    pub fn reconstruct(&self, xi: [T; 2]) -> Result<[C<T>; 2]> {
        let (l, t) = frame(xi)?;
        Ok([self.a1 * l[0] + self.a2 * t[0], self.a1 * l[1] + self.a2 * t[1]])
    }
}
