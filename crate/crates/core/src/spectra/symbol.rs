use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Square-root branch used for `√(k² − |ξ|²)` when `|ξ| > k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// `√(k² − |ξ|²) = i√(|ξ|² − k²)`: radiating, evanescent decay.
    #[default]
    Outgoing,
    /// The opposite (non-physical) sheet, kept for fault injection.
    Incoming,
}

/// Default half-width of the band around `|ξ| = k` excluded from point
/// evaluation of the symbol.
pub fn default_exclusion<T: Real>(k: T) -> T {
    T::lit(1e-8) * k.max(T::one())
}

/// Symbol of the planar trace of the free-space Green's function,
/// `i / (2√(k² − |ξ|²))`.
pub fn symbol_g0<T: Real>(xi: [T; 2], k: T) -> Result<C<T>> {
    symbol_g0_with(xi, k, default_exclusion(k), Branch::Outgoing)
}

pub fn symbol_g0_with<T: Real>(xi: [T; 2], k: T, exclusion: T, branch: Branch) -> Result<C<T>> {
    if k < T::zero() || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be nonnegative, got {k}"
        )));
    }
    let rho = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    if (rho - k).abs() < exclusion {
        return Err(Error::Singular(format!(
            "|ξ| = {rho} lies within {exclusion} of k = {k}"
        )));
    }
    Ok(symbol_radial(rho, k, branch))
}

/// Symbol as a function of `|ξ|`, without the exclusion guard.
pub(crate) fn symbol_radial<T: Real>(rho: T, k: T, branch: Branch) -> C<T> {
    let two = T::lit(2.0);
    let v = if rho < k {
        C::new(T::zero(), T::one() / (two * (k * k - rho * rho).sqrt()))
    } else {
        C::new(T::one() / (two * ((rho - k) * (rho + k)).sqrt()), T::zero())
    };
    match branch {
        Branch::Incoming if rho > k => -v,
        _ => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        let v = symbol_g0([0.0f64, 0.0], 1.0).unwrap();
        assert!((v - C::new(0.0, 0.5)).norm() < 1e-15);
        let s = 2f64.sqrt();
        let v = symbol_g0([1.0, 1.0], 1.0).unwrap();
        assert!((v - C::new(0.5, 0.0)).norm() < 1e-14, "{v} at |ξ| = {s}");
        let v = symbol_g0([0.0, 2.0], 0.0).unwrap();
        assert!((v - C::new(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exclusion_band_is_rejected() {
        assert!(matches!(symbol_g0([1.0f64, 0.0], 1.0), Err(Error::Singular(_))));
        assert!(symbol_g0([0.0f64, 0.0], 0.0).is_err());
    }

    #[test]
    fn incoming_branch_flips_evanescent_sign() {
        let v = symbol_g0_with([0.2f64, 0.1], 1.0, 1e-8, Branch::Incoming).unwrap();
        assert!(v.im > 0.0);
        let v = symbol_g0_with([3.0f64, 0.1], 1.0, 1e-8, Branch::Incoming).unwrap();
        assert!(v.re < 0.0);
    }
}
