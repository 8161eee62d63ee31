//! Free-space and half-space Green's functions of the Helmholtz operator.

use crate::error::{Error, Result};
use crate::scalar::{cis, Real, C};

/// 3×3 complex matrix, row-major.
pub type Dyadic<T> = [[C<T>; 3]; 3];

fn separation<T: Real>(r: [T; 3], rp: [T; 3]) -> Result<([T; 3], T)> {
    let d = [r[0] - rp[0], r[1] - rp[1], r[2] - rp[2]];
    let big_r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !(big_r > T::zero()) || !big_r.is_finite() {
        return Err(Error::Singular(
            "Green's function evaluated at coincident points".into(),
        ));
    }
    Ok((d, big_r))
}

/// Mirror image `(x, y, −z)`.
pub fn reflect<T: Real>(r: [T; 3]) -> [T; 3] {
    [r[0], r[1], -r[2]]
}

/// `e^{ikR} / (4πR)`.
pub fn g_free<T: Real>(r: [T; 3], rp: [T; 3], k: T) -> Result<C<T>> {
    let (_, big_r) = separation(r, rp)?;
    Ok(g_radial(big_r, k))
}

#[inline]
pub(crate) fn g_radial<T: Real>(big_r: T, k: T) -> C<T> {
    cis(k * big_r) / (T::lit(4.0) * T::PI() * big_r)
}

/// Gradient in `r`: `g (ik − 1/R) (r − r′)/R`.
pub fn grad_g<T: Real>(r: [T; 3], rp: [T; 3], k: T) -> Result<[C<T>; 3]> {
    let (d, big_r) = separation(r, rp)?;
    Ok(grad_from(d, big_r, k))
}

#[inline]
pub(crate) fn grad_from<T: Real>(d: [T; 3], big_r: T, k: T) -> [C<T>; 3] {
    let g = g_radial(big_r, k);
    let f = g * C::new(-T::one() / big_r, k) / big_r;
    [f * d[0], f * d[1], f * d[2]]
}

/// Hessian in `r`: `g [(3/R² − 3ik/R − k²) R̂R̂ᵀ + (ik/R − 1/R²) I]`.
pub fn hessian_g<T: Real>(r: [T; 3], rp: [T; 3], k: T) -> Result<Dyadic<T>> {
    let (d, big_r) = separation(r, rp)?;
    let g = g_radial(big_r, k);
    let r2 = big_r * big_r;
    let a = g * C::new(T::lit(3.0) / r2 - k * k, -T::lit(3.0) * k / big_r);
    let b = g * C::new(-T::one() / r2, k / big_r);
    let u = [d[0] / big_r, d[1] / big_r, d[2] / big_r];
    let mut h = [[C::new(T::zero(), T::zero()); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] = a * (u[i] * u[j]);
            if i == j {
                h[i][j] = h[i][j] + b;
            }
        }
    }
    Ok(h)
}

/// `G = (I + ∇∇/k²) g`.
pub fn dyadic_g<T: Real>(r: [T; 3], rp: [T; 3], k: T) -> Result<Dyadic<T>> {
    if !(k > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "dyadic Green's function needs k > 0, got {k}"
        )));
    }
    let g = g_free(r, rp, k)?;
    let mut h = hessian_g(r, rp, k)?;
    let inv_k2 = T::one() / (k * k);
    for (i, row) in h.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = *v * inv_k2;
            if i == j {
                *v = *v + g;
            }
        }
    }
    Ok(h)
}

/// `G⁽²⁾₊(r, r′) = G(r, r′) + diag(1, 1, −1) G(r̄, r′)`.
pub fn dyadic_g2_plus<T: Real>(r: [T; 3], rp: [T; 3], k: T) -> Result<Dyadic<T>> {
    let direct = dyadic_g(r, rp, k)?;
    let image = dyadic_g(reflect(r), rp, k)?;
    let mut out = direct;
    for i in 0..3 {
        let s = if i == 2 { -T::one() } else { T::one() };
        for j in 0..3 {
            out[i][j] = out[i][j] + image[i][j] * s;
        }
    }
    Ok(out)
}

/// `G⁽²⁾₋(r, r′) = G⁽²⁾₊(r̄, r′)`.
pub fn dyadic_g2_minus<T: Real>(r: [T; 3], rp: [T; 3], k: T) -> Result<Dyadic<T>> {
    dyadic_g2_plus(reflect(r), rp, k)
}

pub fn dyadic_matvec<T: Real>(g: &Dyadic<T>, v: [C<T>; 3]) -> [C<T>; 3] {
    [0, 1, 2].map(|i| g[i][0] * v[0] + g[i][1] * v[1] + g[i][2] * v[2])
}

pub fn dyadic_transpose<T: Real>(g: &Dyadic<T>) -> Dyadic<T> {
    let mut t = *g;
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = g[j][i];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn documented_values() {
        let o = [0.0f64; 3];
        let e = [1.0, 0.0, 0.0];
        assert!((g_free(e, o, 0.0).unwrap() - C::new(1.0 / (4.0 * PI), 0.0)).norm() < 1e-16);
        assert!((g_free(e, o, PI).unwrap() - C::new(-1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
        let gr = grad_g(e, o, 0.0).unwrap();
        assert!((gr[0] - C::new(-1.0 / (4.0 * PI), 0.0)).norm() < 1e-16);
        assert!(gr[1].norm() == 0.0 && gr[2].norm() == 0.0);
        assert!(g_free(o, o, 1.0).is_err());
        assert!(dyadic_g(e, o, 0.0).is_err());
    }

    #[test]
    fn on_plane_doubling_and_reflection() {
        let r = [0.3f64, -0.2, 0.0];
        let rp = [-0.5, 0.4, 0.0];
        let g = dyadic_g(r, rp, 1.3).unwrap();
        let g2 = dyadic_g2_plus(r, rp, 1.3).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g2[i][j] - g[i][j] * 2.0).norm() < 1e-14);
            }
        }
        let q = [0.1f64, 0.2, -0.7];
        let a = dyadic_g2_minus(q, rp, 1.3).unwrap();
        let b = dyadic_g2_plus(reflect(q), rp, 1.3).unwrap();
        assert_eq!(a, b);
    }
}
