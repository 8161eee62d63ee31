//! Regularizing substitutions for double integrals over pairs of triangles
//! with `1/|x − y|`-type kernels (Sauter–Schwab).
//!
//! Both triangles are parametrized over `T̂ = {0 ≤ x̂₂ ≤ x̂₁ ≤ 1}` by
//! `χ(x̂) = p₀ + x̂₁ (p₁ − p₀) + x̂₂ (p₂ − p₁)`. The rules below split `T̂ × T̂`
//! into pieces mapped from `[0, 1]⁴`; the Jacobian carries a factor `ξ³` that
//! cancels the kernel singularity at `ξ = 0`.
//!
//! - identical: both charts coincide;
//! - common edge: the charts agree on `x̂₂ = 0` (`p₀`, `p₁` shared);
//! - common vertex: the charts agree at `x̂ = 0` (`p₀` shared).

use crate::geometry::quadrature::gauss_legendre_unit;
use crate::scalar::Real;

/// Reference points `(x̂, ŷ, w)` with weights summing to `|T̂|² = 1/4`.
pub(crate) type PairRule<T> = Vec<([T; 2], [T; 2], T)>;

fn cube<T: Real>(n: usize, mut visit: impl FnMut(T, T, T, T, T)) {
    let (x, w) = gauss_legendre_unit::<T>(n);
    for (i, &xi) in x.iter().enumerate() {
        for (a, &e1) in x.iter().enumerate() {
            for (b, &e2) in x.iter().enumerate() {
                for (c, &e3) in x.iter().enumerate() {
                    visit(xi, e1, e2, e3, w[i] * w[a] * w[b] * w[c]);
                }
            }
        }
    }
}

pub(crate) fn identical<T: Real>(n: usize) -> PairRule<T> {
    let one = T::one();
    let mut out = Vec::with_capacity(6 * n.pow(4));
    cube::<T>(n, |xi, e1, e2, e3, w| {
        let w = w * xi * xi * xi * e1 * e1 * e2;
        let a = [xi, xi * (one - e1 + e1 * e2)];
        let b = [xi * (one - e1 * e2 * e3), xi * (one - e1)];
        let c = [xi, xi * e1 * (one - e2 + e2 * e3)];
        let d = [xi * (one - e1 * e2), xi * e1 * (one - e2)];
        let e = [xi * (one - e1 * e2 * e3), xi * e1 * (one - e2 * e3)];
        let f = [xi, xi * e1 * (one - e2)];
        for (x, y) in [(a, b), (b, a), (c, d), (d, c), (e, f), (f, e)] {
            out.push((x, y, w));
        }
    });
    out
}

pub(crate) fn common_edge<T: Real>(n: usize) -> PairRule<T> {
    let one = T::one();
    let mut out = Vec::with_capacity(5 * n.pow(4));
    cube::<T>(n, |xi, e1, e2, e3, w| {
        let w = w * xi * xi * xi * e1 * e1;
        out.push(([xi, xi * e1 * e3], [xi * (one - e1 * e2), xi * e1 * (one - e2)], w));
        let w = w * e2;
        out.push(([xi, xi * e1], [xi * (one - e1 * e2 * e3), xi * e1 * e2 * (one - e3)], w));
        out.push(([xi * (one - e1 * e2), xi * e1 * (one - e2)], [xi, xi * e1 * e2 * e3], w));
        out.push(([xi * (one - e1 * e2 * e3), xi * e1 * e2 * (one - e3)], [xi, xi * e1], w));
        out.push((
            [xi * (one - e1 * e2 * e3), xi * e1 * (one - e2 * e3)],
            [xi, xi * e1 * e2],
            w,
        ));
    });
    out
}

pub(crate) fn common_vertex<T: Real>(n: usize) -> PairRule<T> {
    let mut out = Vec::with_capacity(2 * n.pow(4));
    cube::<T>(n, |xi, e1, e2, e3, w| {
        let w = w * xi * xi * xi * e2;
        let a = [xi, xi * e1];
        let b = [xi * e2, xi * e2 * e3];
        out.push((a, b, w));
        out.push((b, a, w));
    });
    out
}

/// `χ(x̂)` for the vertex order `p`.
#[inline]
pub(crate) fn chart<T: Real>(p: &[[T; 2]; 3], x: [T; 2]) -> [T; 2] {
    [
        p[0][0] + x[0] * (p[1][0] - p[0][0]) + x[1] * (p[2][0] - p[1][0]),
        p[0][1] + x[0] * (p[1][1] - p[0][1]) + x[1] * (p[2][1] - p[1][1]),
    ]
}
