//! Galerkin matrices as sums over the Fourier-plane grid.

use super::grid::SpectralGrid;
use super::symbol::{symbol_radial, Branch};
use crate::geometry::ApertureMesh;
use crate::linalg::CMatrix;
use crate::scalar::{Real, C};
use rayon::prelude::*;

/// Number of ring batches; fixed so the reduction order never depends on the
/// thread count.
const BATCHES: usize = 32;

/// Smallest `Ξmax · h_min` considered resolved.
pub const MIN_RESOLUTION: f64 = 20.0;

/// Warning text when the grid cannot resolve the smallest cell.
pub fn resolution_warning<T: Real>(mesh: &ApertureMesh<T>, grid: &SpectralGrid<T>) -> Option<String> {
    let h_min = (0..mesh.num_cells())
        .map(|c| mesh.cell_diameter(c))
        .fold(T::infinity(), T::min);
    let product = (grid.xi_max * h_min).to_f64_lossy();
    (product < MIN_RESOLUTION).then(|| {
        format!("Ξmax·h_min = {product:.2} is below {MIN_RESOLUTION}; spectral matrix entries are under-resolved")
    })
}

/// `M_ij = Σ_nodes w Σ_t c_t(ρ) v_t,j(ξ) conj(v_t,i(ξ))`.
///
/// `vectors(ξ)` returns one vector per term; `coefficients(ρ, ĝ)` the matching
/// ring weights. The vectors must be transforms of real functions, so that
/// `v(−ξ) = ±conj(v(ξ))`: opposite nodes then contribute complex conjugates,
/// only half of each ring (the angular count is even) is visited, and the
/// per-ring sums are real and symmetric.
pub(crate) fn galerkin_sum<T, V, W>(
    grid: &SpectralGrid<T>,
    n: usize,
    branch: Branch,
    vectors: V,
    coefficients: W,
) -> CMatrix<T>
where
    T: Real,
    V: Fn([T; 2]) -> Vec<Vec<C<T>>> + Sync,
    W: Fn(T, C<T>) -> Vec<C<T>> + Sync,
{
    let n_ang = grid.angular.len();
    debug_assert!(n_ang.is_multiple_of(2));
    let angles = &grid.angular[..n_ang / 2];
    let rings = grid.radial.len();
    let per_batch = rings.div_ceil(BATCHES).max(1);
    let zero = C::new(T::zero(), T::zero());
    // packed upper triangle, row-major: (i, j) with i ≤ j
    let packed = n * (n + 1) / 2;
    let partial: Vec<Vec<C<T>>> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![zero; packed];
            let lo = (b * per_batch).min(rings);
            let hi = ((b + 1) * per_batch).min(rings);
            let mut ring: Vec<Vec<T>> = Vec::new();
            for &(rho, wr) in &grid.radial[lo..hi] {
                let coef = coefficients(rho, symbol_radial(rho, grid.k, branch));
                if ring.len() != coef.len() {
                    ring = vec![vec![T::zero(); packed]; coef.len()];
                }
                ring.iter_mut().for_each(|s| s.iter_mut().for_each(|v| *v = T::zero()));
                for &(th, wt) in angles {
                    let xi = [rho * th.cos(), rho * th.sin()];
                    for (s, v) in ring.iter_mut().zip(vectors(xi)) {
                        let vr: Vec<T> = v.iter().map(|z| z.re * wt).collect();
                        let vi: Vec<T> = v.iter().map(|z| z.im * wt).collect();
                        let mut off = 0;
                        for i in 0..n {
                            // Re(v_j conj v_i)
                            let (ar, ai) = (v[i].re, v[i].im);
                            let row = &mut s[off..off + n - i];
                            for ((e, r), m) in row.iter_mut().zip(&vr[i..]).zip(&vi[i..]) {
                                *e = *e + *r * ar + *m * ai;
                            }
                            off += n - i;
                        }
                    }
                }
                for (s, c) in ring.iter().zip(&coef) {
                    let c = *c * (wr + wr);
                    for (a, v) in acc.iter_mut().zip(s) {
                        *a = *a + c * *v;
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    let prefactor = super::inverse_prefactor::<T>();
    let mut off = 0;
    for i in 0..n {
        for j in i..n {
            let s = partial.iter().fold(zero, |s, p| s + p[off + j - i]) * prefactor;
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
        off += n - i;
    }
    out
}
