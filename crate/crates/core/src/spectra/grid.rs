use super::symbol::{default_exclusion, symbol_radial, Branch};
use crate::error::{Error, Result};
use crate::geometry::quadrature::gauss_legendre_unit;
use crate::scalar::{cis, Real, C};
use rayon::prelude::*;

/// Gauss points per radial panel.
const PANEL: usize = 8;

/// Polar quadrature over the Fourier plane.
///
/// The disc `|ξ| < k` and the annulus `k < |ξ| < 2k` use the substitution
/// `u = √|k² − |ξ|²|`, under which `ρ dρ = ±u du` cancels the inverse
/// square-root singularity of the symbol at `|ξ| = k`. The outer annulus
/// `2k < |ξ| < Ξmax` uses Gauss panels in `ρ`; the angle uses the trapezoid rule.
#[derive(Debug, Clone)]
pub struct SpectralGrid<T> {
    pub k: T,
    pub xi_max: T,
    pub n_radial: usize,
    pub n_angular: usize,
    pub exclusion: T,
    /// Radial abscissae with the radial weight (including `ρ dρ` and the Jacobian).
    pub radial: Vec<(T, T)>,
    /// Angles and angular weights.
    pub angular: Vec<(T, T)>,
}

/// One quadrature node of the Fourier plane.
#[derive(Debug, Clone, Copy)]
pub struct SpectralNode<T> {
    pub xi: [T; 2],
    pub rho: T,
    pub weight: T,
}

impl<T: Real> SpectralGrid<T> {
    pub fn len(&self) -> usize {
        self.radial.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, index: usize) -> SpectralNode<T> {
        let (r, wr) = self.radial[index / self.angular.len()];
        let (th, wt) = self.angular[index % self.angular.len()];
        SpectralNode {
            xi: [r * th.cos(), r * th.sin()],
            rho: r,
            weight: wr * wt,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = SpectralNode<T>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Sum of `w_j f(ξ_j)` over all nodes, reduced deterministically.
    pub fn integrate(&self, f: impl Fn(&SpectralNode<T>) -> C<T> + Sync) -> C<T> {
        let per_ring: Vec<C<T>> = (0..self.radial.len())
            .into_par_iter()
            .map(|ir| {
                let mut acc = C::new(T::zero(), T::zero());
                for ia in 0..self.angular.len() {
                    let node = self.node(ir * self.angular.len() + ia);
                    acc = acc + f(&node) * node.weight;
                }
                acc
            })
            .collect();
        per_ring.into_iter().fold(C::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Symbol values at the nodes of one ring (all nodes on a ring share `|ξ|`).
    pub fn ring_symbol(&self, ring: usize, branch: Branch) -> C<T> {
        symbol_radial(self.radial[ring].0, self.k, branch)
    }
}

/// Builds the spectral grid with the default exclusion band.
pub fn build_spectral_grid<T: Real>(k: T, xi_max: T, n_radial: usize, n_angular: usize) -> Result<SpectralGrid<T>> {
    build_spectral_grid_with(k, xi_max, n_radial, n_angular, default_exclusion(k))
}

pub fn build_spectral_grid_with<T: Real>(
    k: T,
    xi_max: T,
    n_radial: usize,
    n_angular: usize,
    exclusion: T,
) -> Result<SpectralGrid<T>> {
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be nonnegative, got {k}"
        )));
    }
    if !(xi_max > T::lit(2.0) * k) || !xi_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Ξmax = {xi_max} must exceed 2k = {}",
            T::lit(2.0) * k
        )));
    }
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::InvalidArgument(
            "spectral grid needs positive radial and angular counts".into(),
        ));
    }
    let (gx, gw) = gauss_legendre_unit::<T>(PANEL);
    let mut radial: Vec<(T, T)> = Vec::new();
    // Gauss panels on [a, b] mapped through `map(u) -> (ρ, ρ dρ/du)`
    let mut panels = |a: T, b: T, count: usize, map: &dyn Fn(T) -> (T, T)| {
        let width = (b - a) / T::from_count(count);
        for p in 0..count {
            let lo = a + width * T::from_count(p);
            for (x, w) in gx.iter().zip(&gw) {
                let u = lo + width * *x;
                let (rho, jac) = map(u);
                radial.push((rho, *w * width * jac));
            }
        }
    };
    let sqrt3 = T::lit(3f64.sqrt());
    let lengths = if k > T::zero() {
        [k, sqrt3 * k, xi_max - T::lit(2.0) * k]
    } else {
        [T::zero(), T::zero(), xi_max]
    };
    let total: T = lengths.iter().copied().sum();
    let count = |len: T, min: usize| -> usize {
        let share = T::from_count(n_radial) * len / total / T::from_count(PANEL);
        share.round().to_usize().unwrap_or(0).max(min)
    };
    if k > T::zero() {
        // |ξ| < k: ρ = √(k² − u²), ρ dρ = u du (orientation absorbed)
        panels(T::zero(), k, count(lengths[0], 1), &|u| {
            (((k - u) * (k + u)).max(T::zero()).sqrt(), u)
        });
        // k < |ξ| < 2k: ρ = √(k² + u²), ρ dρ = u du
        panels(T::zero(), sqrt3 * k, count(lengths[1], 1), &|u| {
            ((k * k + u * u).sqrt(), u)
        });
        panels(T::lit(2.0) * k, xi_max, count(lengths[2], 1), &|r| (r, r));
    } else {
        panels(T::zero(), xi_max, count(lengths[2], 1), &|r| (r, r));
    }
    let before = radial.len();
    radial.retain(|(rho, _)| (*rho - k).abs() >= exclusion);
    if radial.len() != before {
        log::warn!(
            "{} radial nodes fell inside the exclusion band and were dropped",
            before - radial.len()
        );
    }
    // even, so that every node has its antipode on the grid
    let n_angular = n_angular + n_angular % 2;
    let two_pi = T::lit(2.0) * T::PI();
    let dth = two_pi / T::from_count(n_angular);
    let angular = (0..n_angular)
        .map(|j| ((T::from_count(j) + T::lit(0.5)) * dth, dth))
        .collect();
    Ok(SpectralGrid {
        k,
        xi_max,
        n_radial,
        n_angular,
        exclusion,
        radial,
        angular,
    })
}

/// Result of reconstructing `g₀` from its symbol.
#[derive(Debug, Clone, Copy)]
pub struct WeylCheck<T> {
    pub value: C<T>,
    pub closed_form: C<T>,
    pub relative_error: T,
    /// Set when the grid cannot resolve the requested separation.
    pub accuracy_warning: bool,
}

/// Inverse-transforms the symbol at separation `x − x′` and compares with
/// `e^{ikR} / (4πR)`.
///
/// A smooth `erfc` taper between `2k` and `Ξmax` replaces the hard radial
/// truncation, so the reconstruction error decays like a Gaussian in
/// `R (Ξmax − 2k)`.
pub fn weyl_check<T: Real>(x: [T; 2], xp: [T; 2], k: T, grid: &SpectralGrid<T>) -> Result<WeylCheck<T>> {
    weyl_check_with(x, xp, k, grid, Branch::Outgoing)
}

pub fn weyl_check_with<T: Real>(
    x: [T; 2],
    xp: [T; 2],
    k: T,
    grid: &SpectralGrid<T>,
    branch: Branch,
) -> Result<WeylCheck<T>> {
    let d = [x[0] - xp[0], x[1] - xp[1]];
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if r == T::zero() {
        return Err(Error::Singular("Weyl reconstruction at coincident points".into()));
    }
    if (k - grid.k).abs() > T::epsilon() * T::lit(16.0) * k.max(T::one()) {
        return Err(Error::InvalidArgument(format!(
            "grid built for k = {} but evaluation requested at k = {k}",
            grid.k
        )));
    }
    let two_k = T::lit(2.0) * k;
    let centre = (grid.xi_max + two_k) * T::lit(0.5);
    let sigma = (grid.xi_max - two_k) / T::lit(10.0);
    let taper = |rho: T| -> T {
        if rho <= two_k {
            T::one()
        } else {
            T::lit(0.5) * T::lit(libm::erfc(((rho - centre) / sigma).to_f64_lossy()))
        }
    };
    let per_ring: Vec<C<T>> = (0..grid.radial.len())
        .into_par_iter()
        .map(|ir| {
            let (rho, wr) = grid.radial[ir];
            let g = symbol_radial(rho, k, branch) * (wr * taper(rho));
            let mut acc = C::new(T::zero(), T::zero());
            for &(th, wt) in &grid.angular {
                let phase = rho * (th.cos() * d[0] + th.sin() * d[1]);
                acc = acc + cis(phase) * wt;
            }
            acc * g
        })
        .collect();
    let sum = per_ring.into_iter().fold(C::new(T::zero(), T::zero()), |a, b| a + b);
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    let value = sum / four_pi2;
    let closed_form = cis(k * r) / (T::lit(4.0) * T::PI() * r);
    let relative_error = (value - closed_form).norm() / closed_form.norm();

    // Gaussian taper tail, angular trapezoid and radial panel resolution
    let taper_tail = (-(sigma * r).powi(2) / T::lit(4.0)).exp();
    let angular_ok = T::from_count(grid.n_angular) > grid.xi_max * r + T::lit(20.0);
    let panel_width = grid
        .radial
        .windows(PANEL + 1)
        .step_by(PANEL)
        .map(|w| (w[PANEL].0 - w[0].0).abs())
        .fold(T::zero(), T::max);
    let radial_ok = panel_width * r < T::lit(8.0);
    let accuracy_warning = taper_tail > T::lit(1e-8) || !angular_ok || !radial_ok;
    if accuracy_warning {
        log::debug!("spectral grid under-resolves separation R = {r}");
    }
    Ok(WeylCheck {
        value,
        closed_form,
        relative_error,
        accuracy_warning,
    })
}
