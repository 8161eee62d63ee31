//! Electromagnetic fields radiated by an aperture density, far fields,
//! transmitted power and physical residual checks.
//!
//! With `S = ∫ g W`, `D = ∫ ∇g div W` and `K = ∫ ∇g × W` (gradients in the
//! observation point, `W` extended by zero normal component),
//!
//! - upper half-space: `E^s = 2K`, `H^s = −2ik (S + D/k²)`;
//! - lower half-space: `E^s = −2K`, `H^s = 2ik (S + D/k²)`.
//!
//! `S + D/k²` is `∫ G W` for the dyadic `G = (I + ∇∇/k²) g`, rewritten by
//! parts (RT0 fields have continuous normal components and vanish on the rim).
//! Units: `ε = μ = 1`, `∇×E = ikH`, `∇×H = −ikE`.

use crate::error::{Error, Result};
use crate::geometry::dofs::{rt_field, rt_field_div, DofTable};
use crate::geometry::quadrature::{cell_quadrature, gauss_legendre, map_rule, observation_rule, QuadratureRule};
use crate::geometry::ApertureMesh;
use crate::greens::{g_radial, grad_from};
use crate::scalar::{Real, C};
use crate::scalar_bie::{eval_us_scalar_side, incident_scalar, Region, ScalarDensity, ScalarWave};
use crate::spectra::transform::CellTransforms;
use crate::vector_bie::{incident_fields, VectorDensity, WaveContext};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Evaluations closer than this fraction of the mesh size to the aperture are refused.
pub const NEAR_FIELD_EXCLUSION: f64 = 0.1;

/// Relative disagreement of the two transmitted-power values above which a
/// [`PowerReport`] is flagged.
pub const POWER_TOLERANCE: f64 = 0.02;

type V3<T> = [C<T>; 3];

fn zero3<T: Real>() -> V3<T> {
    [C::new(T::zero(), T::zero()); 3]
}

fn add3<T: Real>(a: V3<T>, b: V3<T>) -> V3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale3<T: Real>(a: V3<T>, s: C<T>) -> V3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm3<T: Real>(a: &V3<T>) -> T {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

/// Field values at one observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub position: [T; 3],
    pub e: V3<T>,
    pub h: V3<T>,
    pub region: Region,
}

/// Evaluates the scattered fields of one density.
pub struct FieldEvaluator<'a, T> {
    mesh: &'a ApertureMesh<T>,
    dofs: DofTable,
    coefficients: &'a [C<T>],
    divergence: Vec<C<T>>,
    k: T,
    far: QuadratureRule<T>,
    near: QuadratureRule<T>,
}

impl<'a, T: Real> FieldEvaluator<'a, T> {
    pub fn new(mesh: &'a ApertureMesh<T>, density: &'a VectorDensity<T>) -> Result<Self> {
        density.check_mesh(mesh)?;
        if !(density.k > T::zero()) || !density.k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "field evaluation needs k > 0, got {}",
                density.k
            )));
        }
        let dofs = DofTable::new(mesh);
        let divergence = (0..mesh.num_cells())
            .map(|c| rt_field_div(mesh, &dofs, &density.coefficients, c))
            .collect();
        Ok(FieldEvaluator {
            mesh,
            dofs,
            coefficients: &density.coefficients,
            divergence,
            k: density.k,
            far: cell_quadrature(4)?,
            near: cell_quadrature(6)?,
        })
    }

    pub fn k(&self) -> T {
        self.k
    }

    /// Distance from `r` to the aperture surface.
    fn clearance(&self, r: [T; 3]) -> T {
        let d = self.mesh.distance_to_mesh([r[0], r[1]]);
        (d * d + r[2] * r[2]).sqrt()
    }

    fn check(&self, r: [T; 3]) -> Result<()> {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("observation point is not finite".into()));
        }
        let limit = T::lit(NEAR_FIELD_EXCLUSION) * self.mesh.h;
        if self.clearance(r) < limit {
            return Err(Error::Singular(format!(
                "point ({}, {}, {}) is within {limit} of the aperture",
                r[0], r[1], r[2]
            )));
        }
        Ok(())
    }

    /// `(S, D, K)` at `r`, with quadrature refined for the point `anchor`.
    fn potentials(&self, r: [T; 3], anchor: [T; 3]) -> (V3<T>, V3<T>, V3<T>) {
        let (mut s, mut d, mut kk) = (zero3::<T>(), zero3::<T>(), zero3::<T>());
        let zero = C::new(T::zero(), T::zero());
        for c in 0..self.mesh.num_cells() {
            let tri = self.mesh.cell_points(c);
            let cen = self.mesh.cell_centroid(c);
            let dc = ((anchor[0] - cen[0]).powi(2) + (anchor[1] - cen[1]).powi(2) + anchor[2] * anchor[2]).sqrt();
            let pts = if dc > T::lit(3.0) * self.mesh.cell_diameter(c) {
                map_rule(&self.far, &tri)
            } else {
                observation_rule(&self.near, &tri, anchor, T::lit(0.5), 12)
            };
            let div = self.divergence[c];
            for (y, w) in pts {
                let sep = [r[0] - y[0], r[1] - y[1], r[2]];
                let big_r = (sep[0] * sep[0] + sep[1] * sep[1] + sep[2] * sep[2]).sqrt();
                let g = g_radial(big_r, self.k) * w;
                let gg = grad_from(sep, big_r, self.k).map(|v| v * w);
                let wv = rt_field(self.mesh, &self.dofs, self.coefficients, c, y);
                s = add3(s, [g * wv[0], g * wv[1], zero]);
                d = add3(d, scale3(gg, div));
                kk = add3(kk, [-gg[2] * wv[1], gg[2] * wv[0], gg[0] * wv[1] - gg[1] * wv[0]]);
            }
        }
        (s, d, kk)
    }

    fn combine(&self, side: Region, (s, d, kk): (V3<T>, V3<T>, V3<T>)) -> (V3<T>, V3<T>) {
        let sign = match side {
            Region::Upper => T::one(),
            Region::Lower => -T::one(),
        };
        let two = T::lit(2.0);
        let e = scale3(kk, C::new(two * sign, T::zero()));
        let inv_k2 = T::one() / (self.k * self.k);
        let gw = add3(s, scale3(d, C::new(inv_k2, T::zero())));
        let h = scale3(gw, C::new(T::zero(), -two * self.k * sign));
        (e, h)
    }

    fn side_of(&self, r: [T; 3], side: Region) -> Result<()> {
        match Region::of(r[2]) {
            Some(actual) if actual != side => Err(Error::InvalidArgument(
                "observation point is on the other side of the screen".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Scattered `(E^s, H^s)` on the given side (needed for points with `r₃ = 0`).
    pub fn scattered_side(&self, r: [T; 3], side: Region) -> Result<(V3<T>, V3<T>)> {
        self.check(r)?;
        self.side_of(r, side)?;
        Ok(self.combine(side, self.potentials(r, r)))
    }

    /// As [`Self::scattered_side`], with the quadrature chosen for `anchor`; used
    /// to keep the rule fixed across a finite-difference stencil.
    pub fn scattered_anchored(&self, r: [T; 3], anchor: [T; 3], side: Region) -> Result<(V3<T>, V3<T>)> {
        self.check(r)?;
        self.check(anchor)?;
        self.side_of(r, side)?;
        Ok(self.combine(side, self.potentials(r, anchor)))
    }

    /// Scattered fields; the side is taken from the sign of `r₃` (upper on the plane).
    pub fn scattered(&self, r: [T; 3]) -> Result<(V3<T>, V3<T>)> {
        self.scattered_side(r, Region::of(r[2]).unwrap_or(Region::Upper))
    }

    /// Total fields: incident plus reflected plus scattered above, scattered below.
    pub fn total_side(&self, wave: &WaveContext<T>, r: [T; 3], side: Region) -> Result<FieldSample<T>> {
        let (mut e, mut h) = self.scattered_side(r, side)?;
        if side == Region::Upper {
            let f = incident_fields(wave, r);
            e = add3(e, add3(f.e_inc, f.e_ref));
            h = add3(h, add3(f.h_inc, f.h_ref));
        }
        Ok(FieldSample {
            position: r,
            e,
            h,
            region: side,
        })
    }

    pub fn total(&self, wave: &WaveContext<T>, r: [T; 3]) -> Result<FieldSample<T>> {
        self.total_side(wave, r, Region::of(r[2]).unwrap_or(Region::Upper))
    }

    /// Total fields at many points, evaluated in parallel.
    pub fn total_many(&self, wave: &WaveContext<T>, points: &[[T; 3]]) -> Result<Vec<FieldSample<T>>> {
        points.par_iter().map(|r| self.total(wave, *r)).collect()
    }

    /// `∫ W e^{−iξ·y}`.
    fn transform(&self, xi: [T; 2]) -> [C<T>; 2] {
        let (phi, _) = CellTransforms::new(self.mesh, xi).rt(self.mesh, &self.dofs);
        let zero = C::new(T::zero(), T::zero());
        self.coefficients
            .iter()
            .zip(&phi)
            .fold([zero; 2], |s, (a, p)| [s[0] + *a * p[0], s[1] + *a * p[1]])
    }

    /// Far-field amplitude of `H^s` in the lower half-space:
    /// `H^s(r r̂) ≈ e^{ikr}/r · F(r̂)`.
    pub fn far_field(&self, direction: [T; 3]) -> Result<V3<T>> {
        let n = (direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]).sqrt();
        if !((n - T::one()).abs() < T::lit(1e-9)) {
            return Err(Error::InvalidArgument(format!(
                "direction must be a unit vector, |r̂| = {n}"
            )));
        }
        if !(direction[2] < T::zero()) {
            return Err(Error::InvalidArgument(
                "far field is defined for the lower hemisphere only".into(),
            ));
        }
        let w = self.transform([self.k * direction[0], self.k * direction[1]]);
        let radial = w[0] * direction[0] + w[1] * direction[1];
        let pref = C::new(T::zero(), self.k / (T::lit(2.0) * T::PI()));
        Ok([
            (w[0] - radial * direction[0]) * pref,
            (w[1] - radial * direction[1]) * pref,
            (-radial * direction[2]) * pref,
        ])
    }

    /// `½ ∫ |F|² dΩ` over the lower hemisphere.
    pub fn far_field_power(&self, polar: usize, azimuthal: usize) -> Result<T> {
        let (mu, wmu) = gauss_legendre(polar);
        let two_pi = T::lit(std::f64::consts::TAU);
        let dphi = two_pi / T::from_count(azimuthal);
        let terms: Vec<T> = (0..polar * azimuthal)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / azimuthal, idx % azimuthal);
                // cos θ ∈ (−1, 0)
                let c = T::lit(0.5 * (mu[i] - 1.0));
                let s = (T::one() - c * c).sqrt();
                let phi = dphi * T::from_count(j);
                let f = self
                    .far_field([s * phi.cos(), s * phi.sin(), c])
                    .expect("quadrature directions lie in the lower hemisphere");
                (f[0].norm_sqr() + f[1].norm_sqr() + f[2].norm_sqr()) * T::lit(0.5 * wmu[i]) * dphi
            })
            .collect();
        Ok(terms.into_iter().sum::<T>() * T::lit(0.5))
    }

    /// `½ Re ∫_Γ (E × H̄)·(−e₃)` with the lower-side traces `E_t = −e₃ × W`
    /// and `H_t = ½ (H^i + H^r)_t`.
    pub fn aperture_power(&self, wave: &WaveContext<T>) -> Result<T> {
        let rule = cell_quadrature::<T>(6)?;
        let mut total = T::zero();
        for c in 0..self.mesh.num_cells() {
            for (x, w) in map_rule(&rule, &self.mesh.cell_points(c)) {
                let wv = rt_field(self.mesh, &self.dofs, self.coefficients, c, x);
                let f = incident_fields(wave, [x[0], x[1], T::zero()]);
                let h = [f.h_inc[0] + f.h_ref[0], f.h_inc[1] + f.h_ref[1]];
                // (E × H̄)₃ = W · H̄_t
                total = total + (wv[0] * h[0].conj() + wv[1] * h[1].conj()).re * w;
            }
        }
        Ok(-total * T::lit(0.25))
    }
}

/// Scattered magnetic field.
pub fn eval_hs<T: Real>(mesh: &ApertureMesh<T>, density: &VectorDensity<T>, r: [T; 3]) -> Result<V3<T>> {
    Ok(FieldEvaluator::new(mesh, density)?.scattered(r)?.1)
}

/// Scattered electric field.
pub fn eval_es<T: Real>(mesh: &ApertureMesh<T>, density: &VectorDensity<T>, r: [T; 3]) -> Result<V3<T>> {
    Ok(FieldEvaluator::new(mesh, density)?.scattered(r)?.0)
}

pub fn far_field<T: Real>(mesh: &ApertureMesh<T>, density: &VectorDensity<T>, direction: [T; 3]) -> Result<V3<T>> {
    FieldEvaluator::new(mesh, density)?.far_field(direction)
}

/// Transmitted power computed twice, and the transmission coefficient.
///
/// `τ` is the aperture-flux power divided by `½ |E^i × H̄^i| · Area(Γ)`, the
/// incident flux density times the aperture area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub incident_flux: f64,
    pub aperture_power: f64,
    pub far_field_power: f64,
    pub tau: f64,
    /// `|P_aperture − P_far| / P_far`.
    pub relative_disagreement: f64,
    pub flagged: bool,
}

pub fn transmission<T: Real>(
    mesh: &ApertureMesh<T>,
    density: &VectorDensity<T>,
    wave: &WaveContext<T>,
) -> Result<PowerReport> {
    wave.validate()?;
    if wave.is_zero() {
        return Err(Error::InvalidArgument("incident field is zero; τ is undefined".into()));
    }
    let ev = FieldEvaluator::new(mesh, density)?;
    let p_norm = wave.p.iter().map(|v| *v * *v).sum::<T>().sqrt();
    let q_norm = wave.q.iter().map(|v| *v * *v).sum::<T>().sqrt();
    let incident = (T::lit(0.5) * p_norm * q_norm * mesh.total_area()).to_f64_lossy();
    let aperture = ev.aperture_power(wave)?.to_f64_lossy();
    let far = ev.far_field_power(32, 64)?.to_f64_lossy();
    let relative_disagreement = if far > 0.0 {
        (aperture - far).abs() / far
    } else {
        f64::INFINITY
    };
    Ok(PowerReport {
        incident_flux: incident,
        aperture_power: aperture,
        far_field_power: far,
        tau: aperture / incident,
        relative_disagreement,
        flagged: !(relative_disagreement <= POWER_TOLERANCE),
    })
}

/// Observation points for [`residual_suite`], in units of the aperture size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Screen points `(x, y)` on `r₃ = 0`, outside the aperture.
    pub screen: Vec<[f64; 2]>,
    /// Aperture points `(x, y)`, evaluated at `r₃ = ±height` and `±2 height`.
    pub aperture: Vec<[f64; 2]>,
    /// Height of the aperture samples as a multiple of the mesh size.
    pub aperture_height: f64,
    /// Off-plane points for the finite-difference Maxwell check.
    pub volume: Vec<[f64; 3]>,
    /// Finite-difference step as a multiple of the mesh size.
    pub fd_step: f64,
    /// Lower-hemisphere direction and the two values of `kr` for the radiation check.
    pub ray: [f64; 3],
    pub ray_kr: [f64; 2],
}

impl SamplePlan {
    /// A plan scaled to an aperture centred at `center` with outer radius `radius`.
    pub fn around(center: [f64; 2], radius: f64) -> Self {
        let ring = |rad: f64, n: usize, phase: f64| -> Vec<[f64; 2]> {
            (0..n)
                .map(|i| {
                    let t = phase + std::f64::consts::TAU * i as f64 / n as f64;
                    [center[0] + rad * t.cos(), center[1] + rad * t.sin()]
                })
                .collect()
        };
        let mut screen = ring(1.3 * radius, 8, 0.1);
        screen.extend(ring(1.8 * radius, 8, 0.5));
        let mut aperture = ring(0.25 * radius, 6, 0.2);
        aperture.extend(ring(0.5 * radius, 6, 0.7));
        let mut volume = Vec::new();
        for (i, p) in ring(0.6 * radius, 4, 0.3).into_iter().enumerate() {
            let z = if i % 2 == 0 { 0.7 * radius } else { 1.2 * radius };
            volume.push([p[0], p[1], z]);
            volume.push([p[0], p[1], -z]);
        }
        let s = (0.5f64).sqrt();
        SamplePlan {
            screen,
            aperture,
            aperture_height: 0.25,
            volume,
            fd_step: 0.1,
            ray: [0.6 * s, 0.8 * s, -s],
            ray_kr: [50.0, 100.0],
        }
    }

    /// The plan for a mesh, using its centroid and extent.
    pub fn for_mesh<T: Real>(mesh: &ApertureMesh<T>) -> Self {
        let n = mesh.vertices.len() as f64;
        let cx = mesh.vertices.iter().map(|v| v[0].to_f64_lossy()).sum::<f64>() / n;
        let cy = mesh.vertices.iter().map(|v| v[1].to_f64_lossy()).sum::<f64>() / n;
        let r = mesh
            .vertices
            .iter()
            .map(|v| ((v[0].to_f64_lossy() - cx).powi(2) + (v[1].to_f64_lossy() - cy).powi(2)).sqrt())
            .fold(0.0, f64::max);
        Self::around([cx, cy], r)
    }
}

/// Physical residuals of a solved vector problem. Field residuals are
/// relative to the incident amplitude `|p|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// RMS of `|e₃ × E|` at screen points.
    pub screen_tangential_e: f64,
    /// RMS of `|H·e₃|` at screen points.
    pub screen_normal_h: f64,
    /// RMS jump of the tangential magnetic field across the aperture,
    /// extrapolated to the plane from two heights.
    pub aperture_continuity: f64,
    /// RMS of `|∇×E − ikH|` and `|∇×H + ikE|` by central differences,
    /// relative to the local field magnitude.
    pub maxwell_e: f64,
    pub maxwell_h: f64,
    /// `r |H^s × r̂ − E^s|` at the two ray points.
    pub radiation: [f64; 2],
}

fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Central-difference curls of `(E, H)` at `r`, with one quadrature rule for the stencil.
fn fd_curls<T: Real>(ev: &FieldEvaluator<T>, r: [T; 3], step: T) -> Result<(V3<T>, V3<T>, V3<T>, V3<T>)> {
    let side = Region::of(r[2]).ok_or_else(|| Error::InvalidArgument("stencil centre on the screen plane".into()))?;
    let mut de = [zero3::<T>(); 3];
    let mut dh = [zero3::<T>(); 3];
    let inv = C::new(T::one() / (step + step), T::zero());
    for axis in 0..3 {
        let mut plus = r;
        let mut minus = r;
        plus[axis] = plus[axis] + step;
        minus[axis] = minus[axis] - step;
        let (ep, hp) = ev.scattered_anchored(plus, r, side)?;
        let (em, hm) = ev.scattered_anchored(minus, r, side)?;
        // d[axis][component]
        de[axis] = scale3(add3(ep, scale3(em, C::new(-T::one(), T::zero()))), inv);
        dh[axis] = scale3(add3(hp, scale3(hm, C::new(-T::one(), T::zero()))), inv);
    }
    let curl = |d: &[V3<T>; 3]| [d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]];
    let (e, h) = ev.scattered_anchored(r, r, side)?;
    Ok((curl(&de), curl(&dh), e, h))
}

/// Screen boundary conditions, aperture continuity, Maxwell's equations and
/// the radiation condition, each measured at the points of `plan`.
pub fn residual_suite<T: Real>(
    mesh: &ApertureMesh<T>,
    density: &VectorDensity<T>,
    wave: &WaveContext<T>,
    plan: &SamplePlan,
) -> Result<ResidualReport> {
    wave.validate()?;
    let ev = FieldEvaluator::new(mesh, density)?;
    let k = ev.k();
    let amp = wave
        .p
        .iter()
        .map(|v| *v * *v)
        .sum::<T>()
        .sqrt()
        .to_f64_lossy()
        .max(f64::MIN_POSITIVE);

    let screen: Vec<(f64, f64)> = plan
        .screen
        .par_iter()
        .map(|p| {
            let s = ev.total_side(wave, [T::lit(p[0]), T::lit(p[1]), T::zero()], Region::Upper)?;
            let et = (s.e[0].norm_sqr() + s.e[1].norm_sqr()).sqrt().to_f64_lossy();
            Ok((et / amp, s.h[2].norm().to_f64_lossy() / amp))
        })
        .collect::<Result<_>>()?;

    let height = T::lit(plan.aperture_height) * mesh.h;
    let continuity: Vec<f64> = plan
        .aperture
        .par_iter()
        .map(|p| {
            let jump = |z: T| -> Result<[C<T>; 2]> {
                let up = ev.total_side(wave, [T::lit(p[0]), T::lit(p[1]), z], Region::Upper)?;
                let low = ev.total_side(wave, [T::lit(p[0]), T::lit(p[1]), -z], Region::Lower)?;
                Ok([up.h[0] - low.h[0], up.h[1] - low.h[1]])
            };
            // the jump is linear in the height near the plane; extrapolate to zero
            let (a, b) = (jump(height)?, jump(height + height)?);
            let j = [a[0] * T::lit(2.0) - b[0], a[1] * T::lit(2.0) - b[1]];
            Ok((j[0].norm_sqr() + j[1].norm_sqr()).sqrt().to_f64_lossy() / amp)
        })
        .collect::<Result<_>>()?;

    let step = T::lit(plan.fd_step) * mesh.h;
    let ik = C::new(T::zero(), k);
    let maxwell: Vec<(f64, f64)> = plan
        .volume
        .par_iter()
        .map(|p| {
            let r = [T::lit(p[0]), T::lit(p[1]), T::lit(p[2])];
            let (ce, ch, e, h) = fd_curls(&ev, r, step)?;
            let scale = (norm3(&e) + norm3(&h)).to_f64_lossy().max(f64::MIN_POSITIVE);
            let re = add3(ce, scale3(h, -ik));
            let rh = add3(ch, scale3(e, ik));
            Ok((norm3(&re).to_f64_lossy() / scale, norm3(&rh).to_f64_lossy() / scale))
        })
        .collect::<Result<_>>()?;

    let dir = plan.ray.map(T::lit);
    let mut radiation = [0.0; 2];
    for (slot, kr) in radiation.iter_mut().zip(plan.ray_kr) {
        let dist = T::lit(kr) / k;
        let r = dir.map(|v| v * dist);
        let (e, h) = ev.scattered(r)?;
        // H × r̂ − E
        let hx = [
            h[1] * dir[2] - h[2] * dir[1],
            h[2] * dir[0] - h[0] * dir[2],
            h[0] * dir[1] - h[1] * dir[0],
        ];
        let d = add3(hx, scale3(e, C::new(-T::one(), T::zero())));
        *slot = (dist * norm3(&d)).to_f64_lossy() / amp;
    }

    Ok(ResidualReport {
        screen_tangential_e: rms(&screen.iter().map(|v| v.0).collect::<Vec<_>>()),
        screen_normal_h: rms(&screen.iter().map(|v| v.1).collect::<Vec<_>>()),
        aperture_continuity: rms(&continuity),
        maxwell_e: rms(&maxwell.iter().map(|v| v.0).collect::<Vec<_>>()),
        maxwell_h: rms(&maxwell.iter().map(|v| v.1).collect::<Vec<_>>()),
        radiation,
    })
}

/// Residuals of a solved scalar problem, relative to the unit incident amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarResidualReport {
    /// RMS jump of the total field across the aperture, extrapolated to the plane.
    pub aperture_continuity: f64,
    /// RMS of `|Δu^s + k²u^s| / (k²|u^s|)` by seven-point differences.
    pub helmholtz: f64,
    /// RMS of the one-sided difference `∂u^s/∂r₃ / k` at screen points.
    pub screen_neumann: f64,
}

/// Continuity, Helmholtz and Neumann residuals of a scalar density.
pub fn scalar_residual_suite<T: Real>(
    mesh: &ApertureMesh<T>,
    density: &ScalarDensity<T>,
    wave: &ScalarWave<T>,
    plan: &SamplePlan,
) -> Result<ScalarResidualReport> {
    wave.validate()?;
    let k = wave.k;
    let us = |r: [T; 3], side: Region| eval_us_scalar_side(mesh, density, r, side);
    let height = T::lit(plan.aperture_height) * mesh.h;
    let continuity: Vec<f64> = plan
        .aperture
        .par_iter()
        .map(|p| {
            let jump = |z: T| -> Result<C<T>> {
                let up = [T::lit(p[0]), T::lit(p[1]), z];
                let (ui, ur) = incident_scalar(wave, up);
                let low = [up[0], up[1], -z];
                Ok(ui + ur + us(up, Region::Upper)? - us(low, Region::Lower)?)
            };
            let j = jump(height)? * T::lit(2.0) - jump(height + height)?;
            Ok(j.norm().to_f64_lossy())
        })
        .collect::<Result<_>>()?;

    let step = T::lit(plan.fd_step) * mesh.h;
    let helmholtz: Vec<f64> = plan
        .volume
        .par_iter()
        .map(|p| {
            let r = [T::lit(p[0]), T::lit(p[1]), T::lit(p[2])];
            let side = Region::of(r[2]).unwrap_or(Region::Upper);
            let centre = us(r, side)?;
            let mut lap = centre * T::lit(-6.0);
            for axis in 0..3 {
                for sgn in [T::one(), -T::one()] {
                    let mut q = r;
                    q[axis] = q[axis] + sgn * step;
                    lap = lap + us(q, side)?;
                }
            }
            lap = lap / (step * step);
            let scale = (centre.norm() * k * k).to_f64_lossy().max(f64::MIN_POSITIVE);
            Ok((lap + centre * (k * k)).norm().to_f64_lossy() / scale)
        })
        .collect::<Result<_>>()?;

    let neumann: Vec<f64> = plan
        .screen
        .par_iter()
        .map(|p| {
            let base = [T::lit(p[0]), T::lit(p[1]), T::zero()];
            let lifted = [base[0], base[1], step];
            let d = (us(lifted, Region::Upper)? - us(base, Region::Upper)?) / step;
            Ok((d.norm() / k).to_f64_lossy())
        })
        .collect::<Result<_>>()?;

    Ok(ScalarResidualReport {
        aperture_continuity: rms(&continuity),
        helmholtz: rms(&helmholtz),
        screen_neumann: rms(&neumann),
    })
}

/// CSV field map with header `x,y,z,Re Ex,Im Ex,…,Re Hz,Im Hz`.
pub fn field_map_csv<T: Real>(samples: &[FieldSample<T>]) -> String {
    let mut out = String::from("x,y,z,Re Ex,Im Ex,Re Ey,Im Ey,Re Ez,Im Ez,Re Hx,Im Hx,Re Hy,Im Hy,Re Hz,Im Hz\n");
    for s in samples {
        let mut cols: Vec<String> = s.position.iter().map(|v| format!("{:e}", v.to_f64_lossy())).collect();
        for z in s.e.iter().chain(&s.h) {
            cols.push(format!("{:e}", z.re.to_f64_lossy()));
            cols.push(format!("{:e}", z.im.to_f64_lossy()));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}
