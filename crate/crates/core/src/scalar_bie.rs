//! Sound-hard screen with an aperture: the scalar Neumann problem.
//!
//! The density `ψ = ∂u^s/∂r₃` on the aperture solves `2 T ψ = u^i`, where
//! `T ψ(x) = ∫ g(x, y) ψ(y) dy`; the scattered field is `u^s = ∓2 ∫ g ψ` in the
//! upper/lower half-space.

use crate::error::{Error, Result};
use crate::geometry::quadrature::{cell_quadrature, map_rule, observation_rule};
use crate::geometry::ApertureMesh;
use crate::greens::g_radial;
use crate::linalg::CMatrix;
use crate::potentials::{static_potentials, Kernel, PairIntegrator, QuadratureSettings};
use crate::scalar::{cis, Real, C};
use crate::solver::{solve_dense, SolveReport};
use crate::spectra::assembly::{galerkin_sum, resolution_warning};
use crate::spectra::{transform::cell_indicators, Branch, SpectralGrid};
use serde::{Deserialize, Serialize};

/// Scalar plane wave `e^{ik m·r}` incident from above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarWave<T> {
    pub k: T,
    pub m: [T; 3],
}

impl<T: Real> ScalarWave<T> {
    pub fn new(k: T, m: [T; 3]) -> Result<Self> {
        let w = ScalarWave { k, m };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(Error::InvalidArgument(format!("k must be positive, got {}", self.k)));
        }
        let norm = self.m.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if (norm - T::one()).abs() > T::lit(1e3) * T::epsilon() {
            return Err(Error::InvalidArgument(format!(
                "direction m must be a unit vector, |m| = {norm}"
            )));
        }
        if !(self.m[2] < T::zero()) {
            return Err(Error::InvalidArgument(
                "direction m must point downwards (m₃ < 0)".into(),
            ));
        }
        Ok(())
    }
}

/// Incident and reflected waves `(e^{ik m·r}, e^{ik m′·r})`, `m′ = (m₁, m₂, −m₃)`.
pub fn incident_scalar<T: Real>(wave: &ScalarWave<T>, r: [T; 3]) -> (C<T>, C<T>) {
    let m = wave.m;
    let tangential = m[0] * r[0] + m[1] * r[1];
    (
        cis(wave.k * (tangential + m[2] * r[2])),
        cis(wave.k * (tangential - m[2] * r[2])),
    )
}

/// Galerkin matrix of `T` for piecewise constants, by spatial quadrature.
/// `k = 0` gives the static operator.
pub fn assemble_t_spatial<T: Real>(mesh: &ApertureMesh<T>, k: T, settings: &QuadratureSettings) -> Result<CMatrix<T>> {
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("k must be nonnegative, got {k}")));
    }
    p0_matrix(mesh, Kernel::helmholtz(k), settings)
}

/// Piecewise-constant Galerkin matrix of an arbitrary kernel.
pub(crate) fn p0_matrix<T: Real>(
    mesh: &ApertureMesh<T>,
    kernel: Kernel<T>,
    settings: &QuadratureSettings,
) -> Result<CMatrix<T>> {
    let pairs = PairIntegrator::new(mesh, kernel, settings)?;
    let n = mesh.num_cells();
    let mut m = CMatrix::zeros(n, n);
    pairs.for_each_pair(|a, b, mom| m[(a, b)] = mom[0][0]);
    Ok(m)
}

/// Galerkin matrix of `T` from the symbol and closed-form cell transforms.
pub fn assemble_t_spectral<T: Real>(mesh: &ApertureMesh<T>, k: T, grid: &SpectralGrid<T>) -> Result<CMatrix<T>> {
    assemble_t_spectral_with(mesh, k, grid, Branch::Outgoing)
}

pub fn assemble_t_spectral_with<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    grid: &SpectralGrid<T>,
    branch: Branch,
) -> Result<CMatrix<T>> {
    if (grid.k - k).abs() > T::epsilon() * k.max(T::one()) {
        return Err(Error::InvalidArgument(format!(
            "spectral grid built for k = {} used at k = {k}",
            grid.k
        )));
    }
    if let Some(w) = resolution_warning(mesh, grid) {
        log::warn!("{w}");
    }
    let areas2: Vec<T> = (0..mesh.num_cells()).map(|c| mesh.cell_area(c) * T::lit(2.0)).collect();
    Ok(galerkin_sum(
        grid,
        mesh.num_cells(),
        branch,
        |xi| vec![cell_indicators(mesh, &areas2, xi)],
        |_, g| vec![g],
    ))
}

/// Piecewise-constant density on the aperture mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDensity<T> {
    pub k: T,
    pub coefficients: Vec<C<T>>,
    pub mesh_hash: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarDensityDocument {
    #[serde(rename = "mesh-hash")]
    mesh_hash: String,
    k: f64,
    coefficients: Vec<[f64; 2]>,
}

impl<T: Real> ScalarDensity<T> {
    pub fn new(mesh: &ApertureMesh<T>, k: T, coefficients: Vec<C<T>>) -> Result<Self> {
        if coefficients.len() != mesh.num_cells() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {} cells",
                coefficients.len(),
                mesh.num_cells()
            )));
        }
        Ok(ScalarDensity {
            k,
            coefficients,
            mesh_hash: mesh.content_hash(),
        })
    }

    /// `∫_Γ ψ`.
    pub fn integral(&self, mesh: &ApertureMesh<T>) -> C<T> {
        self.coefficients
            .iter()
            .enumerate()
            .fold(C::new(T::zero(), T::zero()), |s, (c, v)| s + *v * mesh.cell_area(c))
    }

    /// Discrete L² norm `(Σ |ψ_c|² |c|)^{1/2}`.
    pub fn l2_norm(&self, mesh: &ApertureMesh<T>) -> T {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(c, v)| v.norm_sqr() * mesh.cell_area(c))
            .sum::<T>()
            .sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ScalarDensityDocument {
            mesh_hash: self.mesh_hash.clone(),
            k: self.k.to_f64_lossy(),
            coefficients: self
                .coefficients
                .iter()
                .map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()])
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScalarDensityDocument = serde_json::from_str(text)?;
        Ok(ScalarDensity {
            k: T::lit(doc.k),
            coefficients: doc
                .coefficients
                .iter()
                .map(|c| C::new(T::lit(c[0]), T::lit(c[1])))
                .collect(),
            mesh_hash: doc.mesh_hash,
        })
    }

    fn check_mesh(&self, mesh: &ApertureMesh<T>) -> Result<()> {
        if self.coefficients.len() != mesh.num_cells() || self.mesh_hash != mesh.content_hash() {
            return Err(Error::InvalidArgument("density does not belong to this mesh".into()));
        }
        Ok(())
    }
}

/// `(∫_c f)_c` for every cell.
pub fn load_p0<T: Real>(mesh: &ApertureMesh<T>, order: usize, f: impl Fn([T; 2]) -> C<T>) -> Result<Vec<C<T>>> {
    let rule = cell_quadrature::<T>(order)?;
    Ok((0..mesh.num_cells())
        .map(|c| {
            map_rule(&rule, &mesh.cell_points(c))
                .into_iter()
                .fold(C::new(T::zero(), T::zero()), |s, (x, w)| s + f(x) * w)
        })
        .collect())
}

/// Density and solve diagnostics.
#[derive(Debug, Clone)]
pub struct ScalarSolution<T> {
    pub density: ScalarDensity<T>,
    pub report: SolveReport,
}

/// Solves `2 T ψ = u^i` on the aperture.
pub fn solve_scalar<T: Real>(
    mesh: &ApertureMesh<T>,
    wave: &ScalarWave<T>,
    settings: &QuadratureSettings,
) -> Result<ScalarSolution<T>> {
    wave.validate()?;
    let t = assemble_t_spatial(mesh, wave.k, settings)?;
    let rhs = load_p0(mesh, settings.mid_order, |x| {
        incident_scalar(wave, [x[0], x[1], T::zero()]).0
    })?;
    solve_scalar_system(mesh, wave.k, &t.scaled(C::new(T::lit(2.0), T::zero())), &rhs)
}

/// Solves an assembled piecewise-constant system.
pub fn solve_scalar_system<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    matrix: &CMatrix<T>,
    rhs: &[C<T>],
) -> Result<ScalarSolution<T>> {
    let (x, report) = solve_dense(matrix, rhs)?;
    Ok(ScalarSolution {
        density: ScalarDensity::new(mesh, k, x)?,
        report,
    })
}

/// The electrified disc problem `T₀ ψ = 1` on the mesh.
pub fn solve_static_unit_potential<T: Real>(
    mesh: &ApertureMesh<T>,
    settings: &QuadratureSettings,
) -> Result<ScalarSolution<T>> {
    let t0 = assemble_t_spatial(mesh, T::zero(), settings)?;
    let rhs: Vec<C<T>> = (0..mesh.num_cells())
        .map(|c| C::new(mesh.cell_area(c), T::zero()))
        .collect();
    solve_scalar_system(mesh, T::zero(), &t0, &rhs)
}

/// Side of the screen plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Upper,
    Lower,
}

impl Region {
    pub fn of<T: Real>(z: T) -> Option<Region> {
        if z > T::zero() {
            Some(Region::Upper)
        } else if z < T::zero() {
            Some(Region::Lower)
        } else {
            None
        }
    }
}

/// Relative distance (in units of the mesh size) within which on-plane points
/// off the aperture are refused.
pub const ON_PLANE_EXCLUSION: f64 = 1e-6;

/// `∫_Γ g(r, y) ψ(y) dy` with singular and near-singular cells resolved.
pub fn single_layer<T: Real>(mesh: &ApertureMesh<T>, coefficients: &[C<T>], k: T, r: [T; 3]) -> Result<C<T>> {
    let p = [r[0], r[1]];
    let on_plane = r[2] == T::zero();
    if on_plane && mesh.locate(p).is_none() && mesh.distance_to_mesh(p) < T::lit(ON_PLANE_EXCLUSION) * mesh.h {
        return Err(Error::Singular(format!(
            "point ({}, {}) lies on the aperture rim",
            r[0], r[1]
        )));
    }
    let far = cell_quadrature::<T>(4)?;
    let near = cell_quadrature::<T>(6)?;
    let kernel = Kernel::helmholtz(k);
    let quarter_pi = T::one() / (T::lit(4.0) * T::PI());
    let mut total = C::new(T::zero(), T::zero());
    for (c, psi) in coefficients.iter().enumerate() {
        let tri = mesh.cell_points(c);
        let cen = mesh.cell_centroid(c);
        let d = (crate::geometry::dist(p, cen).powi(2) + r[2] * r[2]).sqrt();
        let diam = mesh.cell_diameter(c);
        let value = if d > T::lit(3.0) * diam {
            map_rule(&far, &tri)
                .into_iter()
                .fold(C::new(T::zero(), T::zero()), |s, (y, w)| {
                    let big_r = (crate::geometry::dist(p, y).powi(2) + r[2] * r[2]).sqrt();
                    s + g_radial(big_r, k) * w
                })
        } else if on_plane && mesh.locate(p).is_some() {
            // static part exactly, smooth remainder by Duffy rules
            let (stat, _) = static_potentials(p, &tri);
            observation_rule(&near, &tri, r, T::lit(0.5), 12)
                .into_iter()
                .fold(C::new(stat * quarter_pi, T::zero()), |s, (y, w)| {
                    s + kernel.smooth(crate::geometry::dist(p, y)) * w
                })
        } else {
            observation_rule(&near, &tri, r, T::lit(0.5), 12).into_iter().fold(
                C::new(T::zero(), T::zero()),
                |s, (y, w)| {
                    let big_r = (crate::geometry::dist(p, y).powi(2) + r[2] * r[2]).sqrt();
                    s + g_radial(big_r, k) * w
                },
            )
        };
        total = total + value * *psi;
    }
    Ok(total)
}

/// Scattered field `u^s(r)`; the side is taken from the sign of `r₃`.
pub fn eval_us_scalar<T: Real>(mesh: &ApertureMesh<T>, density: &ScalarDensity<T>, r: [T; 3]) -> Result<C<T>> {
    let side = Region::of(r[2]).unwrap_or(Region::Upper);
    eval_us_scalar_side(mesh, density, r, side)
}

/// Scattered field with the side given explicitly (for on-plane traces).
pub fn eval_us_scalar_side<T: Real>(
    mesh: &ApertureMesh<T>,
    density: &ScalarDensity<T>,
    r: [T; 3],
    side: Region,
) -> Result<C<T>> {
    density.check_mesh(mesh)?;
    if let Some(actual) = Region::of(r[2]) {
        if actual != side {
            return Err(Error::InvalidArgument(
                "observation point is on the other side of the screen".into(),
            ));
        }
    }
    let s = single_layer(mesh, &density.coefficients, density.k, r)? * T::lit(2.0);
    Ok(match side {
        Region::Upper => -s,
        Region::Lower => s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, ApertureSpec};

    #[test]
    fn incident_examples() {
        let w = ScalarWave::new(1.5f64, [0.0, 0.0, -1.0]).unwrap();
        let (ui, ur) = incident_scalar(&w, [0.0, 0.0, 1.0]);
        assert!((ui - cis(-1.5)).norm() < 1e-15 && (ur - cis(1.5)).norm() < 1e-15);
        let s = 0.5f64.sqrt();
        let w = ScalarWave::new(2.0, [s, 0.0, -s]).unwrap();
        let (ui, ur) = incident_scalar(&w, [0.3, -0.4, 0.0]);
        assert!((ui - ur).norm() < 1e-15);
        assert!(ScalarWave::new(1.0f64, [0.0, 0.0, 1.0]).is_err());
        assert!(ScalarWave::new(1.0f64, [0.0, 0.6, -0.6]).is_err());
    }

    #[test]
    fn single_cell_static_entry() {
        let mesh = ApertureMesh::from_cells(vec![[0.0f64, 0.0], [1.0, 0.0], [0.2, 0.9]], vec![[0, 1, 2]]).unwrap();
        let fine = QuadratureSettings {
            singular_points: 10,
            ..Default::default()
        };
        let t0 = assemble_t_spatial(&mesh, 0.0, &fine).unwrap();
        // oracle: ∫_T P(x) dx / 4π with P the closed-form inner integral, fine composite outer rule
        let rule = cell_quadrature::<f64>(8).unwrap();
        let tri = mesh.cell_points(0);
        let pts = crate::geometry::quadrature::composite_rule(&rule, &tri, 6);
        let v: f64 =
            pts.iter().map(|(x, w)| static_potentials(*x, &tri).0 * w).sum::<f64>() / (4.0 * std::f64::consts::PI);
        assert!((t0[(0, 0)].re - v).abs() < 1e-6 * v, "{} vs {v}", t0[(0, 0)].re);
        assert_eq!(t0[(0, 0)].im, 0.0);
    }

    #[test]
    fn symmetry_and_zero_rhs() {
        let mesh = build_mesh(&ApertureSpec::Disc { radius: 1.0f64 }, 0.6).unwrap();
        let t = assemble_t_spatial(&mesh, 1.0, &QuadratureSettings::default()).unwrap();
        let tt = t.transpose();
        assert!(t.sub(&tt).max_abs() < 1e-12 * t.max_abs());
        let zero = vec![C::new(0.0, 0.0); mesh.num_cells()];
        let sol = solve_scalar_system(&mesh, 1.0, &t, &zero).unwrap();
        assert!(sol.density.coefficients.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn density_json_round_trip() {
        let mesh = build_mesh(&ApertureSpec::Disc { radius: 1.0f64 }, 0.8).unwrap();
        let coeffs = (0..mesh.num_cells()).map(|i| C::new(i as f64 * 0.1, -0.3)).collect();
        let d = ScalarDensity::new(&mesh, 1.2, coeffs).unwrap();
        let back = ScalarDensity::<f64>::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
