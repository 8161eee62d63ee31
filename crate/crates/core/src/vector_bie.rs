//! Electromagnetic aperture problem: the tangential field `W = e₃ × E` on the
//! aperture solves `B(W, V) = (F, V)` for all RT0 test fields `V`, with
//!
//! `B(W, V) = −k² ∫∫ g W(y)·V̄(x) + ∫∫ g div W(y) div V̄(x)`.
//!
//! Matching tangential `H` across the aperture gives the load
//! `F = (ik/4)(H^i + H^r)_t`.

use crate::error::{Error, Result};
use crate::geometry::dofs::{curl_matrix, hat_gradients, rt_div, rt_scale, rt_value};
use crate::geometry::quadrature::{cell_quadrature, map_rule};
use crate::geometry::{ApertureMesh, DofTable};
use crate::linalg::{norm2, CMatrix};
use crate::potentials::{contract_rt, contract_scalar, Kernel, PairIntegrator, QuadratureSettings};
use crate::scalar::{cis, Real, C};
use crate::solver::{solve_dense, SolveReport};
use crate::spectra::assembly::{galerkin_sum, resolution_warning};
use crate::spectra::{frame, Branch, CellTransforms, SpectralGrid};
use serde::{Deserialize, Serialize};

/// Plane wave `E^i = p e^{ik m·r}`, `H^i = q e^{ik m·r}` with `q = m × p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveContext<T> {
    pub k: T,
    pub m: [T; 3],
    pub p: [T; 3],
    pub q: [T; 3],
}

pub(crate) fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl<T: Real> WaveContext<T> {
    /// Builds the wave; `p` may have any positive length (it sets the amplitude).
    pub fn new(k: T, m: [T; 3], p: [T; 3]) -> Result<Self> {
        let w = WaveContext {
            k,
            m,
            p,
            q: cross(m, p),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::lit(1e3) * T::epsilon();
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(Error::InvalidArgument(format!("k must be positive, got {}", self.k)));
        }
        let nm = dot(self.m, self.m).sqrt();
        if (nm - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "direction m must be a unit vector, |m| = {nm}"
            )));
        }
        if !(self.m[2] < T::zero()) {
            return Err(Error::InvalidArgument(
                "direction m must point downwards (m₃ < 0)".into(),
            ));
        }
        let np = dot(self.p, self.p).sqrt();
        if dot(self.p, self.m).abs() > tol * np.max(T::one()) {
            return Err(Error::InvalidArgument("polarization p must be orthogonal to m".into()));
        }
        let q = cross(self.m, self.p);
        let p_back = cross(q, self.m);
        let defect = (0..3)
            .map(|i| (q[i] - self.q[i]).abs() + (p_back[i] - self.p[i]).abs())
            .fold(T::zero(), T::max);
        if defect > tol * np.max(T::one()) {
            return Err(Error::InvalidArgument("q must equal m × p".into()));
        }
        Ok(())
    }

    /// The same wave with zero amplitude.
    pub fn is_zero(&self) -> bool {
        self.p.iter().all(|v| *v == T::zero())
    }
}

/// Incident and reflected plane waves at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveFields<T> {
    pub e_inc: [C<T>; 3],
    pub h_inc: [C<T>; 3],
    pub e_ref: [C<T>; 3],
    pub h_ref: [C<T>; 3],
}

/// Incident wave and its reflection by the unperturbed conducting plane.
pub fn incident_fields<T: Real>(wave: &WaveContext<T>, r: [T; 3]) -> PlaneWaveFields<T> {
    let m = wave.m;
    let ph_i = cis(wave.k * dot(m, r));
    let ph_r = cis(wave.k * (m[0] * r[0] + m[1] * r[1] - m[2] * r[2]));
    let (p, q) = (wave.p, wave.q);
    PlaneWaveFields {
        e_inc: [0, 1, 2].map(|i| ph_i * p[i]),
        h_inc: [0, 1, 2].map(|i| ph_i * q[i]),
        e_ref: [ph_r * (-p[0]), ph_r * (-p[1]), ph_r * p[2]],
        h_ref: [ph_r * q[0], ph_r * q[1], ph_r * (-q[2])],
    }
}

/// Projection `(∫ F·φ_i)_i` of a tangential field onto the RT0 basis.
pub fn project_rt<T: Real>(
    mesh: &ApertureMesh<T>,
    dofs: &DofTable,
    order: usize,
    f: impl Fn([T; 2]) -> [C<T>; 2],
) -> Result<Vec<C<T>>> {
    let rule = cell_quadrature::<T>(order)?;
    let mut out = vec![C::new(T::zero(), T::zero()); dofs.num_edge_dofs()];
    for c in 0..mesh.num_cells() {
        for (x, w) in map_rule(&rule, &mesh.cell_points(c)) {
            let v = f(x);
            for l in 0..3 {
                if let Some(i) = dofs.edge_dof[mesh.cell_edges[c][l]] {
                    let phi = rt_value(mesh, c, l, x);
                    out[i] = out[i] + (v[0] * phi[0] + v[1] * phi[1]) * w;
                }
            }
        }
    }
    Ok(out)
}

/// `(Y, φ_i)` with `Y = −e₃ × (H^i + H^r)` on the plane.
pub fn rhs_y<T: Real>(mesh: &ApertureMesh<T>, wave: &WaveContext<T>) -> Result<Vec<C<T>>> {
    let dofs = DofTable::new(mesh);
    project_rt(mesh, &dofs, 6, |x| {
        let f = incident_fields(wave, [x[0], x[1], T::zero()]);
        let h = [f.h_inc[0] + f.h_ref[0], f.h_inc[1] + f.h_ref[1]];
        // −e₃ × (h₁, h₂, ·) = (h₂, −h₁)
        [h[1], -h[0]]
    })
}

/// Load of the aperture equation, `((ik/4)(H^i + H^r)_t, φ_i)`.
pub fn physical_load<T: Real>(mesh: &ApertureMesh<T>, wave: &WaveContext<T>) -> Result<Vec<C<T>>> {
    let dofs = DofTable::new(mesh);
    let s = C::new(T::zero(), wave.k / T::lit(4.0));
    project_rt(mesh, &dofs, 6, |x| {
        let f = incident_fields(wave, [x[0], x[1], T::zero()]);
        [(f.h_inc[0] + f.h_ref[0]) * s, (f.h_inc[1] + f.h_ref[1]) * s]
    })
}

/// `M_ij = a ∫∫ K φ_j·φ_i + b ∫∫ K div φ_j div φ_i` over the RT0 basis.
pub(crate) fn rt_matrix<T: Real>(
    mesh: &ApertureMesh<T>,
    dofs: &DofTable,
    kernel: Kernel<T>,
    mass: C<T>,
    div: C<T>,
    settings: &QuadratureSettings,
) -> Result<CMatrix<T>> {
    let pairs = PairIntegrator::new(mesh, kernel, settings)?;
    let n = dofs.num_edge_dofs();
    let locals: Vec<Vec<(usize, [T; 2], T, T)>> = (0..mesh.num_cells())
        .map(|c| {
            let cen = mesh.cell_centroid(c);
            (0..3)
                .filter_map(|l| {
                    let i = dofs.edge_dof[mesh.cell_edges[c][l]]?;
                    let half = rt_scale(mesh, c, l) * T::lit(0.5);
                    let p = mesh.vertices[mesh.cells[c][l]];
                    Some((
                        i,
                        [half * (cen[0] - p[0]), half * (cen[1] - p[1])],
                        half,
                        rt_div(mesh, c, l),
                    ))
                })
                .collect()
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    pairs.for_each_pair(|a, b, mom| {
        for &(i, off_i, sc_i, div_i) in &locals[a] {
            for &(j, off_j, sc_j, div_j) in &locals[b] {
                let v = mass * contract_rt(mom, (off_i, sc_i), (off_j, sc_j)) + div * (mom[0][0] * (div_i * div_j));
                out[(i, j)] = out[(i, j)] + v;
            }
        }
    });
    Ok(out)
}

/// Galerkin matrix of `B` by spatial quadrature.
pub fn assemble_l_spatial<T: Real>(mesh: &ApertureMesh<T>, k: T, settings: &QuadratureSettings) -> Result<CMatrix<T>> {
    if !(k >= T::zero()) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("k must be nonnegative, got {k}")));
    }
    let dofs = DofTable::new(mesh);
    rt_matrix(
        mesh,
        &dofs,
        Kernel::helmholtz(k),
        C::new(-k * k, T::zero()),
        C::new(T::one(), T::zero()),
        settings,
    )
}

/// Galerkin matrix of `B` from Helmholtz components on the spectral grid.
pub fn assemble_b_spectral<T: Real>(mesh: &ApertureMesh<T>, k: T, grid: &SpectralGrid<T>) -> Result<CMatrix<T>> {
    assemble_b_spectral_with(mesh, k, grid, Branch::Outgoing)
}

pub fn assemble_b_spectral_with<T: Real>(
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
    let dofs = DofTable::new(mesh);
    let k2 = k * k;
    Ok(galerkin_sum(
        grid,
        dofs.num_edge_dofs(),
        branch,
        |xi| {
            let (phi, _) = CellTransforms::new(mesh, xi).rt(mesh, &dofs);
            let (l, t) = frame(xi).expect("grid nodes avoid the origin");
            let a1 = phi.iter().map(|v| v[0] * l[0] + v[1] * l[1]).collect();
            let a2 = phi.iter().map(|v| v[0] * t[0] + v[1] * t[1]).collect();
            vec![a1, a2]
        },
        |rho, g| vec![g * (rho * rho - k2), g * (-k2)],
    ))
}

/// RT0 coefficients of a tangential density on the aperture.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDensity<T> {
    pub k: T,
    /// One coefficient per interior edge, in [`DofTable`] order.
    pub coefficients: Vec<C<T>>,
    pub mesh_hash: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    edge: usize,
    vertices: [usize; 2],
    /// Unit normal the coefficient's flux is measured along.
    normal: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorDensityDocument {
    #[serde(rename = "mesh-hash")]
    mesh_hash: String,
    k: f64,
    coefficients: Vec<[f64; 2]>,
    edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multiplier: Option<Vec<[f64; 2]>>,
}

fn pairs_of<T: Real>(v: &[C<T>]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()]).collect()
}

fn complex_of<T: Real>(v: &[[f64; 2]]) -> Vec<C<T>> {
    v.iter().map(|c| C::new(T::lit(c[0]), T::lit(c[1]))).collect()
}

impl<T: Real> VectorDensity<T> {
    pub fn new(mesh: &ApertureMesh<T>, k: T, coefficients: Vec<C<T>>) -> Result<Self> {
        let n = DofTable::new(mesh).num_edge_dofs();
        if coefficients.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {n} interior edges",
                coefficients.len()
            )));
        }
        Ok(VectorDensity {
            k,
            coefficients,
            mesh_hash: mesh.content_hash(),
        })
    }

    pub fn zeros(mesh: &ApertureMesh<T>, k: T) -> Self {
        let n = DofTable::new(mesh).num_edge_dofs();
        VectorDensity {
            k,
            coefficients: vec![C::new(T::zero(), T::zero()); n],
            mesh_hash: mesh.content_hash(),
        }
    }

    pub(crate) fn check_mesh(&self, mesh: &ApertureMesh<T>) -> Result<()> {
        if self.mesh_hash != mesh.content_hash() {
            return Err(Error::InvalidArgument("density does not belong to this mesh".into()));
        }
        Ok(())
    }

    /// Field value at `x` in cell `c`.
    pub fn value(&self, mesh: &ApertureMesh<T>, dofs: &DofTable, c: usize, x: [T; 2]) -> [C<T>; 2] {
        crate::geometry::dofs::rt_field(mesh, dofs, &self.coefficients, c, x)
    }

    pub fn to_json(&self, mesh: &ApertureMesh<T>) -> Result<String> {
        self.document(mesh, None)
    }

    fn document(&self, mesh: &ApertureMesh<T>, multiplier: Option<&[C<T>]>) -> Result<String> {
        self.check_mesh(mesh)?;
        let dofs = DofTable::new(mesh);
        let edges = dofs
            .dof_edge
            .iter()
            .map(|&e| {
                let n = mesh.edge_normal(e);
                EdgeEntry {
                    edge: e,
                    vertices: mesh.edges[e],
                    normal: [n[0].to_f64_lossy(), n[1].to_f64_lossy()],
                }
            })
            .collect();
        let doc = VectorDensityDocument {
            mesh_hash: self.mesh_hash.clone(),
            k: self.k.to_f64_lossy(),
            coefficients: pairs_of(&self.coefficients),
            edges,
            multiplier: multiplier.map(pairs_of),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: VectorDensityDocument = serde_json::from_str(text)?;
        if doc.edges.len() != doc.coefficients.len() {
            return Err(Error::InvalidArgument(
                "edge table and coefficients differ in length".into(),
            ));
        }
        Ok(VectorDensity {
            k: T::lit(doc.k),
            coefficients: complex_of(&doc.coefficients),
            mesh_hash: doc.mesh_hash,
        })
    }
}

/// Density and solve diagnostics.
#[derive(Debug, Clone)]
pub struct VectorSolution<T> {
    pub density: VectorDensity<T>,
    pub report: SolveReport,
}

/// Assembles `B` spatially and solves with the physical load.
pub fn solve_direct<T: Real>(
    mesh: &ApertureMesh<T>,
    wave: &WaveContext<T>,
    settings: &QuadratureSettings,
) -> Result<VectorSolution<T>> {
    wave.validate()?;
    let b = assemble_l_spatial(mesh, wave.k, settings)?;
    let f = physical_load(mesh, wave)?;
    solve_vector_system(mesh, wave.k, &b, &f)
}

pub fn solve_vector_system<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    b: &CMatrix<T>,
    rhs: &[C<T>],
) -> Result<VectorSolution<T>> {
    let (x, report) = solve_dense(b, rhs)?;
    Ok(VectorSolution {
        density: VectorDensity::new(mesh, k, x)?,
        report,
    })
}

/// Surface curl of the interior hats in the RT0 basis, as a complex matrix.
pub fn curl_operator<T: Real>(mesh: &ApertureMesh<T>) -> CMatrix<T> {
    let dofs = DofTable::new(mesh);
    let c = curl_matrix(mesh, &dofs);
    CMatrix::from_real(dofs.num_edge_dofs(), dofs.num_vertex_dofs(), |i, j| c[i][j])
}

/// Surface curl built cell by cell: `curl q = (∂_y q, −∂_x q)` from the hat
/// gradients, interpolated by its normal component at edge midpoints.
pub fn curl_operator_from_gradients<T: Real>(mesh: &ApertureMesh<T>) -> CMatrix<T> {
    let dofs = DofTable::new(mesh);
    let mut out = CMatrix::zeros(dofs.num_edge_dofs(), dofs.num_vertex_dofs());
    for (i, &e) in dofs.dof_edge.iter().enumerate() {
        // the field is tangentially continuous, so either neighbour will do
        let c = mesh.edge_cells[e].0;
        let g = hat_gradients(mesh, c);
        let n = mesh.edge_normal(e);
        for (a, &v) in mesh.cells[c].iter().enumerate() {
            if let Some(j) = dofs.vertex_dof[v] {
                let curl = [g[a][1], -g[a][0]];
                out[(i, j)] = C::new(curl[0] * n[0] + curl[1] * n[1], T::zero());
            }
        }
    }
    out
}

/// Multiplier coupling `E = B C`.
pub fn assemble_e<T: Real>(b: &CMatrix<T>, curl: &CMatrix<T>) -> CMatrix<T> {
    b.matmul(curl)
}

/// Solution of the constrained system `B U + E p = F`, `Eᵀ U = 0`.
#[derive(Debug, Clone)]
pub struct SaddleState<T> {
    pub u: VectorDensity<T>,
    /// Coefficients of the multiplier on interior vertices.
    pub p_mult: Vec<C<T>>,
    pub report: SolveReport,
}

impl<T: Real> SaddleState<T> {
    /// `W = U + curl p`.
    pub fn reconstruct(&self, mesh: &ApertureMesh<T>) -> VectorDensity<T> {
        let c = curl_operator(mesh);
        let cp = c.matvec(&self.p_mult);
        VectorDensity {
            k: self.u.k,
            coefficients: self.u.coefficients.iter().zip(&cp).map(|(a, b)| *a + *b).collect(),
            mesh_hash: self.u.mesh_hash.clone(),
        }
    }

    pub fn to_json(&self, mesh: &ApertureMesh<T>) -> Result<String> {
        self.u.document(mesh, Some(&self.p_mult))
    }
}

/// Solves the saddle-point system for an assembled `B` and load.
pub fn solve_saddle_system<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    b: &CMatrix<T>,
    rhs: &[C<T>],
) -> Result<SaddleState<T>> {
    let curl = curl_operator(mesh);
    let e = assemble_e(b, &curl);
    let (n, m) = (e.rows(), e.cols());
    let mut sys = CMatrix::zeros(n + m, n + m);
    sys.set_block(0, 0, b);
    sys.set_block(0, n, &e);
    sys.set_block(n, 0, &e.transpose());
    let mut f = rhs.to_vec();
    f.resize(n + m, C::new(T::zero(), T::zero()));
    let (x, report) = solve_dense(&sys, &f).map_err(|err| match err {
        Error::Solver { condition, .. } => Error::Solver {
            message: "saddle-point system is singular; the multiplier basis is not independent".into(),
            condition,
        },
        other => other,
    })?;
    Ok(SaddleState {
        u: VectorDensity::new(mesh, k, x[..n].to_vec())?,
        p_mult: x[n..].to_vec(),
        report,
    })
}

pub fn solve_saddle<T: Real>(
    mesh: &ApertureMesh<T>,
    wave: &WaveContext<T>,
    settings: &QuadratureSettings,
) -> Result<SaddleState<T>> {
    wave.validate()?;
    let b = assemble_l_spatial(mesh, wave.k, settings)?;
    let f = physical_load(mesh, wave)?;
    solve_saddle_system(mesh, wave.k, &b, &f)
}

/// `‖Cᵀ B U‖ / (‖B‖_F ‖U‖)` with `C` the gradient-based curl: the weak
/// discrete curl of `U` in the `B` pairing.
pub fn weak_curl_defect<T: Real>(mesh: &ApertureMesh<T>, b: &CMatrix<T>, u: &[C<T>]) -> T {
    let curl = curl_operator_from_gradients(mesh);
    let bu = b.matvec(u);
    let r = curl.transpose_matvec(&bu);
    let denom = b.frobenius_norm() * norm2(u);
    if denom > T::zero() {
        norm2(&r) / denom
    } else {
        T::zero()
    }
}

/// `‖q‖²`-type Gram matrix of interior hats: `a ∫∫ K q_j q_i + b ∫∫ K ∇q_j·∇q_i`.
pub(crate) fn hat_matrix<T: Real>(
    mesh: &ApertureMesh<T>,
    dofs: &DofTable,
    kernel: Kernel<T>,
    value: C<T>,
    gradient: C<T>,
    settings: &QuadratureSettings,
) -> Result<CMatrix<T>> {
    let pairs = PairIntegrator::new(mesh, kernel, settings)?;
    let n = dofs.num_vertex_dofs();
    let third = T::one() / T::lit(3.0);
    let locals: Vec<Vec<(usize, [T; 2])>> = (0..mesh.num_cells())
        .map(|c| {
            let g = hat_gradients(mesh, c);
            mesh.cells[c]
                .iter()
                .enumerate()
                .filter_map(|(a, v)| dofs.vertex_dof[*v].map(|i| (i, g[a])))
                .collect()
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    pairs.for_each_pair(|a, b, mom| {
        for &(i, gi) in &locals[a] {
            for &(j, gj) in &locals[b] {
                let v = value * contract_scalar(mom, (third, gi), (third, gj))
                    + gradient * (mom[0][0] * (gi[0] * gj[0] + gi[1] * gj[1]));
                out[(i, j)] = out[(i, j)] + v;
            }
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, ApertureSpec};

    fn disc(h: f64) -> ApertureMesh<f64> {
        build_mesh(&ApertureSpec::Disc { radius: 1.0 }, h).unwrap()
    }

    #[test]
    fn wave_validation() {
        assert!(WaveContext::new(1.0f64, [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]).is_ok());
        assert!(WaveContext::new(1.0f64, [0.0, 0.0, -1.0], [0.0, 0.0, 1.0]).is_err());
        assert!(WaveContext::new(1.0f64, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).is_err());
        let mut w = WaveContext::new(1.0f64, [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(w.q, [0.0, -1.0, 0.0]);
        w.q = [0.0, 1.0, 0.0];
        assert!(w.validate().is_err());
    }

    #[test]
    fn normal_incidence_load_is_constant() {
        let w = WaveContext::new(2.0f64, [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]).unwrap();
        let f = incident_fields(&w, [0.3, 0.1, 0.0]);
        let h: Vec<_> = (0..3).map(|i| f.h_inc[i] + f.h_ref[i]).collect();
        assert!((h[0]).norm() < 1e-15 && (h[1] - C::new(-2.0, 0.0)).norm() < 1e-15 && h[2].norm() < 1e-15);
        // projecting Y = (−2, 0) equals projecting the constant field directly
        let mesh = disc(0.8);
        let dofs = DofTable::new(&mesh);
        let y = rhs_y(&mesh, &w).unwrap();
        let direct = project_rt(&mesh, &dofs, 2, |_| [C::new(-2.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        for (a, b) in y.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn curl_constructions_agree() {
        let mesh = disc(0.6);
        let a = curl_operator(&mesh);
        let b = curl_operator_from_gradients(&mesh);
        assert!(a.sub(&b).max_abs() < 1e-12 * a.max_abs());
    }

    #[test]
    fn b_is_symmetric() {
        let mesh = disc(0.8);
        let b = assemble_l_spatial(&mesh, 1.0, &QuadratureSettings::default()).unwrap();
        assert!(b.sub(&b.transpose()).max_abs() < 1e-12 * b.max_abs());
    }

    #[test]
    fn density_json_round_trip() {
        let mesh = disc(0.8);
        let n = DofTable::new(&mesh).num_edge_dofs();
        let d = VectorDensity::new(&mesh, 1.0, (0..n).map(|i| C::new(i as f64, 0.5)).collect()).unwrap();
        let text = d.to_json(&mesh).unwrap();
        assert!(text.contains("\"edges\""));
        assert_eq!(VectorDensity::<f64>::from_json(&text).unwrap(), d);
    }
}
