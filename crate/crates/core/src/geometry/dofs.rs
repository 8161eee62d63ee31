//! Degrees of freedom on an aperture mesh: lowest-order Raviart–Thomas
//! functions on interior edges and piecewise-linear hats on interior vertices.

use super::mesh::ApertureMesh;
use crate::scalar::Real;

/// Numbering of interior edges and interior vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DofTable {
    pub edge_dof: Vec<Option<usize>>,
    pub dof_edge: Vec<usize>,
    pub vertex_dof: Vec<Option<usize>>,
    pub dof_vertex: Vec<usize>,
}

impl DofTable {
    pub fn new<T: Real>(mesh: &ApertureMesh<T>) -> Self {
        let mut edge_dof = vec![None; mesh.num_edges()];
        let mut dof_edge = Vec::new();
        for e in 0..mesh.num_edges() {
            if !mesh.boundary_edge[e] {
                edge_dof[e] = Some(dof_edge.len());
                dof_edge.push(e);
            }
        }
        let mut vertex_dof = vec![None; mesh.vertices.len()];
        let mut dof_vertex = Vec::new();
        for v in 0..mesh.vertices.len() {
            if !mesh.boundary_vertex[v] {
                vertex_dof[v] = Some(dof_vertex.len());
                dof_vertex.push(v);
            }
        }
        DofTable {
            edge_dof,
            dof_edge,
            vertex_dof,
            dof_vertex,
        }
    }

    pub fn num_edge_dofs(&self) -> usize {
        self.dof_edge.len()
    }

    pub fn num_vertex_dofs(&self) -> usize {
        self.dof_vertex.len()
    }
}

/// Local RT0 function `l` of cell `c` (attached to the edge opposite local
/// vertex `l`), evaluated at `x`: `±(|e| / 2A)(x - p_l)`.
pub fn rt_value<T: Real>(mesh: &ApertureMesh<T>, c: usize, l: usize, x: [T; 2]) -> [T; 2] {
    let scale = rt_scale(mesh, c, l) * T::lit(0.5);
    let p = mesh.vertices[mesh.cells[c][l]];
    [scale * (x[0] - p[0]), scale * (x[1] - p[1])]
}

/// Divergence of the local RT0 function: `±|e| / A`.
pub fn rt_div<T: Real>(mesh: &ApertureMesh<T>, c: usize, l: usize) -> T {
    rt_scale(mesh, c, l)
}

/// `±|e| / A` for local function `l` of cell `c`.
pub fn rt_scale<T: Real>(mesh: &ApertureMesh<T>, c: usize, l: usize) -> T {
    let e = mesh.cell_edges[c][l];
    let s = T::lit(mesh.cell_edge_signs[c][l] as f64);
    s * mesh.edge_length(e) / mesh.cell_area(c)
}

/// Constant gradients of the three barycentric coordinates of cell `c`.
pub fn hat_gradients<T: Real>(mesh: &ApertureMesh<T>, c: usize) -> [[T; 2]; 3] {
    let p = mesh.cell_points(c);
    let a2 = mesh.cell_area(c) * T::lit(2.0);
    let mut g = [[T::zero(); 2]; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let q = p[(i + 1) % 3];
        let r = p[(i + 2) % 3];
        *gi = [(q[1] - r[1]) / a2, (r[0] - q[0]) / a2];
    }
    g
}

/// Evaluates an RT0 field with coefficients indexed by edge DOF at `x ∈ cell c`.
pub fn rt_field<T: Real, S>(mesh: &ApertureMesh<T>, dofs: &DofTable, coeffs: &[S], c: usize, x: [T; 2]) -> [S; 2]
where
    S: Copy + std::ops::Add<Output = S> + std::ops::Mul<T, Output = S> + num_traits::Zero,
{
    let mut out = [S::zero(), S::zero()];
    for l in 0..3 {
        if let Some(i) = dofs.edge_dof[mesh.cell_edges[c][l]] {
            let phi = rt_value(mesh, c, l, x);
            out[0] = out[0] + coeffs[i] * phi[0];
            out[1] = out[1] + coeffs[i] * phi[1];
        }
    }
    out
}

/// Divergence of an RT0 field on cell `c`.
pub fn rt_field_div<T: Real, S>(mesh: &ApertureMesh<T>, dofs: &DofTable, coeffs: &[S], c: usize) -> S
where
    S: Copy + std::ops::Add<Output = S> + std::ops::Mul<T, Output = S> + num_traits::Zero,
{
    let mut out = S::zero();
    for l in 0..3 {
        if let Some(i) = dofs.edge_dof[mesh.cell_edges[c][l]] {
            out = out + coeffs[i] * rt_div(mesh, c, l);
        }
    }
    out
}

/// Cellwise divergence operator, `num_cells × num_edge_dofs`, dense row-major.
pub fn divergence_matrix<T: Real>(mesh: &ApertureMesh<T>, dofs: &DofTable) -> Vec<Vec<T>> {
    let mut d = vec![vec![T::zero(); dofs.num_edge_dofs()]; mesh.num_cells()];
    for (c, row) in d.iter_mut().enumerate() {
        for l in 0..3 {
            if let Some(i) = dofs.edge_dof[mesh.cell_edges[c][l]] {
                row[i] = row[i] + rt_div(mesh, c, l);
            }
        }
    }
    d
}

/// Surface curl `p ↦ (∂_y p, -∂_x p)` from interior hats into RT0, as a dense
/// `num_edge_dofs × num_vertex_dofs` matrix.
pub fn curl_matrix<T: Real>(mesh: &ApertureMesh<T>, dofs: &DofTable) -> Vec<Vec<T>> {
    let mut c = vec![vec![T::zero(); dofs.num_vertex_dofs()]; dofs.num_edge_dofs()];
    for (i, row) in c.iter_mut().enumerate() {
        let e = dofs.dof_edge[i];
        let [a, b] = mesh.edges[e];
        let l = mesh.edge_length(e);
        if let Some(j) = dofs.vertex_dof[b] {
            row[j] = T::one() / l;
        }
        if let Some(j) = dofs.vertex_dof[a] {
            row[j] = -T::one() / l;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, ApertureSpec};

    #[test]
    fn divergence_annihilates_curls() {
        let mesh = build_mesh(&ApertureSpec::disc(1.0f64), 0.4).unwrap();
        let dofs = DofTable::new(&mesh);
        let d = divergence_matrix(&mesh, &dofs);
        let c = curl_matrix(&mesh, &dofs);
        for row in &d {
            for j in 0..dofs.num_vertex_dofs() {
                let s: f64 = row.iter().zip(&c).map(|(x, cr)| x * cr[j]).sum();
                assert!(s.abs() < 1e-10, "{s}");
            }
        }
    }

    #[test]
    fn normal_component_is_one_on_own_edge() {
        let mesh = build_mesh(&ApertureSpec::rectangle(1.0f64, 1.0), 0.6).unwrap();
        for c in 0..mesh.num_cells() {
            for l in 0..3 {
                let e = mesh.cell_edges[c][l];
                let [a, b] = mesh.edges[e];
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let n = mesh.edge_normal(e);
                for t in [0.2, 0.5, 0.9] {
                    let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                    let phi = rt_value(&mesh, c, l, x);
                    assert!((phi[0] * n[0] + phi[1] * n[1] - 1.0).abs() < 1e-12);
                }
                // tangential-to-other-edges: zero normal flux through the other two edges
                for m in 1..3 {
                    let o = mesh.cell_edges[c][(l + m) % 3];
                    let [oa, ob] = mesh.edges[o];
                    let mid = [
                        0.5 * (mesh.vertices[oa][0] + mesh.vertices[ob][0]),
                        0.5 * (mesh.vertices[oa][1] + mesh.vertices[ob][1]),
                    ];
                    let n = mesh.edge_normal(o);
                    let phi = rt_value(&mesh, c, l, mid);
                    assert!((phi[0] * n[0] + phi[1] * n[1]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hat_gradients_sum_to_zero() {
        let mesh = build_mesh(&ApertureSpec::disc(1.0f64), 0.5).unwrap();
        for c in 0..mesh.num_cells() {
            let g = hat_gradients(&mesh, c);
            assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-12);
            assert!((g[0][1] + g[1][1] + g[2][1]).abs() < 1e-12);
        }
    }
}
