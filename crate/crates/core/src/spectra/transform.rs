//! Closed-form Fourier transforms of the finite-element basis functions.
//!
//! With `t_i = −i ξ·v_i` for the vertices `v_i` of a triangle `T`,
//! `∫_T e^{−iξ·x} dx = 2|T| · exp[t₀, t₁, t₂]` and
//! `∫_T λ_a e^{−iξ·x} dx = 2|T| · exp[t₀, t₁, t₂, t_a]`, where `exp[…]` is the
//! divided difference of the exponential (Hermite–Genocchi).

use crate::geometry::{ApertureMesh, DofTable};
use crate::scalar::{Real, C};

/// Number of series terms used for clustered nodes.
const SERIES_TERMS: usize = 40;

/// Divided difference of `exp` over up to four (possibly repeated) nodes.
pub fn exp_divided_difference<T: Real>(t: &[C<T>]) -> C<T> {
    let n = t.len();
    assert!((1..=4).contains(&n), "divided differences of order 0..=3 only");
    let mut nodes = [C::new(T::zero(), T::zero()); 4];
    nodes[..n].copy_from_slice(t);
    let exps = nodes.map(|z| z.exp());
    divided_difference_cached(&nodes, &exps, &[0, 1, 2, 3][..n])
}

/// Divided difference over `nodes[idx]`, with `exps[i] = e^{nodes[i]}` given.
///
/// Widely spread nodes use the recursion `f[S] = (f[S∖a] − f[S∖b])/(t_b − t_a)`
/// on the farthest pair; clustered ones the series about their centroid.
fn divided_difference_cached<T: Real>(nodes: &[C<T>; 4], exps: &[C<T>; 4], idx: &[usize]) -> C<T> {
    let n = idx.len();
    if n == 1 {
        return exps[idx[0]];
    }
    let (mut ia, mut ib, mut spread) = (0, 1, T::zero());
    for i in 0..n {
        for j in i + 1..n {
            let d = (nodes[idx[i]] - nodes[idx[j]]).norm();
            if d > spread {
                (ia, ib, spread) = (i, j, d);
            }
        }
    }
    if spread <= T::one() {
        let mut sub = [C::new(T::zero(), T::zero()); 4];
        for (s, &i) in sub.iter_mut().zip(idx) {
            *s = nodes[i];
        }
        return clustered(&sub[..n]);
    }
    let without = |skip: usize| -> ([usize; 4], usize) {
        let mut out = [0; 4];
        let mut len = 0;
        for (i, &v) in idx.iter().enumerate() {
            if i != skip {
                out[len] = v;
                len += 1;
            }
        }
        (out, len)
    };
    let (a, la) = without(ia);
    let (b, lb) = without(ib);
    (divided_difference_cached(nodes, exps, &a[..la]) - divided_difference_cached(nodes, exps, &b[..lb]))
        / (nodes[idx[ib]] - nodes[idx[ia]])
}

/// Series `e^c Σ_m h_m(d)/(m + n − 1)!` about the centroid `c`, with `h_m` the
/// complete homogeneous symmetric polynomials of the offsets `d_i = t_i − c`.
fn clustered<T: Real>(t: &[C<T>]) -> C<T> {
    let n = t.len();
    let zero = C::new(T::zero(), T::zero());
    let c = t.iter().fold(zero, |a, &b| a + b) / T::from_count(n);
    let mut h = [zero; SERIES_TERMS];
    h[0] = C::new(T::one(), T::zero());
    for &ti in t {
        let d = ti - c;
        for m in 1..SERIES_TERMS {
            h[m] = h[m] + d * h[m - 1];
        }
    }
    let mut fact = T::one();
    for j in 1..n {
        fact = fact * T::from_count(j);
    }
    let mut sum = zero;
    for (m, hm) in h.iter().enumerate() {
        if m > 0 {
            fact = fact * T::from_count(m + n - 1);
        }
        sum = sum + *hm / fact;
    }
    c.exp() * sum
}

/// Transform of the indicator of a triangle and of its three barycentric
/// coordinates: `(∫_T e^{−iξ·x}, [∫_T λ_a e^{−iξ·x}; 3])`.
pub fn triangle_moments<T: Real>(tri: &[[T; 2]; 3], xi: [T; 2]) -> (C<T>, [C<T>; 3]) {
    let t = phases(tri, xi);
    moments_cached(t, t.map(|z| z.exp()), doubled_area(tri))
}

/// Transform of the indicator of a triangle.
pub fn triangle_transform<T: Real>(tri: &[[T; 2]; 3], xi: [T; 2]) -> C<T> {
    let t = phases(tri, xi);
    indicator_cached(t, t.map(|z| z.exp()), doubled_area(tri))
}

fn phases<T: Real>(tri: &[[T; 2]; 3], xi: [T; 2]) -> [C<T>; 3] {
    [0, 1, 2].map(|i| C::new(T::zero(), -(xi[0] * tri[i][0] + xi[1] * tri[i][1])))
}

fn doubled_area<T: Real>(tri: &[[T; 2]; 3]) -> T {
    ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1])).abs()
}

/// Whether the closed-form (distinct-node) expressions are well conditioned:
/// every pair of nodes at least `max(1, spread/10)` apart.
fn well_separated<T: Real>(t: &[C<T>; 3]) -> bool {
    let d = [
        (t[0] - t[1]).norm_sqr(),
        (t[0] - t[2]).norm_sqr(),
        (t[1] - t[2]).norm_sqr(),
    ];
    let min = d[0].min(d[1]).min(d[2]);
    let max = d[0].max(d[1]).max(d[2]);
    min >= T::one() && min * T::lit(100.0) >= max
}

fn indicator_cached<T: Real>(t: [C<T>; 3], e: [C<T>; 3], area2: T) -> C<T> {
    if well_separated(&t) {
        let (d01, d02, d12) = (t[0] - t[1], t[0] - t[2], t[1] - t[2]);
        return (e[0] / (d01 * d02) - e[1] / (d01 * d12) + e[2] / (d02 * d12)) * area2;
    }
    let zero = C::new(T::zero(), T::zero());
    let nodes = [t[0], t[1], t[2], zero];
    let exps = [e[0], e[1], e[2], zero];
    divided_difference_cached(&nodes, &exps, &[0, 1, 2]) * area2
}

fn moments_cached<T: Real>(t: [C<T>; 3], e: [C<T>; 3], area2: T) -> (C<T>, [C<T>; 3]) {
    let i0 = indicator_cached(t, e, area2);
    if well_separated(&t) {
        // f[x, x, y, z] = ∂ₓ f[x, y, z]
        let one = C::new(T::one(), T::zero());
        let ia = [0, 1, 2].map(|a| {
            let (x, y, z) = (a, (a + 1) % 3, (a + 2) % 3);
            let (dxy, dxz, dyz) = (t[x] - t[y], t[x] - t[z], t[y] - t[z]);
            let head = e[x] / (dxy * dxz) * (one - one / dxy - one / dxz);
            (head + e[y] / (dxy * dxy * dyz) - e[z] / (dxz * dxz * dyz)) * area2
        });
        return (i0, ia);
    }
    let ia = [0, 1, 2].map(|a| {
        let nodes = [t[0], t[1], t[2], t[a]];
        let exps = [e[0], e[1], e[2], e[a]];
        divided_difference_cached(&nodes, &exps, &[0, 1, 2, 3]) * area2
    });
    (i0, ia)
}

/// `e^{−iξ·v}` at every mesh vertex, shared by the cells.
fn vertex_phases<T: Real>(mesh: &ApertureMesh<T>, xi: [T; 2]) -> (Vec<C<T>>, Vec<C<T>>) {
    let t: Vec<C<T>> = mesh
        .vertices
        .iter()
        .map(|v| C::new(T::zero(), -(xi[0] * v[0] + xi[1] * v[1])))
        .collect();
    let e = t.iter().map(|z| z.exp()).collect();
    (t, e)
}

/// Indicator transforms of every cell.
pub fn cell_indicators<T: Real>(mesh: &ApertureMesh<T>, areas2: &[T], xi: [T; 2]) -> Vec<C<T>> {
    let (t, e) = vertex_phases(mesh, xi);
    mesh.cells
        .iter()
        .zip(areas2)
        .map(|(c, &a)| indicator_cached(c.map(|v| t[v]), c.map(|v| e[v]), a))
        .collect()
}

/// Per-cell transforms at one frequency, reused by all basis families.
#[derive(Debug, Clone)]
pub struct CellTransforms<T> {
    pub indicator: Vec<C<T>>,
    pub barycentric: Vec<[C<T>; 3]>,
}

impl<T: Real> CellTransforms<T> {
    pub fn new(mesh: &ApertureMesh<T>, xi: [T; 2]) -> Self {
        let (t, e) = vertex_phases(mesh, xi);
        let (indicator, barycentric) = mesh
            .cells
            .iter()
            .enumerate()
            .map(|(c, cell)| moments_cached(cell.map(|v| t[v]), cell.map(|v| e[v]), mesh.cell_area(c) * T::lit(2.0)))
            .unzip();
        CellTransforms { indicator, barycentric }
    }

    /// Transforms of the RT0 basis functions (one per edge DOF), and of their
    /// divergences.
    pub fn rt(&self, mesh: &ApertureMesh<T>, dofs: &DofTable) -> (Vec<[C<T>; 2]>, Vec<C<T>>) {
        let zero = C::new(T::zero(), T::zero());
        let mut phi = vec![[zero; 2]; dofs.num_edge_dofs()];
        let mut div = vec![zero; dofs.num_edge_dofs()];
        for c in 0..mesh.num_cells() {
            let p = mesh.cell_points(c);
            for l in 0..3 {
                let Some(i) = dofs.edge_dof[mesh.cell_edges[c][l]] else {
                    continue;
                };
                let scale = crate::geometry::dofs::rt_scale(mesh, c, l);
                // (|e|/2A)(x − p_l) = (|e|/2A) Σ_{a≠l} λ_a (v_a − p_l)
                let half = scale * T::lit(0.5);
                for a in 0..3 {
                    if a == l {
                        continue;
                    }
                    let dx = p[a][0] - p[l][0];
                    let dy = p[a][1] - p[l][1];
                    phi[i][0] = phi[i][0] + self.barycentric[c][a] * (half * dx);
                    phi[i][1] = phi[i][1] + self.barycentric[c][a] * (half * dy);
                }
                div[i] = div[i] + self.indicator[c] * scale;
            }
        }
        (phi, div)
    }

    /// Transforms of the interior hat functions and of their gradients.
    pub fn hats(&self, mesh: &ApertureMesh<T>, dofs: &DofTable) -> (Vec<C<T>>, Vec<[C<T>; 2]>) {
        let zero = C::new(T::zero(), T::zero());
        let mut hat = vec![zero; dofs.num_vertex_dofs()];
        let mut grad = vec![[zero; 2]; dofs.num_vertex_dofs()];
        for c in 0..mesh.num_cells() {
            let g = crate::geometry::dofs::hat_gradients(mesh, c);
            for (a, &v) in mesh.cells[c].iter().enumerate() {
                if let Some(j) = dofs.vertex_dof[v] {
                    hat[j] = hat[j] + self.barycentric[c][a];
                    grad[j][0] = grad[j][0] + self.indicator[c] * g[a][0];
                    grad[j][1] = grad[j][1] + self.indicator[c] * g[a][1];
                }
            }
        }
        (hat, grad)
    }
}
