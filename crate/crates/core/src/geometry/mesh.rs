//! Conforming triangulations of the aperture.
//!
//! Discs are meshed with concentric rings joined by zipper strips, rectangles
//! with tensor grids, and general polygons by ear clipping followed by Lawson
//! flips and uniform midpoint refinement. Discs and rectangles are graded
//! geometrically toward the rim, where aperture densities are singular.

use super::aperture::{orient, ApertureSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Mesh construction knobs beyond the target size `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions<T> {
    /// Ratio between consecutive layer widths in the graded band, in `(0, 1]`.
    pub grading_ratio: T,
    /// Number of graded layers next to the rim (0 disables grading).
    pub grading_layers: usize,
    /// Smallest admissible interior angle, degrees.
    pub min_angle_deg: T,
}

impl<T: Real> Default for MeshOptions<T> {
    fn default() -> Self {
        MeshOptions {
            grading_ratio: T::lit(0.7),
            grading_layers: 3,
            min_angle_deg: T::lit(10.0),
        }
    }
}

impl<T: Real> MeshOptions<T> {
    pub fn uniform() -> Self {
        MeshOptions {
            grading_layers: 0,
            ..Self::default()
        }
    }

    pub fn graded(ratio: T, layers: usize) -> Self {
        MeshOptions {
            grading_ratio: ratio,
            grading_layers: layers,
            ..Self::default()
        }
    }
}

/// Triangulated aperture with edge topology.
///
/// Every edge `e = (a, b)` has `a < b` and carries the unit normal
/// `n_e = (b - a)^⊥ / |b - a|` with `(x, y)^⊥ = (y, -x)`. For a cell `c`
/// touching `e`, `cell_edge_signs[c]` is `+1` when `n_e` points out of `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureMesh<T> {
    pub vertices: Vec<[T; 2]>,
    /// Counterclockwise vertex triples.
    pub cells: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    /// Edge opposite local vertex `i` of each cell.
    pub cell_edges: Vec<[usize; 3]>,
    pub cell_edge_signs: Vec<[i8; 3]>,
    /// Cells incident to each edge; the second entry is `None` on the rim.
    pub edge_cells: Vec<(usize, Option<usize>)>,
    pub boundary_edge: Vec<bool>,
    pub boundary_vertex: Vec<bool>,
    /// Longest edge.
    pub h: T,
}

/// Plain JSON carrier for meshes: `{vertices: [[x, y], ...], cells: [[i, j, k], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDocument {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
}

impl<T: Real> ApertureMesh<T> {
    /// Builds topology from raw vertices and cells. Cells are reoriented
    /// counterclockwise; degenerate or non-manifold input is rejected.
    pub fn from_cells(vertices: Vec<[T; 2]>, mut cells: Vec<[usize; 3]>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references a missing vertex")));
            }
            if cell[0] == cell[1] || cell[1] == cell[2] || cell[0] == cell[2] {
                return Err(Error::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            let o = orient(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            if o == T::zero() || !o.is_finite() {
                return Err(Error::InvalidMesh(format!("cell {c} has zero area")));
            }
            if o < T::zero() {
                cell.swap(1, 2);
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut incident: Vec<Vec<usize>> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut ce = [0usize; 3];
            for (l, slot) in ce.iter_mut().enumerate() {
                let a = cell[(l + 1) % 3];
                let b = cell[(l + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    incident.push(Vec::new());
                    edges.len() - 1
                });
                incident[e].push(c);
                *slot = e;
            }
            cell_edges.push(ce);
        }

        let mut cell_edge_signs = vec![[0i8; 3]; cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for l in 0..3 {
                let e = cell_edges[c][l];
                let [a, b] = edges[e];
                let (pa, pb, po) = (vertices[a], vertices[b], vertices[cell[l]]);
                let n = [pb[1] - pa[1], pa[0] - pb[0]];
                let mid = [(pa[0] + pb[0]) * T::lit(0.5), (pa[1] + pb[1]) * T::lit(0.5)];
                let out = n[0] * (mid[0] - po[0]) + n[1] * (mid[1] - po[1]);
                cell_edge_signs[c][l] = if out > T::zero() { 1 } else { -1 };
            }
        }

        let mut edge_cells = Vec::with_capacity(edges.len());
        let mut boundary_edge = Vec::with_capacity(edges.len());
        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, inc) in incident.iter().enumerate() {
            match inc.as_slice() {
                [c] => {
                    edge_cells.push((*c, None));
                    boundary_edge.push(true);
                    boundary_vertex[edges[e][0]] = true;
                    boundary_vertex[edges[e][1]] = true;
                }
                [c0, c1] => {
                    let s0 = sign_of(&cell_edges, &cell_edge_signs, *c0, e);
                    let s1 = sign_of(&cell_edges, &cell_edge_signs, *c1, e);
                    if s0 == s1 {
                        return Err(Error::InvalidMesh(format!(
                            "edge {e} has inconsistent orientation in its two cells"
                        )));
                    }
                    let (plus, minus) = if s0 > 0 { (*c0, *c1) } else { (*c1, *c0) };
                    edge_cells.push((plus, Some(minus)));
                    boundary_edge.push(false);
                }
                _ => return Err(Error::InvalidMesh(format!("edge {e} is shared by {} cells", inc.len()))),
            }
        }

        let h = edges
            .iter()
            .map(|&[a, b]| dist(vertices[a], vertices[b]))
            .fold(T::zero(), T::max);

        Ok(ApertureMesh {
            vertices,
            cells,
            edges,
            cell_edges,
            cell_edge_signs,
            edge_cells,
            boundary_edge,
            boundary_vertex,
            h,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_points(&self, c: usize) -> [[T; 2]; 3] {
        let [a, b, d] = self.cells[c];
        [self.vertices[a], self.vertices[b], self.vertices[d]]
    }

    pub fn cell_area(&self, c: usize) -> T {
        let p = self.cell_points(c);
        orient(p[0], p[1], p[2]) * T::lit(0.5)
    }

    pub fn cell_centroid(&self, c: usize) -> [T; 2] {
        let p = self.cell_points(c);
        let third = T::one() / T::lit(3.0);
        [
            (p[0][0] + p[1][0] + p[2][0]) * third,
            (p[0][1] + p[1][1] + p[2][1]) * third,
        ]
    }

    pub fn cell_diameter(&self, c: usize) -> T {
        let p = self.cell_points(c);
        dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
    }

    pub fn total_area(&self) -> T {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edges[e];
        dist(self.vertices[a], self.vertices[b])
    }

    /// Unit normal `n_e` of the global edge orientation.
    pub fn edge_normal(&self, e: usize) -> [T; 2] {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let l = dist(pa, pb);
        [(pb[1] - pa[1]) / l, (pa[0] - pb[0]) / l]
    }

    pub fn min_angle_deg(&self) -> T {
        let mut worst = T::lit(180.0);
        for c in 0..self.num_cells() {
            let p = self.cell_points(c);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let d = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [d[0] - a[0], d[1] - a[1]];
                let cosang = (u[0] * v[0] + u[1] * v[1]) / (dist(a, b) * dist(a, d));
                let ang = cosang.max(-T::one()).min(T::one()).acos().to_degrees();
                worst = worst.min(ang);
            }
        }
        worst
    }

    /// Smallest distance from `p` to the rim (boundary edges).
    pub fn distance_to_boundary(&self, p: [T; 2]) -> T {
        self.edges
            .iter()
            .zip(&self.boundary_edge)
            .filter(|(_, &b)| b)
            .map(|(&[a, b], _)| point_segment_distance(p, self.vertices[a], self.vertices[b]))
            .fold(T::infinity(), T::min)
    }

    /// Index of a cell containing `p`, if any.
    pub fn locate(&self, p: [T; 2]) -> Option<usize> {
        let tol = -T::epsilon() * T::lit(64.0) * self.h * self.h;
        (0..self.num_cells()).find(|&c| {
            let q = self.cell_points(c);
            orient(q[0], q[1], p) >= tol && orient(q[1], q[2], p) >= tol && orient(q[2], q[0], p) >= tol
        })
    }

    /// Shortest distance from `p` to the closed triangulated region.
    pub fn distance_to_mesh(&self, p: [T; 2]) -> T {
        if self.locate(p).is_some() {
            T::zero()
        } else {
            self.distance_to_boundary(p)
        }
    }

    pub fn to_document(&self) -> MeshDocument {
        MeshDocument {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0].to_f64_lossy(), v[1].to_f64_lossy()])
                .collect(),
            cells: self.cells.clone(),
        }
    }

    pub fn from_document(doc: &MeshDocument) -> Result<Self> {
        let vertices = doc.vertices.iter().map(|v| [T::lit(v[0]), T::lit(v[1])]).collect();
        Self::from_cells(vertices, doc.cells.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeshDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    /// Stable 64-bit FNV-1a fingerprint of vertex coordinates and cells.
    pub fn content_hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for v in &self.vertices {
            eat(&v[0].to_f64_lossy().to_le_bytes());
            eat(&v[1].to_f64_lossy().to_le_bytes());
        }
        for c in &self.cells {
            for i in c {
                eat(&(*i as u64).to_le_bytes());
            }
        }
        format!("{h:016x}")
    }
}

fn sign_of(cell_edges: &[[usize; 3]], signs: &[[i8; 3]], c: usize, e: usize) -> i8 {
    let l = cell_edges[c]
        .iter()
        .position(|&x| x == e)
        .expect("edge belongs to cell");
    signs[c][l]
}

pub(crate) fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub(crate) fn point_segment_distance<T: Real>(p: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2)
        .max(T::zero())
        .min(T::one());
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Meshes the aperture with default options.
pub fn build_mesh<T: Real>(spec: &ApertureSpec<T>, h: T) -> Result<ApertureMesh<T>> {
    build_mesh_with(spec, h, &MeshOptions::default())
}

/// Meshes the aperture so that no edge exceeds `h`.
pub fn build_mesh_with<T: Real>(spec: &ApertureSpec<T>, h: T, opts: &MeshOptions<T>) -> Result<ApertureMesh<T>> {
    spec.validate()?;
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidMeshSize(format!("h must be positive, got {h}")));
    }
    if h >= spec.diameter() {
        return Err(Error::InvalidMeshSize(format!(
            "h = {h} is not smaller than the aperture diameter {}",
            spec.diameter()
        )));
    }
    if !(opts.grading_ratio > T::zero() && opts.grading_ratio <= T::one()) {
        return Err(Error::InvalidMeshSize(format!(
            "grading ratio must lie in (0, 1], got {}",
            opts.grading_ratio
        )));
    }
    // target spacing leaving room for diagonals; shrunk until every edge fits
    let mut s = h * T::lit(0.7);
    let mesh = loop {
        let (vertices, cells) = match spec {
            ApertureSpec::Disc { radius } => disc_mesh(*radius, s, opts),
            ApertureSpec::Rectangle { half_widths } => rectangle_mesh(*half_widths, s, opts),
            ApertureSpec::Polygon { .. } => {
                let poly = spec.ccw_polygon().expect("polygon");
                polygon_mesh(&poly, h)?
            }
        };
        let mesh = ApertureMesh::from_cells(vertices, cells)?;
        if mesh.h <= h {
            break mesh;
        }
        s = s * T::lit(0.9);
    };
    let min_angle = mesh.min_angle_deg();
    if min_angle < opts.min_angle_deg {
        return Err(Error::InvalidMesh(format!(
            "minimum angle {min_angle:.2} deg below threshold {}",
            opts.min_angle_deg
        )));
    }
    Ok(mesh)
}

/// Layer widths from the rim inward: `layers` graded widths followed by the
/// remaining length split uniformly. Returns `(graded, uniform_width, uniform_count)`.
fn graded_widths<T: Real>(length: T, s: T, ratio: T, layers: usize) -> (Vec<T>, T, usize) {
    let mut n = layers;
    loop {
        let graded: Vec<T> = (0..n).map(|j| s * ratio.powi((n - j) as i32)).collect();
        let used: T = graded.iter().copied().sum();
        let rest = length - used;
        if rest >= s * T::lit(0.5) || n == 0 {
            let m = (rest / s).ceil().to_usize().unwrap_or(1).max(1);
            return (graded, rest / T::from_count(m), m);
        }
        n -= 1;
    }
}

fn disc_mesh<T: Real>(radius: T, s: T, opts: &MeshOptions<T>) -> (Vec<[T; 2]>, Vec<[usize; 3]>) {
    let (graded, u, m) = graded_widths(radius, s, opts.grading_ratio, opts.grading_layers);
    // layer widths from rim to centre; the last layer is the central fan
    let mut widths = graded.clone();
    widths.extend(std::iter::repeat_n(u, m));
    let mut radii = Vec::with_capacity(widths.len());
    let mut r = radius;
    for (j, w) in widths.iter().enumerate() {
        radii.push(if j == 0 { radius } else { r });
        r = r - *w;
    }
    let two_pi = T::lit(2.0) * T::PI();
    let mut vertices: Vec<[T; 2]> = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();
    let mut offsets: Vec<T> = Vec::new();
    for (j, &rj) in radii.iter().enumerate() {
        let spacing = if j == 0 {
            widths[0]
        } else {
            widths[j - 1].min(widths[j])
        };
        let n = ((two_pi * rj / spacing).ceil().to_usize().unwrap_or(6)).max(6);
        let off = if j % 2 == 0 { T::zero() } else { T::lit(0.5) };
        let mut ring = Vec::with_capacity(n);
        for i in 0..n {
            let th = two_pi * (T::from_count(i) + off) / T::from_count(n);
            ring.push(vertices.len());
            vertices.push([rj * th.cos(), rj * th.sin()]);
        }
        rings.push(ring);
        offsets.push(off);
    }
    let centre = vertices.len();
    vertices.push([T::zero(), T::zero()]);

    let mut cells = Vec::new();
    for j in 0..rings.len() - 1 {
        zipper(
            &rings[j],
            offsets[j],
            &rings[j + 1],
            offsets[j + 1],
            &vertices,
            &mut cells,
        );
    }
    let inner = rings.last().expect("at least one ring");
    for i in 0..inner.len() {
        push_ccw(&vertices, &mut cells, [centre, inner[i], inner[(i + 1) % inner.len()]]);
    }
    (vertices, cells)
}

fn push_ccw<T: Real>(vertices: &[[T; 2]], cells: &mut Vec<[usize; 3]>, mut t: [usize; 3]) {
    if orient(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < T::zero() {
        t.swap(1, 2);
    }
    cells.push(t);
}

/// Triangulates the annular strip between two rings by merging their vertices
/// in angular order.
fn zipper<T: Real>(a: &[usize], off_a: T, b: &[usize], off_b: T, vertices: &[[T; 2]], cells: &mut Vec<[usize; 3]>) {
    let (na, nb) = (a.len(), b.len());
    let frac = |i: usize, off: T, n: usize| (T::from_count(i) + off) / T::from_count(n);
    let (mut i, mut j) = (0usize, 0usize);
    while i < na || j < nb {
        let next_a = frac(i + 1, off_a, na);
        let next_b = frac(j + 1, off_b, nb);
        if j >= nb || (i < na && next_a <= next_b) {
            push_ccw(vertices, cells, [a[i % na], a[(i + 1) % na], b[j % nb]]);
            i += 1;
        } else {
            push_ccw(vertices, cells, [a[i % na], b[(j + 1) % nb], b[j % nb]]);
            j += 1;
        }
    }
}

fn graded_nodes<T: Real>(half: T, s: T, opts: &MeshOptions<T>) -> Vec<T> {
    // grade from both ends: each side gets at most half the length
    let (graded, u, m) = graded_widths(half, s, opts.grading_ratio, opts.grading_layers);
    let mut widths: Vec<T> = graded.clone();
    widths.extend(std::iter::repeat_n(u, m));
    let mut left = vec![-half];
    for w in &widths {
        let last = *left.last().unwrap();
        left.push(last + *w);
    }
    *left.last_mut().unwrap() = T::zero();
    let mut nodes = left.clone();
    for x in left.iter().rev().skip(1) {
        nodes.push(-*x);
    }
    *nodes.last_mut().unwrap() = half;
    nodes
}

fn rectangle_mesh<T: Real>(hw: [T; 2], s: T, opts: &MeshOptions<T>) -> (Vec<[T; 2]>, Vec<[usize; 3]>) {
    let xs = graded_nodes(hw[0], s, opts);
    let ys = graded_nodes(hw[1], s, opts);
    let nx = xs.len();
    let mut vertices = Vec::with_capacity(nx * ys.len());
    for &y in &ys {
        for &x in &xs {
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut cells = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            // alternate the diagonal so the grid has no preferred direction
            let flip = (i < (nx - 1) / 2) != (j < (ys.len() - 1) / 2);
            if flip {
                cells.push([v00, v10, v01]);
                cells.push([v10, v11, v01]);
            } else {
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }
    }
    (vertices, cells)
}

fn point_in_triangle<T: Real>(p: [T; 2], a: [T; 2], b: [T; 2], c: [T; 2]) -> bool {
    let z = T::zero();
    orient(a, b, p) >= z && orient(b, c, p) >= z && orient(c, a, p) >= z
}

fn polygon_mesh<T: Real>(poly: &[[T; 2]], h: T) -> Result<(Vec<[T; 2]>, Vec<[usize; 3]>)> {
    let mut vertices = poly.to_vec();
    let mut cells = ear_clip(poly)?;
    lawson_flips(&vertices, &mut cells);
    // uniform midpoint refinement keeps the Delaunay angles
    loop {
        let longest = cells
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| dist(vertices[a], vertices[b]))
            .fold(T::zero(), T::max);
        if longest <= h {
            break;
        }
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(cells.len() * 4);
        for t in &cells {
            let mut m = [0usize; 3];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[i] = *mids.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    vertices.push([(pa[0] + pb[0]) * T::lit(0.5), (pa[1] + pb[1]) * T::lit(0.5)]);
                    vertices.len() - 1
                });
            }
            refined.push([t[0], m[0], m[2]]);
            refined.push([m[0], t[1], m[1]]);
            refined.push([m[2], m[1], t[2]]);
            refined.push([m[0], m[1], m[2]]);
        }
        cells = refined;
    }
    Ok((vertices, cells))
}

fn ear_clip<T: Real>(poly: &[[T; 2]]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut cells = Vec::with_capacity(poly.len() - 2);
    while idx.len() > 3 {
        let n = idx.len();
        let mut best: Option<(usize, T)> = None;
        for k in 0..n {
            let (ip, ic, inx) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (poly[ip], poly[ic], poly[inx]);
            if orient(a, b, c) <= T::zero() {
                continue;
            }
            let blocked = idx
                .iter()
                .filter(|&&v| v != ip && v != ic && v != inx)
                .any(|&v| point_in_triangle(poly[v], a, b, c));
            if blocked {
                continue;
            }
            let q = triangle_quality(a, b, c);
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((k, q));
            }
        }
        let (k, _) = best.ok_or_else(|| Error::InvalidAperture("polygon could not be triangulated".into()))?;
        cells.push([idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]]);
        idx.remove(k);
    }
    cells.push([idx[0], idx[1], idx[2]]);
    Ok(cells)
}

fn triangle_quality<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    // 4√3 A / Σ l², equal to 1 for equilateral
    let l2 = (dist(a, b)).powi(2) + dist(b, c).powi(2) + dist(c, a).powi(2);
    T::lit(2.0 * 3f64.sqrt()) * orient(a, b, c) / l2
}

fn in_circumcircle<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let m = [
        [a[0] - d[0], a[1] - d[1]],
        [b[0] - d[0], b[1] - d[1]],
        [c[0] - d[0], c[1] - d[1]],
    ];
    let r = |p: [T; 2]| p[0] * p[0] + p[1] * p[1];
    let det = m[0][0] * (m[1][1] * r(m[2]) - r(m[1]) * m[2][1]) - m[0][1] * (m[1][0] * r(m[2]) - r(m[1]) * m[2][0])
        + r(m[0]) * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    det > T::epsilon() * T::lit(16.0)
}

fn lawson_flips<T: Real>(vertices: &[[T; 2]], cells: &mut [[usize; 3]]) {
    for _ in 0..(cells.len() * cells.len() + 10) {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (c, t) in cells.iter().enumerate() {
            for i in 0..3 {
                owner.insert((t[i], t[(i + 1) % 3]), c);
            }
        }
        let mut flipped = false;
        'outer: for c in 0..cells.len() {
            for i in 0..3 {
                let t = cells[c];
                let (a, b, p) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
                if let Some(&d_cell) = owner.get(&(b, a)) {
                    let u = cells[d_cell];
                    let q = *u.iter().find(|&&v| v != a && v != b).unwrap();
                    if in_circumcircle(vertices[a], vertices[b], vertices[p], vertices[q])
                        && orient(vertices[p], vertices[q], vertices[b]) > T::zero()
                        && orient(vertices[q], vertices[p], vertices[a]) > T::zero()
                    {
                        cells[c] = [p, a, q];
                        cells[d_cell] = [q, b, p];
                        flipped = true;
                        break 'outer;
                    }
                }
            }
        }
        if !flipped {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disc_area_within_two_percent() {
        let mesh = build_mesh(&ApertureSpec::disc(1.0f64), 0.2).unwrap();
        let rel = (mesh.total_area() - std::f64::consts::PI).abs() / std::f64::consts::PI;
        assert!(rel < 0.02, "relative area error {rel}");
        assert!(mesh.h <= 0.2);
    }

    #[test]
    fn rectangle_area_is_exact() {
        let mesh = build_mesh(&ApertureSpec::rectangle(1.0f64, 0.5), 0.25).unwrap();
        assert!((mesh.total_area() - 2.0).abs() < 1e-14);
        assert!(mesh.h <= 0.25);
    }

    #[test]
    fn repeated_polygon_vertex_is_rejected() {
        let spec = ApertureSpec::Polygon {
            vertices: vec![[0.0f64, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(matches!(build_mesh(&spec, 0.1), Err(Error::InvalidAperture(_))));
    }

    #[test]
    fn oversized_h_is_rejected() {
        assert!(matches!(
            build_mesh(&ApertureSpec::disc(1.0f64), 2.5),
            Err(Error::InvalidMeshSize(_))
        ));
        assert!(build_mesh(&ApertureSpec::disc(1.0f64), -0.1).is_err());
    }

    #[test]
    fn l_shaped_polygon_meshes_exactly() {
        let spec = ApertureSpec::Polygon {
            vertices: vec![
                [0.0f64, 0.0],
                [2.0, 0.0],
                [2.0, 1.0],
                [1.0, 1.0],
                [1.0, 2.0],
                [0.0, 2.0],
            ],
        };
        let mesh = build_mesh(&spec, 0.3).unwrap();
        assert!((mesh.total_area() - 3.0).abs() < 1e-13);
        assert!(mesh.h <= 0.3);
        assert!(mesh.min_angle_deg() > 20.0);
    }

    #[test]
    fn topology_invariants_hold() {
        for spec in [ApertureSpec::disc(1.0f64), ApertureSpec::rectangle(1.0, 0.6)] {
            let mesh = build_mesh(&spec, 0.3).unwrap();
            for c in 0..mesh.num_cells() {
                assert!(mesh.cell_area(c) > 0.0);
            }
            let mut count = vec![0usize; mesh.num_edges()];
            for ce in &mesh.cell_edges {
                for &e in ce {
                    count[e] += 1;
                }
            }
            for e in 0..mesh.num_edges() {
                assert_eq!(count[e], if mesh.boundary_edge[e] { 1 } else { 2 });
                if let (p, Some(m)) = mesh.edge_cells[e] {
                    assert_eq!(sign_of(&mesh.cell_edges, &mesh.cell_edge_signs, p, e), 1);
                    assert_eq!(sign_of(&mesh.cell_edges, &mesh.cell_edge_signs, m, e), -1);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mesh = build_mesh(&ApertureSpec::rectangle(1.0f64, 0.5), 0.5).unwrap();
        let back = ApertureMesh::<f64>::from_json(&mesh.to_json().unwrap()).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(back.content_hash(), mesh.content_hash());
    }

    #[test]
    fn clockwise_input_cells_are_reoriented() {
        let m = ApertureMesh::from_cells(vec![[0.0f64, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]).unwrap();
        assert!(m.cell_area(0) > 0.0);
    }
}
