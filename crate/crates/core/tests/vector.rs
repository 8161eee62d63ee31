use aperture_bie::geometry::dofs::{curl_matrix, divergence_matrix, rt_div, rt_value};
use aperture_bie::geometry::quadrature::{gauss_legendre, split4};
use aperture_bie::geometry::{cell_quadrature, ApertureMesh};
use aperture_bie::probes::{gram_norm, VectorGrams};
use aperture_bie::vector_bie::{
    assemble_l_spatial, incident_fields, physical_load, rhs_y, solve_direct, solve_saddle_system, solve_vector_system,
    weak_curl_defect,
};
use aperture_bie::{
    build_mesh_with, ApertureSpec, Complex64 as C, DofTable, Matrix, Mesh, MeshOptions, QuadratureSettings,
    VectorDensity, WaveContext,
};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn disc(h: f64) -> Mesh {
    build_mesh_with(&ApertureSpec::disc(1.0), h, &MeshOptions::uniform()).unwrap()
}

fn conj_form(a: &Matrix, u: &[C]) -> C {
    let au = a.matvec(u);
    u.iter().zip(&au).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(u: &[C]) -> f64 {
    u.iter().map(|v| v.norm_sqr()).sum()
}

/// `∫_T f` for a ccw triangle `T`: `(∫ dy/R, ∫ (y − x)/R dy)`, by signed fans
/// from `x` over the three edges.
fn static_moments(x: [f64; 2], tri: &[[f64; 2]; 3]) -> (f64, [f64; 2]) {
    let mut scalar = 0.0;
    let mut vector = [0.0; 2];
    for i in 0..3 {
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let n = [t[1], -t[0]];
        let d = (a[0] - x[0]) * n[0] + (a[1] - x[1]) * n[1];
        if d.abs() < 1e-14 {
            continue;
        }
        let ta = (a[0] - x[0]) * t[0] + (a[1] - x[1]) * t[1];
        let tb = (b[0] - x[0]) * t[0] + (b[1] - x[1]) * t[1];
        let ad = d.abs();
        let asinh = (tb / ad).asinh() - (ta / ad).asinh();
        let sec = (1.0 + (tb / ad).powi(2)).sqrt() - (1.0 + (ta / ad).powi(2)).sqrt();
        scalar += d * asinh;
        for k in 0..2 {
            vector[k] += 0.5 * d * d * (n[k] * asinh + d.signum() * t[k] * sec);
        }
    }
    (scalar, vector)
}

fn fine_rule(tri: &[[f64; 2]; 3], levels: usize, order: usize) -> Vec<([f64; 2], f64)> {
    let rule = cell_quadrature::<f64>(order).unwrap();
    let mut pieces = vec![*tri];
    for _ in 0..levels {
        pieces = pieces.iter().flat_map(split4).collect();
    }
    let mut out = Vec::new();
    for p in &pieces {
        let area2 = ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        for (b, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((
                [0, 1].map(|d| b[0] * p[0][d] + b[1] * p[1][d] + b[2] * p[2][d]),
                w * area2,
            ));
        }
    }
    out
}

/// `∫_T (e^{ikR} − 1)/(4πR) f(y) dy` over the signed fans from `x`. Each fan
/// `y = x + λ(|d| n + s t)` is integrated by Gauss rules in `λ` and in `s`,
/// the latter graded geometrically about the foot `s = 0`; `f` is evaluated
/// on the affine extension.
fn polar_remainder(x: [f64; 2], tri: &[[f64; 2]; 3], k: f64, f: impl Fn([f64; 2]) -> f64) -> C {
    let (gx, gw) = gauss_legendre(12);
    let mut sum = C::new(0.0, 0.0);
    for i in 0..3 {
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let n = [t[1], -t[0]];
        let d = (a[0] - x[0]) * n[0] + (a[1] - x[1]) * n[1];
        if d.abs() < 1e-14 {
            continue;
        }
        let ad = d.abs();
        let foot = [d.signum() * n[0], d.signum() * n[1]];
        let ta = (a[0] - x[0]) * t[0] + (a[1] - x[1]) * t[1];
        let tb = (b[0] - x[0]) * t[0] + (b[1] - x[1]) * t[1];
        // breakpoints 0, ±|d|, ±4|d|, ... clipped to [ta, tb]
        let mut cuts = vec![ta, tb];
        let mut r = ad;
        while r < ta.abs().max(tb.abs()) {
            cuts.extend([r, -r]);
            r *= 4.0;
        }
        cuts.push(0.0);
        cuts.retain(|c| *c >= ta && *c <= tb);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            for (&ss, &ws) in gx.iter().zip(&gw) {
                let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ss;
                let rho = (ad * ad + s * s).sqrt();
                let dir = [0, 1].map(|j| ad * foot[j] + s * t[j]);
                let mut line = C::new(0.0, 0.0);
                for (&sl, &wl) in gx.iter().zip(&gw) {
                    let lam = 0.5 * (1.0 + sl);
                    let y = [x[0] + lam * dir[0], x[1] + lam * dir[1]];
                    line += (C::from_polar(1.0, k * lam * rho) - 1.0) * (0.5 * wl * f(y));
                }
                sum += line * (d.signum() * ad / rho * 0.5 * (hi - lo) * ws);
            }
        }
    }
    sum / (4.0 * PI)
}

/// `−k² ∫∫ g φ·φ + ∫∫ g div φ div φ` for the single interior-edge function.
fn brute_force_entry(mesh: &Mesh, k: f64) -> C {
    let dofs = DofTable::new(mesh);
    let e = dofs.dof_edge[0];
    let local: Vec<(usize, usize)> = (0..mesh.num_cells())
        .filter_map(|c| (0..3).find(|&l| mesh.cell_edges[c][l] == e).map(|l| (c, l)))
        .collect();
    assert_eq!(local.len(), 2);
    let mut total = C::new(0.0, 0.0);
    for &(ca, la) in &local {
        let outer = fine_rule(&mesh.cell_points(ca), 6, 10);
        for &(cb, lb) in &local {
            let tri_b = mesh.cell_points(cb);
            let div = rt_div(mesh, ca, la) * rt_div(mesh, cb, lb);
            // static kernel 1/(4πR): closed-form inner integral
            let pb = mesh.vertices[mesh.cells[cb][lb]];
            let half_b = rt_div(mesh, cb, lb) * 0.5;
            for &(x, w) in &outer {
                let (s, v) = static_moments(x, &tri_b);
                let phi_a = rt_value(mesh, ca, la, x);
                // ∫ φ_b(y)/R = (s_b/2)[(x − p_b) ∫1/R + ∫(y − x)/R]
                let inner = [0, 1].map(|d| half_b * ((x[d] - pb[d]) * s + v[d]));
                let dot = phi_a[0] * inner[0] + phi_a[1] * inner[1];
                total += C::new(w * (-k * k * dot + div * s) / (4.0 * PI), 0.0);
            }
            // remainder (e^{ikR} − 1)/(4πR): polar fans around x, smooth in r
            for &(x, w) in &fine_rule(&mesh.cell_points(ca), 4, 8) {
                let phi_a = rt_value(mesh, ca, la, x);
                let inner = polar_remainder(x, &tri_b, k, |y| {
                    let phi_b = rt_value(mesh, cb, lb, y);
                    -k * k * (phi_a[0] * phi_b[0] + phi_a[1] * phi_b[1]) + div
                });
                total += inner * w;
            }
        }
    }
    total
}

#[test]
fn two_triangle_entry_matches_brute_force() {
    let mesh = ApertureMesh::from_cells(
        vec![[0.0, 0.0], [1.0, 0.1], [0.8, 0.9], [-0.1, 0.7]],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap();
    let fine = QuadratureSettings {
        singular_points: 10,
        ..Default::default()
    };
    for k in [0.5, 1.0, 2.0] {
        let b = assemble_l_spatial(&mesh, k, &fine).unwrap();
        assert_eq!((b.rows(), b.cols()), (1, 1));
        let oracle = brute_force_entry(&mesh, k);
        assert!(
            (b[(0, 0)] - oracle).norm() < 1e-6 * oracle.norm(),
            "k = {k}: {} vs {oracle}",
            b[(0, 0)]
        );
    }
}

/// `(∫_T φ_i) = (s/2) A (centroid − p_l)` summed over the two cells of each edge.
fn rt_means(mesh: &Mesh) -> Vec<[f64; 2]> {
    let dofs = DofTable::new(mesh);
    let mut out = vec![[0.0; 2]; dofs.num_edge_dofs()];
    for c in 0..mesh.num_cells() {
        let cen = mesh.cell_centroid(c);
        for l in 0..3 {
            if let Some(i) = dofs.edge_dof[mesh.cell_edges[c][l]] {
                let p = mesh.vertices[mesh.cells[c][l]];
                let s = rt_div(mesh, c, l) * 0.5 * mesh.cell_area(c);
                out[i][0] += s * (cen[0] - p[0]);
                out[i][1] += s * (cen[1] - p[1]);
            }
        }
    }
    out
}

#[test]
fn normal_incidence_loads_are_constant_projections() {
    let mesh = disc(0.5);
    let k = 1.3;
    let wave = WaveContext::new(k, [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]).unwrap();
    assert_eq!(wave.q, [0.0, -1.0, 0.0]);
    let f = incident_fields(&wave, [0.2, -0.4, 0.0]);
    let h = [0, 1, 2].map(|i| f.h_inc[i] + f.h_ref[i]);
    assert!((h[0]).norm() < 1e-15 && (h[1] + 2.0).norm() < 1e-15 && h[2].norm() < 1e-15);

    let means = rt_means(&mesh);
    let y = rhs_y(&mesh, &wave).unwrap();
    let load = physical_load(&mesh, &wave).unwrap();
    for (i, m) in means.iter().enumerate() {
        // Y = −e₃ × (0, −2, 0) = (−2, 0)
        assert!((y[i] - C::new(-2.0 * m[0], 0.0)).norm() < 1e-13);
        // (ik/4)(H^i + H^r)_t = (ik/4)(0, −2)
        assert!((load[i] - C::new(0.0, k / 4.0) * (-2.0 * m[1])).norm() < 1e-13);
    }
}

#[test]
fn reflected_wave_is_the_image() {
    let wave = WaveContext::new(2.0, [0.6, 0.0, -0.8], [0.8, 0.0, 0.6]).unwrap();
    for r in [[0.3, 0.2, 0.0], [-0.5, 0.7, 0.0], [0.1, -0.3, 0.4]] {
        let f = incident_fields(&wave, r);
        let mirrored = [r[0], r[1], -r[2]];
        let phase = C::from_polar(1.0, 2.0 * (0.6 * mirrored[0] + 0.0 * mirrored[1] - 0.8 * mirrored[2]));
        let q = wave.q;
        let expected = [q[0], q[1], -q[2]].map(|v| phase * v);
        for i in 0..3 {
            assert!((f.h_ref[i] - expected[i]).norm() < 1e-14);
        }
        if r[2] == 0.0 {
            assert!((f.h_inc[2] + f.h_ref[2]).norm() < 1e-15);
        }
    }
}

#[test]
fn load_is_linear_in_polarization() {
    let mesh = disc(0.6);
    let m = [0.6, 0.0, -0.8];
    let a = rhs_y(&mesh, &WaveContext::new(1.0, m, [0.8, 0.0, 0.6]).unwrap()).unwrap();
    let b = rhs_y(&mesh, &WaveContext::new(1.0, m, [2.4, 0.0, 1.8]).unwrap()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((*x * 3.0 - y).norm() < 1e-13);
    }
}

fn b_matrix() -> &'static (Mesh, Matrix) {
    static CELL: OnceLock<(Mesh, Matrix)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = disc(0.35);
        let b = assemble_l_spatial(&mesh, 1.0, &QuadratureSettings::default()).unwrap();
        (mesh, b)
    })
}

#[test]
fn galerkin_matrix_is_symmetric() {
    let (_, b) = b_matrix();
    assert!(b.symmetry_defect() < 1e-12);
}

#[test]
fn curls_are_divergence_free() {
    let (mesh, b) = b_matrix();
    let dofs = DofTable::new(mesh);
    let d = divergence_matrix(mesh, &dofs);
    let c = curl_matrix(mesh, &dofs);
    for row in &d {
        for j in 0..dofs.num_vertex_dofs() {
            let v: f64 = row.iter().zip(&c).map(|(a, crow)| a * crow[j]).sum();
            assert!(v.abs() < 1e-12);
        }
    }
    // for a divergence-free field only the −k² term remains, whose imaginary part is ≤ 0
    let q: Vec<f64> = (0..dofs.num_vertex_dofs()).map(|j| (j as f64 * 0.7).sin()).collect();
    let w: Vec<C> = c
        .iter()
        .map(|row| C::new(row.iter().zip(&q).map(|(a, b)| a * b).sum(), 0.0))
        .collect();
    assert!(conj_form(b, &w).im <= 1e-6 * norm_sqr(&w));
}

#[test]
fn zero_and_doubled_incident_fields() {
    let mesh = disc(0.6);
    let s = QuadratureSettings::default();
    let zero = WaveContext::new(1.0, [0.0, 0.0, -1.0], [0.0, 0.0, 0.0]).unwrap();
    let w0 = solve_direct(&mesh, &zero, &s).unwrap().density;
    assert!(w0.coefficients.iter().all(|v| v.norm() == 0.0));

    let b = assemble_l_spatial(&mesh, 1.0, &s).unwrap();
    let one = WaveContext::new(1.0, [0.6, 0.0, -0.8], [0.8, 0.0, 0.6]).unwrap();
    let two = WaveContext::new(1.0, [0.6, 0.0, -0.8], [1.6, 0.0, 1.2]).unwrap();
    let w1 = solve_vector_system(&mesh, 1.0, &b, &physical_load(&mesh, &one).unwrap())
        .unwrap()
        .density;
    let w2 = solve_vector_system(&mesh, 1.0, &b, &physical_load(&mesh, &two).unwrap())
        .unwrap()
        .density;
    for (a, c) in w1.coefficients.iter().zip(&w2.coefficients) {
        assert!((*a * 2.0 - c).norm() < 1e-12 * c.norm().max(1e-12));
    }
}

#[test]
fn saddle_point_solution_reconstructs_the_direct_one() {
    let mesh = disc(0.5);
    let wave = WaveContext::new(1.0, [0.6, 0.0, -0.8], [0.8, 0.0, 0.6]).unwrap();
    let b = assemble_l_spatial(&mesh, 1.0, &QuadratureSettings::default()).unwrap();
    let f = physical_load(&mesh, &wave).unwrap();
    let direct = solve_vector_system(&mesh, 1.0, &b, &f).unwrap().density;
    let saddle = solve_saddle_system(&mesh, 1.0, &b, &f).unwrap();
    let w = saddle.reconstruct(&mesh);
    let diff: Vec<C> = w
        .coefficients
        .iter()
        .zip(&direct.coefficients)
        .map(|(a, b)| a - b)
        .collect();
    assert!((norm_sqr(&diff) / norm_sqr(&direct.coefficients)).sqrt() < 1e-8);
    assert!(weak_curl_defect(&mesh, &b, &saddle.u.coefficients) < 1e-8);
}

/// `‖W_fine − I W_coarse‖_X`, with `I` the RT0 interpolant on the fine mesh
/// (normal components at interior edge midpoints).
fn field_difference(fine: &Mesh, wf: &VectorDensity, coarse: &Mesh, wc: &VectorDensity) -> f64 {
    let (df, dc) = (DofTable::new(fine), DofTable::new(coarse));
    let diff: Vec<C> = df
        .dof_edge
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let [a, b] = fine.edges[e];
            let (pa, pb) = (fine.vertices[a], fine.vertices[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let n = fine.edge_normal(e);
            let coarse_value = coarse.locate(mid).map_or(C::new(0.0, 0.0), |j| {
                let v = wc.value(coarse, &dc, j, mid);
                v[0] * n[0] + v[1] * n[1]
            });
            wf.coefficients[i] - coarse_value
        })
        .collect();
    let grams = VectorGrams::assemble(fine, &QuadratureSettings::default()).unwrap();
    gram_norm(&grams.x, &diff)
}

/// Red refinement: every cell split into four through its edge midpoints.
fn refine(mesh: &Mesh) -> Mesh {
    let nv = mesh.vertices.len();
    let mut vertices = mesh.vertices.clone();
    vertices.extend(mesh.edges.iter().map(|&[a, b]| {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }));
    let mid = |a: usize, b: usize| {
        nv + mesh
            .edges
            .iter()
            .position(|e| (e[0] == a && e[1] == b) || (e[0] == b && e[1] == a))
            .unwrap()
    };
    let cells = mesh
        .cells
        .iter()
        .flat_map(|&[a, b, c]| {
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        })
        .collect();
    ApertureMesh::from_cells(vertices, cells).unwrap()
}

#[test]
fn density_self_converges() {
    let wave = WaveContext::new(1.0, [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]).unwrap();
    let s = QuadratureSettings::default();
    let base = disc(0.6);
    let meshes = [base.clone(), refine(&base), refine(&refine(&base))];
    let levels: Vec<(Mesh, VectorDensity)> = meshes
        .into_iter()
        .map(|mesh| {
            let w = solve_direct(&mesh, &wave, &s).unwrap().density;
            (mesh, w)
        })
        .collect();
    let d1 = field_difference(&levels[1].0, &levels[1].1, &levels[0].0, &levels[0].1);
    let d2 = field_difference(&levels[2].0, &levels[2].1, &levels[1].0, &levels[1].1);
    assert!(d2 < d1, "{d1} then {d2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn imaginary_part_of_the_form_is_nonpositive(
        re in prop::collection::vec(-1.0..1.0f64, 16),
        im in prop::collection::vec(-1.0..1.0f64, 16),
    ) {
        let (_, b) = b_matrix();
        let w: Vec<C> = (0..b.rows()).map(|i| C::new(re[i % 16] * (1.0 + i as f64).sqrt().sin(), im[(i * 7) % 16])).collect();
        let q = conj_form(b, &w);
        prop_assert!(q.im <= 1e-6 * norm_sqr(&w), "Im = {}", q.im);
    }
}
