use aperture_bie::geometry::quadrature::split4;
use aperture_bie::geometry::{cell_quadrature, ApertureMesh};
use aperture_bie::scalar_bie::{assemble_t_spatial, incident_scalar, solve_scalar_system, solve_static_unit_potential};
use aperture_bie::{
    build_mesh_with, ApertureSpec, Complex64 as C, Matrix, Mesh, MeshOptions, QuadratureSettings, ScalarWave,
};
use approx::assert_relative_eq;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// `∫_T dy / |x − y|` for `x` inside `T`, summing `d·asinh(t/d)` over the edges.
fn inverse_distance_integral(x: [f64; 2], tri: &[[f64; 2]; 3]) -> f64 {
    let mut sum = 0.0;
    for i in 0..3 {
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        // outward normal of a counterclockwise triangle
        let n = [t[1], -t[0]];
        let d = (a[0] - x[0]) * n[0] + (a[1] - x[1]) * n[1];
        if d.abs() < 1e-14 {
            continue;
        }
        let ta = (a[0] - x[0]) * t[0] + (a[1] - x[1]) * t[1];
        let tb = (b[0] - x[0]) * t[0] + (b[1] - x[1]) * t[1];
        sum += d * ((tb / d).asinh() - (ta / d).asinh());
    }
    sum
}

fn conj_form(a: &Matrix, u: &[C]) -> C {
    let au = a.matvec(u);
    u.iter().zip(&au).map(|(x, y)| x.conj() * y).sum()
}

fn disc(h: f64, opts: MeshOptions<f64>) -> Mesh {
    build_mesh_with(&ApertureSpec::disc(1.0), h, &opts).unwrap()
}

fn static_system() -> &'static (Mesh, Matrix) {
    static CELL: OnceLock<(Mesh, Matrix)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = disc(0.35, MeshOptions::default());
        let t0 = assemble_t_spatial(&mesh, 0.0, &QuadratureSettings::default()).unwrap();
        (mesh, t0)
    })
}

#[test]
fn incident_and_reflected_waves() {
    let w = ScalarWave::new(1.7, [0.6, 0.0, -0.8]).unwrap();
    let (ui, ur) = incident_scalar(&w, [0.3, -0.4, 0.0]);
    assert!((ui - ur).norm() < 1e-15);

    let h = 1e-5;
    let total = |z: f64| {
        let (a, b) = incident_scalar(&w, [0.3, -0.4, z]);
        a + b
    };
    assert!(((total(h) - total(-h)) / (2.0 * h)).norm() < 1e-9);

    let k = 2.3;
    let w = ScalarWave::new(k, [0.0, 0.0, -1.0]).unwrap();
    let (ui, ur) = incident_scalar(&w, [0.0, 0.0, 1.0]);
    assert!((ui - C::from_polar(1.0, -k)).norm() < 1e-15);
    assert!((ur - C::from_polar(1.0, k)).norm() < 1e-15);

    assert!(ScalarWave::new(1.0, [0.0, 0.0, 1.0]).is_err());
    assert!(ScalarWave::new(1.0, [0.0, 0.0, -2.0]).is_err());
}

#[test]
fn static_self_entry_matches_polar_integral() {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];
    let mesh = ApertureMesh::from_cells(tri.to_vec(), vec![[0, 1, 2]]).unwrap();
    let fine = QuadratureSettings {
        singular_points: 10,
        ..Default::default()
    };
    let t0 = assemble_t_spatial(&mesh, 0.0, &fine).unwrap();
    // outer integral on five levels of uniform subdivision
    let rule = cell_quadrature::<f64>(10).unwrap();
    let mut pieces = vec![tri];
    for _ in 0..5 {
        pieces = pieces.iter().flat_map(split4).collect();
    }
    let mut outer = 0.0;
    for p in &pieces {
        let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        for (b, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = [0, 1].map(|d| b[0] * p[0][d] + b[1] * p[1][d] + b[2] * p[2][d]);
            outer += w * area2 * inverse_distance_integral(x, &tri);
        }
    }
    let expected = outer / (4.0 * PI);
    assert_relative_eq!(t0[(0, 0)].re, expected, max_relative = 1e-6);
    assert_eq!(t0[(0, 0)].im, 0.0);
}

#[test]
fn matrices_are_symmetric() {
    let (_, t0) = static_system();
    assert!(t0.sub(&t0.transpose()).max_abs() <= 1e-13 * t0.max_abs());
    assert!(t0.as_slice().iter().all(|v| v.im == 0.0));

    let mesh = disc(0.5, MeshOptions::uniform());
    let t = assemble_t_spatial(&mesh, 1.5, &QuadratureSettings::default()).unwrap();
    assert!(t.sub(&t.transpose()).max_abs() <= 1e-12 * t.max_abs());
}

#[test]
fn electrified_disc_total_charge() {
    let mesh = disc(0.2, MeshOptions::default());
    let sol = solve_static_unit_potential(&mesh, &QuadratureSettings::default()).unwrap();
    let total = sol.density.integral(&mesh);
    assert!((total.re - 8.0).abs() < 0.16, "∫ψ = {}", total.re);
    assert!(mesh.num_cells() <= 20_000);
    // the density is positive and largest near the rim
    let c = &sol.density.coefficients;
    assert!(c.iter().all(|v| v.re > 0.0));
    let centre = mesh.locate([0.0, 0.0]).unwrap();
    assert!(c[centre].re < 1.5 && c[centre].re > 1.1, "ψ(0) = {}", c[centre].re);
}

#[test]
fn zero_load_gives_zero_density() {
    let (mesh, t0) = static_system();
    let zero = vec![C::new(0.0, 0.0); mesh.num_cells()];
    let sol = solve_scalar_system(mesh, 0.0, t0, &zero).unwrap();
    assert!(sol.density.coefficients.iter().all(|v| *v == C::new(0.0, 0.0)));
}

/// `ψ_fine − ψ_coarse` with the coarse density read at fine centroids.
fn difference(fine: &Mesh, pf: &[C], coarse: &Mesh, pc: &[C]) -> Vec<C> {
    (0..fine.num_cells())
        .map(|c| {
            let x = fine.cell_centroid(c);
            let j = coarse.locate(x).unwrap_or_else(|| {
                (0..coarse.num_cells())
                    .min_by(|a, b| {
                        let da = dist2(coarse.cell_centroid(*a), x);
                        let db = dist2(coarse.cell_centroid(*b), x);
                        da.total_cmp(&db)
                    })
                    .unwrap()
            });
            pf[c] - pc[j]
        })
        .collect()
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

#[test]
fn static_density_self_converges_in_energy() {
    let s = QuadratureSettings::default();
    let levels: Vec<(Mesh, Matrix, Vec<C>)> = [0.4, 0.2, 0.1]
        .into_iter()
        .map(|h| {
            let mesh = disc(h, MeshOptions::default());
            let t0 = assemble_t_spatial(&mesh, 0.0, &s).unwrap();
            let rhs: Vec<C> = (0..mesh.num_cells()).map(|c| C::new(mesh.cell_area(c), 0.0)).collect();
            let psi = solve_scalar_system(&mesh, 0.0, &t0, &rhs).unwrap().density.coefficients;
            (mesh, t0, psi)
        })
        .collect();
    let energy = |l: usize| {
        let (fine, t0, pf) = &levels[l + 1];
        let (coarse, _, pc) = &levels[l];
        conj_form(t0, &difference(fine, pf, coarse, pc)).re.sqrt()
    };
    let (d1, d2) = (energy(0), energy(1));
    assert!(d2 < d1, "{d1} then {d2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn static_form_is_positive(seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..4)) {
        let (mesh, t0) = static_system();
        let n = mesh.num_cells();
        let psi: Vec<C> = (0..n)
            .map(|i| {
                let (a, b) = seed[i % seed.len()];
                C::new(a + (i as f64 * 0.37).sin(), b * (i as f64 * 0.11).cos())
            })
            .collect();
        let q = conj_form(t0, &psi);
        prop_assert!(q.re > 0.0);
        prop_assert!(q.im.abs() <= 1e-12 * q.re);
    }

    #[test]
    fn helmholtz_form_lies_in_the_first_quadrant(
        re in prop::collection::vec(-1.0..1.0f64, 8),
        im in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        static T: OnceLock<(Mesh, Matrix)> = OnceLock::new();
        let (mesh, t) = T.get_or_init(|| {
            let mesh = disc(0.5, MeshOptions::uniform());
            let t = assemble_t_spatial(&mesh, 1.5, &QuadratureSettings::default()).unwrap();
            (mesh, t)
        });
        let psi: Vec<C> = (0..mesh.num_cells()).map(|i| C::new(re[i % 8], im[(i * 3) % 8])).collect();
        let q = conj_form(t, &psi);
        let scale = q.norm().max(1e-300);
        prop_assert!(q.re >= -1e-10 * scale, "{}", q);
        prop_assert!(q.im >= -1e-10 * scale, "{}", q);
    }
}
