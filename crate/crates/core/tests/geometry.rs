use aperture_bie::geometry::quadrature::MAX_TRIANGLE_ORDER;
use aperture_bie::geometry::{
    build_mesh, build_mesh_with, cell_quadrature, ApertureMesh, ApertureSpec, DofTable, MeshOptions,
};
use aperture_bie::Mesh;
use approx::assert_relative_eq;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Interior edges found by scanning every cell's vertex pairs.
fn interior_edges_by_incidence(mesh: &Mesh) -> usize {
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in &mesh.cells {
        for (a, b) in [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])] {
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    assert!(count.values().all(|&n| n <= 2));
    count.values().filter(|&&n| n == 2).count()
}

fn mesh_area(mesh: &Mesh) -> f64 {
    (0..mesh.num_cells()).map(|c| mesh.cell_area(c)).sum()
}

#[test]
fn disc_and_rectangle_areas() {
    let disc = build_mesh(&ApertureSpec::disc(1.0), 0.2).unwrap();
    assert!((mesh_area(&disc) - PI).abs() < 0.02 * PI);
    assert!(disc.h <= 0.2 + 1e-12);

    let rect = build_mesh(&ApertureSpec::rectangle(1.0, 0.5), 0.25).unwrap();
    assert_relative_eq!(mesh_area(&rect), 2.0, max_relative = 1e-13);
}

#[test]
fn degenerate_inputs_are_rejected() {
    let repeated = ApertureSpec::Polygon {
        vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
    };
    assert!(build_mesh(&repeated, 0.2).is_err());
    assert!(build_mesh(&ApertureSpec::disc(-1.0), 0.2).is_err());
    assert!(build_mesh(&ApertureSpec::disc(1.0), 0.0).is_err());
    assert!(build_mesh(&ApertureSpec::disc(1.0), 5.0).is_err());
}

#[test]
fn unknown_counts_on_tiny_meshes() {
    let one = ApertureMesh::from_cells(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
    assert_eq!(DofTable::new(&one).num_edge_dofs(), 0);
    assert_eq!(DofTable::new(&one).num_vertex_dofs(), 0);

    let two = ApertureMesh::from_cells(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap();
    assert_eq!(DofTable::new(&two).num_edge_dofs(), 1);
}

#[test]
fn refined_disc_unknowns_match_incidence_scan() {
    for (h, opts) in [(0.3, MeshOptions::uniform()), (0.2, MeshOptions::default())] {
        let mesh = build_mesh_with(&ApertureSpec::disc(1.0), h, &opts).unwrap();
        let dofs = DofTable::new(&mesh);
        assert_eq!(dofs.num_edge_dofs(), interior_edges_by_incidence(&mesh));
        let interior_vertices = mesh.boundary_vertex.iter().filter(|b| !**b).count();
        assert_eq!(dofs.num_vertex_dofs(), interior_vertices);
    }
}

#[test]
fn triangle_rules_integrate_monomials() {
    let r1 = cell_quadrature::<f64>(1).unwrap();
    assert_eq!(r1.len(), 1);
    assert_relative_eq!(r1.weights[0], 0.5, max_relative = 1e-15);

    let r2 = cell_quadrature::<f64>(2).unwrap();
    assert_relative_eq!(r2.integrate_reference(|u, _| u * u), 1.0 / 12.0, max_relative = 1e-14);

    assert!(cell_quadrature::<f64>(0).is_err());
    assert!(cell_quadrature::<f64>(MAX_TRIANGLE_ORDER + 1).is_err());

    for order in 1..=MAX_TRIANGLE_ORDER {
        let rule = cell_quadrature::<f64>(order).unwrap();
        for a in 0..=order as u32 {
            for b in 0..=(order as u32 - a) {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let got = rule.integrate_reference(|u, v| u.powi(a as i32) * v.powi(b as i32));
                assert!(
                    (got - exact).abs() < 1e-13,
                    "order {order}, u^{a} v^{b}: {got} vs {exact}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rectangles_mesh_exactly(hx in 0.3..1.5f64, hy in 0.3..1.5f64, h in 0.15..0.4f64) {
        let mesh = build_mesh_with(&ApertureSpec::rectangle(hx, hy), h, &MeshOptions::uniform()).unwrap();
        prop_assert!((mesh_area(&mesh) - 4.0 * hx * hy).abs() < 1e-12 * hx * hy);
        prop_assert!(mesh.h <= h + 1e-12);
        // Euler characteristic of a disc-like triangulation.
        let euler = mesh.vertices.len() as i64 - mesh.num_edges() as i64 + mesh.num_cells() as i64;
        prop_assert_eq!(euler, 1);
        prop_assert_eq!(DofTable::new(&mesh).num_edge_dofs(), interior_edges_by_incidence(&mesh));
        for c in 0..mesh.num_cells() {
            prop_assert!(mesh.cell_area(c) > 0.0);
        }
        let round = Mesh::from_json(&mesh.to_json().unwrap()).unwrap();
        prop_assert_eq!(round.content_hash(), mesh.content_hash());
    }
}
