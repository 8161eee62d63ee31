use aperture_bie::probes::{
    coercivity_probe_with, garding_ratio, gram_norm, gram_p0, scalar_probe, scaled_sigma_min, ProbeOptions, VectorGrams,
};
use aperture_bie::vector_bie::assemble_l_spatial;
use aperture_bie::{build_mesh_with, ApertureSpec, Complex64 as C, Matrix, Mesh, MeshOptions, QuadratureSettings};
use proptest::prelude::*;
use std::sync::OnceLock;

struct Fixture {
    mesh: Mesh,
    b: Matrix,
    grams: VectorGrams<f64>,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = build_mesh_with(&ApertureSpec::disc(1.0), 0.5, &MeshOptions::uniform()).unwrap();
        let s = QuadratureSettings::default();
        let b = assemble_l_spatial(&mesh, 1.0, &s).unwrap();
        let grams = VectorGrams::assemble(&mesh, &s).unwrap();
        Fixture { mesh, b, grams }
    })
}

fn options(seed: u64) -> ProbeOptions {
    ProbeOptions {
        samples: 12,
        seed,
        ..Default::default()
    }
}

#[test]
fn vector_constants_are_positive_and_reproducible() {
    let f = fixture();
    let a = coercivity_probe_with(&f.mesh, 1.0, &f.b, &f.grams, &options(3)).unwrap();
    assert!(a.alpha > 0.0 && a.beta > 0.0 && a.c >= 0.0, "{a:?}");
    assert!(a.low_frequency.is_finite() && a.low_frequency > 0.0);
    assert!(a.divergence_free_min <= a.divergence_free_max);
    let again = coercivity_probe_with(&f.mesh, 1.0, &f.b, &f.grams, &options(3)).unwrap();
    assert_eq!(a, again);
}

#[test]
fn scalar_constants() {
    let mesh = build_mesh_with(&ApertureSpec::disc(1.0), 0.5, &MeshOptions::uniform()).unwrap();
    let r = scalar_probe(&mesh, 1.0, &options(5), &QuadratureSettings::default()).unwrap();
    assert!(r.static_coercivity > 0.0, "{r:?}");
    assert!(r.scaled_sigma_min > 0.0 && r.low_frequency > 0.0, "{r:?}");
}

#[test]
fn gram_matrix_has_unit_whitened_spectrum() {
    let mesh = build_mesh_with(&ApertureSpec::disc(1.0), 0.6, &MeshOptions::uniform()).unwrap();
    let g = gram_p0(&mesh, &QuadratureSettings::default()).unwrap();
    let one: f64 = scaled_sigma_min(&g, &g).unwrap();
    assert!((one - 1.0).abs() < 1e-8, "{one}");
    let two: f64 = scaled_sigma_min(&g.scaled(C::new(2.0, 0.0)), &g).unwrap();
    assert!((two - 2.0).abs() < 1e-8, "{two}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_and_ratio(re in prop::collection::vec(-1.0..1.0f64, 8), im in prop::collection::vec(-1.0..1.0f64, 8), c in 0.0..5.0f64) {
        let f = fixture();
        let u: Vec<C> = (0..f.b.rows()).map(|i| C::new(re[i % 8] + 0.1 * (i as f64).sin(), im[(i * 5) % 8])).collect();
        let h = gram_norm(&f.grams.h, &u);
        let x = gram_norm(&f.grams.x, &u);
        prop_assert!(h > 0.0 && h <= x * (1.0 + 1e-12));

        let r = garding_ratio(&f.b, &f.grams, c, &u);
        let bu = f.b.matvec(&u);
        let form: f64 = u.iter().zip(&bu).map(|(a, b)| (a.conj() * b).re).sum();
        prop_assert!((r - (form + c * h * h) / (x * x)).abs() < 1e-10 * r.abs().max(1.0));

        let doubled: Vec<C> = u.iter().map(|v| v * 2.0).collect();
        let r2 = garding_ratio(&f.b, &f.grams, c, &doubled);
        prop_assert!((r - r2).abs() < 1e-12 * r.abs().max(1.0));
    }
}
