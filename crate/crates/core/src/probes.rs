//! Empirical constants of the discrete operators.
//!
//! Discrete norms are Galerkin Gram matrices of the kernel `2 g_κ` with
//! `g_κ(r) = e^{−r}/(4πr)`, whose planar symbol is `(1 + |ξ|²)^{−1/2}`:
//!
//! - `‖ψ‖²_{−1/2}` on piecewise constants: `2 ∫∫ g_κ ψ ψ̄`;
//! - `‖u‖²_H`: the same form applied to both components of an RT0 field;
//! - `‖u‖²_X = ‖u‖²_H + ‖div u‖²_{−1/2}`;
//! - `‖q‖²_{1/2} = ‖q‖²_{−1/2} + ‖∇q‖²_{−1/2}` on interior hats.
//!
//! Samples are interpolants of random smooth fields (sums of plane waves)
//! multiplied by the distance to the aperture rim, so that they converge
//! under refinement and the reported constants can be compared across meshes.

use crate::error::Result;
use crate::geometry::dofs::DofTable;
use crate::geometry::ApertureMesh;
use crate::linalg::{smallest_singular_value, CMatrix, Cholesky, Lu};
use crate::potentials::{Kernel, QuadratureSettings};
use crate::scalar::{cis, Real, C};
use crate::scalar_bie::{assemble_t_spatial, p0_matrix};
use crate::spectra::transform::CellTransforms;
use crate::vector_bie::{assemble_l_spatial, curl_operator, hat_matrix, rt_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sampling parameters shared by all probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub samples: usize,
    pub seed: u64,
    /// Plane waves per random field.
    pub waves: usize,
    /// Largest wavenumber of the random fields.
    pub max_wavenumber: f64,
    /// Radial and angular counts of the polar grid on `|ξ| ≤ 2k`.
    pub low_frequency_radii: usize,
    pub low_frequency_angles: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            samples: 50,
            seed: 7,
            waves: 6,
            max_wavenumber: 3.0,
            low_frequency_radii: 12,
            low_frequency_angles: 24,
        }
    }
}

/// `Σ_j a_j e^{i κ_j·x}` with vector amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothField<T> {
    pub waves: Vec<([T; 2], [C<T>; 2])>,
}

impl<T: Real> SmoothField<T> {
    pub fn random(rng: &mut impl Rng, waves: usize, max_wavenumber: f64) -> Self {
        let mut out = Vec::with_capacity(waves);
        for _ in 0..waves {
            let mut amp = || C::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)));
            let a = [amp(), amp()];
            // uniform in the disc |κ| ≤ max_wavenumber
            let r = max_wavenumber * rng.gen::<f64>().sqrt();
            let t = std::f64::consts::TAU * rng.gen::<f64>();
            out.push(([T::lit(r * t.cos()), T::lit(r * t.sin())], a));
        }
        SmoothField { waves: out }
    }

    pub fn value(&self, x: [T; 2]) -> [C<T>; 2] {
        let zero = C::new(T::zero(), T::zero());
        self.waves.iter().fold([zero; 2], |acc, (kv, a)| {
            let e = cis(kv[0] * x[0] + kv[1] * x[1]);
            [acc[0] + a[0] * e, acc[1] + a[1] * e]
        })
    }
}

/// Piecewise-constant interpolant of the first component (centroid values).
pub fn sample_p0<T: Real>(mesh: &ApertureMesh<T>, f: &SmoothField<T>) -> Vec<C<T>> {
    (0..mesh.num_cells())
        .map(|c| f.value(mesh.cell_centroid(c))[0])
        .collect()
}

/// RT0 interpolant of `d(x) f(x)`: normal components at interior edge midpoints.
pub fn sample_rt<T: Real>(mesh: &ApertureMesh<T>, dofs: &DofTable, f: &SmoothField<T>) -> Vec<C<T>> {
    dofs.dof_edge
        .iter()
        .map(|&e| {
            let [a, b] = mesh.edges[e];
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let half = T::lit(0.5);
            let mid = [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half];
            let n = mesh.edge_normal(e);
            let v = f.value(mid);
            (v[0] * n[0] + v[1] * n[1]) * mesh.distance_to_boundary(mid)
        })
        .collect()
}

/// Nodal interpolant of `d(x) f₁(x)` on interior vertices.
pub fn sample_hats<T: Real>(mesh: &ApertureMesh<T>, dofs: &DofTable, f: &SmoothField<T>) -> Vec<C<T>> {
    dofs.dof_vertex
        .iter()
        .map(|&v| {
            let p = mesh.vertices[v];
            f.value(p)[0] * mesh.distance_to_boundary(p)
        })
        .collect()
}

fn quadratic<T: Real>(m: &CMatrix<T>, u: &[C<T>]) -> C<T> {
    let mu = m.matvec(u);
    u.iter()
        .zip(&mu)
        .fold(C::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * *b)
}

/// Hermitian norm `sqrt(Re(uᴴ G u))`.
pub fn gram_norm<T: Real>(gram: &CMatrix<T>, u: &[C<T>]) -> T {
    quadratic(gram, u).re.max(T::zero()).sqrt()
}

/// `‖ψ‖²_{−1/2}` Gram matrix on piecewise constants.
pub fn gram_p0<T: Real>(mesh: &ApertureMesh<T>, settings: &QuadratureSettings) -> Result<CMatrix<T>> {
    Ok(p0_matrix(mesh, Kernel::yukawa(T::one()), settings)?.scaled(C::new(T::lit(2.0), T::zero())))
}

/// Gram matrices of the vector and multiplier spaces.
#[derive(Debug, Clone)]
pub struct VectorGrams<T> {
    /// `‖u‖²_H`.
    pub h: CMatrix<T>,
    /// `‖u‖²_X`.
    pub x: CMatrix<T>,
    /// `‖q‖²_{−1/2}` on interior hats.
    pub hat_low: CMatrix<T>,
    /// `‖q‖²_{1/2}` on interior hats.
    pub hat_high: CMatrix<T>,
}

impl<T: Real> VectorGrams<T> {
    pub fn assemble(mesh: &ApertureMesh<T>, settings: &QuadratureSettings) -> Result<Self> {
        let dofs = DofTable::new(mesh);
        let two = C::new(T::lit(2.0), T::zero());
        let zero = C::new(T::zero(), T::zero());
        let kernel = Kernel::yukawa(T::one());
        let h = rt_matrix(mesh, &dofs, kernel, two, zero, settings)?;
        let div = rt_matrix(mesh, &dofs, kernel, zero, two, settings)?;
        let hat_low = hat_matrix(mesh, &dofs, kernel, two, zero, settings)?;
        let grad = hat_matrix(mesh, &dofs, kernel, zero, two, settings)?;
        Ok(VectorGrams {
            x: h.add(&div),
            h,
            hat_high: hat_low.add(&grad),
            hat_low,
        })
    }
}

/// Smallest singular value of `L⁻¹ A L⁻ᴴ` with `G = L Lᴴ`: the smallest
/// singular value of `A` measured in the norm of `G`.
pub fn scaled_sigma_min<T: Real>(a: &CMatrix<T>, gram: &CMatrix<T>) -> Result<T> {
    let chol = Cholesky::factor(gram)?;
    let w = chol.whiten(a);
    let lu = Lu::factor(&w)?;
    Ok(smallest_singular_value(&lu, 300))
}

/// `(Re uᴴBu + c‖u‖²_H) / ‖u‖²_X`.
pub fn garding_ratio<T: Real>(b: &CMatrix<T>, grams: &VectorGrams<T>, c: T, u: &[C<T>]) -> T {
    let r = quadratic(b, u).re;
    (r + c * quadratic(&grams.h, u).re) / quadratic(&grams.x, u).re
}

/// Largest modulus of a transform over the polar grid on `|ξ| ≤ radius`.
fn max_low_frequency<T: Real>(radius: T, options: &ProbeOptions, mut modulus: impl FnMut([T; 2]) -> T) -> T {
    let nr = options.low_frequency_radii.max(1);
    let na = options.low_frequency_angles.max(1);
    let mut best = modulus([T::zero(), T::zero()]);
    for i in 1..=nr {
        let rho = radius * T::from_count(i) / T::from_count(nr);
        for j in 0..na {
            let t = T::lit(std::f64::consts::TAU) * T::from_count(j) / T::from_count(na);
            best = best.max(modulus([rho * t.cos(), rho * t.sin()]));
        }
    }
    best
}

/// Empirical constants of the vector operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub samples: usize,
    /// `α` in `Re uᴴBu ≥ α‖u‖²_X − c‖u‖²_H`.
    pub alpha: f64,
    pub c: f64,
    /// `β` in `sup_u Re E(q, u)/‖u‖_X ≥ β‖q‖_{1/2} − ‖q‖_{−1/2}`.
    pub beta: f64,
    /// `max_{|ξ| ≤ 2k} |û(ξ)| / ‖u‖_X`.
    pub low_frequency: f64,
    /// Extremes of `Re uᴴBu / ‖u‖²_X` over the divergence-free samples `u = curl q`.
    pub divergence_free_min: f64,
    pub divergence_free_max: f64,
}

/// Samples the vector form on random smooth fields and on the surface curls
/// of random smooth multipliers; the constants of the Gårding bound are fitted
/// over both families.
pub fn coercivity_probe<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    options: &ProbeOptions,
    settings: &QuadratureSettings,
) -> Result<CoercivityReport> {
    let b = assemble_l_spatial(mesh, k, settings)?;
    let grams = VectorGrams::assemble(mesh, settings)?;
    coercivity_probe_with(mesh, k, &b, &grams, options)
}

/// As [`coercivity_probe`] with preassembled matrices.
pub fn coercivity_probe_with<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    b: &CMatrix<T>,
    grams: &VectorGrams<T>,
    options: &ProbeOptions,
) -> Result<CoercivityReport> {
    let dofs = DofTable::new(mesh);
    let curl = curl_operator(mesh);
    let gx = Cholesky::factor(&grams.x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut forms = Vec::with_capacity(2 * options.samples);
    let mut beta = f64::INFINITY;
    let mut low = 0.0f64;
    let (mut df_min, mut df_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..options.samples {
        let field = SmoothField::<T>::random(&mut rng, options.waves, options.max_wavenumber);
        let u = sample_rt(mesh, &dofs, &field);
        let (r, x, h) = (
            quadratic(b, &u).re,
            quadratic(&grams.x, &u).re,
            quadratic(&grams.h, &u).re,
        );
        forms.push((r.to_f64_lossy(), x.to_f64_lossy(), h.to_f64_lossy()));

        let xnorm = x.sqrt();
        let peak = max_low_frequency(k + k, options, |xi| {
            let (phi, _) = CellTransforms::new(mesh, xi).rt(mesh, &dofs);
            let zero = C::new(T::zero(), T::zero());
            let v = u
                .iter()
                .zip(&phi)
                .fold([zero; 2], |s, (a, p)| [s[0] + *a * p[0], s[1] + *a * p[1]]);
            (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
        });
        low = low.max((peak / xnorm).to_f64_lossy());

        let q = sample_hats(mesh, &dofs, &field);
        let cq = curl.matvec(&q);
        let e = b.matvec(&cq);
        let dual = crate::linalg::dot_conj(&e, &gx.solve(&e)).re.max(T::zero()).sqrt();
        let high = gram_norm(&grams.hat_high, &q);
        let lowq = gram_norm(&grams.hat_low, &q);
        beta = beta.min(((dual + lowq) / high).to_f64_lossy());

        let (r, x, h) = (
            quadratic(b, &cq).re,
            quadratic(&grams.x, &cq).re,
            quadratic(&grams.h, &cq).re,
        );
        forms.push((r.to_f64_lossy(), x.to_f64_lossy(), h.to_f64_lossy()));
        let ratio = (r / x).to_f64_lossy();
        df_min = df_min.min(ratio);
        df_max = df_max.max(ratio);
    }
    let c = 2.0 * forms.iter().map(|(r, _, h)| -r / h).fold(0.0f64, f64::max);
    let alpha = forms
        .iter()
        .map(|(r, x, h)| (r + c * h) / x)
        .fold(f64::INFINITY, f64::min);
    Ok(CoercivityReport {
        samples: options.samples,
        alpha,
        c,
        beta,
        low_frequency: low,
        divergence_free_min: df_min,
        divergence_free_max: df_max,
    })
}

/// Empirical constants of the scalar operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarProbeReport {
    pub samples: usize,
    /// `min Re ψᴴT₀ψ / ‖ψ‖²_{−1/2}` for the static operator.
    pub static_coercivity: f64,
    /// `max_{|ξ| ≤ 2k} |ψ̂(ξ)| / ‖ψ‖_{−1/2}`.
    pub low_frequency: f64,
    /// Smallest singular value of `T` in the `−1/2` norm.
    pub scaled_sigma_min: f64,
}

pub fn scalar_probe<T: Real>(
    mesh: &ApertureMesh<T>,
    k: T,
    options: &ProbeOptions,
    settings: &QuadratureSettings,
) -> Result<ScalarProbeReport> {
    let t0 = assemble_t_spatial(mesh, T::zero(), settings)?;
    let tk = assemble_t_spatial(mesh, k, settings)?;
    let gram = gram_p0(mesh, settings)?;
    let areas2: Vec<T> = (0..mesh.num_cells()).map(|c| mesh.cell_area(c) * T::lit(2.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut coercivity = f64::INFINITY;
    let mut low = 0.0f64;
    for _ in 0..options.samples {
        let field = SmoothField::<T>::random(&mut rng, options.waves, options.max_wavenumber);
        let psi = sample_p0(mesh, &field);
        let n2 = quadratic(&gram, &psi).re;
        coercivity = coercivity.min((quadratic(&t0, &psi).re / n2).to_f64_lossy());
        let peak = max_low_frequency(k + k, options, |xi| {
            let ind = crate::spectra::transform::cell_indicators(mesh, &areas2, xi);
            psi.iter()
                .zip(&ind)
                .fold(C::new(T::zero(), T::zero()), |s, (a, b)| s + *a * *b)
                .norm()
        });
        low = low.max((peak / n2.sqrt()).to_f64_lossy());
    }
    Ok(ScalarProbeReport {
        samples: options.samples,
        static_coercivity: coercivity,
        low_frequency: low,
        scaled_sigma_min: scaled_sigma_min(&tk, &gram)?.to_f64_lossy(),
    })
}
