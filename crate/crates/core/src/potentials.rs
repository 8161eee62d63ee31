//! Double integrals of the weakly singular kernel `e^{ikR}/(4πR)` over pairs of
//! mesh cells, against affine test and trial functions.
//!
//! Every Galerkin matrix in the crate (piecewise constants, RT0 fields, hats)
//! is a linear combination of the nine *pair moments*
//! `∫_A ∫_B g(|x − y|) f_a(x) h_b(y) dy dx` with `f, h ∈ {1, ξ₁, ξ₂}` measured
//! from the cell centroids.
//!
//! Identical and touching cells use four-dimensional regularizing
//! substitutions. Nearby cells split `g = 1/(4πR) + (e^{ikR} − 1)/(4πR)`: the
//! static inner integral is evaluated in closed form and the bounded remainder
//! by Gauss rules. Separated pairs use product Gauss rules whose order
//! decreases with distance.

use crate::error::{Error, Result};
use crate::geometry::quadrature::{cell_quadrature, map_rule};
use crate::geometry::ApertureMesh;
use crate::scalar::{Real, C};
use crate::singular_rules::{self, PairRule};
use rayon::prelude::*;

/// `e^{ikR} / (4πR)` for complex `k`; `k = iκ` gives the Yukawa kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel<T> {
    pub k: C<T>,
}

impl<T: Real> Kernel<T> {
    pub fn helmholtz(k: T) -> Self {
        Kernel {
            k: C::new(k, T::zero()),
        }
    }

    /// `e^{−κR} / (4πR)`.
    pub fn yukawa(kappa: T) -> Self {
        Kernel {
            k: C::new(T::zero(), kappa),
        }
    }

    pub fn full(&self, r: T) -> C<T> {
        (self.k * C::new(T::zero(), r)).exp() / (T::lit(4.0) * T::PI() * r)
    }

    /// `(e^{ikR} − 1) / (4πR)`, bounded at `R = 0`.
    pub fn smooth(&self, r: T) -> C<T> {
        let z = self.k * C::new(T::zero(), r);
        let phi1 = if z.norm() < T::lit(0.5) {
            // (e^z − 1)/z = Σ z^n/(n+1)!
            let mut term = C::new(T::one(), T::zero());
            let mut sum = term;
            for n in 1..18 {
                term = term * z / T::from_count(n + 1);
                sum = sum + term;
            }
            sum
        } else {
            (z.exp() - C::new(T::one(), T::zero())) / z
        };
        phi1 * self.k * C::new(T::zero(), T::one()) / (T::lit(4.0) * T::PI())
    }
}

/// Quadrature orders for the pair integrals.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSettings {
    /// Triangle rule order for well-separated pairs.
    pub far_order: usize,
    /// Triangle rule order for moderately separated pairs.
    pub mid_order: usize,
    /// Triangle rule order for the outer integral of near pairs.
    pub near_order: usize,
    /// Gauss points per direction of the four-dimensional rules used for
    /// identical and touching cells.
    pub singular_points: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            far_order: 4,
            mid_order: 8,
            near_order: 6,
            singular_points: 6,
        }
    }
}

/// Smallest triangle order accepted for near-singular pairs.
pub const MIN_NEAR_ORDER: usize = 3;

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if self.near_order < MIN_NEAR_ORDER {
            return Err(Error::UnsupportedOrder(self.near_order));
        }
        for o in [self.far_order, self.mid_order, self.near_order] {
            cell_quadrature::<f64>(o)?;
        }
        if self.singular_points < 2 {
            return Err(Error::UnsupportedOrder(self.singular_points));
        }
        Ok(())
    }
}

/// `m[a][b] = ∫_A ∫_B g f_a(x) h_b(y)`, with `f = (1, x − c_A)`, `h = (1, y − c_B)`.
pub type PairMoments<T> = [[C<T>; 3]; 3];

/// Closed-form `(∫_B dy/|x − y|, ∫_B (y − x)/|x − y| dy)` for `x` in the plane.
pub fn static_potentials<T: Real>(x: [T; 2], tri: &[[T; 2]; 3]) -> (T, [T; 2]) {
    let mut p = T::zero();
    let mut q = [T::zero(); 2];
    let ccw = crate::geometry::orient(tri[0], tri[1], tri[2]) > T::zero();
    for i in 0..3 {
        let (a, b) = if ccw {
            (tri[i], tri[(i + 1) % 3])
        } else {
            (tri[(i + 1) % 3], tri[i])
        };
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let n = [t[1], -t[0]];
        let d = (a[0] - x[0]) * n[0] + (a[1] - x[1]) * n[1];
        let sm = (a[0] - x[0]) * t[0] + (a[1] - x[1]) * t[1];
        let sp = (b[0] - x[0]) * t[0] + (b[1] - x[1]) * t[1];
        let ad = d.abs();
        let (rp, rm) = ((sp * sp + d * d).sqrt(), (sm * sm + d * d).sqrt());
        let log_term = if ad > T::zero() {
            asinh_ratio(sp, ad) - asinh_ratio(sm, ad)
        } else {
            T::zero()
        };
        p = p + d * log_term;
        let line = T::lit(0.5) * (sp * rp - sm * rm + d * d * log_term);
        q[0] = q[0] + n[0] * line;
        q[1] = q[1] + n[1] * line;
    }
    (p, q)
}

/// `asinh(s/a)` for `a > 0`, stable for large negative `s/a`.
fn asinh_ratio<T: Real>(s: T, a: T) -> T {
    let r = (s * s + a * a).sqrt();
    if s >= T::zero() {
        ((s + r) / a).ln()
    } else {
        (a / (r - s)).ln()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum PairClass {
    SelfPair,
    Touching,
    Near,
    Mid,
    Far,
}

/// Precomputed per-cell data shared by all pair integrals of one mesh.
pub struct PairIntegrator<'m, T> {
    mesh: &'m ApertureMesh<T>,
    kernel: Kernel<T>,
    centroids: Vec<[T; 2]>,
    diameters: Vec<T>,
    far_pts: Vec<Vec<([T; 2], T)>>,
    mid_pts: Vec<Vec<([T; 2], T)>>,
    near_pts: Vec<Vec<([T; 2], T)>>,
    identical: PairRule<T>,
    common_edge: PairRule<T>,
    common_vertex: PairRule<T>,
}

impl<'m, T: Real> PairIntegrator<'m, T> {
    pub fn new(mesh: &'m ApertureMesh<T>, kernel: Kernel<T>, settings: &QuadratureSettings) -> Result<Self> {
        settings.validate()?;
        let far = cell_quadrature::<T>(settings.far_order)?;
        let mid = cell_quadrature::<T>(settings.mid_order)?;
        let near = cell_quadrature::<T>(settings.near_order)?;
        let cells: Vec<[[T; 2]; 3]> = (0..mesh.num_cells()).map(|c| mesh.cell_points(c)).collect();
        Ok(PairIntegrator {
            mesh,
            kernel,
            centroids: (0..mesh.num_cells()).map(|c| mesh.cell_centroid(c)).collect(),
            diameters: (0..mesh.num_cells()).map(|c| mesh.cell_diameter(c)).collect(),
            far_pts: cells.iter().map(|t| map_rule(&far, t)).collect(),
            mid_pts: cells.iter().map(|t| map_rule(&mid, t)).collect(),
            near_pts: cells.iter().map(|t| map_rule(&near, t)).collect(),
            identical: singular_rules::identical(settings.singular_points),
            common_edge: singular_rules::common_edge(settings.singular_points),
            common_vertex: singular_rules::common_vertex(settings.singular_points),
        })
    }

    pub fn mesh(&self) -> &ApertureMesh<T> {
        self.mesh
    }

    fn classify(&self, a: usize, b: usize) -> PairClass {
        if a == b {
            return PairClass::SelfPair;
        }
        let ca = &self.mesh.cells[a];
        if self.mesh.cells[b].iter().any(|v| ca.contains(v)) {
            return PairClass::Touching;
        }
        let d = crate::geometry::dist(self.centroids[a], self.centroids[b]);
        let size = self.diameters[a].max(self.diameters[b]);
        let ratio = d / size;
        if ratio < T::lit(1.5) {
            PairClass::Near
        } else if ratio < T::lit(3.0) {
            PairClass::Mid
        } else {
            PairClass::Far
        }
    }

    /// Pair moments of test cell `a` against trial cell `b`.
    pub fn moments(&self, a: usize, b: usize) -> PairMoments<T> {
        if a > b {
            // symmetric kernel: reuse the mirrored pair so the matrices are
            // exactly symmetric
            let m = self.moments(b, a);
            return [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[j][i]));
        }
        match self.classify(a, b) {
            PairClass::Far => self.product(&self.far_pts[a], &self.far_pts[b], a, b),
            PairClass::Mid => self.product(&self.mid_pts[a], &self.mid_pts[b], a, b),
            PairClass::Near => self.split(&self.near_pts[a], a, b),
            PairClass::Touching | PairClass::SelfPair => self.singular(a, b),
        }
    }

    fn product(&self, xs: &[([T; 2], T)], ys: &[([T; 2], T)], a: usize, b: usize) -> PairMoments<T> {
        let (ca, cb) = (self.centroids[a], self.centroids[b]);
        let zero = C::new(T::zero(), T::zero());
        let mut m = [[zero; 3]; 3];
        for &(x, wx) in xs {
            let mut inner = [zero; 3];
            for &(y, wy) in ys {
                let r = crate::geometry::dist(x, y);
                let g = self.kernel.full(r) * wy;
                inner[0] = inner[0] + g;
                inner[1] = inner[1] + g * (y[0] - cb[0]);
                inner[2] = inner[2] + g * (y[1] - cb[1]);
            }
            accumulate(&mut m, [wx, wx * (x[0] - ca[0]), wx * (x[1] - ca[1])], inner);
        }
        m
    }

    fn split(&self, xs: &[([T; 2], T)], a: usize, b: usize) -> PairMoments<T> {
        let (ca, cb) = (self.centroids[a], self.centroids[b]);
        let tri_b = self.mesh.cell_points(b);
        let zero = C::new(T::zero(), T::zero());
        let quarter_pi = T::one() / (T::lit(4.0) * T::PI());
        let mut m = [[zero; 3]; 3];
        for &(x, wx) in xs {
            let (p, q) = static_potentials(x, &tri_b);
            let mut inner = [
                C::new(p * quarter_pi, T::zero()),
                C::new((q[0] + (x[0] - cb[0]) * p) * quarter_pi, T::zero()),
                C::new((q[1] + (x[1] - cb[1]) * p) * quarter_pi, T::zero()),
            ];
            let mut add_smooth = |pts: &[([T; 2], T)]| {
                for &(y, wy) in pts {
                    let s = self.kernel.smooth(crate::geometry::dist(x, y)) * wy;
                    inner[0] = inner[0] + s;
                    inner[1] = inner[1] + s * (y[0] - cb[0]);
                    inner[2] = inner[2] + s * (y[1] - cb[1]);
                }
            };
            add_smooth(&self.near_pts[b]);
            accumulate(&mut m, [wx, wx * (x[0] - ca[0]), wx * (x[1] - ca[1])], inner);
        }
        m
    }

    /// Identical or touching cells: charts aligned on the shared vertices,
    /// then the matching regularized rule.
    fn singular(&self, a: usize, b: usize) -> PairMoments<T> {
        let (va, vb) = (self.mesh.cells[a], self.mesh.cells[b]);
        let shared: Vec<usize> = va.iter().copied().filter(|v| vb.contains(v)).collect();
        let order = |cell: [usize; 3]| -> [[T; 2]; 3] {
            let mut ids: Vec<usize> = shared.clone();
            ids.extend(cell.iter().copied().filter(|v| !shared.contains(v)));
            [0, 1, 2].map(|i| self.mesh.vertices[ids[i]])
        };
        let (pa, pb, rule) = match shared.len() {
            3 => {
                let p = self.mesh.cell_points(a);
                (p, p, &self.identical)
            }
            2 => (order(va), order(vb), &self.common_edge),
            _ => (order(va), order(vb), &self.common_vertex),
        };
        let jac = T::lit(4.0) * self.mesh.cell_area(a) * self.mesh.cell_area(b);
        let (ca, cb) = (self.centroids[a], self.centroids[b]);
        let zero = C::new(T::zero(), T::zero());
        let mut m = [[zero; 3]; 3];
        for &(xh, yh, w) in rule {
            let x = singular_rules::chart(&pa, xh);
            let y = singular_rules::chart(&pb, yh);
            let g = self.kernel.full(crate::geometry::dist(x, y)) * (w * jac);
            let f = [T::one(), x[0] - ca[0], x[1] - ca[1]];
            let h = [T::one(), y[0] - cb[0], y[1] - cb[1]];
            for (row, fa) in m.iter_mut().zip(f) {
                for (v, hb) in row.iter_mut().zip(h) {
                    *v = *v + g * (fa * hb);
                }
            }
        }
        m
    }

    /// Visits the moments of every ordered cell pair `(test, trial)`. Rows are
    /// computed in parallel and delivered in order, so the visitor sees a
    /// deterministic sequence.
    pub fn for_each_pair(&self, mut visit: impl FnMut(usize, usize, &PairMoments<T>)) {
        let n = self.mesh.num_cells();
        let chunk = 16usize;
        let mut start = 0;
        while start < n {
            let end = (start + chunk).min(n);
            let rows: Vec<Vec<PairMoments<T>>> = (start..end)
                .into_par_iter()
                .map(|a| (0..n).map(|b| self.moments(a, b)).collect())
                .collect();
            for (offset, row) in rows.iter().enumerate() {
                for (b, m) in row.iter().enumerate() {
                    visit(start + offset, b, m);
                }
            }
            start = end;
        }
    }

    pub fn centroid(&self, c: usize) -> [T; 2] {
        self.centroids[c]
    }
}

fn accumulate<T: Real>(m: &mut PairMoments<T>, f: [T; 3], inner: [C<T>; 3]) {
    for (row, fa) in m.iter_mut().zip(f) {
        for (v, ib) in row.iter_mut().zip(inner) {
            *v = *v + ib * fa;
        }
    }
}

/// Coefficients `(c₀, c)` of an affine function `c₀ + c·(x − centroid)`.
pub type Affine<T> = (T, [T; 2]);

/// `∫∫ g f(x) h(y)` for scalar affine `f` on the test cell and `h` on the trial cell.
pub fn contract_scalar<T: Real>(m: &PairMoments<T>, f: Affine<T>, h: Affine<T>) -> C<T> {
    let fv = [f.0, f.1[0], f.1[1]];
    let hv = [h.0, h.1[0], h.1[1]];
    let mut s = C::new(T::zero(), T::zero());
    for a in 0..3 {
        for b in 0..3 {
            s = s + m[a][b] * (fv[a] * hv[b]);
        }
    }
    s
}

/// `∫∫ g F(x)·H(y)` for vector fields `F = α + β ξ`, `H = γ + δ η` (RT0 form,
/// with `ξ = x − c_A`, `η = y − c_B`). Each argument is `(offset, scale)`.
pub fn contract_rt<T: Real>(m: &PairMoments<T>, f: ([T; 2], T), h: ([T; 2], T)) -> C<T> {
    let mut s = C::new(T::zero(), T::zero());
    for d in 0..2 {
        // component d: (α_d + β ξ_d)(γ_d + δ η_d)
        let fa: Affine<T> = (f.0[d], if d == 0 { [f.1, T::zero()] } else { [T::zero(), f.1] });
        let hb: Affine<T> = (h.0[d], if d == 0 { [h.1, T::zero()] } else { [T::zero(), h.1] });
        s = s + contract_scalar(m, fa, hb);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quadrature::{composite_rule, gauss_legendre_unit};

    /// Independent oracle: ∫_T 1/|x − y| dy by Gauss quadrature in polar
    /// coordinates around `x` (exact radial integral).
    fn polar_oracle(x: [f64; 2], tri: &[[f64; 2]; 3]) -> f64 {
        let (gx, gw) = gauss_legendre_unit::<f64>(20);
        // panels graded geometrically toward both ends of [0, 1]
        let mut breaks = vec![0.0, 1.0];
        for j in 1..40 {
            let t = 0.5 * 0.6f64.powi(j);
            breaks.push(t);
            breaks.push(1.0 - t);
        }
        breaks.push(0.5);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut total = 0.0;
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let th_a = (a[1] - x[1]).atan2(a[0] - x[0]);
            let mut th_b = (b[1] - x[1]).atan2(b[0] - x[0]);
            while th_b < th_a - std::f64::consts::PI {
                th_b += 2.0 * std::f64::consts::PI;
            }
            while th_b > th_a + std::f64::consts::PI {
                th_b -= 2.0 * std::f64::consts::PI;
            }
            for pan in breaks.windows(2) {
                for (t, w) in gx.iter().zip(&gw) {
                    let u = pan[0] + t * (pan[1] - pan[0]);
                    let th = th_a + u * (th_b - th_a);
                    let dir = [th.cos(), th.sin()];
                    // ray x + ρ dir hits segment a–b
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let det = dir[0] * (-e[1]) - dir[1] * (-e[0]);
                    let rhs = [a[0] - x[0], a[1] - x[1]];
                    let rho = (rhs[0] * (-e[1]) - rhs[1] * (-e[0])) / det;
                    total += w * (pan[1] - pan[0]) * (th_b - th_a) * rho;
                }
            }
        }
        total.abs()
    }

    #[test]
    fn static_potential_matches_polar_oracle() {
        let tri = [[0.0, 0.0], [1.0, 0.1], [0.3, 0.8]];
        for x in [[0.4, 0.3], [0.05, 0.02], [0.5, 0.45]] {
            let (p, _) = static_potentials(x, &tri);
            let o = polar_oracle(x, &tri);
            assert!((p - o).abs() < 1e-10 * o, "{p} vs {o}");
        }
        // outside point: compare with brute force
        let x = [1.5, 1.2];
        let (p, q) = static_potentials(x, &tri);
        let rule = cell_quadrature::<f64>(12).unwrap();
        let pts = composite_rule(&rule, &tri, 2);
        let bp: f64 = pts.iter().map(|(y, w)| w / crate::geometry::dist(x, *y)).sum();
        let bq0: f64 = pts
            .iter()
            .map(|(y, w)| w * (y[0] - x[0]) / crate::geometry::dist(x, *y))
            .sum();
        assert!((p - bp).abs() < 1e-10);
        assert!((q[0] - bq0).abs() < 1e-10);
    }

    #[test]
    fn smooth_kernel_series_matches_direct() {
        let k = Kernel::helmholtz(1.7f64);
        for r in [1e-6, 0.1, 0.29, 0.31, 2.0] {
            let direct = (k.full(r) - C::new(1.0 / (4.0 * std::f64::consts::PI * r), 0.0)).norm();
            assert!((k.smooth(r).norm() - direct).abs() < 1e-9 * direct.max(1.0));
        }
        let y = Kernel::yukawa(1.0f64);
        let r = 0.7;
        assert!((y.full(r).re - (-r).exp() / (4.0 * std::f64::consts::PI * r)).abs() < 1e-15);
    }

    #[test]
    fn low_near_order_is_rejected() {
        let s = QuadratureSettings {
            near_order: 2,
            ..Default::default()
        };
        assert_eq!(s.validate(), Err(Error::UnsupportedOrder(2)));
    }
}
