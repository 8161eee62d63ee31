//! Gauss rules on intervals and triangles, plus the collapsed (Duffy) map used
//! for integrands with a point singularity at a triangle vertex.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_TRIANGLE_ORDER: usize = 20;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre(n);
    let half = T::lit(0.5);
    (
        x.iter().map(|&t| half * (T::lit(t) + T::one())).collect(),
        w.iter().map(|&t| half * T::lit(t)).collect(),
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed in `f64` by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = (p1, p0);
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Quadrature rule on the reference triangle `{(u, v): u, v ≥ 0, u + v ≤ 1}`.
///
/// Nodes are barycentric triples `(1 - u - v, u, v)`; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub order: usize,
    pub nodes: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrates `f(u, v)` over the reference triangle.
    pub fn integrate_reference(&self, f: impl Fn(T, T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| w * f(b[1], b[2]))
            .sum()
    }
}

/// Triangle rule exact for polynomials of total degree `order`.
///
/// Order 1 is the centroid rule and order 2 the three-point edge-interior
/// rule; higher orders use the conical (collapsed Gauss) product.
pub fn cell_quadrature<T: Real>(order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 || order > MAX_TRIANGLE_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let third = T::one() / T::lit(3.0);
    let rule = match order {
        1 => QuadratureRule {
            order,
            nodes: vec![[third, third, third]],
            weights: vec![T::lit(0.5)],
        },
        2 => {
            let a = T::lit(2.0 / 3.0);
            let b = T::lit(1.0 / 6.0);
            QuadratureRule {
                order,
                nodes: vec![[a, b, b], [b, a, b], [b, b, a]],
                weights: vec![T::lit(1.0 / 6.0); 3],
            }
        }
        _ => {
            let n = (order + 2).div_ceil(2);
            collapsed_rule(order, n)
        }
    };
    Ok(rule)
}

fn collapsed_rule<T: Real>(order: usize, n: usize) -> QuadratureRule<T> {
    let (x, w) = gauss_legendre_unit::<T>(n);
    let mut nodes = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &s) in x.iter().enumerate() {
        for (j, &t) in x.iter().enumerate() {
            // (s, t) ∈ [0,1]² ↦ u = s, v = (1 - s) t
            let u = s;
            let v = (T::one() - s) * t;
            nodes.push([T::one() - u - v, u, v]);
            weights.push(w[i] * w[j] * (T::one() - s));
        }
    }
    QuadratureRule { order, nodes, weights }
}

/// Physical quadrature points of a triangle: `(point, weight)` with weights
/// summing to the triangle's area.
pub fn map_rule<T: Real>(rule: &QuadratureRule<T>, tri: &[[T; 2]; 3]) -> Vec<([T; 2], T)> {
    let area2 =
        ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1])).abs();
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(b, &w)| {
            let p = [
                b[0] * tri[0][0] + b[1] * tri[1][0] + b[2] * tri[2][0],
                b[0] * tri[0][1] + b[1] * tri[1][1] + b[2] * tri[2][1],
            ];
            (p, w * area2)
        })
        .collect()
}

/// Rule on the triangle `(apex, a, b)` obtained by collapsing the unit square
/// onto `apex`. The Jacobian vanishes linearly at the apex, cancelling a `1/R`
/// singularity located there.
pub fn duffy_apex_rule<T: Real>(apex: [T; 2], a: [T; 2], b: [T; 2], n: usize) -> Vec<([T; 2], T)> {
    let (x, w) = gauss_legendre_unit::<T>(n);
    let area2 = ((a[0] - apex[0]) * (b[1] - apex[1]) - (b[0] - apex[0]) * (a[1] - apex[1])).abs();
    let mut out = Vec::with_capacity(n * n);
    for (i, &s) in x.iter().enumerate() {
        for (j, &t) in x.iter().enumerate() {
            // radial coordinate s from the apex, t along the opposite edge
            let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let p = [apex[0] + s * (q[0] - apex[0]), apex[1] + s * (q[1] - apex[1])];
            out.push((p, w[i] * w[j] * s * area2));
        }
    }
    out
}

/// Splits a triangle into four congruent children (midpoint refinement).
pub fn split4<T: Real>(tri: &[[T; 2]; 3]) -> [[[T; 2]; 3]; 4] {
    let half = T::lit(0.5);
    let mid = |p: [T; 2], q: [T; 2]| [half * (p[0] + q[0]), half * (p[1] + q[1])];
    let m01 = mid(tri[0], tri[1]);
    let m12 = mid(tri[1], tri[2]);
    let m20 = mid(tri[2], tri[0]);
    [
        [tri[0], m01, m20],
        [m01, tri[1], m12],
        [m20, m12, tri[2]],
        [m01, m12, m20],
    ]
}

/// Composite rule: `levels` rounds of midpoint refinement, `rule` on each leaf.
pub fn composite_rule<T: Real>(rule: &QuadratureRule<T>, tri: &[[T; 2]; 3], levels: usize) -> Vec<([T; 2], T)> {
    let mut leaves = vec![*tri];
    for _ in 0..levels {
        leaves = leaves.iter().flat_map(split4).collect();
    }
    leaves.iter().flat_map(|t| map_rule(rule, t)).collect()
}

/// Rule for integrating kernels singular at the observation point `r` over a
/// triangle in the plane `z = 0`.
///
/// A point on the plane inside (or on) the triangle gets Duffy rules collapsed
/// onto it. Otherwise the triangle is split adaptively until every leaf is
/// smaller than `ratio` times its distance to `r`, up to `max_depth` levels.
pub fn observation_rule<T: Real>(
    rule: &QuadratureRule<T>,
    tri: &[[T; 2]; 3],
    r: [T; 3],
    ratio: T,
    max_depth: usize,
) -> Vec<([T; 2], T)> {
    let p = [r[0], r[1]];
    if r[2] == T::zero() && contains(tri, p) {
        let n = 2 * rule.order.max(4) + 8;
        return (0..3)
            .flat_map(|i| duffy_apex_rule(p, tri[i], tri[(i + 1) % 3], n))
            .collect();
    }
    let mut out = Vec::new();
    let mut stack = vec![(*tri, 0usize)];
    while let Some((t, depth)) = stack.pop() {
        let planar = if contains(&t, p) {
            T::zero()
        } else {
            (0..3)
                .map(|i| super::point_segment_distance(p, t[i], t[(i + 1) % 3]))
                .fold(T::infinity(), T::min)
        };
        let d = (planar * planar + r[2] * r[2]).sqrt();
        let diam = (0..3)
            .map(|i| super::dist(t[i], t[(i + 1) % 3]))
            .fold(T::zero(), T::max);
        if depth >= max_depth || diam <= ratio * d {
            out.extend(map_rule(rule, &t));
        } else {
            stack.extend(split4(&t).into_iter().map(|c| (c, depth + 1)));
        }
    }
    out
}

fn contains<T: Real>(tri: &[[T; 2]; 3], p: [T; 2]) -> bool {
    let s = |a: [T; 2], b: [T; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let d = [s(tri[0], tri[1]), s(tri[1], tri[2]), s(tri[2], tri[0])];
    let neg = d.iter().any(|v| *v < T::zero());
    let pos = d.iter().any(|v| *v > T::zero());
    !(neg && pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫_ref x^a y^b = a! b! / (a + b + 2)!
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let f = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) as i32 {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
                assert!((got - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn centroid_rule() {
        let r = cell_quadrature::<f64>(1).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.weights[0] - 0.5).abs() < 1e-15);
        assert!((r.nodes[0][1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn order_two_integrates_x_squared() {
        let r = cell_quadrature::<f64>(2).unwrap();
        let v = r.integrate_reference(|u, _| u * u);
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn order_zero_and_too_high_are_rejected() {
        assert_eq!(cell_quadrature::<f64>(0).unwrap_err(), Error::UnsupportedOrder(0));
        assert!(cell_quadrature::<f64>(MAX_TRIANGLE_ORDER + 1).is_err());
    }

    #[test]
    fn monomial_exactness_all_orders() {
        for order in 1..=MAX_TRIANGLE_ORDER {
            let r = cell_quadrature::<f64>(order).unwrap();
            let wsum: f64 = r.weights.iter().sum();
            assert!((wsum - 0.5).abs() < 1e-14);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let exact = monomial_integral(a, b);
                    let got = r.integrate_reference(|u, v| u.powi(a as i32) * v.powi(b as i32));
                    assert!(
                        ((got - exact) / exact).abs() < 1e-13,
                        "order {order} monomial x^{a} y^{b}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn duffy_rule_cancels_apex_singularity() {
        // ∫_T 1/|x| over T = (0,0),(1,0),(0,1): polar integral ∫ dθ / (cos θ + sin θ)
        let pts = duffy_apex_rule::<f64>([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 24);
        let got: f64 = pts.iter().map(|(p, w)| w / (p[0] * p[0] + p[1] * p[1]).sqrt()).sum();
        let exact = 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln();
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn observation_rule_resolves_near_singular_kernel() {
        let tri = [[0.0f64, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let rule = cell_quadrature::<f64>(6).unwrap();
        // on-plane interior point: ∫ 1/R over the triangle by Duffy vs fine composite
        let x = [0.3, 0.2, 0.0];
        let pts = observation_rule(&rule, &tri, x, 0.5, 12);
        let v: f64 = pts.iter().map(|(y, w)| w / ((y[0] - x[0]).hypot(y[1] - x[1]))).sum();
        let (p, _) = crate::potentials::static_potentials([0.3, 0.2], &tri);
        assert!((v - p).abs() < 1e-8, "{v} vs {p}");
        // slightly above the plane: smooth integrand of height 1e-3
        let x = [0.3, 0.2, 1e-3];
        let pts = observation_rule(&rule, &tri, x, 0.5, 14);
        let v: f64 = pts
            .iter()
            .map(|(y, w)| w / ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2) + x[2] * x[2]).sqrt())
            .sum();
        // ∫ 1/√(ρ² + z²) ≈ P − 2π z + O(z²) near an interior point
        let expected = p - 2.0 * std::f64::consts::PI * 1e-3;
        assert!((v - expected).abs() < 3e-5, "{v} vs {expected}");
    }
}
