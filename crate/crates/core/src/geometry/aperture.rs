use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Planar shape of the opening in the screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ApertureSpec<T> {
    Disc { radius: T },
    Rectangle { half_widths: [T; 2] },
    Polygon { vertices: Vec<[T; 2]> },
}

pub(crate) fn signed_area2<T: Real>(poly: &[[T; 2]]) -> T {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum()
}

pub(crate) fn orient<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

fn segments_cross<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    // collinear overlap
    let on = |p: [T; 2], q: [T; 2], r: [T; 2]| {
        orient(p, q, r) == z
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

impl<T: Real> ApertureSpec<T> {
    pub fn disc(radius: T) -> Self {
        ApertureSpec::Disc { radius }
    }

    pub fn rectangle(hx: T, hy: T) -> Self {
        ApertureSpec::Rectangle { half_widths: [hx, hy] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ApertureSpec::Disc { radius } => {
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(Error::InvalidAperture(format!(
                        "disc radius must be positive, got {radius}"
                    )));
                }
            }
            ApertureSpec::Rectangle { half_widths } => {
                if half_widths.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
                    return Err(Error::InvalidAperture("rectangle half-widths must be positive".into()));
                }
            }
            ApertureSpec::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::InvalidAperture("polygon needs at least 3 vertices".into()));
                }
                for i in 0..n {
                    if vertices[i].iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidAperture("non-finite polygon vertex".into()));
                    }
                    for j in i + 1..n {
                        if vertices[i] == vertices[j] {
                            return Err(Error::InvalidAperture(format!("repeated polygon vertex {i}/{j}")));
                        }
                    }
                }
                for i in 0..n {
                    for j in i + 1..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        if adjacent {
                            continue;
                        }
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                        if segments_cross(a, b, c, d) {
                            return Err(Error::InvalidAperture(format!("polygon edges {i} and {j} intersect")));
                        }
                    }
                }
                if signed_area2(vertices).abs() <= T::epsilon() {
                    return Err(Error::InvalidAperture("polygon has zero area".into()));
                }
            }
        }
        Ok(())
    }

    pub fn area(&self) -> T {
        match self {
            ApertureSpec::Disc { radius } => T::PI() * *radius * *radius,
            ApertureSpec::Rectangle { half_widths } => T::lit(4.0) * half_widths[0] * half_widths[1],
            ApertureSpec::Polygon { vertices } => signed_area2(vertices).abs() * T::lit(0.5),
        }
    }

    pub fn diameter(&self) -> T {
        match self {
            ApertureSpec::Disc { radius } => T::lit(2.0) * *radius,
            ApertureSpec::Rectangle { half_widths } => {
                T::lit(2.0) * (half_widths[0] * half_widths[0] + half_widths[1] * half_widths[1]).sqrt()
            }
            ApertureSpec::Polygon { vertices } => {
                let mut d = T::zero();
                for p in vertices {
                    for q in vertices {
                        d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                    }
                }
                d
            }
        }
    }

    /// Polygon vertices in counterclockwise order.
    pub(crate) fn ccw_polygon(&self) -> Option<Vec<[T; 2]>> {
        match self {
            ApertureSpec::Polygon { vertices } => {
                let mut v = vertices.clone();
                if signed_area2(&v) < T::zero() {
                    v.reverse();
                }
                Some(v)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_specs() {
        assert!(ApertureSpec::disc(0.0f64).validate().is_err());
        assert!(ApertureSpec::rectangle(1.0f64, -1.0).validate().is_err());
        let repeated = ApertureSpec::Polygon {
            vertices: vec![[0.0f64, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(repeated.validate().is_err());
        let bowtie = ApertureSpec::Polygon {
            vertices: vec![[0.0f64, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(bowtie.validate().is_err());
        let flat = ApertureSpec::Polygon {
            vertices: vec![[0.0f64, 0.0], [1.0, 0.0], [2.0, 0.0]],
        };
        assert!(flat.validate().is_err());
    }

    #[test]
    fn analytic_areas() {
        assert!((ApertureSpec::disc(1.0f64).area() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(ApertureSpec::rectangle(1.0f64, 0.5).area(), 2.0);
        let tri = ApertureSpec::Polygon {
            vertices: vec![[0.0f64, 0.0], [0.0, 1.0], [1.0, 0.0]],
        };
        assert!(tri.validate().is_ok());
        assert_eq!(tri.area(), 0.5);
    }
}
