//! Dense complex linear algebra used by the Galerkin solvers.
//!
//! Matrices are stored row-major. Factorizations are plain partial-pivoting LU
//! and Cholesky; systems in this crate stay at desk scale (a few thousand
//! unknowns), where dense direct solves are the right tool.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_traits::Zero;
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a real matrix (zero imaginary part).
    pub fn from_real(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        Self::from_fn(rows, cols, |i, j| C::new(f(i, j), T::zero()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C<T>] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scaled(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(C::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `A^H x`.
    pub fn adjoint_matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![C::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a.conj() * xi;
            }
        }
        out
    }

    /// `A^T x` (no conjugation).
    pub fn transpose_matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![C::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        out
    }

    /// Sesquilinear form `u^H A v`.
    pub fn form(&self, u: &[C<T>], v: &[C<T>]) -> C<T> {
        dot_conj(u, &self.matvec(v))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Largest `|A_ij - A_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> T {
        let scale = self.max_abs().max(T::min_positive_value());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst / scale
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `u^H v`.
pub fn dot_conj<T: Real>(u: &[C<T>], v: &[C<T>]) -> C<T> {
    u.iter().zip(v).fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm2<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn axpy<T: Real>(y: &mut [C<T>], a: C<T>, x: &[C<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

pub fn sub_vec<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Partial-pivoting LU factorization `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    /// Smallest `|u_kk| / max|u_kk|` encountered.
    pub pivot_ratio: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        if n > 0 && (scale.is_zero() || !scale.is_finite()) {
            return Err(Error::Solver {
                message: "matrix is zero or non-finite".into(),
                condition: f64::INFINITY,
            });
        }
        let mut min_piv = T::infinity();
        let mut max_piv = T::zero();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * T::epsilon() * T::lit(8.0) {
                return Err(Error::Solver {
                    message: format!("zero pivot in column {k}"),
                    condition: f64::INFINITY,
                });
            }
            min_piv = min_piv.min(best);
            max_piv = max_piv.max(best);
            if p != k {
                perm.swap(p, k);
                let c = n;
                let (lo, hi) = lu.data.split_at_mut(p * c);
                lo[k * c..(k + 1) * c].swap_with_slice(&mut hi[..c]);
            }
            let pivot = lu[(k, k)];
            let inv = C::new(T::one(), T::zero()) / pivot;
            let (head, tail) = lu.data.split_at_mut((k + 1) * n);
            let krow = &head[k * n..(k + 1) * n];
            for row in tail.chunks_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l.is_zero() {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(&krow[k + 1..]) {
                    *x = *x - l * u;
                }
            }
        }
        let pivot_ratio = if n == 0 { T::one() } else { min_piv / max_piv };
        Ok(Lu { lu, perm, pivot_ratio })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s = s - row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s = s - row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // U^H y = b
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s = s - self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        // L^H z = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s = s - self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![C::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// Cholesky factorization `A = L L^H` of a Hermitian positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: CMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        let n = a.rows;
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d = d - l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) {
                return Err(Error::Solver {
                    message: format!("matrix not positive definite at column {j}"),
                    condition: f64::INFINITY,
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = C::new(djj, T::zero());
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor_matrix(&self) -> &CMatrix<T> {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.l.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `L^H x = y`.
    pub fn solve_upper(&self, y: &[C<T>]) -> Vec<C<T>> {
        let n = self.l.rows;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - self.l[(k, i)].conj() * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L^{-1} A L^{-H}`: congruence transform of `a` into the metric of this factor.
    pub fn whiten(&self, a: &CMatrix<T>) -> CMatrix<T> {
        let n = self.l.rows;
        // Y = L^{-1} A, column by column
        let mut y = CMatrix::zeros(n, n);
        for j in 0..n {
            let col: Vec<C<T>> = (0..n).map(|i| a[(i, j)]).collect();
            let s = self.solve_lower(&col);
            for i in 0..n {
                y[(i, j)] = s[i];
            }
        }
        // Z = Y L^{-H} = (L^{-1} Y^H)^H
        let yh = y.adjoint();
        let mut z = CMatrix::zeros(n, n);
        for j in 0..n {
            let col: Vec<C<T>> = (0..n).map(|i| yh[(i, j)]).collect();
            let s = self.solve_lower(&col);
            for i in 0..n {
                z[(j, i)] = s[i].conj();
            }
        }
        z
    }
}

fn start_vector<T: Real>(n: usize) -> Vec<C<T>> {
    // deterministic, not aligned with any coordinate direction
    (0..n)
        .map(|i| {
            let t = T::from_count(i + 1);
            C::new(
                T::one() + (t * T::lit(0.7548776662)).sin() * T::lit(0.5),
                (t * T::lit(0.5698402910)).cos() * T::lit(0.25),
            )
        })
        .collect()
}

fn normalize<T: Real>(v: &mut [C<T>]) -> T {
    let n = norm2(v);
    if n > T::zero() {
        for x in v.iter_mut() {
            *x = *x / n;
        }
    }
    n
}

/// Estimates the largest singular value by power iteration on `A^H A`.
pub fn largest_singular_value<T: Real>(a: &CMatrix<T>, iterations: usize) -> T {
    let mut v = start_vector::<T>(a.cols());
    normalize(&mut v);
    let mut sigma = T::zero();
    for _ in 0..iterations {
        let av = a.matvec(&v);
        let mut w = a.adjoint_matvec(&av);
        let lam = normalize(&mut w);
        let next = lam.sqrt();
        v = w;
        if (next - sigma).abs() <= next * T::lit(1e-12) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    sigma
}

/// Estimates the smallest singular value by inverse power iteration on `A^H A`.
pub fn smallest_singular_value<T: Real>(lu: &Lu<T>, iterations: usize) -> T {
    let mut v = start_vector::<T>(lu.dim());
    normalize(&mut v);
    let mut sigma = T::infinity();
    for _ in 0..iterations {
        let y = lu.solve_adjoint(&v);
        let mut w = lu.solve(&y);
        // ‖(A^H A)^{-1} v‖ → 1/σ_min² ; use solve order A^{-1} A^{-H}
        let lam = normalize(&mut w);
        let next = T::one() / lam.sqrt();
        v = w;
        if (next - sigma).abs() <= next * T::lit(1e-12) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    sigma
}

/// Singular value extremes and the 2-norm condition estimate.
#[derive(Debug, Clone, Copy)]
pub struct ConditionEstimate<T> {
    pub sigma_max: T,
    pub sigma_min: T,
}

impl<T: Real> ConditionEstimate<T> {
    pub fn compute(a: &CMatrix<T>, lu: &Lu<T>) -> Self {
        ConditionEstimate {
            sigma_max: largest_singular_value(a, 300),
            sigma_min: smallest_singular_value(lu, 300),
        }
    }

    pub fn condition(&self) -> T {
        self.sigma_max / self.sigma_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn sample() -> CMatrix<f64> {
        CMatrix::from_fn(4, 4, |i, j| {
            let d = if i == j { 4.0 } else { 0.0 };
            c(d + (i as f64 - j as f64) * 0.3, 0.1 * (i + 2 * j) as f64)
        })
    }

    #[test]
    fn lu_solves_and_adjoint_solves() {
        let a = sample();
        let lu = Lu::factor(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 2.0), c(0.5, 0.5)];
        let x = lu.solve(&b);
        let r = sub_vec(&a.matvec(&x), &b);
        assert!(norm2(&r) < 1e-13);
        let y = lu.solve_adjoint(&b);
        let r = sub_vec(&a.adjoint_matvec(&y), &b);
        assert!(norm2(&r) < 1e-13);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_real(3, 3, |i, _| i as f64);
        assert!(matches!(Lu::factor(&a), Err(Error::Solver { .. })));
    }

    #[test]
    fn diagonal_singular_values() {
        let a = CMatrix::<f64>::from_real(3, 3, |i, j| if i == j { [3.0, 0.5, 2.0][i] } else { 0.0 });
        let lu = Lu::factor(&a).unwrap();
        let est = ConditionEstimate::compute(&a, &lu);
        assert!((est.sigma_max - 3.0).abs() < 1e-9);
        assert!((est.sigma_min - 0.5).abs() < 1e-9);
        assert!((est.condition() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn cholesky_and_whitening() {
        let b = sample();
        let a = b.adjoint().matmul(&b);
        let ch = Cholesky::factor(&a).unwrap();
        let w = ch.whiten(&a);
        let id = CMatrix::<f64>::identity(4);
        assert!(w.sub(&id).frobenius_norm() < 1e-12);
    }
}
