use crate::error::{Error, Result};
use crate::geometry::ApertureMesh;
use crate::scalar::{Real, C};
use rustfft::{FftNum, FftPlanner};

/// Smallest admissible ratio of padded to supported grid size.
pub const MIN_PADDING: usize = 4;

/// Complex samples on an `n × n` Cartesian grid whose nonzero values live in
/// the leading `support × support` block.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedField<T> {
    pub n: usize,
    pub support: usize,
    pub spacing: T,
    /// Row-major, `values[iy * n + ix]`.
    pub values: Vec<C<T>>,
}

impl<T: Real> PaddedField<T> {
    /// Samples `f` at cell centres `origin + (i + ½) h` of the support block.
    pub fn sample(support: usize, padding: usize, spacing: T, origin: [T; 2], f: impl Fn([T; 2]) -> C<T>) -> Self {
        let n = support * padding;
        let mut values = vec![C::new(T::zero(), T::zero()); n * n];
        for iy in 0..support {
            for ix in 0..support {
                let x = [
                    origin[0] + (T::from_count(ix) + T::lit(0.5)) * spacing,
                    origin[1] + (T::from_count(iy) + T::lit(0.5)) * spacing,
                ];
                values[iy * n + ix] = f(x);
            }
        }
        PaddedField {
            n,
            support,
            spacing,
            values,
        }
    }

    /// Rasterizes a piecewise-constant density by point sampling at pixel
    /// centres over the bounding box of the mesh.
    pub fn rasterize_cells(mesh: &ApertureMesh<T>, coeffs: &[C<T>], support: usize, padding: usize) -> Self {
        let (lo, hi) = bounding_box(mesh);
        let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let spacing = side / T::from_count(support);
        Self::sample(support, padding, spacing, lo, |x| match mesh.locate(x) {
            Some(c) => coeffs[c],
            None => C::new(T::zero(), T::zero()),
        })
    }

    pub fn scaled(&self, s: C<T>) -> Self {
        PaddedField {
            values: self.values.iter().map(|v| *v * s).collect(),
            ..self.clone()
        }
    }

    /// `Σ |f|² h²`.
    pub fn l2_norm_sqr(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum::<T>() * self.spacing * self.spacing
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.n * self.n {
            return Err(Error::InvalidArgument("sample count does not match grid size".into()));
        }
        if self.support == 0 || self.n < MIN_PADDING * self.support {
            return Err(Error::InvalidArgument(format!(
                "padding factor {} below the required {MIN_PADDING}",
                self.n as f64 / self.support.max(1) as f64
            )));
        }
        let outside = (0..self.n * self.n).any(|idx| {
            let (iy, ix) = (idx / self.n, idx % self.n);
            (ix >= self.support || iy >= self.support) && self.values[idx] != C::new(T::zero(), T::zero())
        });
        if outside {
            return Err(Error::InvalidArgument("field is nonzero in the padding region".into()));
        }
        Ok(())
    }
}

fn bounding_box<T: Real>(mesh: &ApertureMesh<T>) -> ([T; 2], [T; 2]) {
    let mut lo = [T::infinity(); 2];
    let mut hi = [T::neg_infinity(); 2];
    for v in &mesh.vertices {
        for d in 0..2 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    (lo, hi)
}

/// Discrete transform `f̂(ξ_j) = h² Σ f(x_m) e^{−i x_m·ξ_j}` on the grid
/// `ξ_j = 2π j / (n h)` (FFT ordering), with the frequency of every entry.
pub fn discrete_transform<T: Real + FftNum>(field: &PaddedField<T>) -> Result<(Vec<C<T>>, Vec<[T; 2]>)> {
    field.check()?;
    let n = field.n;
    let mut data = field.values.clone();
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut column = vec![C::new(T::zero(), T::zero()); n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = data[iy * n + ix];
        }
        fft.process(&mut column);
        for iy in 0..n {
            data[iy * n + ix] = column[iy];
        }
    }
    let h2 = field.spacing * field.spacing;
    for v in data.iter_mut() {
        *v = *v * h2;
    }
    let dxi = T::lit(2.0) * T::PI() / (T::from_count(n) * field.spacing);
    let freq = |j: usize| -> T {
        if j < n.div_ceil(2) {
            T::from_count(j) * dxi
        } else {
            -(T::from_count(n - j) * dxi)
        }
    };
    let xis = (0..n * n).map(|idx| [freq(idx % n), freq(idx / n)]).collect();
    Ok((data, xis))
}

/// Discrete `H^s` norm, `s ∈ {−½, ½}`:
/// `((1/4π²) Σ (1 + |ξ_j|²)^s |f̂(ξ_j)|² Δξ²)^{1/2}`.
pub fn sobolev_norm<T: Real + FftNum>(field: &PaddedField<T>, s: T) -> Result<T> {
    if (s.abs() - T::lit(0.5)).abs() > T::epsilon() {
        return Err(Error::InvalidArgument(format!(
            "Sobolev exponent must be ±1/2, got {s}"
        )));
    }
    let (fhat, xis) = discrete_transform(field)?;
    let dxi = T::lit(2.0) * T::PI() / (T::from_count(field.n) * field.spacing);
    let sum: T = fhat
        .iter()
        .zip(&xis)
        .map(|(f, xi)| (T::one() + xi[0] * xi[0] + xi[1] * xi[1]).powf(s) * f.norm_sqr())
        .sum();
    Ok((sum * dxi * dxi / (T::lit(4.0) * T::PI() * T::PI())).sqrt())
}
