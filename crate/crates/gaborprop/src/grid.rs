//! Periodic spatial grids and complex sampled fields.

use crate::error::{GaborError, Result};
use crate::real::Real;
use num_complex::Complex;
use std::io::{Read, Write};

/// Truncated periodic grid on the cube `[-L/2, L/2)^d`.
///
/// `samples_per_axis` points per axis with spacing `L/N`; the dual grid has
/// spacing `1/L` and Nyquist frequency `N/(2L)` (frequencies in cycles per
/// unit length, matching `F f(xi) = \int f(t) e^{-2 pi i t xi} dt`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T: Real> {
    dim: usize,
    extent: T,
    samples_per_axis: usize,
    truncation_budget: T,
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, extent: T, samples_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GaborError::InvalidGrid("dimension must be positive".into()));
        }
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(GaborError::InvalidGrid("extent must be positive and finite".into()));
        }
        if samples_per_axis < 8 || samples_per_axis % 2 != 0 {
            return Err(GaborError::InvalidGrid(
                "samples_per_axis must be even and >= 8".into(),
            ));
        }
        Ok(Grid {
            dim,
            extent,
            samples_per_axis,
            truncation_budget: T::of(1e-10),
        })
    }

    /// Default desk-scale grid for the given dimension.
    pub fn default_for_dim(dim: usize) -> Result<Self> {
        match dim {
            1 => Grid::new(1, T::of(16.0), 256),
            2 => Grid::new(2, T::of(12.0), 128),
            3 => Grid::new(3, T::of(8.0), 64),
            _ => Err(GaborError::InvalidGrid(format!("no default grid for d={dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> T {
        self.extent
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    /// Mass allowed outside the box / below resolution for windows placed
    /// on this grid.
    pub fn truncation_budget(&self) -> T {
        self.truncation_budget
    }

    /// Spatial spacing `L/N`.
    pub fn spacing(&self) -> T {
        self.extent / T::from_usize(self.samples_per_axis).unwrap()
    }

    /// Frequency spacing `1/L`.
    pub fn freq_spacing(&self) -> T {
        T::one() / self.extent
    }

    /// Nyquist frequency `N/(2L)`.
    pub fn nyquist(&self) -> T {
        T::from_usize(self.samples_per_axis / 2).unwrap() / self.extent
    }

    /// Total number of samples `N^d`.
    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `(L/N)^d` of the rectangle rule.
    pub fn cell_volume(&self) -> T {
        let mut v = T::one();
        for _ in 0..self.dim {
            v = v * self.spacing();
        }
        v
    }

    /// Position of sample `j` along one axis: `-L/2 + j*h`.
    pub fn position(&self, j: usize) -> T {
        -self.extent / T::of(2.0) + T::from_usize(j).unwrap() * self.spacing()
    }

    /// Frequency of FFT bin `k` along one axis (FFT ordering).
    pub fn freq_at_bin(&self, k: usize) -> T {
        let n = self.samples_per_axis;
        let c = if k < n / 2 { k as isize } else { k as isize - n as isize };
        T::from_isize(c).unwrap() * self.freq_spacing()
    }

    /// Signed integer frequency multiple of FFT bin `k`.
    pub fn bin_multiple(&self, k: usize) -> isize {
        let n = self.samples_per_axis;
        if k < n / 2 {
            k as isize
        } else {
            k as isize - n as isize
        }
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.samples_per_axis;
            flat /= self.samples_per_axis;
        }
        idx
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut flat = 0usize;
        for &j in multi {
            flat = flat * self.samples_per_axis + j;
        }
        flat
    }

    /// Position vector of a flat index.
    pub fn position_of(&self, flat: usize) -> Vec<T> {
        self.multi_index(flat).iter().map(|&j| self.position(j)).collect()
    }

    /// Margin inside which a unit Gaussian keeps its tail below the
    /// truncation budget: `sqrt(ln(1/eps) / (2 pi))`.
    pub fn gaussian_margin(&self) -> T {
        (self.truncation_budget.recip().ln() / T::two_pi()).sqrt()
    }
}

/// Point `z = (x, xi)` of the time-frequency plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T: Real> {
    pub x: Vec<T>,
    pub xi: Vec<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(x: Vec<T>, xi: Vec<T>) -> Self {
        assert_eq!(x.len(), xi.len(), "position and frequency dimensions differ");
        PhasePoint { x, xi }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn origin(dim: usize) -> Self {
        PhasePoint {
            x: vec![T::zero(); dim],
            xi: vec![T::zero(); dim],
        }
    }

    /// Euclidean norm of `(x, xi)`.
    pub fn norm(&self) -> T {
        let s: T = self
            .x
            .iter()
            .chain(self.xi.iter())
            .map(|&v| v * v)
            .fold(T::zero(), |a, b| a + b);
        s.sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        PhasePoint {
            x: self.x.iter().zip(&other.x).map(|(&a, &b)| a - b).collect(),
            xi: self.xi.iter().zip(&other.xi).map(|(&a, &b)| a - b).collect(),
        }
    }
}

/// Complex samples of a function on a [`Grid`], row-major in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<T: Real> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SampledField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GaborError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GaborError::InvalidParameter("field contains non-finite values".into()));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        let n = grid.len();
        SampledField {
            grid,
            values: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(&[T]) -> Complex<T>) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position_of(i))).collect();
        SampledField { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Quadrature approximation of the continuum inner product `<f, g>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.grid != other.grid {
            return Err(GaborError::GridMismatch("inner product on different grids".into()));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b.conj();
        }
        Ok(acc * self.grid.cell_volume())
    }

    /// Quadrature `L^2` norm.
    pub fn norm(&self) -> T {
        let s: T = self
            .values
            .iter()
            .map(|v| v.re * v.re + v.im * v.im)
            .fold(T::zero(), |a, b| a + b);
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn scale(&mut self, c: Complex<T>) {
        for v in &mut self.values {
            *v = *v * c;
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: Complex<T>) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * c;
        }
    }

    /// Relative `L^2` distance `|self - other| / |other|` (absolute if `other` is zero).
    pub fn rel_error(&self, other: &Self) -> T {
        let mut diff = T::zero();
        let mut norm = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            let d = a - b;
            diff = diff + d.norm_sqr();
            norm = norm + b.norm_sqr();
        }
        if norm > T::zero() {
            (diff / norm).sqrt()
        } else {
            (diff * self.grid.cell_volume()).sqrt()
        }
    }
}

/// Binary layout: `u32 d, u32 N, f64 L`, then `N^d` interleaved `(re, im)`
/// f64 pairs, all little-endian.
pub fn write_field_binary<T: Real, W: Write>(field: &SampledField<T>, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.samples_per_axis() as u32).to_le_bytes())?;
    w.write_all(&g.extent().to_f64().unwrap().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.re.to_f64().unwrap().to_le_bytes())?;
        w.write_all(&v.im.to_f64().unwrap().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary<T: Real, R: Read>(mut r: R) -> Result<SampledField<T>> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    let grid = Grid::new(d, T::of(l), n)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        values.push(Complex::new(T::of(re), T::of(im)));
    }
    SampledField::new(grid, values)
}

/// CSV export with rows `index,re,im` (flat row-major index).
pub fn write_field_csv<T: Real, W: Write>(field: &SampledField<T>, mut w: W) -> Result<()> {
    writeln!(w, "index,re,im")?;
    for (i, v) in field.values().iter().enumerate() {
        writeln!(w, "{},{:.16e},{:.16e}", i, v.re.to_f64().unwrap(), v.im.to_f64().unwrap())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_or_small_sampling() {
        assert!(Grid::<f64>::new(1, 16.0, 255).is_err());
        assert!(Grid::<f64>::new(1, 16.0, 6).is_err());
        assert!(Grid::<f64>::new(0, 16.0, 64).is_err());
        assert!(Grid::<f64>::new(1, -1.0, 64).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::<f64>::new(2, 12.0, 16).unwrap();
        for flat in [0usize, 1, 17, 255] {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
    }

    #[test]
    fn freq_bins_are_symmetric() {
        let g = Grid::<f64>::new(1, 16.0, 256).unwrap();
        assert_eq!(g.freq_at_bin(0), 0.0);
        assert_eq!(g.freq_at_bin(1), 1.0 / 16.0);
        assert_eq!(g.freq_at_bin(255), -1.0 / 16.0);
        assert_eq!(g.freq_at_bin(128), -8.0);
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::<f64>::new(1, 16.0, 8).unwrap();
        let f = SampledField::from_fn(g, |x| Complex::new(x[0], -x[0] * 0.5));
        let mut buf = Vec::new();
        write_field_binary(&f, &mut buf).unwrap();
        let back: SampledField<f64> = read_field_binary(&buf[..]).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn field_rejects_wrong_length() {
        let g = Grid::<f64>::new(1, 16.0, 8).unwrap();
        assert!(SampledField::new(g, vec![Complex::new(0.0, 0.0); 7]).is_err());
    }
}
