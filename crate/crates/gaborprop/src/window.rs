//! Analysis windows: the normalized Gaussian, finite Hermite superpositions,
//! and arbitrary sampled windows.

use crate::error::{GaborError, Result};
use crate::fft::{forward_transform, FftEngine};
use crate::grid::{Grid, SampledField};
use crate::real::Real;
use num_complex::Complex;

/// Window choice for all time-frequency operations.
///
/// `NormalizedGaussian` is `g(x) = 2^{d/4} e^{-pi |x|^2}`, unit `L^2` norm and
/// self-dual under the Fourier transform. `HermiteSuperposition` holds
/// per-axis coefficients of the orthonormal Hermite functions adapted to that
/// Gaussian (applied as a tensor product over axes); coefficients are
/// normalized at construction.
#[derive(Debug, Clone)]
pub enum WindowSpec<T: Real> {
    NormalizedGaussian,
    HermiteSuperposition(Vec<T>),
    Sampled(SampledField<T>),
}

impl<T: Real> WindowSpec<T> {
    pub fn hermite_superposition(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(GaborError::InvalidParameter("empty Hermite coefficient list".into()));
        }
        let norm: T = coeffs.iter().map(|&c| c * c).fold(T::zero(), |a, b| a + b).sqrt();
        if !(norm > T::zero()) {
            return Err(GaborError::InvalidParameter("zero Hermite superposition".into()));
        }
        Ok(WindowSpec::HermiteSuperposition(
            coeffs.into_iter().map(|c| c / norm).collect(),
        ))
    }

    /// Pure `n`-th Hermite function along every axis.
    pub fn hermite(n: usize) -> Self {
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        WindowSpec::HermiteSuperposition(coeffs)
    }

    /// Largest Hermite order involved (0 for the Gaussian).
    fn max_order(&self) -> usize {
        match self {
            WindowSpec::HermiteSuperposition(c) => c.len() - 1,
            _ => 0,
        }
    }

    /// Whether a closed-form pointwise evaluation exists.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self, WindowSpec::Sampled(_))
    }

    /// Evaluate the window at a point (closed-form kinds only).
    pub fn eval(&self, x: &[T]) -> Complex<T> {
        match self {
            WindowSpec::NormalizedGaussian => Complex::new(gaussian_nd(x), T::zero()),
            WindowSpec::HermiteSuperposition(c) => {
                let mut prod = Complex::new(T::one(), T::zero());
                for &xi in x {
                    prod = prod * Complex::new(hermite_superposition_1d(c, xi), T::zero());
                }
                prod
            }
            WindowSpec::Sampled(_) => panic!("sampled windows have no closed-form evaluation"),
        }
    }

    /// Evaluate the Fourier transform of the window at a frequency point.
    ///
    /// Hermite functions are eigenfunctions of the transform with eigenvalue
    /// `(-i)^k`; the Gaussian is fixed.
    pub fn fourier_eval(&self, xi: &[T]) -> Complex<T> {
        match self {
            WindowSpec::NormalizedGaussian => Complex::new(gaussian_nd(xi), T::zero()),
            WindowSpec::HermiteSuperposition(c) => {
                let mut prod = Complex::new(T::one(), T::zero());
                for &w in xi {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (k, &ck) in c.iter().enumerate() {
                        let eig = minus_i_pow::<T>(k);
                        acc += eig * hermite_1d(k, w) * ck;
                    }
                    prod = prod * acc;
                }
                prod
            }
            WindowSpec::Sampled(_) => panic!("sampled windows have no closed-form transform"),
        }
    }

    /// Samples on the grid, periodized over neighbouring images.
    pub fn sample(&self, grid: &Grid<T>) -> Result<SampledField<T>> {
        match self {
            WindowSpec::Sampled(f) => {
                if f.grid() != grid {
                    return Err(GaborError::GridMismatch("sampled window lives on a different grid".into()));
                }
                Ok(f.clone())
            }
            _ => Ok(periodized_samples(self, grid, &vec![T::zero(); grid.dim()])),
        }
    }

    /// Half-width of the margin the window needs to the box boundary (and to
    /// the Nyquist frequency) for its tail to stay below the grid budget.
    pub fn margin(&self, grid: &Grid<T>) -> T {
        let base = grid.gaussian_margin();
        // Hermite_k spreads like sqrt(k/pi) beyond the Gaussian envelope
        let k = T::from_usize(self.max_order()).unwrap();
        base + (k / T::PI()).sqrt()
    }

    /// Check that mass outside box and band stays below the budget.
    pub fn admissible_on(&self, grid: &Grid<T>) -> bool {
        match self {
            WindowSpec::Sampled(_) => true,
            _ => {
                let m = self.margin(grid);
                let half = grid.extent() / T::of(2.0);
                m < half && m < grid.nyquist()
            }
        }
    }
}

fn minus_i_pow<T: Real>(k: usize) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    }
}

fn gaussian_nd<T: Real>(x: &[T]) -> T {
    let r2 = x.iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b);
    let d4 = T::from_usize(x.len()).unwrap() / T::of(4.0);
    T::of(2.0).powf(d4) * (-T::PI() * r2).exp()
}

/// Orthonormal Hermite function `h_k(x) = c_k H_k(sqrt(2 pi) x) e^{-pi x^2}`
/// with `c_k = 2^{1/4} / sqrt(2^k k!)`; `h_0` is the normalized Gaussian.
pub fn hermite_1d<T: Real>(k: usize, x: T) -> T {
    let u = (T::two_pi()).sqrt() * x;
    // physicists' recurrence, with the normalization folded in stepwise to
    // avoid factorial overflow
    let mut hk = T::one(); // normalized H_0
    let mut hk1 = T::zero();
    for j in 0..k {
        let jt = T::from_usize(j).unwrap();
        // h_{j+1} = (u * sqrt(2/(j+1))) h_j - sqrt(j/(j+1)) h_{j-1}
        let a = (T::of(2.0) / (jt + T::one())).sqrt();
        let b = (jt / (jt + T::one())).sqrt();
        let next = u * a * hk - b * hk1;
        hk1 = hk;
        hk = next;
    }
    T::of(2.0).powf(T::of(0.25)) * hk * (-T::PI() * x * x).exp()
}

fn hermite_superposition_1d<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c * hermite_1d(k, x))
        .fold(T::zero(), |a, b| a + b)
}

/// Samples of the window translated by `shift`, summed over torus images.
pub fn periodized_samples<T: Real>(window: &WindowSpec<T>, grid: &Grid<T>, shift: &[T]) -> SampledField<T> {
    let l = grid.extent();
    let d = grid.dim();
    let images: Vec<T> = vec![-l, T::zero(), l];
    SampledField::from_fn(*grid, |x| {
        let mut acc = Complex::new(T::zero(), T::zero());
        // d <= 3 keeps the 3^d image sum cheap; only the nearest image matters
        let mut offsets = vec![0usize; d];
        loop {
            let point: Vec<T> = (0..d).map(|a| x[a] - shift[a] + images[offsets[a]]).collect();
            acc += window.eval(&point);
            // odometer over image choices
            let mut axis = 0;
            loop {
                if axis == d {
                    return acc;
                }
                offsets[axis] += 1;
                if offsets[axis] < images.len() {
                    break;
                }
                offsets[axis] = 0;
                axis += 1;
            }
        }
    })
}

/// Translate a sampled window by `shift` via a spectral phase ramp
/// (band-limited periodic translation).
pub fn translate_sampled<T: Real>(field: &SampledField<T>, shift: &[T], engine: &FftEngine<T>) -> SampledField<T> {
    let grid = *field.grid();
    let mut spec = forward_transform(field, engine);
    let n = grid.samples_per_axis();
    for (flat, v) in spec.iter_mut().enumerate() {
        let mut rem = flat;
        let mut phase = T::zero();
        for a in (0..grid.dim()).rev() {
            let k = rem % n;
            rem /= n;
            phase = phase + grid.freq_at_bin(k) * shift[a];
        }
        let rot = Complex::from_polar(T::one(), -T::two_pi() * phase);
        *v = *v * rot;
    }
    crate::fft::inverse_transform(grid, &spec, engine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_has_unit_norm_on_default_grids() {
        for d in 1..=2usize {
            let grid = Grid::<f64>::default_for_dim(d).unwrap();
            let g = WindowSpec::NormalizedGaussian.sample(&grid).unwrap();
            assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn hermites_are_orthonormal() {
        let grid = Grid::<f64>::new(1, 16.0, 256).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let ha = WindowSpec::<f64>::hermite(a).sample(&grid).unwrap();
                let hb = WindowSpec::<f64>::hermite(b).sample(&grid).unwrap();
                let ip = ha.inner(&hb).unwrap();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip.re, expected, epsilon = 1e-10);
                assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_fourier_eigenvalue() {
        // F h_1 = -i h_1 under the 2 pi convention
        let grid = Grid::<f64>::new(1, 16.0, 256).unwrap();
        let h1 = WindowSpec::<f64>::hermite(1).sample(&grid).unwrap();
        let engine = FftEngine::new(256);
        let spec = forward_transform(&h1, &engine);
        for k in (0..256).step_by(17) {
            let xi = grid.freq_at_bin(k);
            let expected = -Complex::<f64>::i() * hermite_1d(1, xi);
            assert_abs_diff_eq!(spec[k].re, expected.re, epsilon = 1e-10);
            assert_abs_diff_eq!(spec[k].im, expected.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn superposition_is_normalized() {
        let w = WindowSpec::<f64>::hermite_superposition(vec![3.0, 4.0]).unwrap();
        let grid = Grid::<f64>::new(1, 16.0, 256).unwrap();
        assert_abs_diff_eq!(w.sample(&grid).unwrap().norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn translate_sampled_matches_direct_shift() {
        let grid = Grid::<f64>::new(1, 16.0, 256).unwrap();
        let g = WindowSpec::<f64>::NormalizedGaussian.sample(&grid).unwrap();
        let engine = FftEngine::new(256);
        let moved = translate_sampled(&g, &[1.25], &engine);
        let direct = periodized_samples(&WindowSpec::NormalizedGaussian, &grid, &[1.25]);
        assert!(moved.rel_error(&direct) < 1e-10);
    }
}
