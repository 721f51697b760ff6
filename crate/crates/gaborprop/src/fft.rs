//! Centered-grid Fourier transforms built on rustfft.
//!
//! The continuum transform `F f(xi) = \int f(t) e^{-2 pi i t xi} dt` sampled
//! on `[-L/2, L/2)` reduces to an FFT with an alternating-sign twist:
//! `F f(k/L) = h * (-1)^k * FFT[f]_k` per axis.

use crate::grid::{Grid, SampledField};
use crate::real::Real;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct FftEngine<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    len: usize,
}

impl<T: Real> FftEngine<T> {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftEngine {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn forward_in_place(&self, data: &mut [Complex<T>]) {
        self.forward.process(data);
    }

    /// Unnormalized inverse FFT.
    pub fn inverse_in_place(&self, data: &mut [Complex<T>]) {
        self.inverse.process(data);
    }
}

/// Apply a 1-d FFT along every axis of a row-major `d`-dim array.
pub(crate) fn fft_lanes<T: Real>(data: &mut [Complex<T>], n: usize, dim: usize, engine: &FftEngine<T>, forward: bool) {
    debug_assert_eq!(engine.len(), n);
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let mut lane = vec![Complex::new(T::zero(), T::zero()); n];
    for axis in 0..dim {
        // stride between consecutive entries along `axis`
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        let nblocks = data.len() / block;
        for b in 0..nblocks {
            for off in 0..stride {
                let base = b * block + off;
                if stride == 1 {
                    let slice = &mut data[base..base + n];
                    if forward {
                        engine.forward_in_place(slice);
                    } else {
                        engine.inverse_in_place(slice);
                    }
                } else {
                    for j in 0..n {
                        lane[j] = data[base + j * stride];
                    }
                    if forward {
                        engine.forward_in_place(&mut lane);
                    } else {
                        engine.inverse_in_place(&mut lane);
                    }
                    for j in 0..n {
                        data[base + j * stride] = lane[j];
                    }
                }
            }
        }
    }
}

/// Parity of the flat FFT-bin multi-index: `(-1)^(k_1 + ... + k_d)`.
fn alternate_signs<T: Real>(data: &mut [Complex<T>], n: usize, dim: usize) {
    for (flat, v) in data.iter_mut().enumerate() {
        let mut rem = flat;
        let mut parity = 0usize;
        for _ in 0..dim {
            parity += rem % n;
            rem /= n;
        }
        if parity % 2 == 1 {
            *v = -*v;
        }
    }
}

/// Samples of the continuum Fourier transform at the FFT-ordered dual grid.
///
/// Output bin `k` holds `F f` at frequency `grid.freq_at_bin(k)` per axis.
pub fn forward_transform<T: Real>(field: &SampledField<T>, engine: &FftEngine<T>) -> Vec<Complex<T>> {
    let g = field.grid();
    let n = g.samples_per_axis();
    let mut data = field.values().to_vec();
    fft_lanes(&mut data, n, g.dim(), engine, true);
    // the grid starts at -L/2, which twists bin k by (-1)^k (N even)
    alternate_signs(&mut data, n, g.dim());
    let w = g.cell_volume();
    for v in &mut data {
        *v = *v * w;
    }
    data
}

/// Inverse of [`forward_transform`]: rebuild grid samples from dual samples.
pub fn inverse_transform<T: Real>(grid: Grid<T>, spectrum: &[Complex<T>], engine: &FftEngine<T>) -> SampledField<T> {
    let n = grid.samples_per_axis();
    let mut data = spectrum.to_vec();
    alternate_signs(&mut data, n, grid.dim());
    fft_lanes(&mut data, n, grid.dim(), engine, false);
    // inverse FFT is unnormalized: total weight is (1/L)^d per axis pass
    let mut w = T::one();
    for _ in 0..grid.dim() {
        w = w * grid.freq_spacing();
    }
    for v in &mut data {
        *v = *v * w;
    }
    SampledField::new(grid, data).expect("length preserved")
}

/// Band-limited upsampling by 2 along every axis (zero-padded spectrum).
pub fn upsample2<T: Real>(field: &SampledField<T>) -> SampledField<T> {
    let g = field.grid();
    let n = g.samples_per_axis();
    let d = g.dim();
    let engine = FftEngine::new(n);
    let mut spec = field.values().to_vec();
    fft_lanes(&mut spec, n, d, &engine, true);

    let n2 = 2 * n;
    let fine = Grid::new(d, g.extent(), n2).expect("doubled grid valid");
    let mut padded = vec![Complex::new(T::zero(), T::zero()); fine.len()];
    // per axis: bin k -> k (low half), k + n (high half); the Nyquist bin
    // n/2 splits evenly between +n/2 and -n/2 so interpolation stays exact
    let half = T::of(0.5);
    for flat in 0..spec.len() {
        let mut rem = flat;
        let mut multi = vec![0usize; d];
        for a in (0..d).rev() {
            multi[a] = rem % n;
            rem /= n;
        }
        let mut targets: Vec<(usize, T)> = vec![(0, T::one())];
        for a in 0..d {
            let k = multi[a];
            let choices: Vec<(usize, T)> = if k < n / 2 {
                vec![(k, T::one())]
            } else if k > n / 2 {
                vec![(k + n, T::one())]
            } else {
                vec![(n / 2, half), (n / 2 + n, half)]
            };
            let mut next = Vec::with_capacity(targets.len() * choices.len());
            for &(t, wt) in &targets {
                for &(k2, w2) in &choices {
                    next.push((t * n2 + k2, wt * w2));
                }
            }
            targets = next;
        }
        for (t, wt) in targets {
            padded[t] = spec[flat] * wt;
        }
    }
    let engine2 = FftEngine::new(n2);
    fft_lanes(&mut padded, n2, d, &engine2, false);
    let scale = T::one() / T::from_usize(n).unwrap();
    let mut total = T::one();
    for _ in 0..d {
        total = total * scale;
    }
    for v in &mut padded {
        *v = *v * total;
    }
    SampledField::new(fine, padded).expect("length matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian_field(grid: Grid<f64>) -> SampledField<f64> {
        SampledField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|&v| v * v).sum();
            Complex::new(2f64.powf(grid.dim() as f64 / 4.0) * (-std::f64::consts::PI * r2).exp(), 0.0)
        })
    }

    #[test]
    fn gaussian_is_self_dual() {
        let grid = Grid::<f64>::new(1, 16.0, 256).unwrap();
        let g = gaussian_field(grid);
        let engine = FftEngine::new(256);
        let spec = forward_transform(&g, &engine);
        for k in 0..256 {
            let xi = grid.freq_at_bin(k);
            let expected = 2f64.powf(0.25) * (-std::f64::consts::PI * xi * xi).exp();
            assert_abs_diff_eq!(spec[k].re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(spec[k].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_inverse_round_trip() {
        let grid = Grid::<f64>::new(2, 12.0, 16).unwrap();
        let f = SampledField::from_fn(grid, |x| Complex::new((x[0] * 0.3).sin(), (x[1] * 0.2).cos()));
        let engine = FftEngine::new(16);
        let spec = forward_transform(&f, &engine);
        let back = inverse_transform(grid, &spec, &engine);
        assert!(back.rel_error(&f) < 1e-13);
    }

    #[test]
    fn upsample_preserves_band_limited_values() {
        let grid = Grid::<f64>::new(1, 16.0, 128).unwrap();
        let f = gaussian_field(grid);
        let fine = upsample2(&f);
        // even fine samples coincide with the original samples
        for j in 0..128 {
            let c = f.values()[j];
            let u = fine.values()[2 * j];
            assert_abs_diff_eq!(c.re, u.re, epsilon = 1e-12);
        }
        // odd fine samples interpolate the Gaussian
        let gf = fine.grid().clone();
        for j in [1usize, 63, 129, 255] {
            let x = gf.position(j);
            let expected = 2f64.powf(0.25) * (-std::f64::consts::PI * x * x).exp();
            assert_abs_diff_eq!(fine.values()[j].re, expected, epsilon = 1e-10);
        }
    }
}
