//! Sampled time-frequency analysis: time-frequency shifts, STFT, Wigner
//! distribution, STFT inversion and modulation norms.

use crate::error::{GaborError, Result};
use crate::fft::{forward_transform, FftEngine};
use crate::grid::{Grid, PhasePoint, SampledField};
use crate::real::Real;
use crate::window::{periodized_samples, translate_sampled, WindowSpec};
use num_complex::Complex;

/// Samples of the time-frequency shift `pi(z) g = M_xi T_x g`, periodized on
/// the grid torus. No range checks; see [`tf_shift`] for the public contract.
pub fn atom<T: Real>(window: &WindowSpec<T>, z: &PhasePoint<T>, grid: &Grid<T>) -> Result<SampledField<T>> {
    let translated = match window {
        WindowSpec::Sampled(f) => {
            if f.grid() != grid {
                return Err(GaborError::GridMismatch("window sampled on a different grid".into()));
            }
            let engine = FftEngine::new(grid.samples_per_axis());
            translate_sampled(f, &z.x, &engine)
        }
        _ => periodized_samples(window, grid, &z.x),
    };
    let mut out = translated;
    modulate_in_place(&mut out, &z.xi);
    Ok(out)
}

fn modulate_in_place<T: Real>(field: &mut SampledField<T>, xi: &[T]) {
    if xi.iter().all(|&v| v == T::zero()) {
        return;
    }
    let grid = *field.grid();
    for (flat, v) in field.values_mut().iter_mut().enumerate() {
        let x = grid.position_of(flat);
        let phase: T = x.iter().zip(xi).map(|(&a, &b)| a * b).fold(T::zero(), |s, p| s + p);
        *v = *v * Complex::from_polar(T::one(), T::two_pi() * phase);
    }
}

/// Time-frequency shift with range checking.
///
/// Rejects shifts that push the window mass across the box boundary or the
/// frequency band edge, where wrap-around would corrupt the decay.
pub fn tf_shift<T: Real>(window: &WindowSpec<T>, z: &PhasePoint<T>, grid: &Grid<T>) -> Result<SampledField<T>> {
    if z.dim() != grid.dim() {
        return Err(GaborError::GridMismatch("phase point dimension differs from grid".into()));
    }
    if window.has_closed_form() {
        let margin = window.margin(grid);
        let half = grid.extent() / T::of(2.0);
        let xmax = z.x.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        let ximax = z.xi.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        if xmax > half - margin {
            return Err(GaborError::ShiftOutOfRange(format!(
                "|x| = {xmax} exceeds L/2 - margin = {}",
                half - margin
            )));
        }
        if ximax > grid.nyquist() - margin {
            return Err(GaborError::ShiftOutOfRange(format!(
                "|xi| = {ximax} exceeds Nyquist - margin = {}",
                grid.nyquist() - margin
            )));
        }
    }
    atom(window, z, grid)
}

/// STFT values `V_g f(z) = <f, pi(z) g>` at the requested phase points.
pub fn stft<T: Real>(
    f: &SampledField<T>,
    window: &WindowSpec<T>,
    points: &[PhasePoint<T>],
) -> Result<Vec<Complex<T>>> {
    if let WindowSpec::Sampled(w) = window {
        if w.grid() != f.grid() {
            return Err(GaborError::GridMismatch("field and window grids differ".into()));
        }
    }
    points
        .iter()
        .map(|z| {
            let a = atom(window, z, f.grid())?;
            f.inner(&a)
        })
        .collect()
}

/// Rectangular table of phase-space samples: positions `x_start + i*x_step`
/// and frequencies `xi_start + k*xi_step` per axis, values row-major with all
/// position axes before all frequency axes.
#[derive(Debug, Clone)]
pub struct PhaseTable<T: Real> {
    pub dim: usize,
    pub x_start: T,
    pub x_step: T,
    pub x_count: usize,
    pub xi_start: T,
    pub xi_step: T,
    pub xi_count: usize,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> PhaseTable<T> {
    pub fn x_at(&self, i: usize) -> T {
        self.x_start + T::from_usize(i).unwrap() * self.x_step
    }

    pub fn xi_at(&self, k: usize) -> T {
        self.xi_start + T::from_usize(k).unwrap() * self.xi_step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index from per-axis position indices then frequency indices.
    pub fn index(&self, xidx: &[usize], kidx: &[usize]) -> usize {
        let mut flat = 0usize;
        for &i in xidx {
            flat = flat * self.x_count + i;
        }
        for &k in kidx {
            flat = flat * self.xi_count + k;
        }
        flat
    }

    /// Phase-space cell volume `(dx * dxi)^d`.
    pub fn cell_volume(&self) -> T {
        let mut v = T::one();
        for _ in 0..self.dim {
            v = v * self.x_step * self.xi_step;
        }
        v
    }
}

/// STFT sampled over a strided phase grid, by a windowed FFT per position.
///
/// `x_stride` subsamples the spatial grid, `xi_stride` the frequency grid.
pub fn stft_table<T: Real>(
    f: &SampledField<T>,
    window: &WindowSpec<T>,
    x_stride: usize,
    xi_stride: usize,
) -> Result<PhaseTable<T>> {
    let grid = *f.grid();
    let n = grid.samples_per_axis();
    if x_stride == 0 || xi_stride == 0 || n % x_stride != 0 || n % xi_stride != 0 {
        return Err(GaborError::InvalidParameter("strides must divide the grid size".into()));
    }
    let d = grid.dim();
    let engine = FftEngine::new(n);
    let xc = n / x_stride;
    let kc = n / xi_stride;
    let window_samples = window.sample(&grid)?;

    let mut table = PhaseTable {
        dim: d,
        x_start: grid.position(0),
        x_step: grid.spacing() * T::from_usize(x_stride).unwrap(),
        x_count: xc,
        xi_start: -grid.nyquist(),
        xi_step: grid.freq_spacing() * T::from_usize(xi_stride).unwrap(),
        xi_count: kc,
        values: vec![Complex::new(T::zero(), T::zero()); xc.pow(d as u32) * kc.pow(d as u32)],
    };

    let mut xidx = vec![0usize; d];
    let mut windowed = SampledField::zeros(grid);
    loop {
        // shift the window to x by whole grid steps (exact circular shift);
        // the window samples are centered at index n/2, positions start at -L/2
        let shift_steps: Vec<usize> = xidx.iter().map(|&i| (i * x_stride + n / 2) % n).collect();
        {
            let src = window_samples.values();
            let dst = windowed.values_mut();
            for flat in 0..dst.len() {
                let multi = grid.multi_index(flat);
                let mut srcidx = Vec::with_capacity(d);
                for a in 0..d {
                    // y = x_flat - x_center; positions wrap on the torus
                    srcidx.push((multi[a] + n - shift_steps[a] % n) % n);
                }
                dst[flat] = f.values()[flat] * src[grid.flat_index(&srcidx)].conj();
            }
        }
        let spec = forward_transform(&windowed, &engine);
        // reorder FFT bins into centered order, subsampled
        let mut kidx = vec![0usize; d];
        loop {
            let mut bin = 0usize;
            for a in 0..d {
                let centered = kidx[a] * xi_stride; // 0..n
                let k = (centered + n / 2) % n; // centered -> fft order
                bin = bin * n + k;
            }
            let flat = table.index(&xidx, &kidx);
            table.values[flat] = spec[bin];
            if !odometer(&mut kidx, kc) {
                break;
            }
        }
        if !odometer(&mut xidx, xc) {
            break;
        }
    }
    Ok(table)
}

fn odometer(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Result of [`stft_invert`]: the reconstruction plus a quality estimate.
#[derive(Debug, Clone)]
pub struct InversionResult<T: Real> {
    pub field: SampledField<T>,
    /// Round-trip residual of the window itself through the same phase grid.
    pub window_round_trip: T,
    /// Set when the phase-grid density is below the reliable regime.
    pub undersampled: bool,
}

/// Inversion formula `f = \int\int V(x, xi) M_xi T_x g dx dxi` by quadrature
/// over the table's phase grid (window must have unit norm).
pub fn stft_invert<T: Real>(
    table: &PhaseTable<T>,
    window: &WindowSpec<T>,
    grid: &Grid<T>,
) -> Result<InversionResult<T>> {
    let d = table.dim;
    if d != grid.dim() {
        return Err(GaborError::GridMismatch("table and grid dimensions differ".into()));
    }
    // density 4 per unit cell keeps the Riemann sum within the budget
    let density = (table.x_step * table.xi_step).recip();
    let undersampled = density < T::of(4.0) - T::of(1e-9);

    let field = synthesize(table, window, grid)?;

    // quality: run the window through the same analysis/synthesis chain
    let g_field = window.sample(grid)?;
    let x_stride = (table.x_step / grid.spacing()).round().to_usize().unwrap_or(1).max(1);
    let xi_stride = (table.xi_step / grid.freq_spacing()).round().to_usize().unwrap_or(1).max(1);
    let gtab = stft_table(&g_field, window, x_stride, xi_stride)?;
    let gback = synthesize(&gtab, window, grid)?;
    let window_round_trip = gback.rel_error(&g_field);

    Ok(InversionResult {
        field,
        window_round_trip,
        undersampled,
    })
}

fn synthesize<T: Real>(table: &PhaseTable<T>, window: &WindowSpec<T>, grid: &Grid<T>) -> Result<SampledField<T>> {
    let d = table.dim;
    let weight = table.cell_volume();
    let mut out = SampledField::zeros(*grid);
    let mut xidx = vec![0usize; d];
    loop {
        let x: Vec<T> = xidx.iter().map(|&i| table.x_at(i)).collect();
        // accumulate sum_k V(x, xi_k) e^{2 pi i xi_k t} into one envelope per x
        let mut kidx = vec![0usize; d];
        let mut any = false;
        let mut modsum = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        loop {
            let v = table.values[table.index(&xidx, &kidx)];
            if v.norm_sqr() > T::zero() {
                any = true;
                let xi: Vec<T> = kidx.iter().map(|&k| table.xi_at(k)).collect();
                for (flat, slot) in modsum.iter_mut().enumerate() {
                    let t = grid.position_of(flat);
                    let phase: T = t.iter().zip(&xi).map(|(&a, &b)| a * b).fold(T::zero(), |s, p| s + p);
                    *slot += v * Complex::from_polar(T::one(), T::two_pi() * phase);
                }
            }
            if !odometer(&mut kidx, table.xi_count) {
                break;
            }
        }
        if any {
            let translated = match window {
                WindowSpec::Sampled(f) => {
                    let engine = FftEngine::new(grid.samples_per_axis());
                    translate_sampled(f, &x, &engine)
                }
                _ => periodized_samples(window, grid, &x),
            };
            for (slot, (m, g)) in out
                .values_mut()
                .iter_mut()
                .zip(modsum.iter().zip(translated.values()))
            {
                *slot += m * g * weight;
            }
        }
        if !odometer(&mut xidx, table.x_count) {
            break;
        }
    }
    Ok(out)
}

/// Cross-Wigner distribution `W(f, g)` on the phase grid.
///
/// Half-sample points `f(x +- t/2)` come from exact band-limited upsampling;
/// the output frequency axis is the conjugate of the doubled lag grid, with
/// spacing `1/(2L)` and `2N` bins per axis.
pub fn wigner<T: Real>(f: &SampledField<T>, g: &SampledField<T>) -> Result<PhaseTable<T>> {
    if f.grid() != g.grid() {
        return Err(GaborError::GridMismatch("wigner needs a common grid".into()));
    }
    let grid = *f.grid();
    let d = grid.dim();
    let n = grid.samples_per_axis();
    let n2 = 2 * n;
    let f2 = crate::fft::upsample2(f);
    let g2 = crate::fft::upsample2(g);
    let fine = *f2.grid();
    let engine = FftEngine::new(n2);

    let mut table = PhaseTable {
        dim: d,
        x_start: grid.position(0),
        x_step: grid.spacing(),
        x_count: n,
        xi_start: -T::from_usize(n2 / 2).unwrap() / (T::of(2.0) * grid.extent()),
        xi_step: (T::of(2.0) * grid.extent()).recip(),
        xi_count: n2,
        values: vec![Complex::new(T::zero(), T::zero()); n.pow(d as u32) * n2.pow(d as u32)],
    };

    let h = grid.spacing();
    let mut xidx = vec![0usize; d];
    let mut lag = vec![Complex::new(T::zero(), T::zero()); n2.pow(d as u32)];
    loop {
        // x = grid point with fine index 2 j; t = k h, fine offset k per axis
        let mut kidx = vec![0usize; d];
        loop {
            let mut fidx = Vec::with_capacity(d);
            let mut gidx = Vec::with_capacity(d);
            for a in 0..d {
                let base = 2 * xidx[a];
                // k in fft-style signed order: 0..n is +, n..2n wraps negative
                let k = kidx[a];
                let ks = if k < n2 / 2 { k as isize } else { k as isize - n2 as isize };
                let fi = (base as isize + ks).rem_euclid(n2 as isize) as usize;
                let gi = (base as isize - ks).rem_euclid(n2 as isize) as usize;
                fidx.push(fi);
                gidx.push(gi);
            }
            let mut flat = 0usize;
            for &k in &kidx {
                flat = flat * n2 + k;
            }
            lag[flat] = f2.values()[fine.flat_index(&fidx)] * g2.values()[fine.flat_index(&gidx)].conj();
            if !odometer(&mut kidx, n2) {
                break;
            }
        }
        // FFT over the lag variable with weight h per axis: t = k h
        crate::fft::fft_lanes(&mut lag, n2, d, &engine, true);
        let mut weight = T::one();
        for _ in 0..d {
            weight = weight * h;
        }
        // write centered-order spectrum into the table
        let mut kidx2 = vec![0usize; d];
        loop {
            let mut bin = 0usize;
            for a in 0..d {
                let k = (kidx2[a] + n2 / 2) % n2;
                bin = bin * n2 + k;
            }
            let flat = table.index(&xidx, &kidx2);
            table.values[flat] = lag[bin] * weight;
            if !odometer(&mut kidx2, n2) {
                break;
            }
        }
        if !odometer(&mut xidx, n) {
            break;
        }
    }
    Ok(table)
}

/// Mixed-norm quadrature of `|V_g f| * m` over the phase grid: inner exponent
/// `p` in position, outer `q` in frequency. `p, q` in `[1, inf]`.
pub fn modulation_norm<T: Real>(
    f: &SampledField<T>,
    window: &WindowSpec<T>,
    p: T,
    q: T,
    weight: impl Fn(&[T], &[T]) -> T,
    x_stride: usize,
    xi_stride: usize,
) -> Result<T> {
    if p < T::one() || q < T::one() || p.is_nan() || q.is_nan() {
        return Err(GaborError::InvalidParameter("p and q must lie in [1, inf]".into()));
    }
    let table = stft_table(f, window, x_stride, xi_stride)?;
    let d = table.dim;
    let mut dx = T::one();
    let mut dxi = T::one();
    for _ in 0..d {
        dx = dx * table.x_step;
        dxi = dxi * table.xi_step;
    }

    // iterate frequency-major: for each xi multi-index, reduce over x
    let mut outer_acc = T::zero();
    let mut outer_max = T::zero();
    let mut kidx = vec![0usize; d];
    loop {
        let xi: Vec<T> = kidx.iter().map(|&k| table.xi_at(k)).collect();
        let mut inner_acc = T::zero();
        let mut inner_max = T::zero();
        let mut xidx = vec![0usize; d];
        loop {
            let x: Vec<T> = xidx.iter().map(|&i| table.x_at(i)).collect();
            let v = table.values[table.index(&xidx, &kidx)].norm() * weight(&x, &xi);
            if p.is_infinite() {
                inner_max = inner_max.max(v);
            } else {
                inner_acc = inner_acc + v.powf(p);
            }
            if !odometer(&mut xidx, table.x_count) {
                break;
            }
        }
        let inner = if p.is_infinite() {
            inner_max
        } else {
            (inner_acc * dx).powf(p.recip())
        };
        if q.is_infinite() {
            outer_max = outer_max.max(inner);
        } else {
            outer_acc = outer_acc + inner.powf(q);
        }
        if !odometer(&mut kidx, table.xi_count) {
            break;
        }
    }
    Ok(if q.is_infinite() {
        outer_max
    } else {
        (outer_acc * dxi).powf(q.recip())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid1() -> Grid<f64> {
        Grid::new(1, 16.0, 256).unwrap()
    }

    fn gaussian() -> WindowSpec<f64> {
        WindowSpec::NormalizedGaussian
    }

    #[test]
    fn identity_shift_returns_window() {
        let grid = grid1();
        let z = PhasePoint::origin(1);
        let shifted = tf_shift(&gaussian(), &z, &grid).unwrap();
        let direct = gaussian().sample(&grid).unwrap();
        assert!(shifted.rel_error(&direct) < 1e-14);
    }

    #[test]
    fn pure_translation_matches_closed_form() {
        let grid = grid1();
        let z = PhasePoint::new(vec![1.0], vec![0.0]);
        let shifted = tf_shift(&gaussian(), &z, &grid).unwrap();
        for j in (0..256).step_by(13) {
            let t = grid.position(j);
            let expected = 2f64.powf(0.25) * (-PI * (t - 1.0) * (t - 1.0)).exp();
            assert_abs_diff_eq!(shifted.values()[j].re, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_preserves_norm() {
        let grid = grid1();
        let z = PhasePoint::new(vec![0.5], vec![2.0]);
        let shifted = tf_shift(&gaussian(), &z, &grid).unwrap();
        assert_abs_diff_eq!(shifted.norm(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn shift_out_of_range_is_rejected() {
        let grid = grid1();
        let z = PhasePoint::new(vec![7.5], vec![0.0]);
        assert!(matches!(
            tf_shift(&gaussian(), &z, &grid),
            Err(GaborError::ShiftOutOfRange(_))
        ));
    }

    #[test]
    fn stft_at_origin_is_one() {
        let grid = grid1();
        let f = gaussian().sample(&grid).unwrap();
        let v = stft(&f, &gaussian(), &[PhasePoint::origin(1)]).unwrap();
        assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_ambiguity_magnitude() {
        // |V_g g(z)| = e^{-pi |z|^2 / 2}; at |z|^2 = 2 this is e^{-pi}
        let grid = grid1();
        let f = gaussian().sample(&grid).unwrap();
        let z = PhasePoint::new(vec![1.0], vec![1.0]);
        let v = stft(&f, &gaussian(), &[z]).unwrap();
        assert_abs_diff_eq!(v[0].norm(), (-PI).exp(), epsilon = 1e-8);
    }

    #[test]
    fn covariance_magnitude() {
        // |V_g(pi(w) f)(z)| = |V_g f(z - w)|
        let grid = grid1();
        let f = WindowSpec::<f64>::hermite(1).sample(&grid).unwrap();
        let w = PhasePoint::new(vec![1.0], vec![0.5]);
        let f_window = WindowSpec::Sampled(f.clone());
        let shifted = atom(&f_window, &w, &grid).unwrap();
        let zs: Vec<PhasePoint<f64>> = vec![
            PhasePoint::new(vec![0.5], vec![0.25]),
            PhasePoint::new(vec![2.0], vec![1.0]),
            PhasePoint::new(vec![-1.0], vec![0.75]),
        ];
        let lhs = stft(&shifted, &gaussian(), &zs).unwrap();
        let zshift: Vec<PhasePoint<f64>> = zs.iter().map(|z| z.sub(&w)).collect();
        let rhs = stft(&f, &gaussian(), &zshift).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-8);
        }
    }

    #[test]
    fn empty_point_list_is_empty() {
        let grid = grid1();
        let f = gaussian().sample(&grid).unwrap();
        assert!(stft(&f, &gaussian(), &[]).unwrap().is_empty());
    }

    #[test]
    fn wigner_gaussian_peak_value() {
        // W(g, g)(x, xi) = 2^d e^{-2 pi (x^2 + xi^2)}; at the origin 2^d
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        let w = wigner(&g, &g).unwrap();
        let flat = w.index(&[128], &[256]); // x = 0, xi = 0
        assert_abs_diff_eq!(w.values[flat].re, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(w.values[flat].im, 0.0, epsilon = 1e-10);
        // independent quadrature oracle at a nonzero point
        let (xj, kj) = (136usize, 264usize);
        let x = w.x_at(xj);
        let xi = w.xi_at(kj);
        let mut oracle = Complex::new(0.0, 0.0);
        let m = 4096usize;
        let dt = 24.0 / m as f64;
        for i in 0..m {
            let t = -12.0 + (i as f64 + 0.5) * dt;
            let fv = 2f64.powf(0.25) * (-PI * (x + t / 2.0) * (x + t / 2.0)).exp();
            let gv = 2f64.powf(0.25) * (-PI * (x - t / 2.0) * (x - t / 2.0)).exp();
            oracle += Complex::from_polar(fv * gv * dt, -2.0 * PI * t * xi);
        }
        assert_abs_diff_eq!(w.values[w.index(&[xj], &[kj])].re, oracle.re, epsilon = 1e-8);
        assert_abs_diff_eq!(w.values[w.index(&[xj], &[kj])].im, oracle.im, epsilon = 1e-8);
    }

    #[test]
    fn wigner_odd_even_vanishes_at_origin() {
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        let h1 = WindowSpec::<f64>::hermite(1).sample(&grid).unwrap();
        let w = wigner(&h1, &g).unwrap();
        assert!(w.values[w.index(&[128], &[256])].norm() < 1e-10);
    }

    #[test]
    fn wigner_stft_magnitude_identity() {
        // |W(f, g)(x, xi)| = 2^d |V_[g(-.)] f(2x, 2xi)|
        let grid = grid1();
        let f = WindowSpec::<f64>::hermite(2).sample(&grid).unwrap();
        let g = gaussian().sample(&grid).unwrap();
        let w = wigner(&f, &g).unwrap();
        // g is even, so the reflected window is g itself
        let mut worst = 0.0f64;
        for (xj, kj) in [(128usize, 256usize), (136, 272), (120, 248), (144, 256), (128, 280)] {
            let x = w.x_at(xj);
            let xi = w.xi_at(kj);
            let v = stft(&f, &gaussian(), &[PhasePoint::new(vec![2.0 * x], vec![2.0 * xi])]).unwrap();
            let lhs = w.values[w.index(&[xj], &[kj])].norm();
            let rhs = 2.0 * v[0].norm();
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(worst < 1e-6, "max deviation {worst}");
    }

    #[test]
    fn wigner_grid_mismatch_errors() {
        let g1 = gaussian().sample(&grid1()).unwrap();
        let other = Grid::new(1, 16.0, 128).unwrap();
        let g2 = gaussian().sample(&other).unwrap();
        assert!(wigner(&g1, &g2).is_err());
    }

    #[test]
    fn inversion_round_trip_window() {
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        let table = stft_table(&g, &gaussian(), 4, 4).unwrap();
        let inv = stft_invert(&table, &gaussian(), &grid).unwrap();
        assert!(!inv.undersampled);
        assert!(inv.field.rel_error(&g) < 1e-6, "error {}", inv.field.rel_error(&g));
    }

    #[test]
    fn inversion_round_trip_hermite() {
        let grid = grid1();
        let f = WindowSpec::<f64>::hermite(1).sample(&grid).unwrap();
        let table = stft_table(&f, &gaussian(), 4, 4).unwrap();
        let inv = stft_invert(&table, &gaussian(), &grid).unwrap();
        assert!(inv.field.rel_error(&f) < 1e-6);
    }

    #[test]
    fn inversion_of_zero_is_zero() {
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        let mut table = stft_table(&g, &gaussian(), 4, 4).unwrap();
        for v in &mut table.values {
            *v = Complex::new(0.0, 0.0);
        }
        let inv = stft_invert(&table, &gaussian(), &grid).unwrap();
        assert!(inv.field.norm() < 1e-14);
    }

    #[test]
    fn undersampled_grid_is_flagged() {
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        let table = stft_table(&g, &gaussian(), 32, 32).unwrap();
        let inv = stft_invert(&table, &gaussian(), &grid).unwrap();
        assert!(inv.undersampled);
    }

    #[test]
    fn moyal_identity() {
        let grid = grid1();
        let f = WindowSpec::<f64>::hermite_superposition(vec![0.6, 0.0, 0.8])
            .unwrap()
            .sample(&grid)
            .unwrap();
        let m = modulation_norm(&f, &gaussian(), 2.0, 2.0, |_, _| 1.0, 4, 4).unwrap();
        assert_abs_diff_eq!(m, f.norm(), epsilon = 1e-6);
    }

    #[test]
    fn modulation_norm_of_zero() {
        let grid = grid1();
        let z = SampledField::zeros(grid);
        let m = modulation_norm(&z, &gaussian(), 1.0, 1.0, |_, _| 1.0, 4, 4).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn sup_norm_of_window_is_one() {
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        let m = modulation_norm(&g, &gaussian(), f64::INFINITY, f64::INFINITY, |_, _| 1.0, 4, 4).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn invalid_exponents_rejected() {
        let grid = grid1();
        let g = gaussian().sample(&grid).unwrap();
        assert!(modulation_norm(&g, &gaussian(), 0.5, 2.0, |_, _| 1.0, 4, 4).is_err());
    }
}
