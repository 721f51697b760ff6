//! Gabor frames: analysis/synthesis maps, frame-bound estimation and the
//! canonical dual window.

use crate::error::{GaborError, Result};
use crate::fft::{forward_transform, FftEngine};
use crate::grid::{Grid, SampledField};
use crate::lattice::{Lattice, LatticePoint};
use crate::real::Real;
use crate::tf::atom;
use crate::window::WindowSpec;
use num_complex::Complex;

/// A Gabor system `{pi(lambda) g}` over an enumerated lattice, with the
/// analysis, synthesis and frame-operator maps.
///
/// On-grid separable lattices take a batched FFT path (one windowed FFT per
/// lattice position); everything else falls back to per-atom quadrature.
pub struct GaborFrame<T: Real> {
    grid: Grid<T>,
    lattice: Lattice<T>,
    points: Vec<LatticePoint<T>>,
    window: WindowSpec<T>,
    window_samples: SampledField<T>,
    fast_path: bool,
}

/// Lattice coefficients aligned with the enumerated points.
#[derive(Debug, Clone)]
pub struct CoefficientMap<T: Real> {
    pub points: Vec<LatticePoint<T>>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> CoefficientMap<T> {
    /// Coefficient at an integer lattice index.
    pub fn get(&self, index: &[i32]) -> Result<Complex<T>> {
        match self.points.binary_search_by(|p| p.index.as_slice().cmp(index)) {
            Ok(i) => Ok(self.values[i]),
            Err(_) => Err(GaborError::InvalidParameter(format!(
                "lattice index {index:?} outside the truncated enumeration"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Real> GaborFrame<T> {
    pub fn new(window: &WindowSpec<T>, lattice: &Lattice<T>, grid: &Grid<T>) -> Result<Self> {
        let points = lattice.points(grid)?;
        if points.is_empty() {
            return Err(GaborError::EmptyInput("lattice enumeration is empty".into()));
        }
        let window_samples = window.sample(grid)?;
        let fast_path = lattice.on_grid(grid);
        Ok(GaborFrame {
            grid: *grid,
            lattice: lattice.clone(),
            points,
            window: window.clone(),
            window_samples,
            fast_path,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn points(&self) -> &[LatticePoint<T>] {
        &self.points
    }

    pub fn window(&self) -> &WindowSpec<T> {
        &self.window
    }

    pub fn window_samples(&self) -> &SampledField<T> {
        &self.window_samples
    }

    /// Analysis map `f -> (<f, pi(lambda) g>)_lambda`.
    pub fn analysis(&self, f: &SampledField<T>) -> Result<CoefficientMap<T>> {
        self.analysis_with(f, &self.window_samples)
    }

    /// Analysis against an arbitrary sampled analysis window.
    pub fn analysis_with(
        &self,
        f: &SampledField<T>,
        window_samples: &SampledField<T>,
    ) -> Result<CoefficientMap<T>> {
        if f.grid() != &self.grid {
            return Err(GaborError::GridMismatch("field grid differs from frame grid".into()));
        }
        let values = if self.fast_path {
            self.analysis_fft(f, window_samples)?
        } else {
            self.analysis_direct(f)?
        };
        Ok(CoefficientMap {
            points: self.points.clone(),
            values,
        })
    }

    fn analysis_direct(&self, f: &SampledField<T>) -> Result<Vec<Complex<T>>> {
        self.points
            .iter()
            .map(|p| {
                let a = atom(&self.window, &p.z, &self.grid)?;
                f.inner(&a)
            })
            .collect()
    }

    fn analysis_fft(
        &self,
        f: &SampledField<T>,
        window_samples: &SampledField<T>,
    ) -> Result<Vec<Complex<T>>> {
        let grid = self.grid;
        let n = grid.samples_per_axis();
        let d = grid.dim();
        let engine = FftEngine::new(n);
        let (alpha, beta) = self.lattice.spacings().expect("fast path is separable");
        let mut values = vec![Complex::new(T::zero(), T::zero()); self.points.len()];

        let mut run_start = 0;
        while run_start < self.points.len() {
            let pos_index = &self.points[run_start].index[..d];
            let mut run_end = run_start;
            while run_end < self.points.len() && &self.points[run_end].index[..d] == pos_index {
                run_end += 1;
            }
            // circular shift steps per axis: x = alpha * m = s * h
            let shifts: Vec<i64> = pos_index
                .iter()
                .map(|&m| {
                    (alpha * T::from_i32(m).unwrap() / grid.spacing())
                        .round()
                        .to_i64()
                        .unwrap()
                })
                .collect();
            let mut windowed = SampledField::zeros(grid);
            for flat in 0..grid.len() {
                let multi = grid.multi_index(flat);
                let mut src = Vec::with_capacity(d);
                for a in 0..d {
                    src.push((multi[a] as i64 - shifts[a]).rem_euclid(n as i64) as usize);
                }
                windowed.values_mut()[flat] =
                    f.values()[flat] * window_samples.values()[grid.flat_index(&src)].conj();
            }
            let spec = forward_transform(&windowed, &engine);
            for i in run_start..run_end {
                let freq_index = &self.points[i].index[d..];
                let mut bin = 0usize;
                for &nk in freq_index {
                    let mult = (beta * T::from_i32(nk).unwrap() * grid.extent())
                        .round()
                        .to_i64()
                        .unwrap();
                    bin = bin * n + mult.rem_euclid(n as i64) as usize;
                }
                values[i] = spec[bin];
            }
            run_start = run_end;
        }
        Ok(values)
    }

    /// Synthesis `sum_lambda c_lambda pi(lambda) w` with a given sampled
    /// synthesis window (typically the canonical dual).
    pub fn synthesis(
        &self,
        coeffs: &[Complex<T>],
        window_samples: &SampledField<T>,
    ) -> Result<SampledField<T>> {
        if coeffs.len() != self.points.len() {
            return Err(GaborError::InvalidParameter(format!(
                "{} coefficients for {} lattice points",
                coeffs.len(),
                self.points.len()
            )));
        }
        if self.fast_path {
            self.synthesis_fft(coeffs, window_samples)
        } else {
            self.synthesis_direct(coeffs, window_samples)
        }
    }

    fn synthesis_direct(
        &self,
        coeffs: &[Complex<T>],
        window_samples: &SampledField<T>,
    ) -> Result<SampledField<T>> {
        let mut out = SampledField::zeros(self.grid);
        let spec = WindowSpec::Sampled(window_samples.clone());
        for (p, &c) in self.points.iter().zip(coeffs) {
            if c.norm_sqr() == T::zero() {
                continue;
            }
            let a = atom(&spec, &p.z, &self.grid)?;
            out.add_scaled(&a, c);
        }
        Ok(out)
    }

    fn synthesis_fft(
        &self,
        coeffs: &[Complex<T>],
        window_samples: &SampledField<T>,
    ) -> Result<SampledField<T>> {
        let grid = self.grid;
        let n = grid.samples_per_axis();
        let d = grid.dim();
        let engine = FftEngine::new(n);
        let (alpha, beta) = self.lattice.spacings().expect("fast path is separable");
        let mut out = SampledField::zeros(grid);

        let mut run_start = 0;
        while run_start < self.points.len() {
            let pos_index = &self.points[run_start].index[..d];
            let mut run_end = run_start;
            while run_end < self.points.len() && &self.points[run_end].index[..d] == pos_index {
                run_end += 1;
            }
            // spectrum of the modulation sum at this position
            let mut spec = vec![Complex::new(T::zero(), T::zero()); grid.len()];
            let mut any = false;
            for i in run_start..run_end {
                let c = coeffs[i];
                if c.norm_sqr() == T::zero() {
                    continue;
                }
                any = true;
                let freq_index = &self.points[i].index[d..];
                let mut bin = 0usize;
                let mut parity = 0i64;
                for &nk in freq_index {
                    let mult = (beta * T::from_i32(nk).unwrap() * grid.extent())
                        .round()
                        .to_i64()
                        .unwrap();
                    parity += mult;
                    bin = bin * n + mult.rem_euclid(n as i64) as usize;
                }
                // modulation phase at the left grid edge: e^{-i pi mult} per axis
                let sign = if parity.rem_euclid(2) == 0 { T::one() } else { -T::one() };
                spec[bin] += c * sign;
            }
            if any {
                crate::fft::fft_lanes(&mut spec, n, d, &engine, false);
                let shifts: Vec<i64> = pos_index
                    .iter()
                    .map(|&m| {
                        (alpha * T::from_i32(m).unwrap() / grid.spacing())
                            .round()
                            .to_i64()
                            .unwrap()
                    })
                    .collect();
                for flat in 0..grid.len() {
                    let multi = grid.multi_index(flat);
                    let mut src = Vec::with_capacity(d);
                    for a in 0..d {
                        src.push((multi[a] as i64 - shifts[a]).rem_euclid(n as i64) as usize);
                    }
                    let w = window_samples.values()[grid.flat_index(&src)];
                    out.values_mut()[flat] += spec[flat] * w;
                }
            }
            run_start = run_end;
        }
        Ok(out)
    }

    /// Frame operator `S f = sum <f, pi(lambda) g> pi(lambda) g`.
    pub fn frame_operator(&self, f: &SampledField<T>) -> Result<SampledField<T>> {
        let c = self.analysis(f)?;
        self.synthesis(&c.values, &self.window_samples)
    }
}

/// Extreme eigenvalue estimates of the discretized frame operator.
#[derive(Debug, Clone, Copy)]
pub struct FrameBounds<T: Real> {
    pub a: T,
    pub b: T,
    pub iterations: (usize, usize),
    pub converged: bool,
}

/// Power iteration on `S` for the upper bound, then on `b_upper I - S` for
/// the lower bound.
pub fn frame_bounds<T: Real>(
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    grid: &Grid<T>,
) -> Result<FrameBounds<T>> {
    let frame = GaborFrame::new(window, lattice, grid)?;
    frame_bounds_of(&frame)
}

pub fn frame_bounds_of<T: Real>(frame: &GaborFrame<T>) -> Result<FrameBounds<T>> {
    let apply_s = |f: &SampledField<T>| frame.frame_operator(f);
    let (b, it_b, conv_b) = power_iteration(frame.grid(), &apply_s, 4000)?;
    let b_upper = b * (T::one() + T::of(1e-6)) + T::of(1e-12);
    let apply_flipped = |f: &SampledField<T>| -> Result<SampledField<T>> {
        let mut sf = frame.frame_operator(f)?;
        let mut out = f.clone();
        out.scale(Complex::new(b_upper, T::zero()));
        sf.scale(Complex::new(-T::one(), T::zero()));
        out.add_scaled(&sf, Complex::new(T::one(), T::zero()));
        Ok(out)
    };
    let (mu, it_a, conv_a) = power_iteration(frame.grid(), &apply_flipped, 4000)?;
    let a = (b_upper - mu).max(T::zero());
    Ok(FrameBounds {
        a,
        b,
        iterations: (it_b, it_a),
        converged: conv_b && conv_a,
    })
}

/// Deterministic pseudo-random start vector (splitmix64 stream).
fn seeded_field<T: Real>(grid: &Grid<T>) -> SampledField<T> {
    let mut state = 0x9e3779b97f4a7c15u64 ^ (grid.len() as u64);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        // map to (-1, 1)
        (z >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    };
    let values = (0..grid.len())
        .map(|_| Complex::new(T::of(next()), T::of(next())))
        .collect();
    SampledField::new(*grid, values).expect("length matches")
}

/// Power iteration with Aitken extrapolation of the Rayleigh sequence.
///
/// Clustered extreme eigenvalues make the raw sequence converge like
/// `ratio^k` with `ratio` close to 1; the geometric limit is recovered from
/// successive differences instead of waiting the clusters out.
fn power_iteration<T: Real>(
    grid: &Grid<T>,
    apply: &dyn Fn(&SampledField<T>) -> Result<SampledField<T>>,
    max_iters: usize,
) -> Result<(T, usize, bool)> {
    let mut v = seeded_field(grid);
    let norm = v.norm();
    v.scale(Complex::new(norm.recip(), T::zero()));
    let mut history: Vec<T> = Vec::with_capacity(max_iters.min(64));
    let mut prev_extrap: Option<T> = None;
    let mut stable = 0usize;
    for it in 1..=max_iters {
        let mut w = apply(&v)?;
        let rayleigh = w.inner(&v)?.re;
        let wn = w.norm();
        if !(wn > T::zero()) {
            return Ok((T::zero(), it, true));
        }
        w.scale(Complex::new(wn.recip(), T::zero()));
        v = w;
        history.push(rayleigh);
        if history.len() > 3 {
            history.remove(0);
        }
        if history.len() == 3 {
            let d1 = history[1] - history[0];
            let d2 = history[2] - history[1];
            let denom = d2 - d1;
            // extrapolate only on a contracting geometric tail
            let extrap = if denom.abs() > T::min_positive_value() && d2 / d1 > T::zero() && d2 / d1 < T::one()
            {
                history[2] - d2 * d2 / denom
            } else {
                history[2]
            };
            if let Some(pe) = prev_extrap {
                if (extrap - pe).abs() <= T::of(1e-8) * extrap.abs().max(T::of(1e-30)) {
                    stable += 1;
                    if stable >= 3 {
                        return Ok((extrap, it, true));
                    }
                } else {
                    stable = 0;
                }
            }
            prev_extrap = Some(extrap);
        }
    }
    Ok((
        prev_extrap.unwrap_or_else(|| *history.last().unwrap()),
        max_iters,
        false,
    ))
}

/// Canonical dual window `gamma = S^{-1} g` with its achieved residual.
#[derive(Debug, Clone)]
pub struct DualWindow<T: Real> {
    pub field: SampledField<T>,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate-gradient inversion of the frame operator applied to the window.
///
/// Refuses when the estimated bounds indicate a collapsed lower bound
/// (`A <= 10^-3 B`), where the inversion is meaningless.
pub fn canonical_dual<T: Real>(
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    grid: &Grid<T>,
) -> Result<DualWindow<T>> {
    let frame = GaborFrame::new(window, lattice, grid)?;
    let bounds = frame_bounds_of(&frame)?;
    if bounds.a <= T::of(1e-3) * bounds.b {
        return Err(GaborError::NotAFrame(format!(
            "lower bound {} below 1e-3 of upper bound {}",
            bounds.a, bounds.b
        )));
    }
    canonical_dual_of(&frame)
}

pub fn canonical_dual_of<T: Real>(frame: &GaborFrame<T>) -> Result<DualWindow<T>> {
    let g = frame.window_samples().clone();
    let gnorm = g.norm();
    let tol = T::of(1e-8);
    let max_iters = 500;

    let mut x = SampledField::zeros(*frame.grid());
    let mut r = g.clone();
    let mut p = r.clone();
    let mut rs_old = r.inner(&r)?.re;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=max_iters {
        iterations = it;
        let sp = frame.frame_operator(&p)?;
        let denom = p.inner(&sp)?.re;
        if !(denom > T::zero()) {
            break;
        }
        let alpha = rs_old / denom;
        x.add_scaled(&p, Complex::new(alpha, T::zero()));
        r.add_scaled(&sp, Complex::new(-alpha, T::zero()));
        let rs_new = r.inner(&r)?.re;
        if rs_new.sqrt() <= tol * gnorm {
            converged = true;
            break;
        }
        let beta = rs_new / rs_old;
        let mut p_next = r.clone();
        p_next.add_scaled(&p, Complex::new(beta, T::zero()));
        p = p_next;
        rs_old = rs_new;
    }
    // measured residual ||S gamma - g||
    let mut sg = frame.frame_operator(&x)?;
    sg.add_scaled(&g, Complex::new(-T::one(), T::zero()));
    let residual = sg.norm();
    Ok(DualWindow {
        field: x,
        residual,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhasePoint;
    use approx::assert_abs_diff_eq;

    fn grid1() -> Grid<f64> {
        Grid::new(1, 16.0, 256).unwrap()
    }

    fn gaussian() -> WindowSpec<f64> {
        WindowSpec::NormalizedGaussian
    }

    #[test]
    fn fft_analysis_matches_direct() {
        let grid = grid1();
        let lat = Lattice::separable(1, 1.0, 0.5, 4.0).unwrap();
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let f = WindowSpec::<f64>::hermite(1).sample(&grid).unwrap();
        let fast = frame.analysis(&f).unwrap();
        let direct = frame.analysis_direct(&f).unwrap();
        for (a, b) in fast.values.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn fft_synthesis_matches_direct() {
        let grid = grid1();
        let lat = Lattice::separable(1, 1.0, 0.5, 4.0).unwrap();
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let npts = frame.points().len();
        let coeffs: Vec<Complex<f64>> = (0..npts)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.59).cos()) * 0.1)
            .collect();
        let fast = frame.synthesis(&coeffs, frame.window_samples()).unwrap();
        let direct = frame
            .synthesis_direct(&coeffs, &frame.window_samples().clone())
            .unwrap();
        assert!(fast.rel_error(&direct) < 1e-11);
    }

    #[test]
    fn coefficient_peak_at_matching_shift() {
        let grid = grid1();
        let lat = Lattice::default_for_grid(&grid);
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let mu = PhasePoint::new(vec![2.0], vec![1.5]);
        let f = atom(&gaussian(), &mu, &grid).unwrap();
        let coeffs = frame.analysis(&f).unwrap();
        let c = coeffs.get(&[2, 3]).unwrap(); // m = 2, n = 3 (beta = 1/2)
        assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-8);
        // all other coefficients stay strictly below 1
        for (p, v) in coeffs.points.iter().zip(&coeffs.values) {
            if p.index != vec![2, 3] {
                assert!(v.norm() < 0.95);
            }
        }
    }

    #[test]
    fn zero_field_gives_zero_coefficients() {
        let grid = grid1();
        let lat = Lattice::separable(1, 1.0, 0.5, 4.0).unwrap();
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let z = SampledField::zeros(grid);
        let coeffs = frame.analysis(&z).unwrap();
        assert!(coeffs.values.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn out_of_radius_lookup_errors() {
        let grid = grid1();
        let lat = Lattice::separable(1, 1.0, 0.5, 3.0).unwrap();
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let f = gaussian().sample(&grid).unwrap();
        let coeffs = frame.analysis(&f).unwrap();
        assert!(coeffs.get(&[40, 0]).is_err());
    }

    #[test]
    fn gaussian_half_density_is_a_frame() {
        let grid = grid1();
        let lat = Lattice::default_for_grid(&grid);
        let bounds = frame_bounds(&gaussian(), &lat, &grid).unwrap();
        assert!(bounds.converged);
        assert!(bounds.a > 0.1, "A = {}", bounds.a);
        assert!(bounds.b < 10.0, "B = {}", bounds.b);
        assert!(bounds.a <= bounds.b);
    }

    #[test]
    fn critical_density_collapses() {
        let grid = grid1();
        let lat = Lattice::separable(1, 1.0, 1.0, Lattice::covering_radius(&grid)).unwrap();
        let bounds = frame_bounds(&gaussian(), &lat, &grid).unwrap();
        assert!(
            bounds.a < 1e-3 * bounds.b,
            "A = {}, B = {}",
            bounds.a,
            bounds.b
        );
        assert!(canonical_dual(&gaussian(), &lat, &grid).is_err());
    }

    #[test]
    fn window_scaling_scales_bounds_quadratically() {
        let grid = grid1();
        let lat = Lattice::default_for_grid(&grid);
        let b1 = frame_bounds(&gaussian(), &lat, &grid).unwrap();
        let mut doubled = gaussian().sample(&grid).unwrap();
        doubled.scale(Complex::new(2.0, 0.0));
        let b2 = frame_bounds(&WindowSpec::Sampled(doubled), &lat, &grid).unwrap();
        assert_abs_diff_eq!(b2.b / b1.b, 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b2.a / b1.a, 4.0, epsilon = 1e-4);
    }

    #[test]
    fn tight_frame_dual_is_scaled_window() {
        // integer translates of the unit-cell indicator with integer
        // modulations form an orthonormal basis: S = I exactly
        let grid = grid1();
        let h = grid.spacing();
        let samples_per_cell = (1.0 / h).round() as usize;
        let indicator = SampledField::from_fn(grid, |x| {
            if x[0] >= 0.0 && x[0] < 1.0 {
                Complex::new(1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert_eq!(
            indicator.values().iter().filter(|v| v.norm() > 0.0).count(),
            samples_per_cell
        );
        let lat = Lattice::separable(1, 1.0, 1.0, Lattice::covering_radius(&grid)).unwrap();
        let window = WindowSpec::Sampled(indicator.clone());
        let bounds = frame_bounds(&window, &lat, &grid).unwrap();
        assert_abs_diff_eq!(bounds.a, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(bounds.b, 1.0, epsilon = 1e-9);
        let dual = canonical_dual(&window, &lat, &grid).unwrap();
        assert!(dual.converged);
        assert!(dual.field.rel_error(&indicator) < 1e-8);
    }

    #[test]
    fn dual_reconstructs_test_fields() {
        let grid = grid1();
        let lat = Lattice::default_for_grid(&grid);
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let dual = canonical_dual_of(&frame).unwrap();
        assert!(dual.converged);
        assert!(dual.residual < 1e-6);
        for k in [0usize, 1, 3] {
            let f = WindowSpec::<f64>::hermite(k).sample(&grid).unwrap();
            let coeffs = frame.analysis(&f).unwrap();
            let back = frame.synthesis(&coeffs.values, &dual.field).unwrap();
            assert!(back.rel_error(&f) < 1e-6, "hermite {k}: {}", back.rel_error(&f));
        }
    }

    #[test]
    fn dual_has_exponential_envelope() {
        let grid = grid1();
        let lat = Lattice::default_for_grid(&grid);
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let dual = canonical_dual_of(&frame).unwrap();
        // |gamma(x)| <= C e^{-c |x|} over the grid interior
        let c_at = |x: f64| -> f64 {
            let j = ((x + 8.0) / grid.spacing()).round() as usize;
            dual.field.values()[j].norm()
        };
        let peak = c_at(0.0);
        for x in [2.0, 3.0, 4.0, 5.0] {
            assert!(
                c_at(x) < peak * (-0.8 * x).exp(),
                "dual too heavy at {x}: {}",
                c_at(x)
            );
        }
    }

    #[test]
    fn wexler_raz_biorthogonality() {
        // <gamma, pi(mu) g> = alpha beta delta_mu over the adjoint lattice
        // (1/beta) Z x (1/alpha) Z
        let grid = grid1();
        let lat = Lattice::default_for_grid(&grid);
        let frame = GaborFrame::new(&gaussian(), &lat, &grid).unwrap();
        let dual = canonical_dual_of(&frame).unwrap();
        for (mm, nn) in [(0i32, 0i32), (1, 0), (0, 1), (-1, 1), (2, -1)] {
            let z = PhasePoint::new(vec![2.0 * mm as f64], vec![1.0 * nn as f64]);
            let a = atom(&gaussian(), &z, &grid).unwrap();
            let ip = dual.field.inner(&a).unwrap();
            let expected = if mm == 0 && nn == 0 { 0.5 } else { 0.0 };
            assert!(
                (ip - Complex::new(expected, 0.0)).norm() < 1e-6,
                "({mm},{nn}): {ip}"
            );
        }
    }
}
