//! Gabor matrices `<T pi(mu) g, pi(lambda) g>` of Fourier multipliers and
//! Weyl operators, assembled by independent routes.

use crate::error::{GaborError, Result};
use crate::fft::{forward_transform, FftEngine};
use crate::grid::{Grid, PhasePoint, SampledField};
use crate::lattice::{Lattice, LatticePoint};
use crate::real::Real;
use crate::symbols::PropagatorSymbol;
use crate::tf::atom;
use crate::window::WindowSpec;
use num_complex::Complex;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// How a matrix was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssemblyMethod {
    Multiplier,
    Direct,
    WeylMagnitude,
}

impl AssemblyMethod {
    pub fn tag(self) -> u8 {
        match self {
            AssemblyMethod::Multiplier => 0,
            AssemblyMethod::Direct => 1,
            AssemblyMethod::WeylMagnitude => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(AssemblyMethod::Multiplier),
            1 => Ok(AssemblyMethod::Direct),
            2 => Ok(AssemblyMethod::WeylMagnitude),
            _ => Err(GaborError::Format(format!("unknown assembly method tag {tag}"))),
        }
    }
}

/// Assembly parameters: pruning plus the frequency-domain quadrature.
#[derive(Debug, Clone)]
pub struct MatrixAssemblyConfig<T: Real> {
    pub grid: Grid<T>,
    /// Entries with magnitude below this are dropped (0 keeps everything).
    pub drop_threshold: T,
    /// Optional cutoff on the phase-space offset `|lambda - mu|`.
    pub band_radius: Option<T>,
    /// Quadrature spacing divisor: spacing is `1 / (divisor * L)`.
    pub quad_divisor: usize,
    /// Wrap position offsets onto the grid torus (matches the discretized
    /// operator exactly; leave off when measuring decay against offsets).
    pub periodize: bool,
}

impl<T: Real> MatrixAssemblyConfig<T> {
    pub fn for_grid(grid: &Grid<T>) -> Self {
        MatrixAssemblyConfig {
            grid: *grid,
            drop_threshold: T::of(1e-14),
            band_radius: None,
            quad_divisor: 2,
            periodize: false,
        }
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.drop_threshold = threshold;
        self
    }

    pub fn with_band_radius(mut self, radius: T) -> Self {
        self.band_radius = Some(radius);
        self
    }

    pub fn periodized(mut self) -> Self {
        self.periodize = true;
        self
    }
}

/// Sparse Gabor matrix over an enumerated lattice.
#[derive(Debug, Clone)]
pub struct GaborMatrix<T: Real> {
    pub lattice: Lattice<T>,
    pub points: Vec<LatticePoint<T>>,
    /// `(lambda_index, mu_index) -> entry`, indices into `points`.
    pub entries: BTreeMap<(u32, u32), Complex<T>>,
    pub method: AssemblyMethod,
    pub threshold: T,
}

impl<T: Real> GaborMatrix<T> {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, lambda: u32, mu: u32) -> Option<Complex<T>> {
        self.entries.get(&(lambda, mu)).copied()
    }

    pub fn max_magnitude(&self) -> T {
        self.entries
            .values()
            .fold(T::zero(), |a, v| a.max(v.norm()))
    }

    /// Entries of one column, unsorted.
    pub fn column(&self, mu: u32) -> Vec<(u32, Complex<T>)> {
        self.entries
            .iter()
            .filter(|&(&(_, m), _)| m == mu)
            .map(|(&(l, _), &v)| (l, v))
            .collect()
    }

    /// `y = M c` over the coefficient vector aligned with `points`.
    pub fn apply(&self, coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if coeffs.len() != self.points.len() {
            return Err(GaborError::InvalidParameter(format!(
                "{} coefficients for {} lattice points",
                coeffs.len(),
                self.points.len()
            )));
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); coeffs.len()];
        for (&(l, m), &v) in &self.entries {
            out[l as usize] += v * coeffs[m as usize];
        }
        Ok(out)
    }

    /// Offsets `z_lambda - z_mu` and magnitudes of all stored entries.
    pub fn offset_magnitudes(&self) -> Vec<(T, T)> {
        self.entries
            .iter()
            .map(|(&(l, m), v)| {
                let d = self.points[l as usize].z.sub(&self.points[m as usize].z);
                (d.norm(), v.norm())
            })
            .collect()
    }
}

impl<T: Real> GaborMatrix<T> {
    pub fn column_magnitudes(&self, mu: u32) -> Vec<T> {
        self.column(mu).into_iter().map(|(_, v)| v.norm()).collect()
    }
}

/// Matrix of a Fourier multiplier `sigma(D)` by frequency-domain quadrature
/// with the window's closed-form transform.
///
/// Entries `<sigma(D) pi(mu) g, pi(lambda) g>` reduce to
/// `phase * J(Delta x; xi_lambda, xi_mu)` with
/// `J = \int sigma(xi) ghat(xi - xi_mu) conj(ghat(xi - xi_lambda))
///      e^{2 pi i Delta x xi} d xi`,
/// evaluated for all position offsets at once by an FFT over the quadrature
/// grid, one transform per frequency pair.
pub fn multiplier_matrix<T: Real>(
    sym: &PropagatorSymbol<T>,
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    cfg: &MatrixAssemblyConfig<T>,
) -> Result<GaborMatrix<T>> {
    multiplier_matrix_fn(|xi| sym.eval(xi), window, lattice, cfg)
}

/// Same assembly for an arbitrary multiplier symbol.
pub fn multiplier_matrix_fn<T: Real>(
    symbol: impl Fn(&[T]) -> Result<Complex<T>> + Sync,
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    cfg: &MatrixAssemblyConfig<T>,
) -> Result<GaborMatrix<T>> {
    if cfg.periodize {
        // the discretized operator lives on the grid torus; its matrix comes
        // from the discrete frequency domain, wrap couplings included
        return discrete_multiplier_matrix(symbol, window, lattice, cfg);
    }
    if !window.has_closed_form() {
        return Err(GaborError::InvalidParameter(
            "multiplier assembly needs a window with a closed-form transform".into(),
        ));
    }
    if lattice.spacings().is_none() {
        return Err(GaborError::LatticeMismatch(
            "multiplier assembly requires a separable lattice; use direct_matrix otherwise".into(),
        ));
    }
    let grid = cfg.grid;
    let d = grid.dim();
    let points = lattice.points(&grid)?;
    let max_freq = points
        .iter()
        .flat_map(|p| p.z.xi.iter())
        .fold(T::zero(), |a, &v| a.max(v.abs()));
    if max_freq > grid.nyquist() {
        return Err(GaborError::LatticeMismatch(format!(
            "lattice frequency extent {max_freq} beyond grid Nyquist {}",
            grid.nyquist()
        )));
    }

    // quadrature grid: spacing 1/(divisor L); its Delta-x period (divisor L)
    // must exceed twice the largest offset plus decay margin
    let el = grid.extent();
    let margin = window.margin(&grid) + T::one();
    let max_offset = T::of(2.0) * lattice.truncation_radius.min(Lattice::covering_radius(&grid));
    let mut divisor = cfg.quad_divisor.max(1);
    while T::from_usize(divisor).unwrap() * el < T::of(2.0) * max_offset + T::of(6.0) {
        divisor += 1;
    }
    let delta = (T::from_usize(divisor).unwrap() * el).recip();
    let extent = max_freq + margin;
    let mut m_samples = ((T::of(2.0) * extent) / delta).ceil().to_usize().unwrap();
    // offset bins are Delta x_j = j/(M delta): alpha lands on a bin exactly
    // when M is a multiple of divisor*L/alpha
    if let Some((alpha, _)) = lattice.spacings() {
        let u = T::from_usize(divisor).unwrap() * el / alpha;
        if (u - u.round()).abs() < T::of(1e-9) {
            let unit = u.round().to_usize().unwrap().max(1);
            m_samples = m_samples.div_ceil(unit) * unit;
        }
    }

    // frequency-pair groups
    let mut freq_groups: BTreeMap<Vec<i32>, Vec<u32>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        freq_groups.entry(p.index[d..].to_vec()).or_default().push(i as u32);
    }
    let groups: Vec<(Vec<i32>, Vec<u32>)> = freq_groups.into_iter().collect();

    // quadrature nodes and symbol samples (shared by every pair)
    let nodes: Vec<T> = (0..m_samples)
        .map(|q| -extent + T::from_usize(q).unwrap() * delta)
        .collect();
    let total_nodes = m_samples.pow(d as u32);
    let mut sigma = Vec::with_capacity(total_nodes);
    {
        let mut idx = vec![0usize; d];
        loop {
            let xi: Vec<T> = idx.iter().map(|&q| nodes[q]).collect();
            sigma.push(symbol(&xi)?);
            if !crate::gabor_matrix::odometer(&mut idx, m_samples) {
                break;
            }
        }
    }
    let sigma_max = sigma.iter().fold(T::zero(), |a, v| a.max(v.norm()));

    // frequency cut from the Gaussian window-product factor
    let freq_cut = if let Some(band) = cfg.band_radius {
        band + T::of(1e-9)
    } else if cfg.drop_threshold > T::zero() && sigma_max > T::zero() {
        let ratio = (T::of(10.0) * sigma_max / cfg.drop_threshold).max(T::of(10.0));
        (T::of(2.0) * ratio.ln() / T::PI()).sqrt() + T::one()
    } else {
        T::infinity()
    };

    let engine = FftEngine::new(m_samples);
    let pairs: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        for a in 0..groups.len() {
            for b in 0..groups.len() {
                let dxi = freq_offset_norm(&groups[a].0, &groups[b].0, lattice);
                if dxi <= freq_cut {
                    v.push((a, b));
                }
            }
        }
        v
    };

    let chunks: Vec<Vec<((u32, u32), Complex<T>)>> = pairs
        .par_iter()
        .map(|&(ga, gb)| {
            assemble_pair(
                &groups[ga],
                &groups[gb],
                &points,
                &sigma,
                &nodes,
                window,
                lattice,
                cfg,
                delta,
                m_samples,
                &engine,
            )
        })
        .collect();

    let mut entries = BTreeMap::new();
    for chunk in chunks {
        for (key, value) in chunk {
            entries.insert(key, value);
        }
    }
    Ok(GaborMatrix {
        lattice: lattice.clone(),
        points,
        entries,
        method: AssemblyMethod::Multiplier,
        threshold: cfg.drop_threshold,
    })
}

fn freq_offset_norm<T: Real>(na: &[i32], nb: &[i32], lattice: &Lattice<T>) -> T {
    let beta = lattice.spacings().map(|(_, b)| b).unwrap_or(T::one());
    na.iter()
        .zip(nb)
        .map(|(&x, &y)| {
            let v = beta * T::from_i32(x - y).unwrap();
            v * v
        })
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

#[allow(clippy::too_many_arguments)]
fn assemble_pair<T: Real>(
    group_lambda: &(Vec<i32>, Vec<u32>),
    group_mu: &(Vec<i32>, Vec<u32>),
    points: &[LatticePoint<T>],
    sigma: &[Complex<T>],
    nodes: &[T],
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    cfg: &MatrixAssemblyConfig<T>,
    delta: T,
    m_samples: usize,
    engine: &FftEngine<T>,
) -> Vec<((u32, u32), Complex<T>)> {
    let d = lattice.dim;
    let grid = cfg.grid;
    let xi_lambda: Vec<T> = {
        let p = &points[group_lambda.1[0] as usize];
        p.z.xi.clone()
    };
    let xi_mu: Vec<T> = {
        let p = &points[group_mu.1[0] as usize];
        p.z.xi.clone()
    };

    // integrand W(q) = sigma * ghat(xi - xi_mu) * conj(ghat(xi - xi_lambda))
    let total = sigma.len();
    let mut integrand = vec![Complex::new(T::zero(), T::zero()); total];
    let mut idx = vec![0usize; d];
    for w in integrand.iter_mut().take(total) {
        let xi: Vec<T> = idx.iter().map(|&q| nodes[q]).collect();
        let rel_mu: Vec<T> = xi.iter().zip(&xi_mu).map(|(&a, &b)| a - b).collect();
        let rel_lambda: Vec<T> = xi.iter().zip(&xi_lambda).map(|(&a, &b)| a - b).collect();
        let flat = flat_of(&idx, m_samples);
        *w = sigma[flat] * window.fourier_eval(&rel_mu) * window.fourier_eval(&rel_lambda).conj();
        odometer(&mut idx, m_samples);
    }

    // J(Delta x) for all offsets at once: inverse-type FFT per axis
    crate::fft::fft_lanes(&mut integrand, m_samples, d, engine, false);
    let mut weight = T::one();
    for _ in 0..d {
        weight = weight * delta;
    }

    let x0 = nodes[0];
    let mut out = Vec::new();
    for &li in &group_lambda.1 {
        for &mi in &group_mu.1 {
            let pl = &points[li as usize];
            let pm = &points[mi as usize];
            let dx: Vec<T> = pl.z.x.iter().zip(&pm.z.x).map(|(&a, &b)| a - b).collect();
            if let Some(band) = cfg.band_radius {
                let mut r2 = T::zero();
                for (a, (&xl, &xm)) in pl.z.xi.iter().zip(&pm.z.xi).enumerate() {
                    let dxi = xl - xm;
                    r2 = r2 + dxi * dxi + dx[a] * dx[a];
                }
                if r2.sqrt() > band {
                    continue;
                }
            }
            // offset resolution is 1/(M delta): bin j = Delta x * M * delta
            let mut bin = 0usize;
            let mut on_grid = true;
            for &v in &dx {
                let steps = v * delta * T::from_usize(m_samples).unwrap();
                let j = steps.round();
                if (steps - j).abs() > T::of(1e-6) {
                    on_grid = false;
                    break;
                }
                bin = bin * m_samples + j.to_i64().unwrap().rem_euclid(m_samples as i64) as usize;
            }
            let value = if on_grid {
                // e^{2 pi i Delta x * x0} phase from the quadrature origin
                let phase0: T = dx.iter().map(|&v| v * x0).fold(T::zero(), |a, b| a + b);
                integrand[bin] * Complex::from_polar(T::one(), T::two_pi() * phase0) * weight
            } else {
                direct_offset_quadrature(sigma, nodes, window, &xi_lambda, &xi_mu, &dx, delta, m_samples, d)
            };
            // entry = e^{2 pi i (x_mu xi_mu - x_lambda xi_lambda)} J
            let mut phase = T::zero();
            for a in 0..d {
                phase = phase + pm.z.x[a] * pm.z.xi[a] - pl.z.x[a] * pl.z.xi[a];
            }
            let entry = value * Complex::from_polar(T::one(), T::two_pi() * phase);
            if cfg.drop_threshold == T::zero() || entry.norm() >= cfg.drop_threshold {
                out.push(((li, mi), entry));
            }
        }
    }
    out
}

/// Exact matrix of the grid-discretized multiplier: entries assembled in the
/// discrete frequency domain, so torus wrap couplings (position and
/// frequency) match the operator the spectral solver applies.
fn discrete_multiplier_matrix<T: Real>(
    symbol: impl Fn(&[T]) -> Result<Complex<T>> + Sync,
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    cfg: &MatrixAssemblyConfig<T>,
) -> Result<GaborMatrix<T>> {
    let grid = cfg.grid;
    let d = grid.dim();
    if !lattice.on_grid(&grid) {
        return Err(GaborError::LatticeMismatch(
            "periodized assembly needs a separable lattice on the sampling grid".into(),
        ));
    }
    let points = lattice.points(&grid)?;
    let n = grid.samples_per_axis();
    let engine = FftEngine::new(n);
    let h = grid.spacing();
    let el = grid.extent();
    let freq_period = T::from_usize(n).unwrap() / el;

    // symbol at the grid frequency bins
    let mut sigma = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for (flat, slot) in sigma.iter_mut().enumerate() {
        let mut rem = flat;
        let mut xi = vec![T::zero(); d];
        for a in (0..d).rev() {
            xi[a] = grid.freq_at_bin(rem % n);
            rem /= n;
        }
        *slot = symbol(&xi)?;
    }

    // spectra of the zero-position atoms, one per distinct frequency index
    let mut freq_groups: BTreeMap<Vec<i32>, Vec<u32>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        freq_groups.entry(p.index[d..].to_vec()).or_default().push(i as u32);
    }
    let groups: Vec<(Vec<i32>, Vec<u32>)> = freq_groups.into_iter().collect();
    let spectra: Vec<Vec<Complex<T>>> = groups
        .par_iter()
        .map(|(_, members)| -> Result<Vec<Complex<T>>> {
            let p = &points[members[0] as usize];
            let z0 = crate::grid::PhasePoint::new(vec![T::zero(); d], p.z.xi.clone());
            let a = atom(window, &z0, &grid)?;
            Ok(forward_transform(&a, &engine))
        })
        .collect::<Result<_>>()?;

    // torus metric for band/threshold pruning
    let wrap = |v: T, period: T| v - period * (v / period).round();
    let sigma_max = sigma.iter().fold(T::zero(), |a, v| a.max(v.norm()));
    let freq_cut = if let Some(band) = cfg.band_radius {
        band + T::of(1e-9)
    } else if cfg.drop_threshold > T::zero() && sigma_max > T::zero() {
        let ratio = (T::of(10.0) * sigma_max / cfg.drop_threshold).max(T::of(10.0));
        (T::of(2.0) * ratio.ln() / T::PI()).sqrt() + T::one()
    } else {
        T::infinity()
    };

    let pair_list: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        for a in 0..groups.len() {
            for b in 0..groups.len() {
                let pa = &points[groups[a].1[0] as usize];
                let pb = &points[groups[b].1[0] as usize];
                let mut r2 = T::zero();
                for (x, y) in pa.z.xi.iter().zip(&pb.z.xi) {
                    let w = wrap(*x - *y, freq_period);
                    r2 = r2 + w * w;
                }
                if r2.sqrt() <= freq_cut {
                    v.push((a, b));
                }
            }
        }
        v
    };

    // Parseval weight for <u, v>_grid in terms of the transforms
    let mut parseval = T::one();
    for _ in 0..d {
        parseval = parseval * grid.freq_spacing();
    }

    let chunks: Vec<Vec<((u32, u32), Complex<T>)>> = pair_list
        .par_iter()
        .map(|&(ga, gb)| {
            let engine = FftEngine::new(n);
            let mut integrand: Vec<Complex<T>> = (0..grid.len())
                .map(|k| sigma[k] * spectra[gb][k] * spectra[ga][k].conj())
                .collect();
            // J(Delta x) for every torus offset at once
            crate::fft::fft_lanes(&mut integrand, n, d, &engine, false);
            let mut out = Vec::new();
            for &li in &groups[ga].1 {
                for &mi in &groups[gb].1 {
                    let pl = &points[li as usize];
                    let pm = &points[mi as usize];
                    if let Some(band) = cfg.band_radius {
                        let mut r2 = T::zero();
                        for a in 0..d {
                            let dx = wrap(pl.z.x[a] - pm.z.x[a], el);
                            let dxi = wrap(pl.z.xi[a] - pm.z.xi[a], freq_period);
                            r2 = r2 + dx * dx + dxi * dxi;
                        }
                        if r2.sqrt() > band {
                            continue;
                        }
                    }
                    let mut bin = 0usize;
                    for a in 0..d {
                        let steps = ((pl.z.x[a] - pm.z.x[a]) / h).round();
                        bin = bin * n + steps.to_i64().unwrap().rem_euclid(n as i64) as usize;
                    }
                    // atom(x, xi) = e^{2 pi i xi x} T_x atom(0, xi)
                    let mut phase = T::zero();
                    for a in 0..d {
                        phase = phase + pm.z.x[a] * pm.z.xi[a] - pl.z.x[a] * pl.z.xi[a];
                    }
                    let entry = integrand[bin] * parseval
                        * Complex::from_polar(T::one(), T::two_pi() * phase);
                    if cfg.drop_threshold == T::zero() || entry.norm() >= cfg.drop_threshold {
                        out.push(((li, mi), entry));
                    }
                }
            }
            out
        })
        .collect();

    let mut entries = BTreeMap::new();
    for chunk in chunks {
        for (k, v) in chunk {
            entries.insert(k, v);
        }
    }
    Ok(GaborMatrix {
        lattice: lattice.clone(),
        points,
        entries,
        method: AssemblyMethod::Multiplier,
        threshold: cfg.drop_threshold,
    })
}

#[allow(clippy::too_many_arguments)]
fn direct_offset_quadrature<T: Real>(
    sigma: &[Complex<T>],
    nodes: &[T],
    window: &WindowSpec<T>,
    xi_lambda: &[T],
    xi_mu: &[T],
    dx: &[T],
    delta: T,
    m_samples: usize,
    d: usize,
) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut idx = vec![0usize; d];
    loop {
        let xi: Vec<T> = idx.iter().map(|&q| nodes[q]).collect();
        let rel_mu: Vec<T> = xi.iter().zip(xi_mu).map(|(&a, &b)| a - b).collect();
        let rel_lambda: Vec<T> = xi.iter().zip(xi_lambda).map(|(&a, &b)| a - b).collect();
        let flat = flat_of(&idx, m_samples);
        let phase: T = dx.iter().zip(&xi).map(|(&a, &b)| a * b).fold(T::zero(), |s, p| s + p);
        acc += sigma[flat]
            * window.fourier_eval(&rel_mu)
            * window.fourier_eval(&rel_lambda).conj()
            * Complex::from_polar(T::one(), T::two_pi() * phase);
        if !odometer(&mut idx, m_samples) {
            break;
        }
    }
    let mut weight = T::one();
    for _ in 0..d {
        weight = weight * delta;
    }
    acc * weight
}

fn flat_of(idx: &[usize], base: usize) -> usize {
    idx.iter().fold(0usize, |acc, &i| acc * base + i)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub(crate) fn odometer(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Matrix of an arbitrary linear operator by direct application: apply `T`
/// to each lattice atom and take quadrature inner products.
pub fn direct_matrix<T: Real>(
    apply: &(dyn Fn(&SampledField<T>) -> Result<SampledField<T>> + Sync),
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    cfg: &MatrixAssemblyConfig<T>,
) -> Result<GaborMatrix<T>> {
    let grid = cfg.grid;
    let points = lattice.points(&grid)?;
    let atoms: Vec<SampledField<T>> = points
        .iter()
        .map(|p| atom(window, &p.z, &grid))
        .collect::<Result<_>>()?;

    let columns: Vec<Vec<((u32, u32), Complex<T>)>> = (0..points.len())
        .into_par_iter()
        .map(|mi| -> Result<Vec<((u32, u32), Complex<T>)>> {
            let transformed = apply(&atoms[mi])?;
            if transformed.grid() != &grid {
                return Err(GaborError::GridMismatch(
                    "operator callback returned a field on a different grid".into(),
                ));
            }
            let mut out = Vec::new();
            for li in 0..points.len() {
                if let Some(band) = cfg.band_radius {
                    if points[li].z.sub(&points[mi].z).norm() > band {
                        continue;
                    }
                }
                let entry = transformed.inner(&atoms[li])?;
                if cfg.drop_threshold == T::zero() || entry.norm() >= cfg.drop_threshold {
                    out.push(((li as u32, mi as u32), entry));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut entries = BTreeMap::new();
    for column in columns {
        for (k, v) in column {
            entries.insert(k, v);
        }
    }
    Ok(GaborMatrix {
        lattice: lattice.clone(),
        points,
        entries,
        method: AssemblyMethod::Direct,
        threshold: cfg.drop_threshold,
    })
}

/// Magnitude matrix `|<sigma^w pi(mu) g, pi(lambda) g>|` evaluated through
/// the STFT of the symbol with the window's Wigner distribution:
/// `|V_Phi sigma((lambda+mu)/2, j(lambda-mu))|` with `j(z1, z2) = (z2, -z1)`.
#[derive(Debug, Clone)]
pub struct MagnitudeMatrix<T: Real> {
    pub points: Vec<LatticePoint<T>>,
    pub entries: BTreeMap<(u32, u32), T>,
    /// Pairs whose mapped point fell outside the sampled phase grid.
    pub unavailable: Vec<(u32, u32)>,
}

/// Sample a multiplier symbol on the square phase grid (requires `N = L^2`
/// so position and frequency axes share spacing `1/L`).
pub fn phase_symbol_field<T: Real>(
    sym: &PropagatorSymbol<T>,
    grid: &Grid<T>,
) -> Result<SampledField<T>> {
    phase_field_fn(grid, |_, xi| sym.eval(xi))
}

/// Sample `sigma(x, xi)` on the square phase grid.
pub fn phase_field_fn<T: Real>(
    grid: &Grid<T>,
    f: impl Fn(&[T], &[T]) -> Result<Complex<T>>,
) -> Result<SampledField<T>> {
    let d = grid.dim();
    let n = grid.samples_per_axis();
    let w = T::from_usize(n).unwrap() / grid.extent();
    if (w - grid.extent()).abs() > T::of(1e-9) {
        return Err(GaborError::InvalidGrid(format!(
            "phase grid must be square: need N = L^2, got N/L = {w} vs L = {}",
            grid.extent()
        )));
    }
    let phase_grid = Grid::new(2 * d, grid.extent(), n)?;
    let mut values = Vec::with_capacity(phase_grid.len());
    for flat in 0..phase_grid.len() {
        let y = phase_grid.position_of(flat);
        values.push(f(&y[..d], &y[d..])?);
    }
    SampledField::new(phase_grid, values)
}

/// Weyl-side magnitudes over lattice pairs within the band.
pub fn weyl_matrix_magnitudes<T: Real>(
    symbol_field: &SampledField<T>,
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    cfg: &MatrixAssemblyConfig<T>,
) -> Result<MagnitudeMatrix<T>> {
    if !matches!(window, WindowSpec::NormalizedGaussian) {
        return Err(GaborError::InvalidParameter(
            "Weyl magnitude path uses the Gaussian window (closed-form Wigner distribution)".into(),
        ));
    }
    let phase_grid = *symbol_field.grid();
    let d2 = phase_grid.dim();
    let d = d2 / 2;
    if d * 2 != d2 {
        return Err(GaborError::InvalidGrid("phase field must have even dimension".into()));
    }
    let grid = cfg.grid;
    if grid.dim() != d {
        return Err(GaborError::GridMismatch("phase field dimension does not match grid".into()));
    }
    let points = lattice.points(&grid)?;
    let h = phase_grid.spacing();
    let n = phase_grid.samples_per_axis();
    let nyq = phase_grid.nyquist();
    let engine = FftEngine::new(n);

    // group pairs by the midpoint u = (z_lambda + z_mu) / 2
    let mut by_midpoint: BTreeMap<Vec<i64>, Vec<(u32, u32)>> = BTreeMap::new();
    let mut unavailable = Vec::new();
    let band = cfg.band_radius.unwrap_or_else(T::infinity);
    for li in 0..points.len() {
        for mi in 0..points.len() {
            let pl = &points[li];
            let pm = &points[mi];
            if pl.z.sub(&pm.z).norm() > band {
                continue;
            }
            // v = j(lambda - mu) must stay within the phase-grid Nyquist
            let mut v_ok = true;
            for a in 0..d {
                let vx = pl.z.xi[a] - pm.z.xi[a];
                let vxi = -(pl.z.x[a] - pm.z.x[a]);
                if vx.abs() > nyq || vxi.abs() > nyq {
                    v_ok = false;
                }
            }
            if !v_ok {
                unavailable.push((li as u32, mi as u32));
                continue;
            }
            // midpoint in half-steps of the phase grid
            let mut key = Vec::with_capacity(d2);
            let mut on_grid = true;
            for a in 0..d {
                let u = (pl.z.x[a] + pm.z.x[a]) / T::of(2.0);
                let steps = u / h;
                if (steps - steps.round()).abs() > T::of(1e-9) {
                    on_grid = false;
                }
                key.push(steps.round().to_i64().unwrap());
            }
            for a in 0..d {
                let u = (pl.z.xi[a] + pm.z.xi[a]) / T::of(2.0);
                let steps = u / h;
                if (steps - steps.round()).abs() > T::of(1e-9) {
                    on_grid = false;
                }
                key.push(steps.round().to_i64().unwrap());
            }
            if !on_grid {
                unavailable.push((li as u32, mi as u32));
                continue;
            }
            by_midpoint.entry(key).or_default().push((li as u32, mi as u32));
        }
    }

    let midpoints: Vec<(Vec<i64>, Vec<(u32, u32)>)> = by_midpoint.into_iter().collect();
    let chunks: Vec<Vec<((u32, u32), T)>> = midpoints
        .par_iter()
        .map(|(key, pairs)| {
            // windowed transform of the symbol around this midpoint
            let u: Vec<T> = key.iter().map(|&s| T::from_i64(s).unwrap() * h).collect();
            let mut windowed = SampledField::zeros(phase_grid);
            for flat in 0..phase_grid.len() {
                let y = phase_grid.position_of(flat);
                let mut r2 = T::zero();
                for a in 0..d2 {
                    let rel = y[a] - u[a];
                    r2 = r2 + rel * rel;
                }
                // Phi = W(g, g)(y) = 2^d e^{-2 pi |y|^2}
                let w = T::of(2.0).powi(d as i32) * (-T::two_pi() * r2).exp();
                windowed.values_mut()[flat] = symbol_field.values()[flat] * w;
            }
            let spec = forward_transform(&windowed, &engine);
            let mut out = Vec::with_capacity(pairs.len());
            for &(li, mi) in pairs {
                let pl = &points[li as usize];
                let pm = &points[mi as usize];
                // v = j(w - z) with z = mu, w = lambda
                let mut bin = 0usize;
                let mut exact = true;
                for a in 0..d2 {
                    let v = if a < d {
                        pl.z.xi[a] - pm.z.xi[a]
                    } else {
                        -(pl.z.x[a - d] - pm.z.x[a - d])
                    };
                    let steps = v * phase_grid.extent();
                    let j = steps.round();
                    if (steps - j).abs() > T::of(1e-9) {
                        exact = false;
                        break;
                    }
                    bin = bin * n + j.to_i64().unwrap().rem_euclid(n as i64) as usize;
                }
                if exact {
                    out.push(((li, mi), spec[bin].norm()));
                }
            }
            out
        })
        .collect();

    let mut entries = BTreeMap::new();
    for chunk in chunks {
        for (k, v) in chunk {
            entries.insert(k, v);
        }
    }
    Ok(MagnitudeMatrix {
        points,
        entries,
        unavailable,
    })
}

/// Single continuous-pair magnitude `|<sigma^w pi(z) g, pi(w) g>|` by direct
/// quadrature of the symbol STFT, with grid-halving refinement until two
/// successive resolutions agree to `tol`.
pub fn weyl_magnitude_at<T: Real>(
    symbol_field: &SampledField<T>,
    z: &PhasePoint<T>,
    w: &PhasePoint<T>,
    tol: T,
) -> Result<T> {
    let mut field = symbol_field.clone();
    let mut prev: Option<T> = None;
    for _ in 0..3 {
        let value = weyl_quadrature(&field, z, w)?;
        if let Some(p) = prev {
            if (value - p).abs() <= tol * (T::one() + value.abs()) {
                return Ok(value);
            }
        }
        prev = Some(value);
        field = crate::fft::upsample2(&field);
    }
    Ok(prev.unwrap())
}

fn weyl_quadrature<T: Real>(
    field: &SampledField<T>,
    z: &PhasePoint<T>,
    w: &PhasePoint<T>,
) -> Result<T> {
    let phase_grid = *field.grid();
    let d2 = phase_grid.dim();
    let d = d2 / 2;
    if z.dim() != d || w.dim() != d {
        return Err(GaborError::GridMismatch("phase point dimension mismatch".into()));
    }
    let mut u = Vec::with_capacity(d2);
    let mut v = Vec::with_capacity(d2);
    for a in 0..d {
        u.push((z.x[a] + w.x[a]) / T::of(2.0));
        v.push(w.xi[a] - z.xi[a]);
    }
    for a in 0..d {
        u.push((z.xi[a] + w.xi[a]) / T::of(2.0));
        v.push(-(w.x[a] - z.x[a]));
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for flat in 0..phase_grid.len() {
        let y = phase_grid.position_of(flat);
        let mut r2 = T::zero();
        let mut phase = T::zero();
        for a in 0..d2 {
            let rel = y[a] - u[a];
            r2 = r2 + rel * rel;
            phase = phase + y[a] * v[a];
        }
        let wigner = T::of(2.0).powi(d as i32) * (-T::two_pi() * r2).exp();
        acc += field.values()[flat] * wigner * Complex::from_polar(T::one(), -T::two_pi() * phase);
    }
    Ok((acc * phase_grid.cell_volume()).norm())
}

// --- dumps ------------------------------------------------------------

/// CSV triplets `(lambda indices..., mu indices..., re, im)` with an
/// annotation header carrying the assembly method and threshold.
pub fn write_matrix_csv<T: Real, W: Write>(matrix: &GaborMatrix<T>, mut out: W) -> Result<()> {
    let d2 = matrix.points.first().map(|p| p.index.len()).unwrap_or(0);
    writeln!(
        out,
        "# method={:?} threshold={:.16e}",
        matrix.method,
        matrix.threshold.to_f64().unwrap()
    )?;
    let mut header = Vec::new();
    for side in ["lam", "mu"] {
        for a in 0..d2 {
            header.push(format!("{side}{a}"));
        }
    }
    header.push("re".into());
    header.push("im".into());
    writeln!(out, "{}", header.join(","))?;
    for (&(l, m), v) in &matrix.entries {
        let mut row = Vec::new();
        for &k in &matrix.points[l as usize].index {
            row.push(k.to_string());
        }
        for &k in &matrix.points[m as usize].index {
            row.push(k.to_string());
        }
        row.push(format!("{:.16e}", v.re.to_f64().unwrap()));
        row.push(format!("{:.16e}", v.im.to_f64().unwrap()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Binary dump: header `{u32 d, u64 nnz, u8 method, f64 threshold, lattice
/// descriptor}`, then fixed-width records of integer indices and the entry.
pub fn write_matrix_binary<T: Real, W: Write>(matrix: &GaborMatrix<T>, mut out: W) -> Result<()> {
    let d = matrix.lattice.dim;
    out.write_all(&(d as u32).to_le_bytes())?;
    out.write_all(&(matrix.nnz() as u64).to_le_bytes())?;
    out.write_all(&[matrix.method.tag()])?;
    out.write_all(&matrix.threshold.to_f64().unwrap().to_le_bytes())?;
    match &matrix.lattice.kind {
        crate::lattice::LatticeKind::Separable { alpha, beta } => {
            out.write_all(&[0u8])?;
            out.write_all(&alpha.to_f64().unwrap().to_le_bytes())?;
            out.write_all(&beta.to_f64().unwrap().to_le_bytes())?;
        }
        crate::lattice::LatticeKind::General { generator } => {
            out.write_all(&[1u8])?;
            for g in generator {
                out.write_all(&g.to_f64().unwrap().to_le_bytes())?;
            }
        }
    }
    out.write_all(
        &matrix
            .lattice
            .truncation_radius
            .to_f64()
            .unwrap()
            .to_le_bytes(),
    )?;
    for (&(l, m), v) in &matrix.entries {
        for &k in &matrix.points[l as usize].index {
            out.write_all(&k.to_le_bytes())?;
        }
        for &k in &matrix.points[m as usize].index {
            out.write_all(&k.to_le_bytes())?;
        }
        out.write_all(&v.re.to_f64().unwrap().to_le_bytes())?;
        out.write_all(&v.im.to_f64().unwrap().to_le_bytes())?;
    }
    Ok(())
}

/// Read back a binary dump produced by [`write_matrix_binary`]. The grid is
/// needed to re-enumerate the lattice points.
pub fn read_matrix_binary<T: Real, R: Read>(mut input: R, grid: &Grid<T>) -> Result<GaborMatrix<T>> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    let mut b1 = [0u8; 1];
    input.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let nnz = u64::from_le_bytes(b8) as usize;
    input.read_exact(&mut b1)?;
    let method = AssemblyMethod::from_tag(b1[0])?;
    input.read_exact(&mut b8)?;
    let threshold = T::of(f64::from_le_bytes(b8));
    input.read_exact(&mut b1)?;
    let kind = match b1[0] {
        0 => {
            input.read_exact(&mut b8)?;
            let alpha = f64::from_le_bytes(b8);
            input.read_exact(&mut b8)?;
            let beta = f64::from_le_bytes(b8);
            crate::lattice::LatticeKind::Separable {
                alpha: T::of(alpha),
                beta: T::of(beta),
            }
        }
        1 => {
            let mut generator = Vec::with_capacity((2 * d) * (2 * d));
            for _ in 0..(2 * d) * (2 * d) {
                input.read_exact(&mut b8)?;
                generator.push(T::of(f64::from_le_bytes(b8)));
            }
            crate::lattice::LatticeKind::General { generator }
        }
        t => return Err(GaborError::Format(format!("unknown lattice kind tag {t}"))),
    };
    input.read_exact(&mut b8)?;
    let radius = T::of(f64::from_le_bytes(b8));
    let lattice = Lattice {
        dim: d,
        kind,
        truncation_radius: radius,
    };
    let points = lattice.points(grid)?;
    let index_of: BTreeMap<Vec<i32>, u32> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.index.clone(), i as u32))
        .collect();
    let mut entries = BTreeMap::new();
    for _ in 0..nnz {
        let mut lam = Vec::with_capacity(2 * d);
        for _ in 0..2 * d {
            input.read_exact(&mut b4)?;
            lam.push(i32::from_le_bytes(b4));
        }
        let mut mu = Vec::with_capacity(2 * d);
        for _ in 0..2 * d {
            input.read_exact(&mut b4)?;
            mu.push(i32::from_le_bytes(b4));
        }
        input.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        input.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        let li = *index_of
            .get(&lam)
            .ok_or_else(|| GaborError::Format(format!("index {lam:?} not in enumeration")))?;
        let mi = *index_of
            .get(&mu)
            .ok_or_else(|| GaborError::Format(format!("index {mu:?} not in enumeration")))?;
        entries.insert((li, mi), Complex::new(T::of(re), T::of(im)));
    }
    Ok(GaborMatrix {
        lattice,
        points,
        entries,
        method,
        threshold,
    })
}
