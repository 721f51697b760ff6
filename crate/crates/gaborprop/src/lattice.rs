//! Time-frequency lattices and their truncated enumerations.

use crate::error::{GaborError, Result};
use crate::grid::{Grid, PhasePoint};
use crate::linalg::{lu_solve, CMatrix};
use crate::real::Real;
use num_complex::Complex;

/// Lattice of the time-frequency plane `R^{2d}`.
///
/// The separable form generates `alpha Z^d x beta Z^d`; the general form is
/// spanned by the columns of an invertible `2d x 2d` generator. Only points
/// with `|lambda| <= truncation_radius` are enumerated.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeKind<T: Real> {
    Separable { alpha: T, beta: T },
    General { generator: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T: Real> {
    pub dim: usize,
    pub kind: LatticeKind<T>,
    pub truncation_radius: T,
}

/// One enumerated lattice point: integer coordinates (position block then
/// frequency block) and the embedded phase-space point.
#[derive(Debug, Clone)]
pub struct LatticePoint<T: Real> {
    pub index: Vec<i32>,
    pub z: PhasePoint<T>,
}

impl<T: Real> Lattice<T> {
    pub fn separable(dim: usize, alpha: T, beta: T, truncation_radius: T) -> Result<Self> {
        if !(alpha > T::zero()) || !(beta > T::zero()) {
            return Err(GaborError::InvalidParameter("lattice spacings must be positive".into()));
        }
        if !(truncation_radius > T::zero()) {
            return Err(GaborError::InvalidParameter("truncation radius must be positive".into()));
        }
        Ok(Lattice {
            dim,
            kind: LatticeKind::Separable { alpha, beta },
            truncation_radius,
        })
    }

    /// Paper-default separable lattice `Z^d x (1/2) Z^d` with a radius that
    /// keeps every enumerated atom representable on the grid.
    pub fn default_for_grid(grid: &Grid<T>) -> Self {
        let radius = Self::covering_radius(grid);
        Lattice {
            dim: grid.dim(),
            kind: LatticeKind::Separable {
                alpha: T::one(),
                beta: T::of(0.5),
            },
            truncation_radius: radius,
        }
    }

    /// Radius beyond the torus half-diagonal: enumeration covers the whole
    /// fundamental domain of the grid.
    pub fn covering_radius(grid: &Grid<T>) -> T {
        let half = grid.extent() / T::of(2.0);
        let d = T::from_usize(grid.dim()).unwrap();
        ((half * half + grid.nyquist() * grid.nyquist()) * d).sqrt() + T::one()
    }

    pub fn general(dim: usize, generator: Vec<T>, truncation_radius: T) -> Result<Self> {
        if generator.len() != (2 * dim) * (2 * dim) {
            return Err(GaborError::InvalidParameter(format!(
                "generator must be {0} x {0}",
                2 * dim
            )));
        }
        // reject singular generators up front
        let n = 2 * dim;
        let mut m = CMatrix::<T>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex::new(generator[i * n + j], T::zero());
            }
        }
        if lu_solve(&m, &CMatrix::identity(n)).is_err() {
            return Err(GaborError::InvalidParameter("lattice generator is singular".into()));
        }
        Ok(Lattice {
            dim,
            kind: LatticeKind::General { generator },
            truncation_radius,
        })
    }

    pub fn with_radius(&self, radius: T) -> Self {
        Lattice {
            dim: self.dim,
            kind: self.kind.clone(),
            truncation_radius: radius,
        }
    }

    /// Enumerate lattice points inside the truncation radius, intersected
    /// with the fundamental torus box of `grid` (positions in `[-L/2, L/2)`,
    /// frequencies in `[-Nyquist, Nyquist)`), sorted by integer index.
    pub fn points(&self, grid: &Grid<T>) -> Result<Vec<LatticePoint<T>>> {
        if grid.dim() != self.dim {
            return Err(GaborError::LatticeMismatch(format!(
                "lattice dimension {} vs grid dimension {}",
                self.dim,
                grid.dim()
            )));
        }
        let radius = self.truncation_radius;
        let half = grid.extent() / T::of(2.0);
        let nyq = grid.nyquist();
        let mut out = Vec::new();
        match &self.kind {
            LatticeKind::Separable { alpha, beta } => {
                let d = self.dim;
                // per-axis integer ranges from the box/radius intersection
                let mmax = ((half.min(radius) / *alpha).ceil()).to_i32().unwrap_or(0);
                let nmax = ((nyq.min(radius) / *beta).ceil()).to_i32().unwrap_or(0);
                let mut idx = vec![0i32; 2 * d];
                enumerate_separable(
                    &mut idx,
                    0,
                    d,
                    mmax,
                    nmax,
                    *alpha,
                    *beta,
                    half,
                    nyq,
                    radius,
                    &mut out,
                );
            }
            LatticeKind::General { generator } => {
                let n = 2 * self.dim;
                // integer search box from |k|_inf <= ||A^{-1}||_inf * radius
                let mut m = CMatrix::<T>::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = Complex::new(generator[i * n + j], T::zero());
                    }
                }
                let inv = lu_solve(&m, &CMatrix::identity(n))?;
                let mut inv_norm = T::zero();
                for i in 0..n {
                    let mut row = T::zero();
                    for j in 0..n {
                        row = row + inv[(i, j)].norm();
                    }
                    inv_norm = inv_norm.max(row);
                }
                let kmax = (inv_norm * radius).ceil().to_i32().unwrap_or(0);
                let mut idx = vec![-kmax; n];
                loop {
                    let mut z = vec![T::zero(); n];
                    for (j, &k) in idx.iter().enumerate() {
                        let kf = T::from_i32(k).unwrap();
                        for i in 0..n {
                            z[i] = z[i] + generator[i * n + j] * kf;
                        }
                    }
                    let norm = z.iter().map(|&v| v * v).fold(T::zero(), |a, b| a + b).sqrt();
                    let in_box = z[..self.dim].iter().all(|&v| -half <= v && v < half)
                        && z[self.dim..].iter().all(|&v| -nyq <= v && v < nyq);
                    if norm <= radius && in_box {
                        out.push(LatticePoint {
                            index: idx.clone(),
                            z: PhasePoint::new(z[..self.dim].to_vec(), z[self.dim..].to_vec()),
                        });
                    }
                    // odometer over [-kmax, kmax]^n
                    let mut axis = n;
                    loop {
                        if axis == 0 {
                            break;
                        }
                        axis -= 1;
                        idx[axis] += 1;
                        if idx[axis] <= kmax {
                            break;
                        }
                        idx[axis] = -kmax;
                        if axis == 0 {
                            break;
                        }
                    }
                    if idx.iter().all(|&k| k == -kmax) {
                        break;
                    }
                }
            }
        }
        out.sort_by(|a, b| a.index.cmp(&b.index));
        Ok(out)
    }

    /// Enumerate all lattice points with `|lambda| <= truncation_radius`,
    /// with no grid box involved (used for pure lattice sums).
    pub fn points_ball(&self) -> Result<Vec<LatticePoint<T>>> {
        let radius = self.truncation_radius;
        let mut out = Vec::new();
        match &self.kind {
            LatticeKind::Separable { alpha, beta } => {
                let d = self.dim;
                let mmax = (radius / *alpha).ceil().to_i32().unwrap_or(0);
                let nmax = (radius / *beta).ceil().to_i32().unwrap_or(0);
                let huge = radius * T::of(2.0) + T::one();
                let mut idx = vec![0i32; 2 * d];
                enumerate_separable(
                    &mut idx, 0, d, mmax, nmax, *alpha, *beta, huge, huge, radius, &mut out,
                );
            }
            LatticeKind::General { .. } => {
                return Err(GaborError::InvalidParameter(
                    "ball enumeration is only implemented for separable lattices".into(),
                ));
            }
        }
        out.sort_by(|a, b| a.index.cmp(&b.index));
        Ok(out)
    }

    /// Separable spacings, when applicable.
    pub fn spacings(&self) -> Option<(T, T)> {
        match self.kind {
            LatticeKind::Separable { alpha, beta } => Some((alpha, beta)),
            LatticeKind::General { .. } => None,
        }
    }

    /// Whether the separable lattice sits on the sampling grid: `alpha` a
    /// multiple of the spacing and `beta` a multiple of `1/L`.
    pub fn on_grid(&self, grid: &Grid<T>) -> bool {
        match self.kind {
            LatticeKind::Separable { alpha, beta } => {
                let a_steps = alpha / grid.spacing();
                let b_steps = beta * grid.extent();
                let near_int = |v: T| (v - v.round()).abs() < T::of(1e-9);
                near_int(a_steps) && near_int(b_steps)
            }
            LatticeKind::General { .. } => false,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_separable<T: Real>(
    idx: &mut Vec<i32>,
    axis: usize,
    d: usize,
    mmax: i32,
    nmax: i32,
    alpha: T,
    beta: T,
    half: T,
    nyq: T,
    radius: T,
    out: &mut Vec<LatticePoint<T>>,
) {
    if axis == 2 * d {
        let x: Vec<T> = idx[..d].iter().map(|&m| alpha * T::from_i32(m).unwrap()).collect();
        let xi: Vec<T> = idx[d..].iter().map(|&n| beta * T::from_i32(n).unwrap()).collect();
        let in_box = x.iter().all(|&v| -half <= v && v < half) && xi.iter().all(|&v| -nyq <= v && v < nyq);
        if !in_box {
            return;
        }
        let norm = x
            .iter()
            .chain(xi.iter())
            .map(|&v| v * v)
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if norm <= radius {
            out.push(LatticePoint {
                index: idx.clone(),
                z: PhasePoint::new(x, xi),
            });
        }
        return;
    }
    let bound = if axis < d { mmax } else { nmax };
    for k in -bound..=bound {
        idx[axis] = k;
        enumerate_separable(idx, axis + 1, d, mmax, nmax, alpha, beta, half, nyq, radius, out);
    }
    idx[axis] = 0;
}
