//! Decay quantification: shell envelopes, stretched-exponential fits,
//! sparsity profiles, constants conversion and the weight-algebra check.

use crate::error::{GaborError, Result};
use crate::fitting::{fit_stretched_exponential, linear_fit};
use crate::gabor_matrix::GaborMatrix;
use crate::lattice::Lattice;
use crate::real::Real;

/// Per-shell maxima of entry magnitudes against the offset `|lambda - mu|`.
#[derive(Debug, Clone)]
pub struct ShellEnvelope<T: Real> {
    pub shell_width: T,
    /// `(rho midpoint, max magnitude)`, strictly increasing in rho; empty
    /// shells are skipped.
    pub points: Vec<(T, T)>,
}

pub fn shell_envelope<T: Real>(matrix: &GaborMatrix<T>, shell_width: T) -> Result<ShellEnvelope<T>> {
    if !(shell_width > T::zero()) {
        return Err(GaborError::InvalidParameter("shell width must be positive".into()));
    }
    let offsets = matrix.offset_magnitudes();
    if offsets.is_empty() {
        return Err(GaborError::EmptyInput("no entries".into()));
    }
    let max_rho = offsets.iter().fold(T::zero(), |a, &(r, _)| a.max(r));
    let nshells = (max_rho / shell_width).to_usize().unwrap_or(0) + 1;
    let mut shells = vec![None::<T>; nshells];
    for (rho, mag) in offsets {
        let idx = (rho / shell_width).to_usize().unwrap_or(0).min(nshells - 1);
        shells[idx] = Some(match shells[idx] {
            Some(v) => v.max(mag),
            None => mag,
        });
    }
    let points: Vec<(T, T)> = shells
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| {
            v.map(|mag| ((T::from_usize(i).unwrap() + T::of(0.5)) * shell_width, mag))
        })
        .collect();
    Ok(ShellEnvelope {
        shell_width,
        points,
    })
}

/// Fitted envelope law `C exp(-eps rho^r)`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit<T: Real> {
    pub c: T,
    pub eps: T,
    pub r: T,
    /// RMS residual in the log domain.
    pub residual: T,
    pub usable_range: (T, T),
}

/// Exponent search grid bounds: `r > 2` cannot occur for these operators,
/// the slack detects assembly bugs; `r < 1` flags merely-exponential decay.
pub const R_GRID_MIN: f64 = 0.8;
pub const R_GRID_MAX: f64 = 2.5;
pub const R_GRID_STEP: f64 = 0.01;

/// Two-stage fit of the shell envelope: grid search over the exponent, then
/// linear least squares for `(log C, eps)`.
///
/// Shells closer than two lattice steps reflect window overlap rather than
/// asymptotics and are excluded, as are shells within two decades of the
/// double-precision floor.
pub fn decay_fit<T: Real>(env: &ShellEnvelope<T>) -> Result<DecayFit<T>> {
    let peak = env.points.iter().fold(T::zero(), |a, &(_, v)| a.max(v));
    if !(peak > T::zero()) {
        return Err(GaborError::InsufficientData("envelope is identically zero".into()));
    }
    let floor = peak * T::of(1e-14);
    let min_rho = T::of(2.0);
    let usable: Vec<(T, T)> = env
        .points
        .iter()
        .copied()
        .filter(|&(rho, v)| rho >= min_rho && v > floor)
        .collect();
    if usable.len() < 6 {
        return Err(GaborError::InsufficientData(format!(
            "only {} usable shells",
            usable.len()
        )));
    }
    let lo = usable[0].0;
    let hi = usable[usable.len() - 1].0;
    if hi / lo < T::of(4.0) {
        return Err(GaborError::InsufficientData(format!(
            "usable shells span {lo}..{hi}, need a factor of 4"
        )));
    }
    let fit = fit_stretched_exponential(
        &usable,
        T::of(R_GRID_MIN),
        T::of(R_GRID_MAX),
        T::of(R_GRID_STEP),
    )?;
    Ok(DecayFit {
        c: fit.c,
        eps: fit.eps,
        r: fit.r,
        residual: fit.residual,
        usable_range: (lo, hi),
    })
}

/// Rearranged column magnitudes with the fitted sparsity law
/// `C exp(-eps n^{1/(2 d s)})`.
#[derive(Debug, Clone)]
pub struct SparsityProfile<T: Real> {
    pub column: u32,
    /// Nonincreasing magnitudes `|a|_1 >= |a|_2 >= ...`.
    pub magnitudes: Vec<T>,
    pub c: T,
    pub eps: T,
    pub s: T,
    /// Whether the sequence stays below the fitted curve over the usable
    /// (above-floor) range.
    pub holds: bool,
    /// Too few usable entries to fit (e.g. a banded identity column).
    pub degenerate: bool,
    pub usable_len: usize,
}

pub fn sparsity_profile<T: Real>(
    matrix: &GaborMatrix<T>,
    column: u32,
    s: T,
) -> Result<SparsityProfile<T>> {
    if !(s > T::zero()) {
        return Err(GaborError::InvalidParameter("s must be positive".into()));
    }
    let mut magnitudes = matrix.column_magnitudes(column);
    if magnitudes.len() < 16 {
        return Err(GaborError::InsufficientData(format!(
            "column has {} entries, need at least 16",
            magnitudes.len()
        )));
    }
    magnitudes.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let d = T::from_usize(matrix.lattice.dim).unwrap();
    let q = (T::of(2.0) * d * s).recip();
    let peak = magnitudes[0];
    let floor = peak * T::of(1e-14);
    let usable_len = magnitudes.iter().take_while(|&&v| v > floor).count();

    if usable_len < 4 {
        return Ok(SparsityProfile {
            column,
            magnitudes,
            c: peak,
            eps: T::zero(),
            s,
            holds: true,
            degenerate: true,
            usable_len,
        });
    }
    let xs: Vec<T> = (1..=usable_len)
        .map(|n| T::from_usize(n).unwrap().powf(q))
        .collect();
    let ys: Vec<T> = magnitudes[..usable_len].iter().map(|&v| v.ln()).collect();
    let (intercept, slope, _) = linear_fit(&xs, &ys)
        .ok_or_else(|| GaborError::InsufficientData("degenerate sparsity fit".into()))?;
    let eps = (-slope).max(T::zero());
    // scale C so the fitted curve majorizes the usable range
    let mut c = intercept.exp();
    for (n, &v) in magnitudes[..usable_len].iter().enumerate() {
        let curve = c * (-eps * xs[n]).exp();
        if v > curve {
            c = c * (v / curve) * (T::one() + T::of(1e-12));
        }
    }
    let holds = magnitudes[..usable_len]
        .iter()
        .enumerate()
        .all(|(n, &v)| v <= c * (-eps * xs[n]).exp() * (T::one() + T::of(1e-9)));
    Ok(SparsityProfile {
        column,
        magnitudes,
        c,
        eps,
        s,
        holds,
        degenerate: false,
        usable_len,
    })
}

/// Decay-constant conversion `C = (r d / eps)^r` between the moment and
/// exponential forms of the envelope bounds.
pub fn constants_forward<T: Real>(eps: T, r: T, d: usize) -> Result<T> {
    if !(eps > T::zero()) || !(r > T::zero()) {
        return Err(GaborError::InvalidParameter("eps and r must be positive".into()));
    }
    let df = T::from_usize(d).unwrap();
    Ok((r * df / eps).powf(r))
}

/// Inverse conversion: any `eps` strictly below `r (d C)^{-1/r}` is
/// admissible; this returns the supremum.
pub fn constants_inverse<T: Real>(c: T, r: T, d: usize) -> Result<T> {
    if !(c > T::zero()) || !(r > T::zero()) {
        return Err(GaborError::InvalidParameter("C and r must be positive".into()));
    }
    let df = T::from_usize(d).unwrap();
    Ok(r * (df * c).powf(-r.recip()))
}

/// Max over `|lambda| <= radius/2` of
/// `(w * w)(lambda) / w_{s, eps 2^{-1/s}}(lambda)` with
/// `w(z) = exp(-eps |z|^{1/s})` sampled on the lattice.
///
/// A finite maximum verifies the convolution algebra of the weights on this
/// truncated lattice.
pub fn weight_convolution_ratio<T: Real>(s: T, eps: T, lattice: &Lattice<T>) -> Result<T> {
    if !(s >= T::of(0.5)) {
        return Err(GaborError::InvalidParameter("s must be at least 1/2".into()));
    }
    if !(eps > T::zero()) {
        return Err(GaborError::InvalidParameter("eps must be positive".into()));
    }
    let pts = lattice.points_ball()?;
    let radius = lattice.truncation_radius;
    // tail budget: the discarded contribution is dominated by the weight at
    // half the radius times the shell count
    let w = |z: T| (-eps * z.powf(s.recip())).exp();
    let tail = w(radius / T::of(2.0)) * T::from_usize(pts.len()).unwrap();
    if tail > T::of(1e-12) {
        return Err(GaborError::InvalidParameter(format!(
            "truncation tail {tail:e} exceeds 1e-12; enlarge the radius"
        )));
    }

    let exponent = s.recip();
    let shrink = eps * T::of(2.0).powf(-exponent);
    let mut max_ratio = T::zero();
    for target in &pts {
        let nt = target.z.norm();
        if nt > radius / T::of(2.0) {
            continue;
        }
        let mut conv = T::zero();
        for nu in &pts {
            let diff = target.z.sub(&nu.z).norm();
            conv = conv + w(diff) * w(nu.z.norm());
        }
        let bound = (-shrink * nt.powf(exponent)).exp();
        max_ratio = max_ratio.max(conv / bound);
    }
    if !max_ratio.is_finite() {
        return Err(GaborError::InvalidParameter("ratio overflowed".into()));
    }
    Ok(max_ratio)
}
