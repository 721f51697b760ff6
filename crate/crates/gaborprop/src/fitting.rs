//! Least-squares fits for stretched-exponential envelopes `C exp(-eps rho^r)`.

use crate::error::{GaborError, Result};
use crate::real::Real;

/// Fitted parameters of `a(rho) ~ C exp(-eps rho^r)`.
#[derive(Debug, Clone, Copy)]
pub struct StretchedExpFit<T: Real> {
    pub c: T,
    pub eps: T,
    pub r: T,
    /// RMS residual of `log a` over the fitted points.
    pub residual: T,
}

/// Two-stage fit: grid-search the exponent `r`, solving the linear
/// least-squares problem `log a = log C - eps rho^r` at each candidate.
///
/// Only candidates with `eps > 0` qualify; `points` must hold positive
/// ordinates.
pub fn fit_stretched_exponential<T: Real>(
    points: &[(T, T)],
    r_min: T,
    r_max: T,
    r_step: T,
) -> Result<StretchedExpFit<T>> {
    if points.len() < 3 {
        return Err(GaborError::InsufficientData(format!(
            "{} points cannot pin a three-parameter envelope",
            points.len()
        )));
    }
    let logs: Vec<(T, T)> = points
        .iter()
        .map(|&(rho, a)| (rho, a.ln()))
        .collect();
    if logs.iter().any(|(rho, la)| !rho.is_finite() || !la.is_finite()) {
        return Err(GaborError::InvalidParameter("envelope points must be positive and finite".into()));
    }

    let mut best: Option<StretchedExpFit<T>> = None;
    let mut r = r_min;
    while r <= r_max + r_step * T::of(0.5) {
        let xs: Vec<T> = logs.iter().map(|&(rho, _)| -rho.powf(r)).collect();
        let ys: Vec<T> = logs.iter().map(|&(_, la)| la).collect();
        if let Some((intercept, slope, rms)) = linear_fit(&xs, &ys) {
            if slope > T::zero() {
                let candidate = StretchedExpFit {
                    c: intercept.exp(),
                    eps: slope,
                    r,
                    residual: rms,
                };
                if best.map_or(true, |b| rms < b.residual) {
                    best = Some(candidate);
                }
            }
        }
        r += r_step;
    }
    best.ok_or_else(|| {
        GaborError::InsufficientData("no exponent in the search grid yields a decaying fit".into())
    })
}

/// Ordinary least squares `y = intercept + slope * x`; returns the RMS
/// residual as the third component. `None` for degenerate abscissae.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Option<(T, T, T)> {
    let n = T::from_usize(xs.len())?;
    if xs.len() < 2 {
        return None;
    }
    let mean_x = xs.iter().copied().sum::<T>() / n;
    let mean_y = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mean_x) * (x - mean_x);
        sxy = sxy + (x - mean_x) * (y - mean_y);
    }
    if !(sxx > T::zero()) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (intercept + slope * x);
        ss = ss + e * e;
    }
    Some((intercept, slope, (ss / n).sqrt()))
}

/// Pearson correlation coefficient.
pub fn correlation<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    let n = T::from_usize(xs.len())?;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut syy = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        syy = syy + (y - my) * (y - my);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx > T::zero() && syy > T::zero() {
        Some(sxy / (sxx * syy).sqrt())
    } else {
        None
    }
}
