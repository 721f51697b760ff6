//! Roots of monic complex polynomials via the companion matrix.

use crate::error::Result;
use crate::linalg::{hessenberg_eigenvalues, CMatrix};
use crate::real::Real;
use num_complex::Complex;

/// All roots (with multiplicity) of
/// `z^m + c[m-1] z^{m-1} + ... + c[1] z + c[0]`.
///
/// Exact zero roots are stripped first, the remaining polynomial is rescaled
/// so its companion matrix stays well-conditioned at large coefficients, and
/// well-separated roots get one Newton polish on the original polynomial.
pub fn monic_roots<T: Real>(coeffs_low_to_high: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let m = coeffs_low_to_high.len();
    let mut roots = Vec::with_capacity(m);
    let mut coeffs: Vec<Complex<T>> = coeffs_low_to_high.to_vec();

    while !coeffs.is_empty() && coeffs[0].norm_sqr() == T::zero() {
        roots.push(Complex::new(T::zero(), T::zero()));
        coeffs.remove(0);
    }
    if coeffs.is_empty() {
        return Ok(roots);
    }

    // scale z = s w with s = max_i |c_i|^{1/(deg - i)} keeps |scaled c| <= 1
    let deg = coeffs.len();
    let mut scale = T::zero();
    for (i, c) in coeffs.iter().enumerate() {
        let p = T::one() / T::from_usize(deg - i).unwrap();
        scale = scale.max(c.norm().powf(p));
    }
    if !scale.is_finite() {
        return Err(crate::GaborError::RootFinding(
            "coefficient overflow while scaling".into(),
        ));
    }
    let scale = if scale > T::zero() { scale } else { T::one() };
    // component-wise scalar division avoids overflow in |s^k|^2
    let scaled: Vec<Complex<T>> = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut v = c;
            for _ in 0..(deg - i) {
                v = Complex::new(v.re / scale, v.im / scale);
            }
            v
        })
        .collect();

    let comp = CMatrix::companion(&scaled);
    let eigs = hessenberg_eigenvalues(comp)?;
    let refined = eigs.into_iter().map(|w| {
        let z = w * scale;
        newton_polish(coeffs_low_to_high, z)
    });
    roots.extend(refined);
    Ok(roots)
}

/// One guarded Newton step on the original monic polynomial.
fn newton_polish<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    let (p, dp) = eval_monic_with_derivative(coeffs, z);
    if dp.norm() <= T::min_positive_value().sqrt() {
        return z;
    }
    let step = p / dp;
    if step.re.is_finite() && step.im.is_finite() && step.norm() < T::of(0.1) * (T::one() + z.norm()) {
        z - step
    } else {
        z
    }
}

/// Evaluate the monic polynomial and its derivative by Horner.
pub fn eval_monic_with_derivative<T: Real>(
    coeffs_low_to_high: &[Complex<T>],
    z: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let one = Complex::new(T::one(), T::zero());
    let mut p = one;
    let mut dp = Complex::new(T::zero(), T::zero());
    for &c in coeffs_low_to_high.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Expand `prod_j (z - r_j)` into monic coefficients, low to high.
pub fn expand_monic<T: Real>(roots: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut coeffs = vec![Complex::new(T::one(), T::zero())];
    for &r in roots {
        let mut next = vec![Complex::new(T::zero(), T::zero()); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        coeffs = next;
    }
    coeffs.pop(); // drop the leading 1
    coeffs
}
