//! Small dense complex matrices: LU solves, the scaling-and-squaring matrix
//! exponential, and a shifted-QR eigenvalue iteration for Hessenberg forms.
//!
//! Everything here targets the companion matrices of characteristic
//! polynomials, so `n` stays in the single digits.

use crate::error::{GaborError, Result};
use crate::real::Real;
use num_complex::Complex;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    pub n: usize,
    pub a: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            a: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Companion matrix of the monic polynomial
    /// `z^n + c[n-1] z^{n-1} + ... + c[0]` (coefficients low to high).
    pub fn companion(monic_low_to_high: &[Complex<T>]) -> Self {
        let n = monic_low_to_high.len();
        let mut m = CMatrix::zeros(n);
        for i in 1..n {
            m[(i, i - 1)] = Complex::new(T::one(), T::zero());
        }
        for i in 0..n {
            m[(i, n - 1)] = -monic_low_to_high[i];
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, c: T) {
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += y * c;
        }
    }

    pub fn scale(&mut self, c: Complex<T>) {
        for x in &mut self.a {
            *x = *x * c;
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let n = self.n;
        let mut best = T::zero();
        for j in 0..n {
            let mut s = T::zero();
            for i in 0..n {
                s = s + self[(i, j)].norm();
            }
            best = best.max(s);
        }
        best
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.a[i * self.n + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.a[i * self.n + j]
    }
}

/// Solve `A X = B` in place via LU with partial pivoting; returns `X`.
pub fn lu_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.n;
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[(col, col)].norm();
        for r in col + 1..n {
            let v = lu[(r, col)].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if !(best > T::zero()) {
            return Err(GaborError::RootFinding("singular matrix in LU solve".into()));
        }
        if pivot != col {
            for j in 0..n {
                lu.a.swap(col * n + j, pivot * n + j);
                x.a.swap(col * n + j, pivot * n + j);
            }
            perm.swap(col, pivot);
        }
        let inv = lu[(col, col)].inv();
        for r in col + 1..n {
            let factor = lu[(r, col)] * inv;
            lu[(r, col)] = factor;
            for j in col + 1..n {
                let sub = factor * lu[(col, j)];
                lu[(r, j)] -= sub;
            }
            for j in 0..n {
                let sub = factor * x[(col, j)];
                x[(r, j)] -= sub;
            }
        }
    }
    // back substitution
    for col in (0..n).rev() {
        let inv = lu[(col, col)].inv();
        for j in 0..n {
            x[(col, j)] = x[(col, j)] * inv;
        }
        for r in 0..col {
            let factor = lu[(r, col)];
            for j in 0..n {
                let sub = factor * x[(col, j)];
                x[(r, j)] -= sub;
            }
        }
    }
    Ok(x)
}

/// Matrix exponential by Pade(13) with scaling and squaring.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    const PADE13: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let theta13 = 5.371920351148152f64;
    let n = a.n;
    let norm = a.norm_one().to_f64().unwrap_or(f64::INFINITY);
    if !norm.is_finite() {
        return Err(GaborError::RootFinding("non-finite matrix in expm".into()));
    }
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let mut m = a.clone();
    m.scale(Complex::new(T::of(0.5f64.powi(s as i32)), T::zero()));

    let b: Vec<T> = PADE13.iter().map(|&c| T::of(c)).collect();
    let m2 = m.mul(&m);
    let m4 = m2.mul(&m2);
    let m6 = m2.mul(&m4);

    // U = M (M6 (b13 M6 + b11 M4 + b9 M2) + b7 M6 + b5 M4 + b3 M2 + b1 I)
    let mut inner = CMatrix::zeros(n);
    inner.add_scaled(&m6, b[13]);
    inner.add_scaled(&m4, b[11]);
    inner.add_scaled(&m2, b[9]);
    let mut u = m6.mul(&inner);
    u.add_scaled(&m6, b[7]);
    u.add_scaled(&m4, b[5]);
    u.add_scaled(&m2, b[3]);
    u.add_scaled(&CMatrix::identity(n), b[1]);
    let u = m.mul(&u);

    // V = M6 (b12 M6 + b10 M4 + b8 M2) + b6 M6 + b4 M4 + b2 M2 + b0 I
    let mut inner = CMatrix::zeros(n);
    inner.add_scaled(&m6, b[12]);
    inner.add_scaled(&m4, b[10]);
    inner.add_scaled(&m2, b[8]);
    let mut v = m6.mul(&inner);
    v.add_scaled(&m6, b[6]);
    v.add_scaled(&m4, b[4]);
    v.add_scaled(&m2, b[2]);
    v.add_scaled(&CMatrix::identity(n), b[0]);

    // (V - U)^{-1} (V + U)
    let mut vmu = v.clone();
    vmu.add_scaled(&u, -T::one());
    let mut vpu = v;
    vpu.add_scaled(&u, T::one());
    let mut result = lu_solve(&vmu, &vpu)?;
    for _ in 0..s {
        result = result.mul(&result);
    }
    Ok(result)
}

/// Eigenvalues of an upper Hessenberg matrix by complex single-shift QR
/// with Wilkinson shifts and occasional exceptional shifts.
pub fn hessenberg_eigenvalues<T: Real>(mut h: CMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = h.n;
    let mut eigs = vec![Complex::new(T::zero(), T::zero()); n];
    if n == 0 {
        return Ok(eigs);
    }
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total_iters = 0usize;
    let max_iters = 80 * n.max(4);

    loop {
        // zero out negligible subdiagonals
        for k in 1..=hi {
            let tol = eps * (h[(k - 1, k - 1)].norm() + h[(k, k)].norm()) + T::min_positive_value();
            if h[(k, k - 1)].norm() <= tol {
                h[(k, k - 1)] = Complex::new(T::zero(), T::zero());
            }
        }
        // deflate converged 1x1 blocks from the bottom
        while hi > 0 && h[(hi, hi - 1)].norm_sqr() == T::zero() {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            iter_since_deflation = 0;
        }
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            return Ok(eigs);
        }
        // locate the start of the active irreducible block
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)].norm_sqr() > T::zero() {
            lo -= 1;
        }
        if hi - lo == 1 {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs[lo] = l1;
            eigs[hi] = l2;
            if lo == 0 {
                return Ok(eigs);
            }
            hi = lo - 1;
            iter_since_deflation = 0;
            continue;
        }

        total_iters += 1;
        iter_since_deflation += 1;
        if total_iters > max_iters {
            return Err(GaborError::RootFinding(format!(
                "QR iteration exceeded {max_iters} sweeps"
            )));
        }

        let shift = if iter_since_deflation % 12 == 0 {
            // exceptional shift breaks symmetry-induced stagnation
            let mag = h[(hi, hi - 1)].norm() + if hi > 1 { h[(hi - 1, hi - 2)].norm() } else { T::zero() };
            h[(hi, hi)] + Complex::new(T::of(1.5) * mag, T::of(0.5) * mag)
        } else {
            let (l1, l2) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let target = h[(hi, hi)];
            if (l1 - target).norm() <= (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };

        qr_sweep(&mut h, lo, hi, shift);
    }
}

/// Eigenvalues of `[[a, b], [c, d]]`.
fn eig2<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let half = T::of(0.5);
    let mean = (a + d) * half;
    let diff = (a - d) * half;
    let disc = (diff * diff + b * c).sqrt();
    (mean + disc, mean - disc)
}

/// One explicit shifted QR sweep `H - sI = QR`, `H := RQ + sI` on the active
/// block, using Givens rotations down the subdiagonal.
fn qr_sweep<T: Real>(h: &mut CMatrix<T>, lo: usize, hi: usize, shift: Complex<T>) {
    let n = h.n;
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    // forward pass: rotations G_i acting on rows (i, i+1)
    let mut rots: Vec<(Complex<T>, Complex<T>)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r > T::zero() {
            (a / r, b / r)
        } else {
            (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))
        };
        rots.push((c, s));
        for j in i..n.min(hi + 1) {
            let x = h[(i, j)];
            let y = h[(i + 1, j)];
            h[(i, j)] = x * c.conj() + y * s.conj();
            h[(i + 1, j)] = -(x * s) + y * c;
        }
    }
    // backward pass: H := R Q, applying G_i^H on columns (i, i+1)
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        for r in lo..=(i + 1).min(hi) {
            let x = h[(r, i)];
            let y = h[(r, i + 1)];
            h[(r, i)] = x * c + y * s;
            h[(r, i + 1)] = -(x * s.conj()) + y * c.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}
