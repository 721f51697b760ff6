//! Forward Cauchy solvers: the dense spectral reference and the sparse
//! Gabor-matrix route, plus the accuracy/sparsity reporting around them.

use crate::error::{GaborError, Result};
use crate::fft::{forward_transform, inverse_transform, FftEngine};
use crate::frame::{canonical_dual_of, DualWindow, GaborFrame};
use crate::gabor_matrix::{multiplier_matrix_fn, GaborMatrix, MatrixAssemblyConfig};
use crate::grid::{Grid, SampledField};
use crate::lattice::Lattice;
use crate::operator::OperatorSpec;
use crate::real::Real;
use crate::symbols::{hp_check, PropagatorSymbol};
use crate::window::WindowSpec;
use num_complex::Complex;

/// Initial data `u_0 ... u_{m-1}` on a common grid.
#[derive(Debug, Clone)]
pub struct CauchyData<T: Real> {
    fields: Vec<SampledField<T>>,
}

impl<T: Real> CauchyData<T> {
    pub fn new(fields: Vec<SampledField<T>>) -> Result<Self> {
        if fields.is_empty() {
            return Err(GaborError::EmptyInput("no initial data".into()));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| f.grid() != &grid) {
            return Err(GaborError::GridMismatch("initial data on different grids".into()));
        }
        Ok(CauchyData { fields })
    }

    pub fn order(&self) -> usize {
        self.fields.len()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.fields[0].grid()
    }

    pub fn fields(&self) -> &[SampledField<T>] {
        &self.fields
    }
}

/// Apply a Fourier multiplier `sigma(D)` spectrally on the grid.
pub fn apply_multiplier_fn<T: Real>(
    field: &SampledField<T>,
    symbol: impl Fn(&[T]) -> Result<Complex<T>>,
) -> Result<SampledField<T>> {
    let grid = *field.grid();
    let n = grid.samples_per_axis();
    let engine = FftEngine::new(n);
    let mut spec = forward_transform(field, &engine);
    for (flat, v) in spec.iter_mut().enumerate() {
        let mut rem = flat;
        let mut xi = vec![T::zero(); grid.dim()];
        for a in (0..grid.dim()).rev() {
            xi[a] = grid.freq_at_bin(rem % n);
            rem /= n;
        }
        *v = *v * symbol(&xi)?;
    }
    Ok(inverse_transform(grid, &spec, &engine))
}

/// Check the forward well-posedness condition over the grid frequencies.
fn hp_on_grid<T: Real>(spec: &OperatorSpec<T>, grid: &Grid<T>) -> Result<()> {
    let n = grid.samples_per_axis();
    // axis grid suffices: coefficients are polynomials in |xi|^2 directions
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let mut xi = vec![T::zero(); grid.dim()];
        xi[0] = grid.freq_at_bin(k);
        pts.push(xi);
    }
    if grid.dim() > 1 {
        let inv = T::from_usize(grid.dim()).unwrap().sqrt().recip();
        for k in 0..n {
            let f = grid.freq_at_bin(k);
            pts.push(vec![f * inv; grid.dim()]);
        }
    }
    let report = hp_check(spec, &pts)?;
    if !report.holds {
        return Err(GaborError::IllPosed(format!(
            "Hadamard-Petrowsky deficit grows over the grid frequencies (C = {})",
            report.c
        )));
    }
    Ok(())
}

/// Dense spectral solution
/// `u(t) = sum_k d_t^k E(t) * (u_{m-1-k} + sum_j a_j(D) u_{m-k-1-j})`,
/// everything applied diagonally in the frequency domain.
pub fn spectral_solve<T: Real>(
    spec: &OperatorSpec<T>,
    data: &CauchyData<T>,
    t: T,
) -> Result<SampledField<T>> {
    if t < T::zero() {
        return Err(GaborError::NegativeTime);
    }
    let m = spec.order();
    if data.order() != m {
        return Err(GaborError::InvalidParameter(format!(
            "{} initial fields for an order-{m} operator",
            data.order()
        )));
    }
    let grid = *data.grid();
    if spec.dim() != grid.dim() {
        return Err(GaborError::GridMismatch("operator and grid dimensions differ".into()));
    }
    hp_on_grid(spec, &grid)?;

    let sym = PropagatorSymbol::new(spec.clone(), t)?;
    let n = grid.samples_per_axis();
    let engine = FftEngine::new(n);
    let hats: Vec<Vec<Complex<T>>> = data
        .fields()
        .iter()
        .map(|f| forward_transform(f, &engine))
        .collect();

    let mut out_hat = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for (flat, slot) in out_hat.iter_mut().enumerate() {
        let mut rem = flat;
        let mut xi = vec![T::zero(); grid.dim()];
        for a in (0..grid.dim()).rev() {
            xi[a] = grid.freq_at_bin(rem % n);
            rem /= n;
        }
        let derivs = sym.eval_derivs(&xi)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..m {
            let mut bracket = hats[m - 1 - k][flat];
            for j in 1..=m - k - 1 {
                let aj = spec.coeff(j).eval_real(&xi);
                bracket += hats[m - k - 1 - j][flat] * aj;
            }
            acc += derivs[k] * bracket;
        }
        *slot = acc;
    }
    Ok(inverse_transform(grid, &out_hat, &engine))
}

/// One term of the solution formula: the datum index it consumes and the
/// sparse Gabor matrix of its (pointwise-multiplied) total symbol.
pub struct PropagatorTerm<T: Real> {
    pub datum: usize,
    pub matrix: GaborMatrix<T>,
}

/// Sparse propagator: per-term Gabor matrices plus the frame handles used to
/// move between fields and coefficients.
pub struct SparsePropagator<T: Real> {
    pub terms: Vec<PropagatorTerm<T>>,
    pub frame: GaborFrame<T>,
    pub dual: DualWindow<T>,
    pub threshold: T,
    pub band_radius: Option<T>,
    pub assembly_ms: f64,
}

/// Assemble the per-term multiplier matrices, dropping entries below the
/// threshold (and outside the band radius, when given).
///
/// Each term's total symbol `d_t^k sigma * a_j` is multiplied pointwise
/// before assembly, so nothing is ever composed at the matrix level.
pub fn build_sparse_propagator<T: Real>(
    spec: &OperatorSpec<T>,
    t: T,
    window: &WindowSpec<T>,
    lattice: &Lattice<T>,
    grid: &Grid<T>,
    threshold: T,
    band_radius: Option<T>,
) -> Result<SparsePropagator<T>> {
    if t < T::zero() {
        return Err(GaborError::NegativeTime);
    }
    let started = std::time::Instant::now();
    let m = spec.order();
    let frame = GaborFrame::new(window, lattice, grid)?;
    let dual = canonical_dual_of(&frame)?;
    if !dual.converged {
        return Err(GaborError::NoConvergence("canonical dual did not converge".into()));
    }
    let sym = PropagatorSymbol::new(spec.clone(), t)?;

    let mut cfg = MatrixAssemblyConfig::for_grid(grid)
        .with_threshold(threshold)
        .periodized();
    if let Some(b) = band_radius {
        cfg = cfg.with_band_radius(b);
    }

    let mut terms = Vec::new();
    for k in 0..m {
        // datum u_{m-1-k} with symbol d_t^k sigma
        let matrix = multiplier_matrix_fn(
            |xi| Ok(sym.eval_derivs(xi)?[k]),
            window,
            lattice,
            &cfg,
        )?;
        ensure_diagonal(&matrix, threshold)?;
        terms.push(PropagatorTerm {
            datum: m - 1 - k,
            matrix,
        });
        for j in 1..=m - k - 1 {
            if spec.coeff(j).is_zero() {
                continue;
            }
            let matrix = multiplier_matrix_fn(
                |xi| {
                    let aj = spec.coeff(j).eval_real(xi);
                    Ok(sym.eval_derivs(xi)?[k] * aj)
                },
                window,
                lattice,
                &cfg,
            )?;
            terms.push(PropagatorTerm {
                datum: m - k - 1 - j,
                matrix,
            });
        }
    }
    Ok(SparsePropagator {
        terms,
        frame,
        dual,
        threshold,
        band_radius,
        assembly_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// A pruned matrix must keep at least part of its diagonal; losing all of it
/// means the threshold swallowed the operator.
fn ensure_diagonal<T: Real>(matrix: &GaborMatrix<T>, threshold: T) -> Result<()> {
    let any_diag = (0..matrix.points.len() as u32).any(|i| matrix.get(i, i).is_some());
    if !any_diag {
        return Err(GaborError::InvalidParameter(format!(
            "threshold {threshold} drops the entire diagonal"
        )));
    }
    Ok(())
}

/// Accuracy and cost of one sparse solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T: Real> {
    pub rel_error_vs_spectral: T,
    pub nnz: usize,
    pub assembly_ms: f64,
    pub apply_ms: f64,
    pub threshold: T,
    pub band_radius: Option<T>,
}

/// Solve by frame decomposition: dual-window analysis of each datum, one
/// sparse matrix-vector product per term, dual-window synthesis of the sum.
pub fn gabor_solve<T: Real>(
    prop: &SparsePropagator<T>,
    data: &CauchyData<T>,
) -> Result<SampledField<T>> {
    if data.grid() != prop.frame.grid() {
        return Err(GaborError::GridMismatch("data grid differs from frame grid".into()));
    }
    let npts = prop.frame.points().len();
    for term in &prop.terms {
        if term.matrix.points.len() != npts {
            return Err(GaborError::LatticeMismatch(
                "propagator matrices and frame enumerate different lattices".into(),
            ));
        }
        if term.datum >= data.order() {
            return Err(GaborError::InvalidParameter(format!(
                "term consumes datum {} but only {} provided",
                term.datum,
                data.order()
            )));
        }
    }
    // dual-window analysis c = <u, pi(lambda) gamma> makes
    // u = sum c_lambda pi(lambda) g exact within frame tolerance
    let mut coeffs: Vec<Option<Vec<Complex<T>>>> = vec![None; data.order()];
    let mut acc = vec![Complex::new(T::zero(), T::zero()); npts];
    for term in &prop.terms {
        if coeffs[term.datum].is_none() {
            let c = prop
                .frame
                .analysis_with(&data.fields()[term.datum], &prop.dual.field)?;
            coeffs[term.datum] = Some(c.values);
        }
        let c = coeffs[term.datum].as_ref().unwrap();
        let product = term.matrix.apply(c)?;
        for (a, p) in acc.iter_mut().zip(product) {
            *a += p;
        }
    }
    prop.frame.synthesis(&acc, &prop.dual.field)
}

/// Run both solvers and report the comparison.
pub fn solve_with_report<T: Real>(
    spec: &OperatorSpec<T>,
    prop: &SparsePropagator<T>,
    data: &CauchyData<T>,
    t: T,
) -> Result<(SampledField<T>, SolveReport<T>)> {
    let started = std::time::Instant::now();
    let sparse = gabor_solve(prop, data)?;
    let apply_ms = started.elapsed().as_secs_f64() * 1e3;
    let reference = spectral_solve(spec, data, t)?;
    let rel = sparse.rel_error(&reference);
    let nnz = prop.terms.iter().map(|t| t.matrix.nnz()).sum();
    Ok((
        sparse,
        SolveReport {
            rel_error_vs_spectral: rel,
            nnz,
            assembly_ms: prop.assembly_ms,
            apply_ms,
            threshold: prop.threshold,
            band_radius: prop.band_radius,
        },
    ))
}
