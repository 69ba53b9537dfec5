//! Dense Hermitian linear algebra on finite-dimensional spaces.
//!
//! This module carries all the operator calculus the coding bounds are
//! built from: spectral decomposition and spectral functions, the
//! noncommutative minimal `A ∧ B = (A + B − |A − B|)/2`, maximal
//! `A ∨ B = (A + B + |A − B|)/2`, and quotient `A / B = B^{-1/2} A B^{-1/2}`
//! (inverse on the support of `B`), plus tensor products, partial traces,
//! direct sums, and factor permutations over declared subsystem shapes.
//!
//! Everything is immutable and pure; values are safe to share across
//! threads.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Construction-time Hermiticity gate (max absolute entry deviation).
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Negative eigenvalues above this bound are treated as roundoff and
/// clipped to zero by PSD-gated operations; anything lower is rejected.
pub const PSD_CLIP_TOL: f64 = 1e-10;

/// Tensor ordering is A-major throughout: in `A ⊗ B`, the index of `A`
/// varies slower, i.e. `(A ⊗ B)[i*dB + k, j*dB + l] = A[i,j] * B[k,l]`.
/// All multipartite code addresses factors through [`SubsystemShape`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::ShapeMismatch {
                shape: dims.to_vec(),
                product: 0,
                dim: 0,
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn check_matches(&self, dim: usize) -> Result<()> {
        if self.total_dim() != dim {
            return Err(Error::ShapeMismatch {
                shape: self.dims.clone(),
                product: self.total_dim(),
                dim,
            });
        }
        Ok(())
    }
}

/// A validated Hermitian operator.
///
/// Inputs are symmetrized as `(H + H†)/2` after passing the Hermiticity
/// tolerance gate, which removes eigensolver drift from downstream
/// consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    mat: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Validates Hermiticity within [`HERMITICITY_TOL`] and symmetrizes.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(mat, HERMITICITY_TOL)
    }

    pub fn with_tolerance(mat: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let mut worst = (0.0f64, 0usize, 0usize);
        for i in 0..rows {
            for j in i..rows {
                let dev = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
        }
        if worst.0 > tol {
            return Err(Error::NonHermitian {
                deviation: worst.0,
                row: worst.1,
                col: worst.2,
                tolerance: tol,
            });
        }
        Ok(Self::symmetrized(mat))
    }

    /// For internal use on matrices that are Hermitian by construction;
    /// still symmetrizes to shed accumulated roundoff.
    pub(crate) fn symmetrized(mat: DMatrix<Complex64>) -> Self {
        let dim = mat.nrows();
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Self { dim, mat: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: DMatrix::zeros(dim, dim),
        }
    }

    /// Diagonal operator from real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut mat = DMatrix::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { dim, mat }
    }

    /// Rank-1 projector `|psi><psi| / <psi|psi>`.
    pub fn pure_state(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::AllZero);
        }
        let dim = psi.len();
        let mut mat = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] = psi[i] * psi[j].conj() / norm2;
            }
        }
        Ok(Self { dim, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Trace; real by Hermiticity.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::symmetrized(&self.mat + &other.mat))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::symmetrized(&self.mat - &other.mat))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.scale(factor),
        }
    }

    /// `Tr[self · other]`; real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self.mat[(i, j)] * other.mat[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// `A · B · A` for Hermitian `A` (sandwich product, Hermitian again).
    pub fn sandwich(&self, middle: &Self) -> Result<Self> {
        self.check_dim(middle)?;
        Ok(Self::symmetrized(&self.mat * &middle.mat * &self.mat))
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// Minimum eigenvalue (used by PSD gates).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let spec = spectral_decompose(self)?;
        Ok(spec.eigenvalues()[0])
    }

    /// Checks `min eig >= -PSD_CLIP_TOL` and clips roundoff negatives to
    /// zero. Rejects anything more negative as a modeling error.
    pub fn psd_clipped(&self) -> Result<Self> {
        let spec = spectral_decompose(self)?;
        let min = spec.eigenvalues()[0];
        if min < -PSD_CLIP_TOL {
            return Err(Error::NotPSD {
                min_eigenvalue: min,
            });
        }
        if min >= 0.0 {
            return Ok(self.clone());
        }
        Ok(spec.rebuild_with(|x| x.max(0.0)))
    }

    /// Projector onto the support (eigenvalues above the cutoff).
    pub fn support_projector(&self, zero_cutoff: Option<f64>) -> Result<Self> {
        let spec = spectral_decompose(self)?;
        let cut = spec.resolve_cutoff(zero_cutoff);
        Ok(spec.rebuild_with(|x| if x.abs() <= cut { 0.0 } else { 1.0 }))
    }
}

/// Eigendecomposition of a [`HermitianOperator`], eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
    source_dim: usize,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Default scale-relative rank cutoff: `dim · max|λ| · 1e-12`.
    pub fn resolve_cutoff(&self, zero_cutoff: Option<f64>) -> f64 {
        zero_cutoff
            .unwrap_or_else(|| self.source_dim as f64 * self.max_abs_eigenvalue() * 1e-12)
    }

    /// Reassembles `U f(Λ) U†`.
    pub fn rebuild_with(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = self.source_dim;
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            let fv = f(self.eigenvalues[k]);
            if fv == 0.0 {
                continue;
            }
            let col = self.eigenvectors.column(k);
            for i in 0..d {
                let ci = col[i] * fv;
                for j in 0..d {
                    out[(i, j)] += ci * col[j].conj();
                }
            }
        }
        HermitianOperator::symmetrized(out)
    }

    /// Fallible variant of [`Self::rebuild_with`] for domain-gated maps.
    pub fn try_rebuild_with(
        &self,
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<HermitianOperator> {
        let mapped: Result<Vec<f64>> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mapped = mapped?;
        let d = self.source_dim;
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..d {
            let fv = mapped[k];
            if fv == 0.0 {
                continue;
            }
            let col = self.eigenvectors.column(k);
            for i in 0..d {
                let ci = col[i] * fv;
                for j in 0..d {
                    out[(i, j)] += ci * col[j].conj();
                }
            }
        }
        Ok(HermitianOperator::symmetrized(out))
    }
}

const EIGEN_MAX_ITER: usize = 4096;

/// Dense Hermitian eigendecomposition, eigenvalues ascending.
///
/// Deterministic for a fixed input and build: the solver is pure Rust
/// and the ascending sort breaks ties by solver output order.
pub fn spectral_decompose(h: &HermitianOperator) -> Result<Spectrum> {
    let eig = nalgebra::SymmetricEigen::try_new(h.mat.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::NumericalFailure)?;
    let d = h.dim;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        source_dim: d,
    })
}

/// Spectral function tags accepted by [`apply_spectral_function`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Abs,
    PositivePart,
    Power(f64),
    PseudoInvSqrt,
    Log,
}

/// Applies `U f(Λ) U†`. Eigenvalues with `|λ| <= zero_cutoff` are treated
/// as zero; `pseudo_inv_sqrt` and `log` map them to zero (support
/// convention). `None` selects the scale-relative default cutoff.
pub fn apply_spectral_function(
    h: &HermitianOperator,
    f: SpectralFn,
    zero_cutoff: Option<f64>,
) -> Result<HermitianOperator> {
    let spec = spectral_decompose(h)?;
    let cut = spec.resolve_cutoff(zero_cutoff);
    spec.try_rebuild_with(|x| {
        let x = if x.abs() <= cut { 0.0 } else { x };
        match f {
            SpectralFn::Abs => Ok(x.abs()),
            SpectralFn::PositivePart => Ok(x.max(0.0)),
            SpectralFn::Power(p) => {
                if x == 0.0 {
                    Ok(0.0)
                } else if x < 0.0 && (p < 1.0 || p.fract() != 0.0) {
                    Err(Error::DomainError {
                        f: "power",
                        eigenvalue: x,
                    })
                } else if x < 0.0 {
                    // integer power of a negative eigenvalue
                    Ok((-x).powf(p) * if (p as i64) % 2 == 0 { 1.0 } else { -1.0 })
                } else {
                    Ok(x.powf(p))
                }
            }
            SpectralFn::PseudoInvSqrt => {
                if x == 0.0 {
                    Ok(0.0)
                } else if x < 0.0 {
                    Err(Error::DomainError {
                        f: "pseudo_inv_sqrt",
                        eigenvalue: x,
                    })
                } else {
                    Ok(1.0 / x.sqrt())
                }
            }
            SpectralFn::Log => {
                if x == 0.0 {
                    Ok(0.0)
                } else if x < 0.0 {
                    Err(Error::DomainError {
                        f: "log",
                        eigenvalue: x,
                    })
                } else {
                    Ok(x.ln())
                }
            }
        }
    })
}

/// Noncommutative minimal `A ∧ B = (A + B − |A − B|)/2`.
///
/// `Tr[A ∧ B]` is the minimum two-outcome discrimination error between
/// `A` and `B`. PSD inputs are not required by the formula; callers that
/// need PSD gating enforce it themselves.
///
/// Evaluated as the algebraically identical `A − (A − B)_+`, which keeps
/// full resolution on the smaller operand when the two differ by many
/// orders of magnitude (large message counts scale one side by `M − 1`).
pub fn nc_min(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let diff = a.sub(b)?;
    let pos = apply_spectral_function(&diff, SpectralFn::PositivePart, None)?;
    a.sub(&pos)
}

/// Noncommutative maximal `A ∨ B = (A + B + |A − B|)/2`, evaluated as
/// `A + (B − A)_+`.
///
/// `nc_min(A,B) + nc_max(A,B) = A + B` holds as an operator identity.
pub fn nc_max(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let diff = b.sub(a)?;
    let pos = apply_spectral_function(&diff, SpectralFn::PositivePart, None)?;
    a.add(&pos)
}

/// Noncommutative quotient `A / B = B^{-1/2} A B^{-1/2}` with the
/// Moore–Penrose inverse taken on the support of `B`.
///
/// Both arguments are PSD-gated: roundoff negatives in
/// `[-PSD_CLIP_TOL, 0)` are clipped to zero, anything lower raises
/// [`Error::NotPSD`].
pub fn nc_quotient(
    a: &HermitianOperator,
    b: &HermitianOperator,
    zero_cutoff: Option<f64>,
) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let a = a.psd_clipped()?;
    let b = b.psd_clipped()?;
    let inv_sqrt = apply_spectral_function(&b, SpectralFn::PseudoInvSqrt, zero_cutoff)?;
    inv_sqrt.sandwich(&a)
}

/// Kronecker product with A-major ordering (the index of `A` varies
/// slower).
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrized(a.mat.kronecker(&b.mat))
}

/// Tensor product of a list of factors, left to right.
pub fn tensor_all(factors: &[&HermitianOperator]) -> HermitianOperator {
    assert!(!factors.is_empty(), "tensor_all needs at least one factor");
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = tensor_product(&acc, f);
    }
    acc
}

/// Partial trace keeping the factors listed in `keep` (original relative
/// order preserved).
pub fn partial_trace(
    a: &HermitianOperator,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<HermitianOperator> {
    shape.check_matches(a.dim())?;
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let n = shape.num_factors();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= n) {
        return Err(Error::FactorOutOfRange {
            index: bad,
            factors: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();

    let dims = shape.dims();
    // Strides of each factor in the full index (A-major: factor 0 slowest).
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_dim: usize = traced.iter().map(|&t| dims[t]).product();

    // Full-index offset of each kept (resp. traced) multi-index.
    let offsets = |factors: &[usize], linear: usize| -> usize {
        let mut rem = linear;
        let mut off = 0;
        for (pos, &f) in factors.iter().enumerate().rev() {
            let d = dims[f];
            let digit = rem % d;
            rem /= d;
            off += digit * strides[f];
            let _ = pos;
        }
        off
    };

    let mut out = DMatrix::<Complex64>::zeros(out_dim, out_dim);
    for row in 0..out_dim {
        let row_off = offsets(&keep_sorted, row);
        for col in 0..out_dim {
            let col_off = offsets(&keep_sorted, col);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let t_off = offsets(&traced, t);
                acc += a.mat[(row_off + t_off, col_off + t_off)];
            }
            out[(row, col)] = acc;
        }
    }
    Ok(HermitianOperator::symmetrized(out))
}

/// Block-diagonal direct sum `A ⊕ B`.
pub fn direct_sum(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let d = a.dim + b.dim;
    let mut out = DMatrix::zeros(d, d);
    out.view_mut((0, 0), (a.dim, a.dim)).copy_from(&a.mat);
    out.view_mut((a.dim, a.dim), (b.dim, b.dim)).copy_from(&b.mat);
    HermitianOperator { dim: d, mat: out }
}

/// Direct sum of a list of blocks.
pub fn direct_sum_all(blocks: &[&HermitianOperator]) -> HermitianOperator {
    assert!(!blocks.is_empty(), "direct_sum_all needs at least one block");
    let mut acc = blocks[0].clone();
    for b in &blocks[1..] {
        acc = direct_sum(&acc, b);
    }
    acc
}

/// Reorders tensor factors: the result's factor at position `p` is the
/// input factor `perm[p]`. Returns the permuted operator and its shape.
pub fn permute_factors(
    a: &HermitianOperator,
    shape: &SubsystemShape,
    perm: &[usize],
) -> Result<(HermitianOperator, SubsystemShape)> {
    shape.check_matches(a.dim())?;
    let n = shape.num_factors();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::FactorOutOfRange {
            index: perm.len(),
            factors: n,
        });
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::FactorOutOfRange {
                index: p,
                factors: n,
            });
        }
        seen[p] = true;
    }
    let dims = shape.dims();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();

    let mut old_strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }

    let total = a.dim();
    // map[new_linear] = old_linear
    let mut map = vec![0usize; total];
    for (new_linear, entry) in map.iter_mut().enumerate() {
        let mut rem = new_linear;
        let mut old = 0;
        for pos in (0..n).rev() {
            let d = new_dims[pos];
            let digit = rem % d;
            rem /= d;
            old += digit * old_strides[perm[pos]];
        }
        *entry = old;
    }
    let mut out = DMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            out[(i, j)] = a.mat[(map[i], map[j])];
        }
    }
    Ok((
        HermitianOperator {
            dim: total,
            mat: out,
        },
        SubsystemShape::new(&new_dims)?,
    ))
}
