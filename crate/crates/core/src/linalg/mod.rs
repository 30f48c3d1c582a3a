//! Dense complex linear algebra on square operators.
//!
//! Everything here is backed by `faer`. The wrappers fix the conventions the
//! rest of the crate relies on: eigenvalues ascending, singular values
//! nonincreasing, eigenvectors unit 2-norm, and cutoffs relative to the
//! largest eigenvalue.

mod bessel;
mod simd;

pub use bessel::{bessel_j0, bessel_j0_zeros, BESSEL_J0_MAX_ARG};

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

/// Relative eigenvalue cutoff used by [`pseudo_solve`] when none is given.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Relative tolerance on the Hermitian defect accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenbasis condition number above which [`eig_general`] flags a matrix as
/// (numerically) defective.
const DEFECTIVE_CONDITION: f64 = 1e8;

/// A dense complex square matrix with a provenance label.
#[derive(Clone, Debug)]
pub struct Operator {
    entries: Mat<c64>,
    label: String,
}

impl Operator {
    /// Wraps a matrix, checking that it is square, nonempty and finite.
    pub fn new(entries: Mat<c64>, label: impl Into<String>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::Dimension("operator dimension must be positive".into()));
        }
        for j in 0..entries.ncols() {
            for i in 0..entries.nrows() {
                let z = entries[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self {
            entries,
            label: label.into(),
        })
    }

    pub fn from_fn(
        dim: usize,
        label: impl Into<String>,
        f: impl FnMut(usize, usize) -> c64,
    ) -> Result<Self> {
        Self::new(Mat::from_fn(dim, dim, f), label)
    }

    pub fn from_real_fn(
        dim: usize,
        label: impl Into<String>,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::from_fn(dim, label, |i, j| c64::new(f(i, j), 0.0))
    }

    /// Builds an operator from a row-major nested slice of real entries.
    pub fn from_real_rows(rows: &[&[f64]], label: impl Into<String>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows must form a square matrix".into()));
        }
        Self::from_real_fn(n, label, |i, j| rows[i][j])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_real_fn(dim, "identity", |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_real_fn(dim, "zero", |_, _| 0.0)
    }

    pub fn from_diagonal(diag: &[c64], label: impl Into<String>) -> Result<Self> {
        Self::from_fn(diag.len(), label, |i, j| {
            if i == j {
                diag[i]
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real_diagonal(diag: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::from_real_fn(diag.len(), label, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.entries[(row, col)]
    }

    pub fn matrix(&self) -> faer::MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Appends a bracketed note to the label.
    pub fn annotate(&mut self, note: &str) {
        self.label.push_str(" [");
        self.label.push_str(note);
        self.label.push(']');
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            entries: self.entries.adjoint().to_owned(),
            label: format!("{}^dagger", self.label),
        }
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator {
            entries: Mat::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] * factor),
            label: format!("{factor}*{}", self.label),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator {
            entries: &self.entries + &other.entries,
            label: format!("{}+{}", self.label, other.label),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator {
            entries: &self.entries - &other.entries,
            label: format!("{}-{}", self.label, other.label),
        })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator {
            entries: simd::settle(&self.entries * &other.entries),
            label: format!("{}*{}", self.label, other.label),
        })
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "operator dimensions differ: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Largest entrywise deviation from Hermiticity, `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// True when the Hermitian defect is below `rel_tol * ||A||_F`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_defect() <= rel_tol * self.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm_l2()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[c64]) -> Result<Vec<c64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector length {} does not match operator dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(mat_vec(self.entries.as_ref(), x))
    }
}

pub(crate) fn mat_vec(a: faer::MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

/// `a^dagger x`.
pub(crate) fn adjoint_mat_vec(a: faer::MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    (0..a.ncols())
        .map(|j| {
            let mut acc = c64::new(0.0, 0.0);
            for (i, &xi) in x.iter().enumerate() {
                acc += a[(i, j)].conj() * xi;
            }
            acc
        })
        .collect()
}

pub fn vec_norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Mat<c64>,
}

impl HermitianEig {
    pub fn vector(&self, k: usize) -> Vec<c64> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// Right eigenpairs of a general square matrix.
#[derive(Clone, Debug)]
pub struct GeneralEig {
    /// Sorted by real part, then imaginary part.
    pub values: Vec<c64>,
    /// Unit-norm right eigenvectors as columns.
    pub vectors: Mat<c64>,
    /// Set when the computed eigenbasis is numerically singular.
    pub defective: bool,
    /// Largest residual `||H psi - E psi||_2` over all pairs.
    pub max_residual: f64,
    pub label: String,
}

impl GeneralEig {
    pub fn vector(&self, k: usize) -> Vec<c64> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// Full singular value decomposition `H = U diag(sigma) V^dagger`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub left_vectors: Mat<c64>,
    pub right_vectors: Mat<c64>,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Mat<c64> {
        let n = self.singular_values.len();
        let us = Mat::from_fn(n, n, |i, j| self.left_vectors[(i, j)] * self.singular_values[j]);
        &us * self.right_vectors.adjoint()
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// `H^dagger H`, returned exactly Hermitian.
pub fn normal_operator(h: &Operator) -> Result<Operator> {
    let n = h.dim();
    let product = simd::settle(h.entries.adjoint() * &h.entries);
    // Symmetrize so downstream Hermitian solvers see an exactly Hermitian input.
    let entries = Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(product[(i, i)].re, 0.0)
        } else {
            (product[(i, j)] + product[(j, i)].conj()) * 0.5
        }
    });
    Operator::new(entries, format!("{}^dagger {}", h.label, h.label))
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn eig_hermitian(a: &Operator) -> Result<HermitianEig> {
    let tolerance = HERMITIAN_TOL * a.frobenius_norm();
    let asymmetry = a.hermitian_defect();
    if asymmetry > tolerance {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance,
        });
    }
    let n = a.dim();
    let sym = Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(a.entries[(i, i)].re, 0.0)
        } else {
            (a.entries[(i, j)] + a.entries[(j, i)].conj()) * 0.5
        }
    });
    let evd = simd::settle(sym.self_adjoint_eigen(Side::Lower))
        .map_err(|e| Error::Decomposition(format!("self-adjoint eigensolver: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok(HermitianEig {
        values,
        vectors: evd.U().to_owned(),
    })
}

/// Eigenvalues only of a Hermitian operator, ascending.
pub fn eigvals_hermitian(a: &Operator) -> Result<Vec<f64>> {
    let tolerance = HERMITIAN_TOL * a.frobenius_norm();
    let asymmetry = a.hermitian_defect();
    if asymmetry > tolerance {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance,
        });
    }
    simd::settle(a.entries.self_adjoint_eigenvalues(Side::Lower))
        .map_err(|e| Error::Decomposition(format!("self-adjoint eigensolver: {e:?}")))
}

/// Right eigenpairs of a general operator.
///
/// Defective and strongly non-normal matrices are not rejected; the result is
/// flagged instead and the label records the eigenbasis condition number.
pub fn eig_general(h: &Operator) -> Result<GeneralEig> {
    let n = h.dim();
    let evd = simd::settle(h.entries.eigen())
        .map_err(|e| Error::Decomposition(format!("general eigensolver: {e:?}")))?;
    let raw_values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let raw_vectors = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw_values[a]
            .re
            .total_cmp(&raw_values[b].re)
            .then(raw_values[a].im.total_cmp(&raw_values[b].im))
    });

    let values: Vec<c64> = order.iter().map(|&k| raw_values[k]).collect();
    let mut vectors = Mat::<c64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let norm = (0..n).map(|i| raw_vectors[(i, src)].norm_sqr()).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for i in 0..n {
            vectors[(i, dst)] = raw_vectors[(i, src)] * scale;
        }
    }

    let mut max_residual = 0.0_f64;
    let hv = simd::settle(&h.entries * &vectors);
    for k in 0..n {
        let r = (0..n)
            .map(|i| (hv[(i, k)] - vectors[(i, k)] * values[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
    }

    let basis_sv = simd::settle(vectors.singular_values())
        .map_err(|e| Error::Decomposition(format!("eigenbasis svd: {e:?}")))?;
    let smax = basis_sv.first().copied().unwrap_or(0.0);
    let smin = basis_sv.last().copied().unwrap_or(0.0);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let defective = !(condition < DEFECTIVE_CONDITION);

    let mut label = format!("eig({})", h.label);
    if defective {
        label.push_str(&format!(" [near-defective: eigenbasis condition {condition:.3e}]"));
    }
    Ok(GeneralEig {
        values,
        vectors,
        defective,
        max_residual,
        label,
    })
}

/// Full SVD with singular values nonincreasing.
pub fn svd(h: &Operator) -> Result<SvdResult> {
    let dec = simd::settle(h.entries.svd())
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let singular_values = dec.S().column_vector().iter().map(|z| z.re.max(0.0)).collect();
    Ok(SvdResult {
        singular_values,
        left_vectors: dec.U().to_owned(),
        right_vectors: dec.V().to_owned(),
    })
}

/// Singular values only, nonincreasing.
pub fn singular_values(h: &Operator) -> Result<Vec<f64>> {
    simd::settle(h.entries.singular_values())
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))
}

pub fn smallest_singular_value(h: &Operator) -> Result<f64> {
    Ok(singular_values(h)?.last().copied().unwrap_or(0.0).max(0.0))
}

/// Result of a Moore-Penrose solve on a Hermitian PSD operator.
#[derive(Clone, Debug)]
pub struct PseudoSolution {
    pub x: Vec<c64>,
    /// Absolute eigenvalue threshold, `rcond * lambda_max`.
    pub cutoff: f64,
    pub kept_rank: usize,
    pub discarded_rank: usize,
    /// True when every eigenvalue fell below the cutoff; `x` is then zero.
    pub degenerate: bool,
}

/// `A^+ b` for Hermitian PSD `A`, inverting only eigenvalues above
/// `rcond * lambda_max`.
pub fn pseudo_solve(a: &Operator, b: &[c64], rcond: f64) -> Result<PseudoSolution> {
    if b.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "right-hand side length {} does not match dimension {}",
            b.len(),
            a.dim()
        )));
    }
    if !(rcond > 0.0 && rcond < 1.0) {
        return Err(Error::Range(format!("rcond must lie in (0, 1), got {rcond}")));
    }
    let eig = eig_hermitian(a)?;
    let n = a.dim();
    let lambda_max = eig.values.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = rcond * lambda_max;
    let coeffs = adjoint_mat_vec(eig.vectors.as_ref(), b);

    let mut scaled = vec![c64::new(0.0, 0.0); n];
    let mut kept = 0;
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda_max > 0.0 && lambda > cutoff {
            scaled[k] = coeffs[k] / lambda;
            kept += 1;
        }
    }
    let x = mat_vec(eig.vectors.as_ref(), &scaled);
    Ok(PseudoSolution {
        x,
        cutoff,
        kept_rank: kept,
        discarded_rank: n - kept,
        degenerate: kept == 0,
    })
}
