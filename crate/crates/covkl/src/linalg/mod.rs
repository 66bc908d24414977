//! Dense symmetric-matrix primitives.
//!
//! Everything downstream (divergences, estimators, experiments) is built on
//! four types: [`SymmetricMatrix`] (packed lower triangle, symmetric by
//! construction), [`Spectrum`] (strictly positive eigenvalues with an
//! optional trace constraint), [`OrthonormalBasis`] (validated column set)
//! and [`Spd`] (a symmetric matrix bundled with its eigendecomposition,
//! gate-checked for positive definiteness).
//!
//! Inverses of reconstructed matrices are always formed spectrally,
//! `V diag(1/lambda) V'`, never by general matrix inversion.

mod eigen;
mod io;

pub use eigen::eigendecompose;

use crate::error::{Error, Result};

/// Relative SPD gate: smallest eigenvalue must exceed `SPD_RTOL` times the
/// largest, otherwise the input is rejected rather than regularized.
pub const SPD_RTOL: f64 = 1e-12;

/// Max-abs deviation tolerated when validating orthonormality of a basis.
pub const ORTHO_TOL: f64 = 1e-10;

/// Dense symmetric matrix storing only the lower triangle, so symmetry is
/// exact by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    /// Packed row-major lower triangle: entry (i, j) with j <= i lives at
    /// `i * (i + 1) / 2 + j`.
    lower: Vec<f64>,
}

impl SymmetricMatrix {
    fn packed_len(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        i * (i + 1) / 2 + j
    }

    /// Builds a matrix from its packed lower triangle (row-major).
    pub fn from_lower(dim: usize, lower: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        if lower.len() != Self::packed_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: Self::packed_len(dim),
                actual: lower.len(),
            });
        }
        Ok(Self { dim, lower })
    }

    /// Builds a matrix by evaluating `f(i, j)` on the lower triangle (j <= i).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        let mut lower = Vec::with_capacity(Self::packed_len(dim));
        for i in 0..dim {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        Ok(Self { dim, lower })
    }

    /// Builds a matrix from a full row-major array, verifying that it is
    /// exactly symmetric entry by entry.
    pub fn from_full(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: data.len() });
        }
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j}): {} vs {}",
                        data[i * dim + j],
                        data[j * dim + i]
                    )));
                }
            }
        }
        Self::from_fn(dim, |i, j| data[i * dim + j])
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 }).expect("dim >= 1")
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.lower[Self::idx(i, j)]
        } else {
            self.lower[Self::idx(j, i)]
        }
    }

    /// Diagonal entries.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.lower[Self::idx(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.lower[Self::idx(i, i)]).sum()
    }

    /// Full row-major copy (both triangles populated).
    pub fn to_full(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.lower[Self::idx(i, j)];
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// Matrix-vector product `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        let mut y = vec![0.0; self.dim];
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                let a = self.lower[k];
                k += 1;
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        Ok(y)
    }

    /// Quadratic form `x' A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.mul_vec(x)?;
        Ok(dot(x, &y))
    }

    /// Squared Frobenius distance `sum_ij (A_ij - B_ij)^2`.
    pub fn frobenius_distance_sq(&self, other: &Self) -> Result<f64> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: other.dim });
        }
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                let d = self.lower[k] - other.lower[k];
                k += 1;
                acc += if i == j { d * d } else { 2.0 * d * d };
            }
        }
        Ok(acc)
    }
}

/// Eigenvalue vector: strictly positive, with an optional trace constraint
/// (correlation-mode spectra sum to n).
///
/// Spectra produced by [`eigendecompose`] and by the population generators
/// are in descending order; spectra attached to a fixed basis (the oracle
/// `diag(V'CV)` and optimizer iterates) keep the basis ordering, since
/// reordering would break the pairing with the basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    trace_target: Option<f64>,
}

impl Spectrum {
    /// Builds a spectrum, requiring every value to be strictly positive and
    /// finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("spectrum must be non-empty".into()));
        }
        for (k, &v) in values.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "eigenvalue {k} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { values, trace_target: None })
    }

    /// Builds a spectrum carrying a trace constraint; the sum must match the
    /// target within `1e-10 * n`.
    pub fn with_trace_target(values: Vec<f64>, target: f64) -> Result<Self> {
        let s = Self::new(values)?;
        let sum: f64 = s.values.iter().sum();
        let n = s.values.len() as f64;
        if (sum - target).abs() > 1e-10 * n {
            return Err(Error::InvalidParameter(format!(
                "spectrum sum {sum} violates trace target {target} beyond 1e-10 * n"
            )));
        }
        Ok(Self { trace_target: Some(target), ..s })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn trace_target(&self) -> Option<f64> {
        self.trace_target
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Log-determinant as a sum of logs; no determinant is ever formed.
    pub fn log_det(&self) -> f64 {
        self.values.iter().map(|v| v.ln()).sum()
    }

    /// Reciprocal spectrum (trace target does not carry over).
    pub fn inverted(&self) -> Self {
        Self { values: self.values.iter().map(|v| 1.0 / v).collect(), trace_target: None }
    }

    pub fn is_descending(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Orthonormal column set, validated to `V'V = I` within [`ORTHO_TOL`]
/// in max-abs. Determinant may be -1: sample eigenvector matrices are
/// accepted as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    /// Column-major storage; column k occupies `cols[k*dim .. (k+1)*dim]`.
    cols: Vec<f64>,
}

impl OrthonormalBasis {
    /// Validates and wraps a column-major array.
    pub fn new(dim: usize, cols: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("basis dimension must be >= 1".into()));
        }
        if cols.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: cols.len() });
        }
        let b = Self { dim, cols };
        let dev = b.orthonormality_deviation();
        if dev > ORTHO_TOL {
            return Err(Error::InvalidParameter(format!(
                "columns are not orthonormal: max |V'V - I| = {dev:.3e}"
            )));
        }
        Ok(b)
    }

    /// Identity basis.
    pub fn identity(dim: usize) -> Self {
        let mut cols = vec![0.0; dim * dim];
        for k in 0..dim {
            cols[k * dim + k] = 1.0;
        }
        Self { dim, cols }
    }

    /// 2x2 rotation by `theta` radians (columns are the rotated axes).
    pub fn rotation_2d(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { dim: 2, cols: vec![c, s, -s, c] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Column k as a contiguous slice.
    #[inline]
    pub fn column(&self, k: usize) -> &[f64] {
        &self.cols[k * self.dim..(k + 1) * self.dim]
    }

    /// Entry (i, k) = component i of column k.
    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.cols[k * self.dim + i]
    }

    /// `V' x`: coordinates of `x` in the basis.
    pub fn transpose_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok((0..self.dim).map(|k| dot(self.column(k), x)).collect())
    }

    /// Max-abs deviation of `V'V` from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for a in 0..self.dim {
            for b in a..self.dim {
                let g = dot(self.column(a), self.column(b));
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((g - target).abs());
            }
        }
        dev
    }

    pub(crate) fn into_raw(self) -> Vec<f64> {
        self.cols
    }

    pub(crate) fn from_raw_unchecked(dim: usize, cols: Vec<f64>) -> Self {
        Self { dim, cols }
    }
}

/// Builds the rotational invariant estimator `Xi(Lambda) = V Lambda V'`.
///
/// The result is assembled on the lower triangle only, so it is symmetric
/// and positive definite by construction whenever the spectrum is positive.
pub fn rie_build(basis: &OrthonormalBasis, spectrum: &Spectrum) -> Result<SymmetricMatrix> {
    let n = basis.dim();
    if spectrum.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: spectrum.len() });
    }
    let mut lower = vec![0.0; SymmetricMatrix::packed_len(n)];
    for (k, &lam) in spectrum.values().iter().enumerate() {
        let col = basis.column(k);
        let mut idx = 0;
        for i in 0..n {
            let ci = lam * col[i];
            for &cj in col.iter().take(i + 1) {
                lower[idx] += ci * cj;
                idx += 1;
            }
        }
    }
    SymmetricMatrix::from_lower(n, lower)
}

/// `tr(A B) = sum_ij A_ij B_ij`, exploiting symmetry of both factors.
pub fn trace_product(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    let mut acc = 0.0;
    let mut k = 0;
    for i in 0..a.dim() {
        for j in 0..=i {
            let t = a.lower[k] * b.lower[k];
            k += 1;
            acc += if i == j { t } else { 2.0 * t };
        }
    }
    Ok(acc)
}

/// `tr(A B A B)`, the fourth-order trace needed by the variance formula.
pub fn trace_quad(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    let n = a.dim();
    let af = a.to_full();
    let bf = b.to_full();
    // M = A B, then tr(M M) = sum_ij M_ij M_ji
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let ail = af[i * n + l];
            if ail == 0.0 {
                continue;
            }
            let row = &bf[l * n..(l + 1) * n];
            let out = &mut m[i * n..(i + 1) * n];
            for (o, &blj) in out.iter_mut().zip(row) {
                *o += ail * blj;
            }
        }
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += m[i * n + j] * m[j * n + i];
        }
    }
    Ok(acc)
}

/// Symmetric positive definite matrix with its eigendecomposition attached.
///
/// Construction runs the SPD gate (`lambda_min > 1e-12 * lambda_max`); all
/// divergence evaluators take `Spd` inputs so the validation and the
/// eigensolve happen exactly once per matrix.
#[derive(Debug, Clone)]
pub struct Spd {
    matrix: SymmetricMatrix,
    spectrum: Spectrum,
    basis: OrthonormalBasis,
}

impl Spd {
    /// Eigendecomposes and validates positive definiteness.
    pub fn new(matrix: SymmetricMatrix) -> Result<Self> {
        let (raw_vals, basis) = eigen::sym_eigen_raw(&matrix)?;
        let max_eig = raw_vals.first().copied().unwrap_or(0.0);
        let min_eig = raw_vals.last().copied().unwrap_or(0.0);
        if !(min_eig > SPD_RTOL * max_eig) || max_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig, max_eig });
        }
        let spectrum = Spectrum::new(raw_vals)?;
        Ok(Self { matrix, spectrum, basis })
    }

    /// Assembles an SPD matrix directly from spectral parts
    /// (`V diag(lambda) V'`); no eigensolve is run.
    pub fn from_parts(basis: OrthonormalBasis, spectrum: Spectrum) -> Result<Self> {
        let max = spectrum.values().iter().cloned().fold(f64::MIN, f64::max);
        let min = spectrum.values().iter().cloned().fold(f64::MAX, f64::min);
        if !(min > SPD_RTOL * max) {
            return Err(Error::NotPositiveDefinite { min_eig: min, max_eig: max });
        }
        let matrix = rie_build(&basis, &spectrum)?;
        Ok(Self { matrix, spectrum, basis })
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn log_det(&self) -> f64 {
        self.spectrum.log_det()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `x' S^-1 x` through the spectral factors.
    pub fn inv_quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.basis.transpose_apply(x)?;
        Ok(y.iter().zip(self.spectrum.values()).map(|(yi, &l)| yi * yi / l).sum())
    }

    /// Spectral inverse `V diag(1/lambda) V'`.
    pub fn inverse_matrix(&self) -> SymmetricMatrix {
        rie_build(&self.basis, &self.spectrum.inverted()).expect("dims agree by construction")
    }

    /// Lower-triangular Cholesky factor of the matrix.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        cholesky_lower(&self.matrix)
    }
}

/// Ground-truth population: the SPD matrix `C` with its eigendecomposition,
/// plus the perturbed basis the RIE is restricted to.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    c: Spd,
    rie_basis: OrthonormalBasis,
}

impl PopulationModel {
    pub fn new(c: Spd, rie_basis: OrthonormalBasis) -> Result<Self> {
        if rie_basis.dim() != c.dim() {
            return Err(Error::DimensionMismatch { expected: c.dim(), actual: rie_basis.dim() });
        }
        Ok(Self { c, rie_basis })
    }

    /// The population matrix together with its decomposition.
    pub fn population(&self) -> &Spd {
        &self.c
    }

    pub fn c_matrix(&self) -> &SymmetricMatrix {
        self.c.matrix()
    }

    pub fn c_spectrum(&self) -> &Spectrum {
        self.c.spectrum()
    }

    pub fn c_basis(&self) -> &OrthonormalBasis {
        self.c.basis()
    }

    /// Basis the estimator is restricted to (not eigenvectors of C).
    pub fn rie_basis(&self) -> &OrthonormalBasis {
        &self.rie_basis
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }
}

/// Lower-triangular Cholesky factor (row-major, full storage) of a
/// symmetric matrix; fails if a pivot drops below `1e-12` of the largest
/// diagonal entry.
pub fn cholesky_lower(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let max_diag = m.diag().iter().cloned().fold(0.0_f64, f64::max);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= SPD_RTOL * max_diag {
                    return Err(Error::NotPositiveDefinite { min_eig: s, max_eig: max_diag });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests;
