//! Dense complex linear algebra: the handful of operations the rest of the
//! crate needs on density matrices and Hamiltonians.
//!
//! Matrices are stored as [`nalgebra::DMatrix`] of `Complex<f64>` behind the
//! [`ComplexMatrix`] newtype. The Hermitian eigensolver is nalgebra's
//! tridiagonal QR; this module adds the symmetry checks, ascending ordering
//! and the PSD-clipped fractional powers used by the divergences.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Relative Hermiticity tolerance: `max|A - A^dag| <= HERMITIAN_TOL * max|A|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative tolerance below which a negative eigenvalue is roundoff.
pub const PSD_TOL: f64 = 1e-10;

/// Eigenvalues below `SUPPORT_TOL * max eigenvalue` are treated as exact zeros
/// when taking powers, logs and support projectors.
pub const SUPPORT_TOL: f64 = 1e-14;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, |i, j| f(i, j)))
    }

    /// Wraps an existing nalgebra matrix; it must be square.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: r.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Real row-major matrix.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c64(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { c64(diag[i], 0.0) } else { c64(0.0, 0.0) })
    }

    /// Rank-one projector `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// `max|A - A^dag|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Errors with [`Error::NonHermitian`] unless the matrix is Hermitian
    /// within [`HERMITIAN_TOL`] relative to its largest entry.
    pub fn check_hermitian(&self) -> Result<()> {
        let asym = self.hermitian_asymmetry();
        let allowed = HERMITIAN_TOL * self.max_abs();
        if asym > allowed {
            return Err(Error::NonHermitian {
                asymmetry: asym,
                allowed,
            });
        }
        Ok(())
    }

    /// `(A + A^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let d = dagger(self);
        Self((&self.0 + &d.0).map(|z| z * 0.5))
    }

    /// Real parts of the diagonal.
    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    /// Principal submatrix on the given indices (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.0[(idx[a], idx[b])])
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.dim();
        let mut acc = c64(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).fold(c64(0.0, 0.0), |acc, j| acc + self.0[(i, j)] * v[j]))
            .collect()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Kronecker product; subsystem `a` is the slow index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.0.trace()
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.adjoint())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `k` as a vector.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// `U f(Lambda) U^dag`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let u = &self.eigenvectors.0;
        ComplexMatrix::from_fn(n, |i, j| {
            let mut acc = c64(0.0, 0.0);
            for k in 0..n {
                if fl[k] != 0.0 {
                    acc += u[(i, k)] * u[(j, k)].conj() * fl[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// `U^dag A U`: an operator in this eigenbasis.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let u = &self.eigenvectors;
        &(&dagger(u) * a) * u
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }

    /// Eigenvalues clipped to zero below the support threshold.
    pub fn clipped_eigenvalues(&self) -> Vec<f64> {
        let cut = SUPPORT_TOL * self.max_abs_eigenvalue();
        self.eigenvalues
            .iter()
            .map(|&l| if l <= cut { 0.0 } else { l })
            .collect()
    }
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
pub fn eigh(a: &ComplexMatrix) -> Result<HermitianEigensystem> {
    a.check_hermitian()?;
    let n = a.dim();
    if n == 0 {
        return Ok(HermitianEigensystem {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0),
        });
    }
    let sym = a.hermitian_part();
    let eig = SymmetricEigen::new(sym.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigensystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Checks positive semidefiniteness of an eigensystem within [`PSD_TOL`].
pub fn check_psd(eig: &HermitianEigensystem, scale: f64) -> Result<()> {
    let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if min < -PSD_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// `A^alpha` for positive semidefinite `A` and `alpha >= 0`.
///
/// Roundoff-negative eigenvalues are clipped to zero; `0^0 := 0`, so `alpha = 0`
/// gives the projector onto the support.
pub fn mat_pow(a: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    let eig = eigh(a)?;
    check_psd(&eig, a.max_abs())?;
    Ok(support_pow(&eig, alpha))
}

/// Power restricted to the support of a PSD eigensystem. Negative exponents
/// give the generalized (pseudo-)inverse powers.
pub fn support_pow(eig: &HermitianEigensystem, alpha: f64) -> ComplexMatrix {
    let clipped = eig.clipped_eigenvalues();
    let n = eig.dim();
    let lookup: Vec<f64> = clipped
        .iter()
        .map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 })
        .collect();
    let u = &eig.eigenvectors.0;
    ComplexMatrix::from_fn(n, |i, j| {
        let mut acc = c64(0.0, 0.0);
        for k in 0..n {
            if lookup[k] != 0.0 {
                acc += u[(i, k)] * u[(j, k)].conj() * lookup[k];
            }
        }
        acc
    })
}

/// Projector onto the support of a PSD eigensystem.
pub fn support_projector(eig: &HermitianEigensystem) -> ComplexMatrix {
    support_pow(eig, 0.0)
}

/// Largest singular value of a Hermitian matrix.
pub fn operator_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(a)?.max_abs_eigenvalue())
}
