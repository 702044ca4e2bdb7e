//! Dense real linear algebra shared by every other module.
//!
//! All tolerances are relative to the operator norm of the matrix under test:
//! an eigenvalue counts as nonnegative when it is at least
//! `-1e-10 * max(1, ||h||)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative tolerance used for PSD decisions.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub min_eig: f64,
    pub is_psd: bool,
    pub tol: f64,
}

fn check_square_finite(h: &Mat) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// `(h + h^T) / 2`.
pub fn symmetrize(h: &Mat) -> Mat {
    (h + h.transpose()) * 0.5
}

/// Eigen-decomposition of the symmetrized matrix with eigenvalues sorted ascending.
pub fn sym_eigen(h: &Mat) -> (Vector, Mat) {
    let n = h.nrows();
    if n == 0 {
        return (Vector::zeros(0), Mat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn psd_tolerance(h: &Mat) -> f64 {
    PSD_REL_TOL * op_norm(h).max(1.0)
}

/// Minimum eigenvalue of the symmetrized matrix and the PSD verdict under
/// the relative tolerance `1e-10 * max(1, ||h||)`.
pub fn psd_min_eig(h: &Mat) -> Result<PsdReport> {
    check_square_finite(h)?;
    let tol = psd_tolerance(h);
    if h.nrows() == 0 {
        return Ok(PsdReport {
            min_eig: 0.0,
            is_psd: true,
            tol,
        });
    }
    let (values, _) = sym_eigen(h);
    let min_eig = values[0];
    Ok(PsdReport {
        min_eig,
        is_psd: min_eig >= -tol,
        tol,
    })
}

/// A subspace of `R^ambient_dim` carried by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Mat,
}

impl Subspace {
    pub const ORTHONORMAL_TOL: f64 = 1e-10;

    /// Wraps a basis that must already be orthonormal.
    pub fn from_orthonormal(basis: Mat) -> Result<Self> {
        let k = basis.ncols();
        if k > basis.nrows() {
            return Err(Error::InvalidSubspace(format!(
                "{k} columns in ambient dimension {}",
                basis.nrows()
            )));
        }
        let gram = basis.transpose() * &basis;
        let dev = max_abs_diff(&gram, &Mat::identity(k, k));
        if dev > Self::ORTHONORMAL_TOL {
            return Err(Error::InvalidSubspace(format!(
                "basis not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    /// Orthonormalizes the column span of `spanning`, dropping dependent directions.
    pub fn span(spanning: &Mat) -> Self {
        let n = spanning.nrows();
        if spanning.ncols() == 0 {
            return Self::zero(n);
        }
        let outer = spanning * spanning.transpose();
        let (values, vectors) = sym_eigen(&outer);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let keep: Vec<usize> = (0..n).filter(|&i| values[i] > 1e-12 * scale).collect();
        let basis = vectors.select_columns(keep.iter());
        Self {
            ambient_dim: n,
            basis,
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Mat::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Mat::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn projector(&self) -> Mat {
        &self.basis * self.basis.transpose()
    }

    /// Distance of `v` from the subspace.
    pub fn residual(&self, v: &Vector) -> f64 {
        (v - &self.basis * (self.basis.transpose() * v)).norm()
    }
}

/// Orthonormal basis of the eigenvectors of `h` with eigenvalue at most `tol`.
pub fn null_space(h: &Mat, tol: f64) -> Result<Subspace> {
    let report = psd_min_eig(h)?;
    if !report.is_psd {
        return Err(Error::NotPsd {
            min_eig: report.min_eig,
        });
    }
    let n = h.nrows();
    let (values, vectors) = sym_eigen(h);
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] <= tol).collect();
    Subspace::from_orthonormal(vectors.select_columns(keep.iter()))
}

/// `exp(t * a)`.
///
/// Symmetric generators go through an eigendecomposition; everything else
/// uses Padé scaling-and-squaring.
pub fn mat_exp(a: &Mat, t: f64) -> Result<Mat> {
    check_square_finite(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let asym = max_abs_diff(a, &a.transpose());
    if asym <= 1e-14 * a.amax().max(1.0) {
        let (values, vectors) = sym_eigen(a);
        let diag = Mat::from_diagonal(&values.map(|v| (t * v).exp()));
        Ok(&vectors * diag * vectors.transpose())
    } else {
        Ok((a * t).exp())
    }
}

/// Moore-Penrose style inverse square root of a PSD matrix on its range.
pub fn pinv_sqrt(h: &Mat, tol: f64) -> Mat {
    let (values, vectors) = sym_eigen(h);
    let diag = values.map(|v| if v > tol { 1.0 / v.sqrt() } else { 0.0 });
    &vectors * Mat::from_diagonal(&diag) * vectors.transpose()
}

/// Orthogonal projector onto the range of a PSD matrix.
pub fn range_projector(h: &Mat, tol: f64) -> Mat {
    let (values, vectors) = sym_eigen(h);
    let diag = values.map(|v| if v > tol { 1.0 } else { 0.0 });
    &vectors * Mat::from_diagonal(&diag) * vectors.transpose()
}
