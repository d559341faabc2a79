//! Dense small-matrix primitives: thin SVD, polar decomposition, rank tests,
//! and seeded Gaussian sampling.
//!
//! Everything downstream (projection, optimization, generators) is built on
//! these. Matrices are `nalgebra` dynamic matrices of `f64`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Dense column-major matrix of `f64`, the working type of the whole crate.
pub type Mat = DMatrix<f64>;

/// Default absolute tolerance on the smallest singular value for rank tests.
///
/// Data matrices here have unit-scale entries (columns of Stiefel points are
/// unit vectors), so absolute and relative scales coincide.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Thin SVD `a = u * diag(singular_values) * v^T` with `r = min(rows, cols)`.
///
/// Singular values are nonincreasing and nonnegative; `u` is `s x r` and `v`
/// is `t x r`, both with orthonormal columns.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Mat,
    pub singular_values: Vec<f64>,
    pub v: Mat,
}

/// Polar decomposition `a = u * h` with `u` orthonormal-column and `h`
/// symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub u: Mat,
    pub h: Mat,
}

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn mat_from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Mat> {
    assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
    for (idx, &e) in entries.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::NonFinite {
                row: idx / cols,
                col: idx % cols,
            });
        }
    }
    Ok(Mat::from_row_slice(rows, cols, entries))
}

/// Thin SVD of an arbitrary matrix.
pub fn svd_thin(a: &Mat) -> Result<SvdFactors> {
    let (rows, cols) = a.shape();
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdNonConvergence { rows, cols })?;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    Ok(SvdFactors {
        u,
        singular_values,
        v: v_t.transpose(),
    })
}

/// Polar decomposition of a full-column-rank matrix with `rows >= cols`.
///
/// Computed as `a = q r` (thin QR) followed by a scaled Newton iteration for
/// the orthogonal polar factor of the square triangular part: `u = q w`,
/// `h = u^T a` symmetrized. The Newton route avoids the SVD, whose factors
/// can lose several digits on clustered singular values.
pub fn polar_decompose(a: &Mat) -> Result<PolarFactors> {
    polar_decompose_tol(a, DEFAULT_RANK_TOL)
}

/// Same as [`polar_decompose`] with an explicit rank tolerance.
pub fn polar_decompose_tol(a: &Mat, tol: f64) -> Result<PolarFactors> {
    assert!(a.nrows() >= a.ncols(), "polar factor needs rows >= cols");
    let qr = a.clone().qr();
    let w = polar_square_newton(&qr.r(), tol)?;
    let u = qr.q() * w;
    let uta = u.transpose() * a;
    let h = (&uta + uta.transpose()) * 0.5;
    Ok(PolarFactors { u, h })
}

/// Orthogonal polar factor of a square nonsingular matrix by Higham's scaled
/// Newton iteration `x <- (mu x + (mu x)^{-T}) / 2`.
fn polar_square_newton(a: &Mat, tol: f64) -> Result<Mat> {
    let t = a.ncols();
    let mut x = a.clone();
    for _ in 0..100 {
        let inv = x.clone().try_inverse().ok_or(Error::RankDeficient {
            sigma_min: 0.0,
        })?;
        // Frobenius-norm scaling accelerates the early iterations
        let mu = (inv.norm() / x.norm()).sqrt();
        let next = (&x * mu + inv.transpose() / mu) * 0.5;
        let step = (&next - &x).norm();
        x = next;
        if step <= 1e-15 * (t as f64).sqrt().max(1.0) {
            break;
        }
    }
    // x is now orthogonal; the smallest singular value of a is reflected in
    // h = x^T a, whose smallest eigenvalue must clear the rank tolerance
    let h = x.transpose() * a;
    let sym = (&h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_eig > tol) {
        return Err(Error::RankDeficient {
            sigma_min: min_eig.max(0.0),
        });
    }
    Ok(x)
}

/// The orthonormal polar factor of `a`, discarding the PSD factor.
pub fn polar_factor(a: &Mat) -> Result<Mat> {
    Ok(polar_decompose(a)?.u)
}

/// Tests `rank(a) = min(rows, cols)` by thresholding the smallest singular
/// value. Returns the verdict together with that singular value.
pub fn rank_is_full(a: &Mat, tol: f64) -> (bool, f64) {
    let sv = a.singular_values();
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma_min = if sigma_min.is_finite() { sigma_min } else { 0.0 };
    (sigma_min > tol, sigma_min)
}

/// Determinant-based full-rank test: `det(a^T a) > tol^k` with `k = cols`.
///
/// Faster than a singular value computation for some shapes; the singular
/// value form [`rank_is_full`] is authoritative.
pub fn rank_is_full_det(a: &Mat, tol: f64) -> bool {
    let k = a.ncols();
    let gram = a.transpose() * a;
    gram.determinant() > tol.powi(k as i32)
}

/// `rows x cols` matrix of i.i.d. standard normals from a seeded ChaCha8
/// stream. Identical seeds give bit-identical matrices.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_matrix_with(rows, cols, &mut rng)
}

/// Gaussian matrix drawn from a caller-provided stream.
pub fn gaussian_matrix_with(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> Mat {
    // Row-major fill so that the (rows, cols, seed) -> entries map is stable.
    let entries: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Mat::from_row_slice(rows, cols, &entries)
}
