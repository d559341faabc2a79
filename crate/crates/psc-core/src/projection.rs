//! The closest-point operator onto the embedded image `alpha(V_k(R^n))`:
//! domain checking, low-dimensional coordinates, and batch application.
//!
//! For `alpha` in V_n(R^N) and `y` in V_k(R^N) with `alpha^T y` full rank,
//! the projection sends `y` to `alpha * y_hat` where `y_hat` is the polar
//! factor of `alpha^T y`. This minimizes the chordal distance from `y` to
//! the image and commutes with the right O(k) action.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, DEFAULT_RANK_TOL};
use crate::stiefel::{FrameDataset, StiefelPoint};

/// An embedding is an `N x n` Stiefel point acting by left multiplication
/// as an isometric embedding of V_k(R^n) into V_k(R^N).
pub type Embedding = StiefelPoint;

/// Per-point result of the projection.
///
/// `sigma_min` is the smallest singular value of `alpha^T y`; points with
/// `sigma_min` at or below the rank tolerance are out of domain and carry no
/// coordinates. Near-boundary points (small but admissible `sigma_min`) can
/// be reported from this field by diagnostics.
#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub y_hat: Option<StiefelPoint>,
    pub projected: Option<StiefelPoint>,
    pub residual: f64,
    pub in_domain: bool,
    pub sigma_min: f64,
}

/// Whether `y` lies in the domain `T_alpha` (`rank(alpha^T y) = k`),
/// together with the smallest singular value of `alpha^T y`.
pub fn domain_check(alpha: &Embedding, y: &StiefelPoint) -> (bool, f64) {
    domain_check_tol(alpha, y, DEFAULT_RANK_TOL)
}

pub fn domain_check_tol(alpha: &Embedding, y: &StiefelPoint, tol: f64) -> (bool, f64) {
    let a = alpha.matrix().transpose() * y.matrix();
    linalg::rank_is_full(&a, tol)
}

/// Projects `y` onto the image of `alpha`. Errors when `y` is out of domain.
pub fn project(alpha: &Embedding, y: &StiefelPoint) -> Result<ProjectionOutcome> {
    project_tol(alpha, y, DEFAULT_RANK_TOL)
}

pub fn project_tol(alpha: &Embedding, y: &StiefelPoint, tol: f64) -> Result<ProjectionOutcome> {
    let aty = alpha.matrix().transpose() * y.matrix();
    let (full_rank, sigma_min) = linalg::rank_is_full(&aty, tol);
    if !full_rank {
        return Err(Error::OutOfDomain {
            index: 0,
            sigma_min,
        });
    }
    let y_hat = StiefelPoint::new(linalg::polar_decompose_tol(&aty, tol)?.u)?;
    let projected = StiefelPoint::new(alpha.matrix() * y_hat.matrix())?;
    let residual = (y.matrix() - projected.matrix()).norm();
    Ok(ProjectionOutcome {
        y_hat: Some(y_hat),
        projected: Some(projected),
        residual,
        in_domain: true,
        sigma_min,
    })
}

/// Projects every point of `data`, flagging out-of-domain points instead of
/// failing. Output order is input order.
pub fn project_batch(alpha: &Embedding, data: &FrameDataset) -> Vec<ProjectionOutcome> {
    project_batch_tol(alpha, data, DEFAULT_RANK_TOL)
}

pub fn project_batch_tol(
    alpha: &Embedding,
    data: &FrameDataset,
    tol: f64,
) -> Vec<ProjectionOutcome> {
    data.points()
        .iter()
        .map(|y| match project_tol(alpha, y, tol) {
            Ok(outcome) => outcome,
            Err(Error::OutOfDomain { sigma_min, .. }) => ProjectionOutcome {
                y_hat: None,
                projected: None,
                residual: f64::NAN,
                in_domain: false,
                sigma_min,
            },
            Err(_) => ProjectionOutcome {
                y_hat: None,
                projected: None,
                residual: f64::NAN,
                in_domain: false,
                sigma_min: 0.0,
            },
        })
        .collect()
}

/// An orthonormal basis of the orthogonal complement of `im(alpha)`,
/// as an `N x (N - n)` matrix. Test and generator helper.
pub fn orthogonal_complement(alpha: &Embedding) -> Mat {
    let a = alpha.matrix();
    let (n_amb, n) = a.shape();
    // Full SVD of alpha: the left singular vectors beyond column n span the
    // complement.
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    // nalgebra's thin SVD gives N x n; extend by Gram-Schmidt against it.
    let mut basis: Vec<Mat> = (0..n)
        .map(|j| Mat::from_column_slice(n_amb, 1, u.column(j).as_slice()))
        .collect();
    let mut comp = Mat::zeros(n_amb, n_amb - n);
    let mut filled = 0;
    for i in 0..n_amb {
        if filled == n_amb - n {
            break;
        }
        let mut v = Mat::zeros(n_amb, 1);
        v[(i, 0)] = 1.0;
        for b in &basis {
            let proj = (b.transpose() * &v)[(0, 0)];
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            comp.set_column(filled, &v.column(0));
            basis.push(v);
            filled += 1;
        }
    }
    assert_eq!(filled, n_amb - n, "complement construction failed");
    comp
}
