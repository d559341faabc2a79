//! The Stiefel manifold V_t(R^s): validated points, the chordal (Frobenius)
//! metric, uniform sampling, tangent-space projection, the polar retraction,
//! and closed-form Frechet statistics.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, DEFAULT_RANK_TOL};

/// Admission tolerance on `||A^T A - I||_F` for Stiefel points.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// An `s x t` matrix with orthonormal columns, `s >= t >= 1`.
///
/// The universal data element: data points `y`, low-dimensional coordinates
/// `x` and `y_hat`, and embeddings `alpha` are all Stiefel points.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint {
    data: Mat,
    defect: f64,
}

impl StiefelPoint {
    /// Admits `data` if its columns are orthonormal within
    /// [`ORTHONORMALITY_TOL`].
    pub fn new(data: Mat) -> Result<Self> {
        let (s, t) = data.shape();
        assert!(s >= t && t >= 1, "need s >= t >= 1, got {s}x{t}");
        let defect = (data.transpose() * &data - Mat::identity(t, t)).norm();
        if defect > ORTHONORMALITY_TOL {
            return Err(Error::NotOrthonormal {
                defect,
                tol: ORTHONORMALITY_TOL,
            });
        }
        Ok(Self { data, defect })
    }

    /// Polar-projects near-orthonormal input onto the manifold, then admits
    /// it. Intended for file round-trips that accumulate rounding.
    pub fn renormalize(data: Mat) -> Result<Self> {
        let u = linalg::polar_factor(&data)?;
        Self::new(u)
    }

    pub fn matrix(&self) -> &Mat {
        &self.data
    }

    pub fn into_matrix(self) -> Mat {
        self.data
    }

    /// Cached `||A^T A - I_t||_F` measured at construction.
    pub fn orthonormality_defect(&self) -> f64 {
        self.defect
    }

    pub fn ambient_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn frame_size(&self) -> usize {
        self.data.ncols()
    }
}

/// An ordered collection of Stiefel points sharing shape `N x k`.
#[derive(Debug, Clone)]
pub struct FrameDataset {
    pub ambient_dim: usize,
    pub frame_size: usize,
    points: Vec<StiefelPoint>,
    pub labels: Option<Vec<i64>>,
    pub source: String,
}

impl FrameDataset {
    pub fn new(
        ambient_dim: usize,
        frame_size: usize,
        points: Vec<StiefelPoint>,
        labels: Option<Vec<i64>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        for p in &points {
            if p.ambient_dim() != ambient_dim || p.frame_size() != frame_size {
                return Err(Error::ShapeMismatch {
                    left_rows: ambient_dim,
                    left_cols: frame_size,
                    right_rows: p.ambient_dim(),
                    right_cols: p.frame_size(),
                });
            }
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: points.len(),
                });
            }
        }
        Ok(Self {
            ambient_dim,
            frame_size,
            points,
            labels,
            source: source.into(),
        })
    }

    pub fn points(&self) -> &[StiefelPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dataset restricted to the given indices, preserving order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Self {
            ambient_dim: self.ambient_dim,
            frame_size: self.frame_size,
            points,
            labels,
            source: self.source.clone(),
        }
    }
}

/// A tangent vector at `base`: `base^T direction` is skew-symmetric.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: StiefelPoint,
    pub direction: Mat,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.direction.norm()
    }
}

/// Chordal distance `||p - q||_F`.
pub fn frobenius_distance(p: &Mat, q: &Mat) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::ShapeMismatch {
            left_rows: p.nrows(),
            left_cols: p.ncols(),
            right_rows: q.nrows(),
            right_cols: q.ncols(),
        });
    }
    Ok((p - q).norm())
}

/// Sum of singular values.
pub fn nuclear_norm(a: &Mat) -> f64 {
    a.singular_values().iter().sum()
}

/// Uniform (Haar) sample on V_t(R^s): the polar factor of a Gaussian matrix.
///
/// Left O(s)- and right O(t)-invariance follow from the invariance of the
/// Gaussian ensemble. Rank-deficient draws (probability zero) trigger a
/// redraw with an incremented sub-seed, at most 8 attempts.
pub fn uniform_stiefel(s: usize, t: usize, seed: u64) -> Result<StiefelPoint> {
    assert!(s >= t, "need s >= t");
    for attempt in 0..8u64 {
        let g = linalg::gaussian_matrix(s, t, seed.wrapping_add(attempt));
        if let Ok(u) = linalg::polar_factor(&g) {
            return StiefelPoint::new(u);
        }
    }
    Err(Error::SamplingFailed { attempts: 8 })
}

/// Uniform Stiefel sample drawn from a caller-provided stream.
pub fn uniform_stiefel_with(s: usize, t: usize, rng: &mut impl rand::Rng) -> Result<StiefelPoint> {
    assert!(s >= t, "need s >= t");
    for _ in 0..8u32 {
        let g = linalg::gaussian_matrix_with(s, t, rng);
        if let Ok(u) = linalg::polar_factor(&g) {
            return StiefelPoint::new(u);
        }
    }
    Err(Error::SamplingFailed { attempts: 8 })
}

/// Orthogonal projection of an ambient matrix `z` onto the tangent space at
/// `base`:
///
/// ```text
/// P(z) = base * skew(base^T z) + (I - base base^T) * z
/// ```
///
/// with `skew(M) = (M - M^T)/2`. Idempotent.
pub fn tangent_project(base: &StiefelPoint, z: &Mat) -> Result<TangentVector> {
    let b = base.matrix();
    if b.shape() != z.shape() {
        return Err(Error::ShapeMismatch {
            left_rows: b.nrows(),
            left_cols: b.ncols(),
            right_rows: z.nrows(),
            right_cols: z.ncols(),
        });
    }
    let btz = b.transpose() * z;
    let skew = (&btz - btz.transpose()) * 0.5;
    let direction = b * skew + (z - b * btz);
    Ok(TangentVector {
        base: base.clone(),
        direction,
    })
}

/// Polar retraction: the polar factor of `base + step`.
pub fn retract(base: &StiefelPoint, step: &Mat) -> Result<StiefelPoint> {
    let sum = base.matrix() + step;
    StiefelPoint::new(linalg::polar_factor(&sum)?)
}

/// Closed-form Frechet mean under the chordal metric: the polar factor of
/// the entrywise point sum.
///
/// Minimizing the summed squared chordal distance over the manifold equals
/// maximizing the inner product with the sum, which the polar factor does.
/// A rank-deficient sum means the mean is not unique and is an error.
pub fn frechet_mean(points: &FrameDataset) -> Result<StiefelPoint> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sum = Mat::zeros(points.ambient_dim, points.frame_size);
    for p in points.points() {
        sum += p.matrix();
    }
    match linalg::polar_decompose_tol(&sum, DEFAULT_RANK_TOL) {
        Ok(f) => StiefelPoint::new(f.u),
        Err(Error::RankDeficient { .. }) => Err(Error::DegenerateMean),
        Err(e) => Err(e),
    }
}

/// Mean squared chordal distance to the Frechet mean.
pub fn frechet_variance(points: &FrameDataset) -> Result<f64> {
    let mean = frechet_mean(points)?;
    let total: f64 = points
        .points()
        .iter()
        .map(|p| (p.matrix() - mean.matrix()).norm_squared())
        .sum();
    Ok(total / points.len() as f64)
}
