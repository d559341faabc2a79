use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("rank-deficient matrix: smallest singular value {sigma_min:.3e}")]
    RankDeficient { sigma_min: f64 },

    #[error("columns are not orthonormal: defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotOrthonormal { defect: f64, tol: f64 },

    #[error("point {index} lies outside the projection domain (sigma_min {sigma_min:.3e})")]
    OutOfDomain { index: usize, sigma_min: f64 },

    #[error("degenerate Frechet mean: the point sum is rank deficient, so the mean is not unique")]
    DegenerateMean,

    #[error("all data points were removed from consideration")]
    EmptySurvivors,

    #[error("dimension bounds violated: need k <= n <= N, got k={k}, n={n}, N={ambient}")]
    DimensionBounds { k: usize, n: usize, ambient: usize },

    #[error("time step {index} has zero norm after centering")]
    DegenerateStep { index: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("failed to draw a full-rank sample after {attempts} attempts")]
    SamplingFailed { attempts: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
