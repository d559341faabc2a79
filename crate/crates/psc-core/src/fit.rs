//! Finding the embedding: PCA-style initialization (two variants), RANSAC
//! outlier screening, the nuclear-norm objective and its Riemannian
//! gradient, and gradient ascent on V_n(R^N).
//!
//! The objective is `f(alpha) = (1/|Y|) sum_y ||alpha^T y||_*`, maximized
//! over `alpha` in V_n(R^N). Maximizing it is equivalent to minimizing the
//! mean squared projection residual, via
//! `||y - pi_alpha(y)||_F^2 = 2k - 2 ||alpha^T y||_*`.

use serde::{Deserialize, Serialize};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, DEFAULT_RANK_TOL};
use crate::projection::{project, Embedding};
use crate::stiefel::{retract, FrameDataset, StiefelPoint, TangentVector};

/// Gradient-ascent parameters (Armijo backtracking line search).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GdConfig {
    pub max_iters: usize,
    /// Stop when the Riemannian gradient Frobenius norm drops below this.
    pub grad_tol: f64,
    pub initial_step: f64,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    pub min_step: f64,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_tol: 1e-6,
            initial_step: 1.0,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            min_step: 1e-12,
        }
    }
}

/// RANSAC screening parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RansacConfig {
    /// Fraction of surviving points sampled each round.
    pub keep_fraction: f64,
    /// Outlier threshold in standard deviations above the mean residual.
    pub outlier_threshold: f64,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            keep_fraction: 0.99,
            outlier_threshold: 3.0,
            max_rounds: 50,
            seed: 0,
        }
    }
}

/// One accepted ascent step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub step: f64,
}

/// Cost history of a gradient-ascent run; cost values are nondecreasing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CostTrace {
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GdStatus {
    /// Gradient norm dropped below `grad_tol`.
    Converged,
    /// Line search could not find an acceptable step above `min_step`.
    StepTooSmall,
    /// Iteration budget exhausted; best iterate returned.
    MaxIters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PcaVariant {
    /// Eigendecomposition of the second-moment matrix.
    Eig,
    /// SVD of the horizontal concatenation of the data.
    ConcatSvd,
}

/// Result of the PCA initializer.
#[derive(Debug, Clone)]
pub struct PcaResult {
    pub alpha: Embedding,
    /// Eigenvalues of the second-moment matrix, nonincreasing, length N.
    pub eigenvalues: Vec<f64>,
    /// Set when the eigenvalue gap at the cut position is below 1e-12; any
    /// basis of the tied eigenspace yields equal cost, so this is a warning
    /// rather than an error.
    pub tie_warning: bool,
}

/// Mean nuclear norm of `alpha^T y` over the dataset; bounded above by `k`.
pub fn cost(alpha: &Embedding, data: &FrameDataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let at = alpha.matrix().transpose();
    let total: f64 = data
        .points()
        .iter()
        .map(|y| (&at * y.matrix()).singular_values().iter().sum::<f64>())
        .sum();
    total / data.len() as f64
}

/// Cost together with the smallest `sigma_min(alpha^T y)` over the dataset.
/// One SVD per point serves both the objective and the domain guard.
fn cost_and_min_sigma(alpha: &Embedding, data: &FrameDataset) -> (f64, f64) {
    let at = alpha.matrix().transpose();
    let mut total = 0.0;
    let mut min_sigma = f64::INFINITY;
    for y in data.points() {
        let sv = (&at * y.matrix()).singular_values();
        total += sv.iter().sum::<f64>();
        min_sigma = min_sigma.min(sv.iter().copied().fold(f64::INFINITY, f64::min));
    }
    (total / data.len() as f64, min_sigma)
}

/// Riemannian gradient of the objective at `alpha`:
///
/// ```text
/// grad = (I - alpha alpha^T) * (1/|Y|) sum_y y y_hat^T
/// ```
///
/// This equals the tangent projection of the Euclidean subgradient because
/// `alpha^T (y y_hat^T)` is symmetric for every `y`. Errors if any point
/// fails the domain check.
pub fn riemannian_gradient(alpha: &Embedding, data: &FrameDataset) -> Result<TangentVector> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_amb = alpha.ambient_dim();
    let n = alpha.frame_size();
    let k = data.frame_size;
    let mut euclid = Mat::zeros(n_amb, n);
    for (index, y) in data.points().iter().enumerate() {
        let out = project(alpha, y).map_err(|e| match e {
            Error::OutOfDomain { sigma_min, .. } => Error::OutOfDomain { index, sigma_min },
            other => other,
        })?;
        let y_hat = out.y_hat.expect("in-domain outcome has coordinates");
        // accumulate y * y_hat^T into an N x n buffer (y_hat is n x k)
        let _ = k;
        euclid += y.matrix() * y_hat.matrix().transpose();
    }
    euclid /= data.len() as f64;
    let direction = &euclid - alpha.matrix() * (alpha.matrix().transpose() * &euclid);
    Ok(TangentVector {
        base: alpha.clone(),
        direction,
    })
}

/// PCA-style initializer: top-`n` eigenvectors of the second-moment matrix
/// (or top-`n` left singular vectors of the horizontal concatenation).
pub fn alpha_pca(data: &FrameDataset, n: usize, variant: PcaVariant) -> Result<PcaResult> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_amb = data.ambient_dim;
    let k = data.frame_size;
    if !(k <= n && n <= n_amb) {
        return Err(Error::DimensionBounds {
            k,
            n,
            ambient: n_amb,
        });
    }
    let count = data.len() as f64;
    let (alpha, eigenvalues) = match variant {
        PcaVariant::Eig => {
            let mut sigma = Mat::zeros(n_amb, n_amb);
            for y in data.points() {
                sigma += y.matrix() * y.matrix().transpose();
            }
            sigma /= count;
            let eig = sigma.clone().symmetric_eigen();
            let (vectors, values) = if eig.eigenvalues.iter().all(|v| v.is_finite()) {
                (eig.eigenvectors, eig.eigenvalues.as_slice().to_vec())
            } else {
                // the tridiagonal QL iteration occasionally diverges on large
                // covariance matrices; the SVD of a PSD matrix gives the same
                // decomposition and is more robust
                let f = linalg::svd_thin(&sigma)?;
                (f.u, f.singular_values.as_slice().to_vec())
            };
            let mut order: Vec<usize> = (0..n_amb).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
            let mut alpha = Mat::zeros(n_amb, n);
            for (col, &idx) in order.iter().take(n).enumerate() {
                alpha.set_column(col, &vectors.column(idx));
            }
            let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
            (alpha, eigenvalues)
        }
        PcaVariant::ConcatSvd => {
            let mut concat = Mat::zeros(n_amb, k * data.len());
            for (i, y) in data.points().iter().enumerate() {
                for j in 0..k {
                    concat.set_column(i * k + j, &y.matrix().column(j));
                }
            }
            let f = linalg::svd_thin(&concat)?;
            let alpha = f.u.columns(0, n).into_owned();
            let mut eigenvalues: Vec<f64> =
                f.singular_values.iter().map(|s| s * s / count).collect();
            eigenvalues.resize(n_amb, 0.0);
            (alpha, eigenvalues)
        }
    };
    let tie_warning = n < n_amb && (eigenvalues[n - 1] - eigenvalues[n]).abs() < 1e-12;
    Ok(PcaResult {
        alpha: StiefelPoint::renormalize(alpha)?,
        eigenvalues,
        tie_warning,
    })
}

/// RANSAC-style screening: repeatedly subsample, fit PCA, and drop points
/// whose residual exceeds `mean + threshold * std`. Returns the final
/// embedding and the surviving original indices.
pub fn ransac_init(
    data: &FrameDataset,
    n: usize,
    config: &RansacConfig,
) -> Result<(Embedding, Vec<usize>)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = data.frame_size as f64;
    let mut surviving: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut alpha = None;
    for _round in 0..config.max_rounds {
        if surviving.is_empty() {
            return Err(Error::EmptySurvivors);
        }
        let m = surviving.len();
        let sample_size = ((config.keep_fraction * m as f64).round() as usize).clamp(1, m);
        let picked = rand::seq::index::sample(&mut rng, m, sample_size);
        let mut sample_indices: Vec<usize> = picked.iter().map(|i| surviving[i]).collect();
        sample_indices.sort_unstable();
        let sample = data.subset(&sample_indices);
        let pca = alpha_pca(&sample, n, PcaVariant::Eig)?;
        // Residual to the image, defined for every point via the nuclear
        // norm identity (valid also off the domain).
        let at = pca.alpha.matrix().transpose();
        let residuals: Vec<f64> = sample
            .points()
            .iter()
            .map(|y| {
                let nn: f64 = (&at * y.matrix()).singular_values().iter().sum();
                (2.0 * k - 2.0 * nn).max(0.0).sqrt()
            })
            .collect();
        let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / residuals.len() as f64;
        let cutoff = mean + config.outlier_threshold * var.sqrt();
        let flagged: Vec<usize> = sample_indices
            .iter()
            .zip(&residuals)
            .filter(|(_, &r)| r > cutoff)
            .map(|(&i, _)| i)
            .collect();
        alpha = Some(pca.alpha);
        if flagged.is_empty() {
            break;
        }
        surviving.retain(|i| !flagged.contains(i));
    }
    if surviving.is_empty() {
        return Err(Error::EmptySurvivors);
    }
    Ok((alpha.expect("at least one round ran"), surviving))
}

/// Armijo-backtracking Riemannian gradient ascent with the polar
/// retraction. The cost sequence is nondecreasing; steps that would push
/// any data point out of the projection domain are rejected and shrunk.
pub fn gradient_ascent(
    data: &FrameDataset,
    init: &Embedding,
    config: &GdConfig,
) -> Result<(Embedding, CostTrace, GdStatus)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut alpha = init.clone();
    let (mut current_cost, min_sigma) = cost_and_min_sigma(&alpha, data);
    if min_sigma <= DEFAULT_RANK_TOL {
        return Err(Error::OutOfDomain {
            index: 0,
            sigma_min: min_sigma,
        });
    }
    let mut trace = CostTrace::default();
    let mut status = GdStatus::MaxIters;
    let grad0 = riemannian_gradient(&alpha, data)?;
    trace.entries.push(TraceEntry {
        iteration: 0,
        cost: current_cost,
        grad_norm: grad0.norm(),
        step: 0.0,
    });
    for iteration in 1..=config.max_iters {
        let grad = riemannian_gradient(&alpha, data)?;
        let gnorm = grad.norm();
        if gnorm < config.grad_tol {
            status = GdStatus::Converged;
            break;
        }
        let mut tau = config.initial_step;
        let mut accepted = None;
        while tau >= config.min_step {
            let step = &grad.direction * tau;
            match retract(&alpha, &step) {
                Ok(candidate) => {
                    let (cand_cost, cand_sigma) = cost_and_min_sigma(&candidate, data);
                    if cand_sigma > DEFAULT_RANK_TOL
                        && cand_cost >= current_cost + config.armijo_slope * tau * gnorm * gnorm
                    {
                        accepted = Some((candidate, cand_cost, tau));
                        break;
                    }
                }
                Err(_) => {}
            }
            tau *= config.armijo_shrink;
        }
        match accepted {
            Some((candidate, cand_cost, tau)) => {
                alpha = candidate;
                current_cost = cand_cost;
                trace.entries.push(TraceEntry {
                    iteration,
                    cost: current_cost,
                    grad_norm: gnorm,
                    step: tau,
                });
            }
            None => {
                status = GdStatus::StepTooSmall;
                break;
            }
        }
    }
    Ok((alpha, trace, status))
}
