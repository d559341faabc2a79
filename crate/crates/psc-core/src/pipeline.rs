//! The end-to-end fitting pipeline and its Grassmannian wrapper.
//!
//! `psc_fit` runs: optional RANSAC screening, PCA initialization, a domain
//! screen, nuclear-norm gradient ascent, a second domain screen, and a
//! final batch projection, recording everything in a [`FitReport`].

use crate::error::{Error, Result};
use crate::fit::{
    alpha_pca, cost, gradient_ascent, ransac_init, CostTrace, GdConfig, GdStatus, PcaVariant,
    RansacConfig,
};
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::projection::{domain_check, project_batch, Embedding, ProjectionOutcome};
use crate::stiefel::{FrameDataset, StiefelPoint};

/// Fraction of removals above which the report carries a prominent warning:
/// heavy removal suggests the data does not lie near a low-dimensional
/// image and the method may not be appropriate.
pub const REMOVAL_WARNING_FRACTION: f64 = 0.10;

/// Everything produced by one pipeline run.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub alpha_pca: Embedding,
    pub alpha_gd: Embedding,
    pub cost_trace: CostTrace,
    pub gd_status: GdStatus,
    /// Indices dropped by the optional RANSAC screen.
    pub removed_ransac: Vec<usize>,
    /// Indices dropped by the domain screen against `alpha_pca`.
    pub removed_pca: Vec<usize>,
    /// Indices dropped by the domain screen against `alpha_gd`.
    pub removed_gd: Vec<usize>,
    /// Surviving original indices, in input order.
    pub survivors: Vec<usize>,
    /// Projection outcomes for the survivors, aligned with `survivors`.
    pub outcomes: Vec<ProjectionOutcome>,
    /// Mean squared residual over survivors.
    pub mse: f64,
    pub seed: u64,
    pub gd_config: GdConfig,
    pub ransac_config: Option<RansacConfig>,
    /// Set when removals exceed [`REMOVAL_WARNING_FRACTION`] of the input.
    pub removal_warning: bool,
    pub n: usize,
    pub frame_size: usize,
    pub ambient_dim: usize,
}

impl FitReport {
    pub fn total_removed(&self) -> usize {
        self.removed_ransac.len() + self.removed_pca.len() + self.removed_gd.len()
    }
}

/// Principal Stiefel Coordinates, end to end.
pub fn psc_fit(
    data: &FrameDataset,
    n: usize,
    gd_config: &GdConfig,
    ransac_config: Option<&RansacConfig>,
) -> Result<FitReport> {
    let k = data.frame_size;
    let n_amb = data.ambient_dim;
    if !(k <= n && n <= n_amb) {
        return Err(Error::DimensionBounds {
            k,
            n,
            ambient: n_amb,
        });
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut survivors: Vec<usize> = (0..data.len()).collect();
    let mut removed_ransac = Vec::new();
    if let Some(cfg) = ransac_config {
        let (_, kept) = ransac_init(data, n, cfg)?;
        removed_ransac = survivors
            .iter()
            .copied()
            .filter(|i| !kept.contains(i))
            .collect();
        survivors = kept;
    }

    let working = data.subset(&survivors);
    let pca = alpha_pca(&working, n, PcaVariant::Eig)?;
    let alpha_pca_out = pca.alpha;

    // Domain screen against the initializer.
    let mut removed_pca = Vec::new();
    survivors.retain(|&i| {
        let (ok, _) = domain_check(&alpha_pca_out, &data.points()[i]);
        if !ok {
            removed_pca.push(i);
        }
        ok
    });
    if survivors.is_empty() {
        return Err(Error::EmptySurvivors);
    }

    let working = data.subset(&survivors);
    let (alpha_gd, cost_trace, gd_status) = gradient_ascent(&working, &alpha_pca_out, gd_config)?;

    // Domain screen against the optimized embedding.
    let mut removed_gd = Vec::new();
    survivors.retain(|&i| {
        let (ok, _) = domain_check(&alpha_gd, &data.points()[i]);
        if !ok {
            removed_gd.push(i);
        }
        ok
    });
    if survivors.is_empty() {
        return Err(Error::EmptySurvivors);
    }

    let working = data.subset(&survivors);
    let outcomes = project_batch(&alpha_gd, &working);
    let mse = outcomes
        .iter()
        .map(|o| o.residual * o.residual)
        .sum::<f64>()
        / outcomes.len() as f64;

    let total_removed = removed_ransac.len() + removed_pca.len() + removed_gd.len();
    let removal_warning = total_removed as f64 > REMOVAL_WARNING_FRACTION * data.len() as f64;

    Ok(FitReport {
        alpha_pca: alpha_pca_out,
        alpha_gd,
        cost_trace,
        gd_status,
        removed_ransac,
        removed_pca,
        removed_gd,
        survivors,
        outcomes,
        mse,
        seed: ransac_config.map(|c| c.seed).unwrap_or(0),
        gd_config: gd_config.clone(),
        ransac_config: ransac_config.cloned(),
        removal_warning,
        n,
        frame_size: k,
        ambient_dim: n_amb,
    })
}

/// The low-dimensional coordinates of the surviving points, as a dataset
/// over V_k(R^n). Applying `alpha_gd` and then its transpose recovers them
/// exactly (left-inverse identity).
pub fn recover_low_dim(report: &FitReport) -> Result<FrameDataset> {
    let points: Vec<StiefelPoint> = report
        .outcomes
        .iter()
        .map(|o| o.y_hat.clone().expect("survivor outcomes carry coordinates"))
        .collect();
    FrameDataset::new(
        report.n,
        report.frame_size,
        points,
        None,
        "recovered low-dimensional coordinates",
    )
}

/// A k-dimensional subspace of R^N represented by an orthonormal basis,
/// compared modulo the right O(k) action via the projector `p p^T`.
#[derive(Debug, Clone)]
pub struct GrassmannPoint {
    frame: StiefelPoint,
}

impl GrassmannPoint {
    pub fn new(frame: StiefelPoint) -> Self {
        Self { frame }
    }

    pub fn frame(&self) -> &StiefelPoint {
        &self.frame
    }

    pub fn projector(&self) -> linalg::Mat {
        self.frame.matrix() * self.frame.matrix().transpose()
    }

    pub fn distance(&self, other: &GrassmannPoint) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    /// Deterministic lift: the top-k left singular vectors of the
    /// projector, refined by subspace iteration. The refinement matters:
    /// the projector's top singular value has multiplicity k, and a plain
    /// SVD can return that eigenspace with noticeable error. Iterating
    /// `u <- polar(p * u)` contracts onto the range of `p` at rate given
    /// by the spectral gap, which is 1 here. Seed-free, so the wrapper
    /// below is reproducible.
    fn canonical_lift(&self) -> Result<StiefelPoint> {
        let k = self.frame.frame_size();
        let p = self.projector();
        let f = linalg::svd_thin(&p)?;
        let mut u = f.u.columns(0, k).into_owned();
        for _ in 0..2 {
            u = linalg::polar_factor(&(&p * &u))?;
        }
        StiefelPoint::renormalize(u)
    }
}

/// Dimensionality reduction for subspace data: lift each subspace to a
/// basis, run the pipeline, and return Grassmann classes in Gr(k, R^n).
/// The output is independent of the lift choices because every stage is
/// O(k)-invariant or -equivariant per point.
pub fn grassmann_reduce(
    data: &[GrassmannPoint],
    n: usize,
    gd_config: &GdConfig,
    ransac_config: Option<&RansacConfig>,
) -> Result<(Vec<GrassmannPoint>, FitReport)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_amb = data[0].frame.ambient_dim();
    let k = data[0].frame.frame_size();
    let lifted: Vec<StiefelPoint> = data
        .iter()
        .map(|g| g.canonical_lift())
        .collect::<Result<_>>()?;
    let dataset = FrameDataset::new(n_amb, k, lifted, None, "grassmann lift")?;
    let report = psc_fit(&dataset, n, gd_config, ransac_config)?;
    let reduced = report
        .outcomes
        .iter()
        .map(|o| GrassmannPoint::new(o.y_hat.clone().expect("survivor")))
        .collect();
    Ok((reduced, report))
}

/// Screen membership used by Steps 5/7: a point is removed exactly when
/// `sigma_min(alpha^T y)` is at or below the rank tolerance.
pub fn screen_is_removal(alpha: &Embedding, y: &StiefelPoint) -> bool {
    let (ok, sigma) = domain_check(alpha, y);
    debug_assert_eq!(ok, sigma > DEFAULT_RANK_TOL);
    !ok
}

/// Convenience: `mse = 2k - 2 * cost(alpha_gd, survivors)` cross-check.
pub fn mse_cost_identity_gap(report: &FitReport, data: &FrameDataset) -> f64 {
    let working = data.subset(&report.survivors);
    let c = cost(&report.alpha_gd, &working);
    (report.mse - (2.0 * report.frame_size as f64 - 2.0 * c)).abs()
}
