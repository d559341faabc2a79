//! Principal Stiefel coordinates: equivariant dimensionality reduction for
//! datasets of orthonormal k-frames.
//!
//! A dataset lives in the Stiefel manifold V_k(R^N). The method finds an
//! embedding alpha in V_n(R^N) of a lower-dimensional Stiefel manifold
//! V_k(R^n) whose image passes near the data, by maximizing the average
//! nuclear norm of `alpha^T y` over the data. Points are then pulled back
//! to V_k(R^n) through the polar-factor projection, preserving the right
//! O(k) action (so the construction descends to Grassmannians).
//!
//! Module map:
//! - [`linalg`]: SVD, polar decomposition, rank tests, seeded Gaussians.
//! - [`stiefel`]: validated frames, datasets, tangent/retraction geometry,
//!   Frechet means.
//! - [`projection`]: the polar projection onto an embedded image, with
//!   domain checks and residuals.
//! - [`fit`]: the nuclear-norm objective, its Riemannian gradient, PCA
//!   initialization, outlier screening, and gradient ascent.
//! - [`pipeline`]: the end-to-end fit ([`psc_fit`]) with reporting, plus
//!   the Grassmannian reduction wrapper.
//! - [`datagen`]: synthetic generators (noisy embeddings, a stimulus-space
//!   response model, Mobius and torus bundle lifts).
//! - [`eval`]: MSE, variance ratios, spectra, loss landscapes, circular
//!   path recovery, chordal k-means, adjusted Rand index.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod fit;
pub mod linalg;
pub mod pipeline;
pub mod projection;
pub mod stiefel;

pub use error::{Error, Result};
pub use fit::{GdConfig, GdStatus, PcaVariant, RansacConfig};
pub use linalg::Mat;
pub use pipeline::{psc_fit, FitReport, GrassmannPoint};
pub use projection::Embedding;
pub use stiefel::{FrameDataset, StiefelPoint};
