//! Quantitative evaluation: projection MSE, Frechet variance ratios,
//! spectra for choosing the target dimension, loss-landscape grids on the
//! visualizable (N=3, n=2, k=1) case, circular path recovery with
//! alignment and smoothing, chordal k-means, and the adjusted Rand index.

use crate::error::{Error, Result};
use crate::fit::cost;
use crate::linalg::{polar_factor, Mat};
use crate::pipeline::FitReport;
use crate::projection::Embedding;
use crate::stiefel::{frechet_variance, FrameDataset, StiefelPoint};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean squared residual over the surviving points of a fit.
pub fn projection_mse(report: &FitReport) -> Result<f64> {
    if report.outcomes.is_empty() {
        return Err(Error::EmptySurvivors);
    }
    Ok(report
        .outcomes
        .iter()
        .map(|o| o.residual * o.residual)
        .sum::<f64>()
        / report.outcomes.len() as f64)
}

/// Ratio of the Frechet variance of the projected points to that of the
/// original (surviving) data points, both measured in V_k(R^N).
pub fn variance_ratio(report: &FitReport, data: &FrameDataset) -> Result<f64> {
    let originals = data.subset(&report.survivors);
    let projected: Vec<StiefelPoint> = report
        .outcomes
        .iter()
        .map(|o| o.projected.clone().expect("survivor outcome"))
        .collect();
    let projected =
        FrameDataset::new(data.ambient_dim, data.frame_size, projected, None, "projected")?;
    let v_proj = frechet_variance(&projected)?;
    let v_orig = frechet_variance(&originals)?;
    Ok(v_proj / v_orig)
}

/// Same ratio computed in the low-dimensional coordinates; agrees with
/// [`variance_ratio`] because the embedding is an isometry and the polar
/// factor commutes with it.
pub fn variance_ratio_low_dim(report: &FitReport, data: &FrameDataset) -> Result<f64> {
    let originals = data.subset(&report.survivors);
    let low = crate::pipeline::recover_low_dim(report)?;
    let v_low = frechet_variance(&low)?;
    let v_orig = frechet_variance(&originals)?;
    Ok(v_low / v_orig)
}

/// Eigenvalues of the second-moment matrix, nonincreasing, length N.
/// Jumps or an elbow suggest a natural cutoff for the target dimension.
pub fn spectrum(data: &FrameDataset) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_amb = data.ambient_dim;
    let mut sigma = Mat::zeros(n_amb, n_amb);
    for y in data.points() {
        sigma += y.matrix() * y.matrix().transpose();
    }
    sigma /= data.len() as f64;
    let eig = sigma.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(values)
}

#[derive(Debug, Clone)]
pub struct LandscapeCell {
    pub theta: f64,
    pub phi: f64,
    pub cost: f64,
}

/// Hemisphere grid of cost values for the N=3, n=2, k=1 case, where a
/// plane through the origin is identified with its upper-hemisphere unit
/// normal in spherical coordinates (azimuth `theta`, inclination `phi`).
#[derive(Debug, Clone)]
pub struct LandscapeGrid {
    pub theta_count: usize,
    pub phi_count: usize,
    pub cells: Vec<LandscapeCell>,
    /// Named marker positions (e.g. the PCA, gradient-ascent, and
    /// generating embeddings).
    pub markers: Vec<(String, f64, f64)>,
}

impl LandscapeGrid {
    pub fn max_cost(&self) -> f64 {
        self.cells.iter().map(|c| c.cost).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> &LandscapeCell {
        self.cells
            .iter()
            .max_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap())
            .expect("nonempty grid")
    }
}

fn unit_normal_from_angles(theta: f64, phi: f64) -> Mat {
    Mat::from_row_slice(
        3,
        1,
        &[phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()],
    )
}

/// Spherical coordinates of the plane normal of a V_2(R^3) embedding,
/// with the normal flipped into the upper hemisphere.
pub fn embedding_to_angles(alpha: &Embedding) -> (f64, f64) {
    assert_eq!(alpha.matrix().shape(), (3, 2));
    let a = alpha.matrix();
    let (c0, c1) = (a.column(0), a.column(1));
    let mut v = [
        c0[1] * c1[2] - c0[2] * c1[1],
        c0[2] * c1[0] - c0[0] * c1[2],
        c0[0] * c1[1] - c0[1] * c1[0],
    ];
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    for e in &mut v {
        *e /= norm;
    }
    if v[2] < 0.0 {
        for e in &mut v {
            *e = -*e;
        }
    }
    let theta = v[1].atan2(v[0]).rem_euclid(2.0 * std::f64::consts::PI);
    let phi = v[2].clamp(-1.0, 1.0).acos();
    (theta, phi)
}

/// Orthonormal basis of the plane normal to `v` (a unit 3-vector).
fn plane_basis(v: &Mat) -> Embedding {
    // pick the coordinate axis least aligned with v, orthogonalize
    let axis = if v[0].abs() <= v[1].abs() && v[0].abs() <= v[2].abs() {
        0
    } else if v[1].abs() <= v[2].abs() {
        1
    } else {
        2
    };
    let mut e = Mat::zeros(3, 1);
    e[(axis, 0)] = 1.0;
    let b1 = {
        let proj = (v.transpose() * &e)[(0, 0)];
        let w = &e - v * proj;
        &w / w.norm()
    };
    let b2 = Mat::from_row_slice(
        3,
        1,
        &[
            v[1] * b1[2] - v[2] * b1[1],
            v[2] * b1[0] - v[0] * b1[2],
            v[0] * b1[1] - v[1] * b1[0],
        ],
    );
    let mut m = Mat::zeros(3, 2);
    m.set_column(0, &b1.column(0));
    m.set_column(1, &b2.column(0));
    StiefelPoint::renormalize(m).expect("orthonormal by construction")
}

/// Evaluates the nuclear-norm objective over the hemisphere grid.
pub fn landscape(
    data: &FrameDataset,
    theta_count: usize,
    phi_count: usize,
    markers: &[(String, Embedding)],
) -> Result<LandscapeGrid> {
    if data.ambient_dim != 3 || data.frame_size != 1 {
        return Err(Error::DimensionBounds {
            k: data.frame_size,
            n: 2,
            ambient: data.ambient_dim,
        });
    }
    assert!(theta_count >= 4 && phi_count >= 2);
    let mut cells = Vec::with_capacity(theta_count * phi_count);
    for ti in 0..theta_count {
        let theta = 2.0 * std::f64::consts::PI * ti as f64 / theta_count as f64;
        for pi_idx in 0..phi_count {
            let phi =
                std::f64::consts::FRAC_PI_2 * pi_idx as f64 / (phi_count - 1) as f64;
            let v = unit_normal_from_angles(theta, phi);
            let alpha = plane_basis(&v);
            cells.push(LandscapeCell {
                theta,
                phi,
                cost: cost(&alpha, data),
            });
        }
    }
    let markers = markers
        .iter()
        .map(|(name, alpha)| {
            let (t, p) = embedding_to_angles(alpha);
            (name.clone(), t, p)
        })
        .collect();
    Ok(LandscapeGrid {
        theta_count,
        phi_count,
        cells,
        markers,
    })
}

/// Circular-coordinate recovery of a path, with alignment to ground truth.
#[derive(Debug, Clone)]
pub struct PathRecovery {
    /// Two-argument arctangent of the recovered coordinates, in (-pi, pi].
    pub raw_angles: Vec<f64>,
    /// Angles modulo pi, in [0, pi).
    pub grassmann_angles: Vec<f64>,
    /// Unwrapped, reflected/rotated/scaled to the truth.
    pub aligned_angles: Vec<f64>,
    /// Gaussian-smoothed aligned angles.
    pub smoothed_angles: Vec<f64>,
    /// Gaussian-smoothed ground truth used for the MSE.
    pub smoothed_truth: Vec<f64>,
    pub mse: f64,
    pub scale: f64,
    pub offset: f64,
    pub reflected: bool,
}

/// Standard phase unwrapping: fold consecutive jumps larger than pi.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut shift = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let prev = angles[i - 1];
            let mut d = a - prev;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
                shift -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
                shift += 2.0 * std::f64::consts::PI;
            }
        }
        out.push(a + shift);
    }
    out
}

/// Gaussian smoothing with a truncated, edge-renormalized kernel.
pub fn gaussian_smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return values.to_vec();
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let n = values.len() as isize;
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for d in -radius..=radius {
                let idx = t + d;
                if idx >= 0 && idx < n {
                    let w = weights[(d + radius) as usize];
                    acc += w * values[idx as usize];
                    wsum += w;
                }
            }
            acc / wsum
        })
        .collect()
}

/// Aligns recovered circle coordinates to a ground-truth path and reports
/// the MSE between the smoothed sequences.
///
/// Alignment: choose the orientation sign minimizing the final MSE, rotate
/// so the first samples match, fit a least-squares scale on the unwrapped
/// angles, then smooth both sequences with the given sigma (in samples).
pub fn recover_path(
    low_dim: &FrameDataset,
    truth: &[f64],
    smoothing_sigma: f64,
) -> Result<PathRecovery> {
    if low_dim.ambient_dim != 2 || low_dim.frame_size != 1 {
        return Err(Error::DimensionBounds {
            k: low_dim.frame_size,
            n: 2,
            ambient: low_dim.ambient_dim,
        });
    }
    if low_dim.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: low_dim.len(),
            right: truth.len(),
        });
    }
    let raw_angles: Vec<f64> = low_dim
        .points()
        .iter()
        .map(|p| p.matrix()[(1, 0)].atan2(p.matrix()[(0, 0)]))
        .collect();
    let grassmann_angles: Vec<f64> = raw_angles
        .iter()
        .map(|a| a.rem_euclid(std::f64::consts::PI))
        .collect();
    let unwrapped = unwrap_angles(&raw_angles);
    let smoothed_truth = gaussian_smooth(truth, smoothing_sigma);

    let mut best: Option<(bool, PathRecovery)> = None;
    for reflected in [false, true] {
        let sign = if reflected { -1.0 } else { 1.0 };
        let u: Vec<f64> = unwrapped.iter().map(|a| sign * a).collect();
        let u0 = u[0];
        let t0 = truth[0];
        let num: f64 = u
            .iter()
            .zip(truth)
            .map(|(&ui, &ti)| (ui - u0) * (ti - t0))
            .sum();
        let den: f64 = u.iter().map(|&ui| (ui - u0) * (ui - u0)).sum();
        let scale = if den > 0.0 { num / den } else { 1.0 };
        let aligned: Vec<f64> = u.iter().map(|&ui| t0 + scale * (ui - u0)).collect();
        let smoothed = gaussian_smooth(&aligned, smoothing_sigma);
        let mse = smoothed
            .iter()
            .zip(&smoothed_truth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / smoothed.len() as f64;
        // a negative scale means this orientation is backwards; the other
        // sign covers it, so keep this candidate only as a fallback
        let backwards = scale < 0.0;
        let candidate = PathRecovery {
            raw_angles: raw_angles.clone(),
            grassmann_angles: grassmann_angles.clone(),
            aligned_angles: aligned,
            smoothed_angles: smoothed,
            smoothed_truth: smoothed_truth.clone(),
            mse,
            scale,
            offset: t0 - scale * u0,
            reflected,
        };
        let better = match &best {
            None => true,
            Some((b_back, b)) => (backwards, candidate.mse) < (*b_back, b.mse),
        };
        if better {
            best = Some((backwards, candidate));
        }
    }
    Ok(best.expect("both orientations evaluated").1)
}

/// Lloyd k-means under the chordal metric with closed-form Frechet
/// centroids (polar factor of each cluster's member sum). Best of
/// `restarts` seeded initializations by within-cluster sum of squares.
pub fn kmeans_stiefel(
    points: &FrameDataset,
    cluster_count: usize,
    seed: u64,
    restarts: usize,
) -> Result<Vec<usize>> {
    let m = points.len();
    if cluster_count == 0 || cluster_count > m {
        return Err(Error::LengthMismatch {
            left: cluster_count,
            right: m,
        });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        // distinct initial centroid indices
        let mut centroid_idx: Vec<usize> = Vec::new();
        while centroid_idx.len() < cluster_count {
            let i = rng.random_range(0..m);
            if !centroid_idx.contains(&i) {
                centroid_idx.push(i);
            }
        }
        let mut centroids: Vec<Mat> = centroid_idx
            .iter()
            .map(|&i| points.points()[i].matrix().clone())
            .collect();
        let mut labels = vec![0usize; m];
        let mut wcss = f64::INFINITY;
        for _iter in 0..100 {
            // assignment
            for (i, p) in points.points().iter().enumerate() {
                let mut best_c = (f64::INFINITY, 0usize);
                for (c, cent) in centroids.iter().enumerate() {
                    let d = (p.matrix() - cent).norm_squared();
                    if d < best_c.0 {
                        best_c = (d, c);
                    }
                }
                labels[i] = best_c.1;
            }
            // update
            let mut changed = false;
            for c in 0..cluster_count {
                let members: Vec<usize> =
                    (0..m).filter(|&i| labels[i] == c).collect();
                let new_centroid = if members.is_empty() {
                    None
                } else {
                    let mut sum = Mat::zeros(points.ambient_dim, points.frame_size);
                    for &i in &members {
                        sum += points.points()[i].matrix();
                    }
                    polar_factor(&sum).ok()
                };
                let new_centroid = match new_centroid {
                    Some(u) => u,
                    None => {
                        // empty or degenerate cluster: reseed from the point
                        // farthest from its own centroid
                        let far = (0..m)
                            .max_by(|&a, &b| {
                                let da = (points.points()[a].matrix()
                                    - &centroids[labels[a]])
                                    .norm_squared();
                                let db = (points.points()[b].matrix()
                                    - &centroids[labels[b]])
                                    .norm_squared();
                                da.partial_cmp(&db).unwrap()
                            })
                            .expect("nonempty dataset");
                        points.points()[far].matrix().clone()
                    }
                };
                if (&new_centroid - &centroids[c]).norm() > 1e-14 {
                    centroids[c] = new_centroid;
                    changed = true;
                }
            }
            let new_wcss: f64 = (0..m)
                .map(|i| (points.points()[i].matrix() - &centroids[labels[i]]).norm_squared())
                .sum();
            let converged = !changed || new_wcss >= wcss - 1e-15;
            wcss = new_wcss.min(wcss);
            if converged {
                break;
            }
        }
        if best.as_ref().map_or(true, |(w, _)| wcss < *w) {
            best = Some((wcss, labels));
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Adjusted Rand index between two labelings, in [-0.5, 1].
pub fn adjusted_rand_index(labels_a: &[i64], labels_b: &[i64]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    let n = labels_a.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    use std::collections::HashMap;
    let mut contingency: HashMap<(i64, i64), u64> = HashMap::new();
    let mut rows: HashMap<i64, u64> = HashMap::new();
    let mut cols: HashMap<i64, u64> = HashMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *contingency.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let choose2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let sum_ij: f64 = contingency.values().map(|&v| choose2(v)).sum();
    let sum_a: f64 = rows.values().map(|&v| choose2(v)).sum();
    let sum_b: f64 = cols.values().map(|&v| choose2(v)).sum();
    let total = choose2(n as u64);
    let expected = sum_a * sum_b / total;
    let max_index = (sum_a + sum_b) / 2.0;
    if (max_index - expected).abs() < 1e-15 {
        // both labelings are trivial partitions; agreement is perfect
        return Ok(1.0);
    }
    Ok((sum_ij - expected) / (max_index - expected))
}
