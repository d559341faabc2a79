//! Seeded generators for the synthetic experiments: noisy embedded Stiefel
//! data, a half-circle stimulus-space model, and frame-valued lifts of
//! vector bundles (Mobius bundle over the circle, Whitney sum over the
//! torus).
//!
//! Every generator is a pure function of its config; identical seeds give
//! bit-identical datasets.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix_with, Mat};
use crate::projection::Embedding;
use crate::stiefel::{uniform_stiefel_with, FrameDataset, StiefelPoint};

/// Config for data of the form `y = polar(alpha x + eps u)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoisyEmbedConfig {
    pub ambient_dim: usize,
    pub n: usize,
    pub frame_size: usize,
    pub count: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// Ground truth accompanying a noisy embedded dataset.
#[derive(Debug, Clone)]
pub struct NoisyEmbedTruth {
    pub alpha: Embedding,
    pub coords: Vec<StiefelPoint>,
}

/// Draws `count` points `y_i = polar(alpha x_i + eps u_i)` with `x_i`
/// uniform on V_k(R^n) and `u_i` a uniformly random unit-Frobenius-norm
/// matrix. `eps = 0` puts the data exactly on the image of `alpha`.
pub fn generate_noisy_embedded(
    config: &NoisyEmbedConfig,
) -> Result<(FrameDataset, NoisyEmbedTruth)> {
    generate_noisy_embedded_with_alpha(config, None)
}

/// Same as [`generate_noisy_embedded`] with a caller-supplied generating
/// embedding instead of a uniform draw.
pub fn generate_noisy_embedded_with_alpha(
    config: &NoisyEmbedConfig,
    alpha: Option<Embedding>,
) -> Result<(FrameDataset, NoisyEmbedTruth)> {
    let (n_amb, n, k) = (config.ambient_dim, config.n, config.frame_size);
    if !(k <= n && n <= n_amb) {
        return Err(Error::DimensionBounds {
            k,
            n,
            ambient: n_amb,
        });
    }
    assert!(config.epsilon >= 0.0, "epsilon must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let alpha = match alpha {
        Some(a) => a,
        None => uniform_stiefel_with(n_amb, n, &mut rng)?,
    };
    let mut points = Vec::with_capacity(config.count);
    let mut coords = Vec::with_capacity(config.count);
    for _ in 0..config.count {
        let x = uniform_stiefel_with(n, k, &mut rng)?;
        let clean = alpha.matrix() * x.matrix();
        let y = if config.epsilon == 0.0 {
            StiefelPoint::new(clean)?
        } else {
            let mut drawn = None;
            for _ in 0..8u32 {
                let u = gaussian_matrix_with(n_amb, k, &mut rng);
                let u = &u / u.norm() * config.epsilon;
                if let Ok(p) = StiefelPoint::renormalize(&clean + &u) {
                    drawn = Some(p);
                    break;
                }
            }
            drawn.ok_or(Error::SamplingFailed { attempts: 8 })?
        };
        coords.push(x);
        points.push(y);
    }
    let data = FrameDataset::new(n_amb, k, points, None, "noisy-embed")?;
    Ok((data, NoisyEmbedTruth { alpha, coords }))
}

/// Config for the half-circle stimulus-space model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StimulusConfig {
    pub neuron_count: usize,
    pub slope_range: (f64, f64),
    pub walk_length: usize,
    /// Standard deviation of the Gaussian walk increments, in radians.
    pub walk_step_std: f64,
    pub seed: u64,
}

impl Default for StimulusConfig {
    fn default() -> Self {
        Self {
            neuron_count: 100,
            slope_range: (25.0, 50.0),
            walk_length: 13_000,
            walk_step_std: 0.01,
            seed: 0,
        }
    }
}

/// Simulated neural responses to a reflected random walk on `[0, pi]`.
///
/// Neurons sit at uniformly spaced points of the half-circle; neuron `i`
/// responds to stimulus angle `s` with the tent function
/// `max(1 - m_i * |n_i - s|, 0)`, slope `m_i` uniform in `slope_range`.
///
/// Returns a `walk_length x neuron_count` response matrix and the ground
/// truth angles.
pub fn generate_stimulus_walk(config: &StimulusConfig) -> (Mat, Vec<f64>) {
    assert!(config.walk_length >= 1 && config.neuron_count >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pi = std::f64::consts::PI;
    let neurons: Vec<f64> = (0..config.neuron_count)
        .map(|i| pi * i as f64 / (config.neuron_count - 1) as f64)
        .collect();
    let (lo, hi) = config.slope_range;
    let slopes: Vec<f64> = (0..config.neuron_count)
        .map(|_| rng.random_range(lo..hi))
        .collect();

    let normal = Normal::new(0.0, config.walk_step_std).expect("valid std");
    let mut angles = Vec::with_capacity(config.walk_length);
    let mut s: f64 = rng.random_range(0.0..pi);
    for _ in 0..config.walk_length {
        angles.push(s);
        s += normal.sample(&mut rng);
        // reflecting boundaries
        loop {
            if s < 0.0 {
                s = -s;
            } else if s > pi {
                s = 2.0 * pi - s;
            } else {
                break;
            }
        }
    }

    let mut responses = Mat::zeros(config.walk_length, config.neuron_count);
    for (t, &angle) in angles.iter().enumerate() {
        for i in 0..config.neuron_count {
            let r: f64 = 1.0 - slopes[i] * (neurons[i] - angle).abs();
            responses[(t, i)] = r.max(0.0);
        }
    }
    (responses, angles)
}

/// Centers responses by the per-neuron temporal mean, then normalizes each
/// time step onto the unit sphere, yielding points on V_1(R^neurons).
pub fn preprocess_responses(responses: &Mat) -> Result<FrameDataset> {
    let (steps, neurons) = responses.shape();
    if steps == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut means = vec![0.0; neurons];
    for i in 0..neurons {
        means[i] = responses.column(i).sum() / steps as f64;
    }
    let mut points = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut v = Mat::zeros(neurons, 1);
        for i in 0..neurons {
            v[(i, 0)] = responses[(t, i)] - means[i];
        }
        let norm = v.norm();
        if norm < 1e-14 {
            return Err(Error::DegenerateStep { index: t });
        }
        points.push(StiefelPoint::new(v / norm)?);
    }
    FrameDataset::new(neurons, 1, points, None, "stimulus responses")
}

/// How base points are sampled for bundle lifts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum BundleMode {
    Uniform,
    /// Closed curve `t -> (p t, q t) mod 1` on the torus.
    PqCurve { p: i64, q: i64 },
}

/// Config for vector-bundle lifts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleConfig {
    /// Charts per circle factor (25 for the Mobius bundle, 10 per factor
    /// for the torus).
    pub chart_count: usize,
    pub sample_count: usize,
    pub mode: BundleMode,
    pub seed: u64,
}

/// Circle distance on R/Z.
fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Tent partition of unity subordinate to the cover by intervals of
/// half-width 1/J around the chart centers `j/J`. The tents already sum to
/// one everywhere.
fn tent(b: f64, chart: usize, charts: usize) -> f64 {
    let center = chart as f64 / charts as f64;
    (1.0 - charts as f64 * circle_dist(b, center)).max(0.0)
}

/// Index of the chart whose center is nearest to `b` (ties to the lower
/// index).
fn nearest_chart(b: f64, charts: usize) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for j in 0..charts {
        let d = circle_dist(b, j as f64 / charts as f64);
        if d < best.0 - 1e-15 {
            best = (d, j);
        }
    }
    best.1
}

/// Mobius transition sign between adjacent charts `j` and `l` on a
/// `charts`-chart circle cover: +1 on every overlap except the one between
/// the last and first chart, which carries the orientation flip. Symmetric,
/// so it is a valid O(1) cocycle with holonomy -1.
fn mobius_sign(j: usize, l: usize, charts: usize) -> f64 {
    if j == l {
        1.0
    } else if (j + 1) % charts == l || (l + 1) % charts == j {
        let wrap = (j == charts - 1 && l == 0) || (l == charts - 1 && j == 0);
        if wrap {
            -1.0
        } else {
            1.0
        }
    } else {
        0.0
    }
}

/// The Mobius-bundle lift of one base point via the chart `base_chart`:
/// entry `j` is `sqrt(phi_j(b)) * Omega_{j, base_chart}`.
fn mobius_lift_point(b: f64, base_chart: usize, charts: usize) -> Mat {
    let mut v = Mat::zeros(charts, 1);
    for offset in [charts - 1, 0, 1] {
        let j = (base_chart + offset) % charts;
        let phi = tent(b, j, charts);
        if phi > 0.0 {
            v[(j, 0)] = phi.sqrt() * mobius_sign(j, base_chart, charts);
        }
    }
    v
}

/// Samples base points on the circle and emits their Mobius-bundle lifts
/// in V_1(R^J), together with the ground-truth base coordinates in [0, 1).
pub fn mobius_lift(config: &BundleConfig) -> Result<(FrameDataset, Vec<f64>)> {
    assert!(config.chart_count >= 3, "need at least 3 charts");
    let charts = config.chart_count;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(config.sample_count);
    let mut truth = Vec::with_capacity(config.sample_count);
    for _ in 0..config.sample_count {
        let b: f64 = rng.random_range(0.0..1.0);
        let chart = nearest_chart(b, charts);
        let v = mobius_lift_point(b, chart, charts);
        points.push(StiefelPoint::new(v)?);
        truth.push(b);
    }
    let data = FrameDataset::new(charts, 1, points, None, "mobius lift")?;
    Ok((data, truth))
}

/// Whitney sum of two pulled-back Mobius bundles over the torus: a rank-2
/// bundle lifted to V_2(R^{2 J^2}) with `J = chart_count` charts per
/// factor. Transition functions are diagonal with the per-factor Mobius
/// signs; the partition of unity is the product of the factor tents.
pub fn torus_whitney_lift(config: &BundleConfig) -> Result<(FrameDataset, Vec<(f64, f64)>)> {
    assert!(config.chart_count >= 3, "need at least 3 charts per factor");
    let charts = config.chart_count;
    let ambient = 2 * charts * charts;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(config.sample_count);
    let mut truth = Vec::with_capacity(config.sample_count);
    for _ in 0..config.sample_count {
        let (x1, x2) = match config.mode {
            BundleMode::Uniform => (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)),
            BundleMode::PqCurve { p, q } => {
                let t: f64 = rng.random_range(0.0..1.0);
                (
                    (p as f64 * t).rem_euclid(1.0),
                    (q as f64 * t).rem_euclid(1.0),
                )
            }
        };
        let a = nearest_chart(x1, charts);
        let b = nearest_chart(x2, charts);
        let mut frame = Mat::zeros(ambient, 2);
        for off1 in [charts - 1, 0, 1] {
            let j = (a + off1) % charts;
            let phi1 = tent(x1, j, charts);
            if phi1 == 0.0 {
                continue;
            }
            for off2 in [charts - 1, 0, 1] {
                let l = (b + off2) % charts;
                let phi2 = tent(x2, l, charts);
                if phi2 == 0.0 {
                    continue;
                }
                let weight = (phi1 * phi2).sqrt();
                let row = 2 * (j * charts + l);
                frame[(row, 0)] = weight * mobius_sign(j, a, charts);
                frame[(row + 1, 1)] = weight * mobius_sign(l, b, charts);
            }
        }
        points.push(StiefelPoint::new(frame)?);
        truth.push((x1, x2));
    }
    let data = FrameDataset::new(ambient, 2, points, None, "torus whitney lift")?;
    Ok((data, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::project;

    #[test]
    fn noiseless_data_sits_on_image() {
        let cfg = NoisyEmbedConfig {
            ambient_dim: 5,
            n: 3,
            frame_size: 1,
            count: 20,
            epsilon: 0.0,
            seed: 1,
        };
        let (data, truth) = generate_noisy_embedded(&cfg).unwrap();
        for y in data.points() {
            let out = project(&truth.alpha, y).unwrap();
            assert!(out.residual < 1e-12);
        }
    }

    #[test]
    fn perturbation_norm_bounds_k1() {
        let cfg = NoisyEmbedConfig {
            ambient_dim: 4,
            n: 2,
            frame_size: 1,
            count: 50,
            epsilon: 0.3,
            seed: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let alpha = uniform_stiefel_with(4, 2, &mut rng).unwrap();
        for _ in 0..cfg.count {
            let x = uniform_stiefel_with(2, 1, &mut rng).unwrap();
            let clean = alpha.matrix() * x.matrix();
            let u = gaussian_matrix_with(4, 1, &mut rng);
            let u = &u / u.norm() * cfg.epsilon;
            let norm = (&clean + &u).norm();
            assert!(norm >= 1.0 - cfg.epsilon - 1e-12 && norm <= 1.0 + cfg.epsilon + 1e-12);
        }
    }

    #[test]
    fn noisy_points_stay_near_image() {
        // After renormalization the residual stays within 2*eps.
        let cfg = NoisyEmbedConfig {
            ambient_dim: 3,
            n: 2,
            frame_size: 1,
            count: 100,
            epsilon: 0.5,
            seed: 3,
        };
        let (data, truth) = generate_noisy_embedded(&cfg).unwrap();
        let mut max_residual: f64 = 0.0;
        for y in data.points() {
            let out = project(&truth.alpha, y).unwrap();
            max_residual = max_residual.max(out.residual);
        }
        assert!(max_residual <= 2.0 * cfg.epsilon, "max {max_residual}");
    }

    #[test]
    fn generator_is_deterministic() {
        let cfg = NoisyEmbedConfig {
            ambient_dim: 4,
            n: 2,
            frame_size: 1,
            count: 10,
            epsilon: 0.1,
            seed: 9,
        };
        let (a, _) = generate_noisy_embedded(&cfg).unwrap();
        let (b, _) = generate_noisy_embedded(&cfg).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(p.matrix(), q.matrix());
        }
    }

    #[test]
    fn stimulus_walk_basics() {
        let cfg = StimulusConfig {
            walk_length: 500,
            ..Default::default()
        };
        let (responses, angles) = generate_stimulus_walk(&cfg);
        assert_eq!(responses.nrows(), 500);
        assert_eq!(responses.ncols(), 100);
        let pi = std::f64::consts::PI;
        for &a in &angles {
            assert!((0.0..=pi).contains(&a));
        }
        // responses are in [0, 1] and zero beyond distance 1/m_i >= 1/50
        for v in responses.iter() {
            assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn stimulus_at_neuron_location_responds_fully() {
        // A stimulus exactly at a neuron's location gives response 1.
        let neurons = 5;
        let pi = std::f64::consts::PI;
        let locations: Vec<f64> = (0..neurons).map(|i| pi * i as f64 / 4.0).collect();
        for (i, &loc) in locations.iter().enumerate() {
            let r = 1.0 - 30.0 * (locations[i] - loc).abs();
            assert!((r.max(0.0) - 1.0).abs() < 1e-15);
        }
        // and zero at distance >= 1/m
        let r: f64 = 1.0 - 25.0 * (1.0 / 25.0 + 0.01);
        assert!(r.max(0.0) == 0.0);
    }

    #[test]
    fn preprocess_normalizes_and_centers() {
        let cfg = StimulusConfig {
            walk_length: 300,
            ..Default::default()
        };
        let (responses, _) = generate_stimulus_walk(&cfg);
        let data = preprocess_responses(&responses).unwrap();
        assert_eq!(data.len(), 300);
        for p in data.points() {
            assert!((p.matrix().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn preprocess_rejects_constant_responses() {
        let constant = Mat::from_element(10, 4, 0.7);
        assert!(matches!(
            preprocess_responses(&constant),
            Err(Error::DegenerateStep { .. })
        ));
    }

    #[test]
    fn mobius_lift_unit_norm() {
        let cfg = BundleConfig {
            chart_count: 25,
            sample_count: 200,
            mode: BundleMode::Uniform,
            seed: 4,
        };
        let (data, truth) = mobius_lift(&cfg).unwrap();
        assert_eq!(data.len(), 200);
        assert_eq!(truth.len(), 200);
        for p in data.points() {
            assert!((p.matrix().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mobius_overlap_lifts_differ_by_global_sign() {
        let charts = 25;
        for i in 0..200 {
            let b = (i as f64 + 0.31) / 200.0;
            let chart = nearest_chart(b, charts);
            // try the two neighbors as alternative base charts when b lies
            // in their support
            for alt in [(chart + 1) % charts, (chart + charts - 1) % charts] {
                if tent(b, alt, charts) > 0.0 {
                    let f1 = mobius_lift_point(b, chart, charts);
                    let f2 = mobius_lift_point(b, alt, charts);
                    let same = (&f1 - &f2).norm();
                    let flipped = (&f1 + &f2).norm();
                    assert!(
                        same < 1e-12 || flipped < 1e-12,
                        "b={b}: not related by a sign (|diff|={same}, |sum|={flipped})"
                    );
                }
            }
        }
    }

    #[test]
    fn mobius_projector_continuity_and_injectivity() {
        let charts = 25;
        let lift = |b: f64| {
            let c = nearest_chart(b, charts);
            let f = mobius_lift_point(b, c, charts);
            &f * f.transpose()
        };
        // continuity sweep
        for i in 0..10_000 {
            let b = i as f64 / 10_000.0;
            let b2 = (b + 1e-6).rem_euclid(1.0);
            // sqrt(tent) is Holder-1/2 at chart edges, so the modulus here
            // is O(sqrt(delta)); a bad seam sign would jump by O(1)
            assert!((lift(b) - lift(b2)).norm() <= 2e-2, "b={b}");
        }
        // injectivity at scale 0.01
        let samples: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        for (i, &a) in samples.iter().enumerate() {
            for &b in &samples[i + 1..] {
                if circle_dist(a, b) >= 0.01 {
                    let d = (lift(a) - lift(b)).norm();
                    assert!(d >= 1e-4, "a={a} b={b} d={d}");
                    break; // one far pair per anchor keeps this O(n)
                }
            }
        }
    }

    #[test]
    fn torus_lift_is_orthonormal() {
        let cfg = BundleConfig {
            chart_count: 10,
            sample_count: 100,
            mode: BundleMode::Uniform,
            seed: 5,
        };
        let (data, _) = torus_whitney_lift(&cfg).unwrap();
        assert_eq!(data.ambient_dim, 200);
        for p in data.points() {
            assert!(p.orthonormality_defect() <= 1e-12);
        }
    }

    #[test]
    fn pq_curve_samples_lie_on_diagonal() {
        let cfg = BundleConfig {
            chart_count: 10,
            sample_count: 50,
            mode: BundleMode::PqCurve { p: 1, q: 1 },
            seed: 6,
        };
        let (_, truth) = torus_whitney_lift(&cfg).unwrap();
        for (x1, x2) in truth {
            assert!((x1 - x2).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_uniform_second_moment_isotropic() {
        let cfg = BundleConfig {
            chart_count: 10,
            sample_count: 20_000,
            mode: BundleMode::Uniform,
            seed: 7,
        };
        let (data, _) = torus_whitney_lift(&cfg).unwrap();
        // Torus-rotation symmetry makes the diagonal of the second moment
        // uniform across chart pairs; check the first coordinate pair
        // against the average level 1/(charts^2).
        let mut acc0 = 0.0;
        let mut acc1 = 0.0;
        for p in data.points() {
            acc0 += p.matrix()[(0, 0)] * p.matrix()[(0, 0)];
            acc1 += p.matrix()[(1, 1)] * p.matrix()[(1, 1)];
        }
        acc0 /= data.len() as f64;
        acc1 /= data.len() as f64;
        let level = 1.0 / 100.0;
        assert!((acc0 - level).abs() < 0.05);
        assert!((acc1 - level).abs() < 0.05);
    }
}
