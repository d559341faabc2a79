//! Seeded end-to-end experiment runs with pinned, desk-scale defaults.
//! Each run writes its datasets, reports, metric CSVs, and a summary
//! table into the output directory.

use std::path::{Path, PathBuf};

use psc_core::datagen::{
    generate_noisy_embedded, generate_stimulus_walk, mobius_lift, preprocess_responses,
    torus_whitney_lift, BundleConfig, BundleMode, NoisyEmbedConfig, StimulusConfig,
};
use psc_core::eval::{landscape, recover_path};
use psc_core::fit::cost;
use psc_core::pipeline::recover_low_dim;
use psc_core::projection::project_batch;
use psc_core::stiefel::StiefelPoint;
use psc_core::{psc_fit, Embedding, FitReport, FrameDataset, GdConfig};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::errors::{CmdError, CmdResult};
use crate::files::{self, fmt_f64, ReportFileV1};
use crate::ReproduceCmd;

fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn write_summary(dir: &Path, lines: &[String]) -> CmdResult<()> {
    let mut text = String::new();
    for l in lines {
        println!("{l}");
        text.push_str(l);
        text.push('\n');
    }
    files::atomic_write(&out_path(dir, "summary.txt"), &text)
}

/// Mean squared residual of `alpha` over `data` via the algebraic
/// identity mse = 2k - 2 cost; valid on and off the projection domain.
fn mse_of(alpha: &Embedding, data: &FrameDataset) -> f64 {
    2.0 * data.frame_size as f64 - 2.0 * cost(alpha, data)
}

fn fit_and_write(
    dir: &Path,
    stem: &str,
    data: &FrameDataset,
    n: usize,
    gd: &GdConfig,
) -> CmdResult<FitReport> {
    let report = psc_fit(data, n, gd, None)?;
    files::write_report(
        &out_path(dir, &format!("{stem}.report.json")),
        &ReportFileV1::from_fit(&report),
    )?;
    Ok(report)
}

/// One-sided paired t-test p-value for mean(diffs) > 0.
fn paired_p_value(diffs: &[f64]) -> CmdResult<f64> {
    let n = diffs.len();
    if n < 2 {
        return Err(CmdError::Degenerate(
            "paired test needs at least 2 trials".to_string(),
        ));
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
    if var <= 0.0 {
        return Err(CmdError::Degenerate(
            "zero variance in paired differences".to_string(),
        ));
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
        .map_err(|e| CmdError::Degenerate(e.to_string()))?;
    Ok(1.0 - dist.cdf(t))
}

pub fn run(cmd: &ReproduceCmd) -> CmdResult<i32> {
    match cmd {
        ReproduceCmd::Circle { seed, out } => circle(*seed, out),
        ReproduceCmd::Variance { seed, out } => variance(*seed, out),
        ReproduceCmd::Stimulus { seed, out } => stimulus(*seed, out),
        ReproduceCmd::Mobius { seed, trials, out } => mobius(*seed, *trials, out),
        ReproduceCmd::Torus { seed, trials, out } => torus(*seed, *trials, out),
    }
}

/// Noisy circle in S^2: plane recovery, cost ordering, loss landscape.
fn circle(seed: u64, dir: &Path) -> CmdResult<i32> {
    let config = NoisyEmbedConfig {
        ambient_dim: 3,
        n: 2,
        frame_size: 1,
        count: 100,
        epsilon: 0.8,
        seed,
    };
    let (data, truth) = generate_noisy_embedded(&config)?;
    files::write_dataset(&out_path(dir, "circle.csv"), &data)?;
    let report = fit_and_write(dir, "circle", &data, 2, &GdConfig::default())?;
    let survivors = data.subset(&report.survivors);
    let c_pca = cost(&report.alpha_pca, &survivors);
    let c_gd = cost(&report.alpha_gd, &survivors);
    let c_true = cost(&truth.alpha, &survivors);

    let markers = vec![
        ("alpha_pca".to_string(), report.alpha_pca.clone()),
        ("alpha_gd".to_string(), report.alpha_gd.clone()),
        ("alpha_true".to_string(), truth.alpha.clone()),
    ];
    let grid = landscape(&data, 72, 19, &markers)?;
    let mut text = String::from("kind,name,theta,phi,cost\n");
    for cell in &grid.cells {
        text.push_str(&format!(
            "cell,,{},{},{}\n",
            fmt_f64(cell.theta),
            fmt_f64(cell.phi),
            fmt_f64(cell.cost)
        ));
    }
    for (name, theta, phi) in &grid.markers {
        text.push_str(&format!(
            "marker,{name},{},{},\n",
            fmt_f64(*theta),
            fmt_f64(*phi)
        ));
    }
    files::atomic_write(&out_path(dir, "landscape.csv"), &text)?;

    write_summary(
        dir,
        &[
            format!("circle experiment (seed {seed}, eps 0.8, 100 points)"),
            format!("cost(alpha_true) = {}", fmt_f64(c_true)),
            format!("cost(alpha_pca)  = {}", fmt_f64(c_pca)),
            format!("cost(alpha_gd)   = {}", fmt_f64(c_gd)),
            format!("ordering gd >= pca >= true: {}", c_gd >= c_pca && c_pca >= c_true),
            format!("landscape max cost = {}", fmt_f64(grid.max_cost())),
        ],
    )?;
    Ok(0)
}

/// Variance-ratio curve over the target dimension.
fn variance(seed: u64, dir: &Path) -> CmdResult<i32> {
    let config = NoisyEmbedConfig {
        ambient_dim: 11,
        n: 6,
        frame_size: 1,
        count: 200,
        epsilon: 0.1,
        seed,
    };
    let (data, _) = generate_noisy_embedded(&config)?;
    files::write_dataset(&out_path(dir, "variance.csv"), &data)?;
    let mut rows = String::from("n,variance_ratio,mse\n");
    let mut lines = vec![format!(
        "variance-ratio curve (seed {seed}, N=11, true n=6, eps 0.1)"
    )];
    for n in 1..=8usize {
        let report = psc_fit(&data, n, &GdConfig::default(), None)?;
        let survivors = data.subset(&report.survivors);
        let outcomes = project_batch(&report.alpha_gd, &survivors);
        let projected: Vec<StiefelPoint> = outcomes
            .iter()
            .filter_map(|o| o.projected.clone())
            .collect();
        let projected = FrameDataset::new(data.ambient_dim, 1, projected, None, "proj")?;
        let ratio = psc_core::stiefel::frechet_variance(&projected)?
            / psc_core::stiefel::frechet_variance(&survivors)?;
        rows.push_str(&format!(
            "{n},{},{}\n",
            fmt_f64(ratio),
            fmt_f64(report.mse)
        ));
        lines.push(format!(
            "n={n}: variance ratio {:.4}, mse {:.4e}",
            ratio, report.mse
        ));
    }
    files::atomic_write(&out_path(dir, "variance_ratio.csv"), &rows)?;
    write_summary(dir, &lines)?;
    Ok(0)
}

/// Stimulus-space model: circular coordinate recovery from neural-style
/// responses, comparing the optimized embedding against plain PCA.
fn stimulus(seed: u64, dir: &Path) -> CmdResult<i32> {
    let config = StimulusConfig {
        seed,
        ..StimulusConfig::default()
    };
    let (responses, angles) = generate_stimulus_walk(&config);
    let data = preprocess_responses(&responses)?;
    files::write_dataset(&out_path(dir, "stimulus.csv"), &data)?;
    files::write_column(&out_path(dir, "stimulus.truth"), &angles)?;

    let report = fit_and_write(dir, "stimulus", &data, 2, &GdConfig::default())?;
    let survivors = data.subset(&report.survivors);
    let truth_surv: Vec<f64> = report.survivors.iter().map(|&i| angles[i]).collect();

    let low_gd = recover_low_dim(&report)?;
    files::write_dataset(&out_path(dir, "stimulus.low"), &low_gd)?;
    let rec_gd = recover_path(&low_gd, &truth_surv, 100.0)?;

    let pca_outcomes = project_batch(&report.alpha_pca, &survivors);
    let pca_coords: Vec<StiefelPoint> = pca_outcomes
        .iter()
        .filter_map(|o| o.y_hat.clone())
        .collect();
    if pca_coords.len() != survivors.len() {
        return Err(CmdError::Degenerate(
            "PCA projection left the domain on surviving points".to_string(),
        ));
    }
    let low_pca = FrameDataset::new(2, 1, pca_coords, None, "pca coords")?;
    let rec_pca = recover_path(&low_pca, &truth_surv, 100.0)?;

    write_summary(
        dir,
        &[
            format!(
                "stimulus-space experiment (seed {seed}, {} neurons, {} steps)",
                config.neuron_count, config.walk_length
            ),
            format!("path mse (alpha_gd)  = {}", fmt_f64(rec_gd.mse)),
            format!("path mse (alpha_pca) = {}", fmt_f64(rec_pca.mse)),
            format!("gd better than pca: {}", rec_gd.mse < rec_pca.mse),
        ],
    )?;
    Ok(0)
}

/// Mobius bundle: paired MSE comparison over seeded trials.
fn mobius(seed: u64, trials: usize, dir: &Path) -> CmdResult<i32> {
    let mut rows = String::from("trial,mse_pca,mse_gd\n");
    let mut diffs = Vec::with_capacity(trials);
    let mut mean_pca = 0.0;
    let mut mean_gd = 0.0;
    for t in 0..trials {
        let config = BundleConfig {
            chart_count: 25,
            sample_count: 1000,
            mode: BundleMode::Uniform,
            seed: seed.wrapping_add(t as u64),
        };
        let (data, _) = mobius_lift(&config)?;
        let report = psc_fit(&data, 2, &GdConfig::default(), None)?;
        let survivors = data.subset(&report.survivors);
        let m_pca = mse_of(&report.alpha_pca, &survivors);
        let m_gd = report.mse;
        rows.push_str(&format!("{t},{},{}\n", fmt_f64(m_pca), fmt_f64(m_gd)));
        diffs.push(m_pca - m_gd);
        mean_pca += m_pca / trials as f64;
        mean_gd += m_gd / trials as f64;
    }
    files::atomic_write(&out_path(dir, "mobius_trials.csv"), &rows)?;
    let p = paired_p_value(&diffs)?;
    write_summary(
        dir,
        &[
            format!("mobius bundle study (seed {seed}, {trials} trials, J=25, 1000 points)"),
            format!("mean mse (alpha_pca) = {}", fmt_f64(mean_pca)),
            format!("mean mse (alpha_gd)  = {}", fmt_f64(mean_gd)),
            format!("paired one-sided p-value = {}", fmt_f64(p)),
        ],
    )?;
    Ok(0)
}

/// Torus Whitney sum: per-trial MSE ordering for uniform and (p,q)-curve
/// sampling.
fn torus(seed: u64, trials: usize, dir: &Path) -> CmdResult<i32> {
    let mut lines = vec![format!(
        "torus Whitney-sum study (seed {seed}, {trials} trials per curve, J=10)"
    )];
    let mut rows = String::from("curve,trial,mse_pca,mse_gd\n");
    for (p, q) in [(1u32, 1u32), (1, 15)] {
        let mut ordered = 0usize;
        for t in 0..trials {
            let config = BundleConfig {
                chart_count: 10,
                sample_count: 500,
                mode: BundleMode::PqCurve { p: i64::from(p), q: i64::from(q) },
                seed: seed.wrapping_add((p as u64) << 32 | q as u64).wrapping_add(t as u64),
            };
            let (data, _) = torus_whitney_lift(&config)?;
            let report = psc_fit(&data, 2, &GdConfig::default(), None)?;
            let survivors = data.subset(&report.survivors);
            let m_pca = mse_of(&report.alpha_pca, &survivors);
            let m_gd = report.mse;
            rows.push_str(&format!(
                "({p};{q}),{t},{},{}\n",
                fmt_f64(m_pca),
                fmt_f64(m_gd)
            ));
            if m_gd < m_pca {
                ordered += 1;
            }
        }
        lines.push(format!(
            "({p},{q})-curve: gd < pca in {ordered}/{trials} trials"
        ));
    }
    files::atomic_write(&out_path(dir, "torus_trials.csv"), &rows)?;
    write_summary(dir, &lines)?;
    Ok(0)
}
