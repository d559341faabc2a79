use psc_core::pipeline::recover_low_dim;
use psc_core::{psc_fit, GdConfig, RansacConfig};

use crate::errors::CmdResult;
use crate::files::{self, ReportFileV1};
use crate::FitCmd;

pub fn run(cmd: &FitCmd) -> CmdResult<i32> {
    let data = files::read_dataset(&cmd.dataset, cmd.renormalize)?;
    let gd = GdConfig {
        max_iters: cmd.max_iters,
        grad_tol: cmd.grad_tol,
        initial_step: cmd.initial_step,
        ..GdConfig::default()
    };
    let ransac = cmd.ransac.then(|| RansacConfig {
        keep_fraction: cmd.keep_fraction,
        outlier_threshold: cmd.threshold,
        max_rounds: cmd.rounds,
        seed: cmd.seed,
    });
    let report = psc_fit(&data, cmd.n, &gd, ransac.as_ref())?;

    let report_path = cmd
        .report
        .clone()
        .unwrap_or_else(|| crate::with_suffix(&cmd.dataset, ".report.json"));
    files::write_report(&report_path, &ReportFileV1::from_fit(&report))?;

    let low_dim_path = cmd
        .low_dim
        .clone()
        .unwrap_or_else(|| crate::with_suffix(&cmd.dataset, ".low"));
    let low = recover_low_dim(&report)?;
    files::write_dataset(&low_dim_path, &low)?;

    let final_cost = report
        .cost_trace
        .entries
        .last()
        .map(|e| e.cost)
        .unwrap_or(f64::NAN);
    println!(
        "fit: n={} cost={:.6} mse={:.6e} iterations={} status={:?}",
        report.n,
        final_cost,
        report.mse,
        report.cost_trace.entries.len(),
        report.gd_status
    );
    println!(
        "removed: ransac={} pca-screen={} gd-screen={} survivors={}",
        report.removed_ransac.len(),
        report.removed_pca.len(),
        report.removed_gd.len(),
        report.survivors.len()
    );
    println!("report: {}", report_path.display());
    println!("low-dim coordinates: {}", low_dim_path.display());
    if report.removal_warning {
        eprintln!(
            "warning: removed {} of {} points; embedding dimension n={} may be too small",
            report.total_removed(),
            data.len(),
            report.n
        );
        return Ok(3);
    }
    Ok(0)
}
