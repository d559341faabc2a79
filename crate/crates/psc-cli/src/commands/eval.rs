use std::path::Path;

use psc_core::eval::{
    adjusted_rand_index, kmeans_stiefel, landscape, recover_path, spectrum,
};
use psc_core::projection::project_batch;
use psc_core::stiefel::frechet_variance;
use psc_core::{Embedding, FrameDataset};

use crate::errors::{CmdError, CmdResult};
use crate::files;
use crate::EvalCmd;

fn emit(out: Option<&Path>, text: &str) -> CmdResult<()> {
    match out {
        Some(path) => files::atomic_write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reads an embedding stored as a one-point dataset file (the `.alpha`
/// sidecar written by `generate`).
fn read_embedding(path: &Path) -> CmdResult<Embedding> {
    let ds = files::read_dataset(path, false)?;
    if ds.len() != 1 {
        return Err(CmdError::Usage(format!(
            "{}: expected a single-point embedding file, found {} points",
            path.display(),
            ds.len()
        )));
    }
    Ok(ds.points()[0].clone())
}

pub fn run(cmd: &EvalCmd) -> CmdResult<i32> {
    match cmd {
        EvalCmd::Mse { report } => {
            let report = files::read_report(report)?;
            println!("{}", files::fmt_f64(report.mse));
            Ok(0)
        }
        EvalCmd::VarianceRatio { report, data } => {
            let report = files::read_report(report)?;
            let data = files::read_dataset(data, false)?;
            let alpha = report.alpha_gd_embedding()?;
            let originals = data.subset(&report.survivors);
            let outcomes = project_batch(&alpha, &originals);
            let projected: Vec<_> = outcomes
                .iter()
                .map(|o| {
                    o.projected.clone().ok_or_else(|| {
                        CmdError::Degenerate("survivor left the projection domain".to_string())
                    })
                })
                .collect::<CmdResult<_>>()?;
            let projected = FrameDataset::new(
                data.ambient_dim,
                data.frame_size,
                projected,
                None,
                "projected",
            )?;
            let ratio = frechet_variance(&projected)? / frechet_variance(&originals)?;
            println!("{}", files::fmt_f64(ratio));
            Ok(0)
        }
        EvalCmd::Spectrum { data, out } => {
            let data = files::read_dataset(data, false)?;
            let values = spectrum(&data)?;
            let mut text = String::new();
            for v in &values {
                text.push_str(&files::fmt_f64(*v));
                text.push('\n');
            }
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        EvalCmd::Landscape {
            data,
            theta_res,
            phi_res,
            report,
            alpha,
            out,
        } => {
            let data = files::read_dataset(data, false)?;
            let mut markers = Vec::new();
            if let Some(path) = report {
                let r = files::read_report(path)?;
                markers.push(("alpha_pca".to_string(), r.alpha_pca_embedding()?));
                markers.push(("alpha_gd".to_string(), r.alpha_gd_embedding()?));
            }
            if let Some(path) = alpha {
                markers.push(("alpha_true".to_string(), read_embedding(path)?));
            }
            let grid = landscape(&data, *theta_res, *phi_res, &markers)?;
            let mut text = String::from("kind,name,theta,phi,cost\n");
            for cell in &grid.cells {
                text.push_str(&format!(
                    "cell,,{},{},{}\n",
                    files::fmt_f64(cell.theta),
                    files::fmt_f64(cell.phi),
                    files::fmt_f64(cell.cost)
                ));
            }
            for (name, theta, phi) in &grid.markers {
                text.push_str(&format!(
                    "marker,{name},{},{},\n",
                    files::fmt_f64(*theta),
                    files::fmt_f64(*phi)
                ));
            }
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        EvalCmd::Path {
            low_dim,
            truth,
            sigma,
            out,
        } => {
            let low = files::read_dataset(low_dim, false)?;
            let truth = files::read_column(truth)?;
            let recovery = recover_path(&low, &truth, *sigma)?;
            if let Some(path) = out {
                let mut text =
                    String::from("raw,grassmann,aligned,smoothed,smoothed_truth\n");
                for i in 0..recovery.raw_angles.len() {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        files::fmt_f64(recovery.raw_angles[i]),
                        files::fmt_f64(recovery.grassmann_angles[i]),
                        files::fmt_f64(recovery.aligned_angles[i]),
                        files::fmt_f64(recovery.smoothed_angles[i]),
                        files::fmt_f64(recovery.smoothed_truth[i])
                    ));
                }
                files::atomic_write(path, &text)?;
            }
            println!(
                "mse={} scale={} offset={} reflected={}",
                files::fmt_f64(recovery.mse),
                files::fmt_f64(recovery.scale),
                files::fmt_f64(recovery.offset),
                recovery.reflected
            );
            Ok(0)
        }
        EvalCmd::Kmeans {
            data,
            clusters,
            seed,
            restarts,
            out,
        } => {
            let data = files::read_dataset(data, false)?;
            let labels = kmeans_stiefel(&data, *clusters, *seed, *restarts)?;
            let mut text = String::new();
            for l in &labels {
                text.push_str(&l.to_string());
                text.push('\n');
            }
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        EvalCmd::Ari { a, b } => {
            let la = files::read_labels(a)?;
            let lb = files::read_labels(b)?;
            let ari = adjusted_rand_index(&la, &lb)?;
            println!("{}", files::fmt_f64(ari));
            Ok(0)
        }
    }
}
