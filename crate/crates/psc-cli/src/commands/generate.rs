use std::path::{Path, PathBuf};

use psc_core::datagen::{
    generate_noisy_embedded, generate_stimulus_walk, mobius_lift, preprocess_responses,
    torus_whitney_lift, BundleConfig, BundleMode, NoisyEmbedConfig, StimulusConfig,
};
use psc_core::FrameDataset;

use crate::errors::{CmdError, CmdResult};
use crate::files;
use crate::GenerateCmd;

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(suffix);
    path.with_file_name(name)
}

fn alpha_as_dataset(alpha: &psc_core::Embedding) -> CmdResult<FrameDataset> {
    Ok(FrameDataset::new(
        alpha.ambient_dim(),
        alpha.frame_size(),
        vec![alpha.clone()],
        None,
        "generating embedding",
    )?)
}

pub fn run(cmd: &GenerateCmd) -> CmdResult<i32> {
    match cmd {
        GenerateCmd::NoisyEmbed {
            ambient_dim,
            n,
            k,
            count,
            eps,
            seed,
            out,
        } => {
            if !(*k <= *n && *n <= *ambient_dim) {
                return Err(CmdError::Usage(format!(
                    "need k <= n <= N, got k={k} n={n} N={ambient_dim}"
                )));
            }
            if *eps < 0.0 {
                return Err(CmdError::Usage(format!("--eps must be nonnegative, got {eps}")));
            }
            let config = NoisyEmbedConfig {
                ambient_dim: *ambient_dim,
                n: *n,
                frame_size: *k,
                count: *count,
                epsilon: *eps,
                seed: *seed,
            };
            let (data, truth) = generate_noisy_embedded(&config)?;
            files::write_dataset(out, &data)?;
            files::write_dataset(&sidecar(out, ".alpha"), &alpha_as_dataset(&truth.alpha)?)?;
            println!(
                "wrote {} ({} points in V_{}(R^{}))",
                out.display(),
                data.len(),
                k,
                ambient_dim
            );
            Ok(0)
        }
        GenerateCmd::Stimulus {
            neurons,
            steps,
            step_std,
            seed,
            out,
        } => {
            if *neurons < 2 || *steps == 0 {
                return Err(CmdError::Usage(
                    "need at least 2 neurons and 1 step".to_string(),
                ));
            }
            let config = StimulusConfig {
                neuron_count: *neurons,
                walk_length: *steps,
                walk_step_std: *step_std,
                seed: *seed,
                ..StimulusConfig::default()
            };
            let (responses, angles) = generate_stimulus_walk(&config);
            let data = preprocess_responses(&responses)?;
            files::write_dataset(out, &data)?;
            files::write_column(&sidecar(out, ".truth"), &angles)?;
            println!(
                "wrote {} ({} steps on S^{})",
                out.display(),
                data.len(),
                neurons - 1
            );
            Ok(0)
        }
        GenerateCmd::Mobius {
            charts,
            count,
            seed,
            out,
        } => {
            let config = BundleConfig {
                chart_count: *charts,
                sample_count: *count,
                mode: BundleMode::Uniform,
                seed: *seed,
            };
            let (data, truth) = mobius_lift(&config)?;
            files::write_dataset(out, &data)?;
            files::write_column(&sidecar(out, ".truth"), &truth)?;
            println!(
                "wrote {} ({} points in V_1(R^{charts}))",
                out.display(),
                data.len()
            );
            Ok(0)
        }
        GenerateCmd::Torus {
            charts,
            count,
            curve,
            seed,
            out,
        } => {
            let mode = match curve {
                Some((p, q)) => BundleMode::PqCurve { p: i64::from(*p), q: i64::from(*q) },
                None => BundleMode::Uniform,
            };
            let config = BundleConfig {
                chart_count: *charts,
                sample_count: *count,
                mode,
                seed: *seed,
            };
            let (data, truth) = torus_whitney_lift(&config)?;
            files::write_dataset(out, &data)?;
            let mut lines = String::new();
            for (x1, x2) in &truth {
                lines.push_str(&files::fmt_f64(*x1));
                lines.push(',');
                lines.push_str(&files::fmt_f64(*x2));
                lines.push('\n');
            }
            files::atomic_write(&sidecar(out, ".truth"), &lines)?;
            println!(
                "wrote {} ({} points in V_2(R^{}))",
                out.display(),
                data.len(),
                2 * charts * charts
            );
            Ok(0)
        }
    }
}
