//! On-disk formats: the `psc-dataset v1` text format for frame datasets
//! and the JSON fit report. All writes are atomic (temp file + rename)
//! and all float rendering uses 17 significant digits, so seeded runs are
//! byte-reproducible and values round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use psc_core::linalg::mat_from_row_major;
use psc_core::pipeline::FitReport;
use psc_core::stiefel::StiefelPoint;
use psc_core::{Embedding, FrameDataset, GdConfig, GdStatus, RansacConfig};
use serde::{Deserialize, Serialize};

use crate::errors::{CmdError, CmdResult};

/// 17 significant digits: exact round-trip for every finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn atomic_write(path: &Path, contents: &str) -> CmdResult<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = PathBuf::from(path);
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(".tmp");
    tmp.set_file_name(name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serializes a dataset in the `psc-dataset v1` format: a header line,
/// then one CSV row per point with the N*k entries in row-major order,
/// plus a trailing label column when labels are present.
pub fn dataset_to_string(data: &FrameDataset) -> String {
    let labelled = data.labels.is_some();
    let mut out = format!(
        "# psc-dataset v1 N={} k={} count={}{}\n",
        data.ambient_dim,
        data.frame_size,
        data.len(),
        if labelled { " labels=1" } else { "" }
    );
    for (idx, p) in data.points().iter().enumerate() {
        let m = p.matrix();
        let mut fields = Vec::with_capacity(data.ambient_dim * data.frame_size + 1);
        for i in 0..data.ambient_dim {
            for j in 0..data.frame_size {
                fields.push(fmt_f64(m[(i, j)]));
            }
        }
        if let Some(labels) = &data.labels {
            fields.push(labels[idx].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_dataset(path: &Path, data: &FrameDataset) -> CmdResult<()> {
    atomic_write(path, &dataset_to_string(data))
}

pub fn parse_dataset(text: &str, source: &str, renormalize: bool) -> CmdResult<FrameDataset> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CmdError::Usage(format!("{source}: empty dataset file")))?;
    let rest = header
        .strip_prefix("# psc-dataset v1 ")
        .ok_or_else(|| CmdError::Usage(format!("{source}: missing psc-dataset v1 header")))?;
    let mut n_amb = None;
    let mut k = None;
    let mut count = None;
    let mut labelled = false;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| CmdError::Usage(format!("{source}: bad header field `{field}`")))?;
        let parse = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| CmdError::Usage(format!("{source}: bad header value `{v}`")))
        };
        match key {
            "N" => n_amb = Some(parse(value)?),
            "k" => k = Some(parse(value)?),
            "count" => count = Some(parse(value)?),
            "labels" => labelled = parse(value)? == 1,
            other => {
                return Err(CmdError::Usage(format!(
                    "{source}: unknown header key `{other}`"
                )))
            }
        }
    }
    let (n_amb, k, count) = match (n_amb, k, count) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(CmdError::Usage(format!(
                "{source}: header must carry N, k, and count"
            )))
        }
    };

    let mut points = Vec::with_capacity(count);
    let mut labels = if labelled { Some(Vec::new()) } else { None };
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = n_amb * k + usize::from(labelled);
        if fields.len() != expected {
            return Err(CmdError::Usage(format!(
                "{source}: row {row} has {} fields, expected {expected}",
                fields.len()
            )));
        }
        let mut entries = Vec::with_capacity(n_amb * k);
        for f in &fields[..n_amb * k] {
            entries.push(f.trim().parse::<f64>().map_err(|_| {
                CmdError::Usage(format!("{source}: row {row}: bad float `{f}`"))
            })?);
        }
        let m = mat_from_row_major(n_amb, k, &entries)?;
        let point = if renormalize {
            StiefelPoint::renormalize(m)?
        } else {
            StiefelPoint::new(m)?
        };
        points.push(point);
        if let Some(l) = labels.as_mut() {
            let f = fields[n_amb * k].trim();
            l.push(f.parse::<i64>().map_err(|_| {
                CmdError::Usage(format!("{source}: row {row}: bad label `{f}`"))
            })?);
        }
    }
    if points.len() != count {
        return Err(CmdError::Usage(format!(
            "{source}: header count {count} but {} rows",
            points.len()
        )));
    }
    Ok(FrameDataset::new(n_amb, k, points, labels, source)?)
}

pub fn read_dataset(path: &Path, renormalize: bool) -> CmdResult<FrameDataset> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string(), renormalize)
}

/// Single-column CSV of reals (truth angles, spectra, and similar).
pub fn write_column(path: &Path, values: &[f64]) -> CmdResult<()> {
    let mut out = String::new();
    for v in values {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    atomic_write(path, &out)
}

pub fn read_column(path: &Path) -> CmdResult<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| CmdError::Usage(format!("{}: bad float `{l}`", path.display())))
        })
        .collect()
}

pub fn read_labels(path: &Path) -> CmdResult<Vec<i64>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.trim()
                .parse::<i64>()
                .map_err(|_| CmdError::Usage(format!("{}: bad label `{l}`", path.display())))
        })
        .collect()
}

fn matrix_to_nested(m: &psc_core::Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn nested_to_embedding(rows: &[Vec<f64>], what: &str) -> CmdResult<Embedding> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(CmdError::Usage(format!("report: malformed {what} matrix")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let m = mat_from_row_major(nrows, ncols, &flat)?;
    Ok(StiefelPoint::new(m)?)
}

/// JSON fit report: dimensions, seed, configs, trace, removals, residuals,
/// and both embeddings as nested row-major arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFileV1 {
    pub version: u32,
    pub ambient_dim: usize,
    pub n: usize,
    pub frame_size: usize,
    pub seed: u64,
    pub gd_config: GdConfig,
    pub ransac_config: Option<RansacConfig>,
    pub gd_status: GdStatus,
    pub cost_trace: Vec<(usize, f64, f64, f64)>,
    pub removed_ransac: Vec<usize>,
    pub removed_pca: Vec<usize>,
    pub removed_gd: Vec<usize>,
    pub survivors: Vec<usize>,
    pub residuals: Vec<f64>,
    pub mse: f64,
    pub removal_warning: bool,
    pub alpha_pca: Vec<Vec<f64>>,
    pub alpha_gd: Vec<Vec<f64>>,
}

impl ReportFileV1 {
    pub fn from_fit(report: &FitReport) -> Self {
        Self {
            version: 1,
            ambient_dim: report.ambient_dim,
            n: report.n,
            frame_size: report.frame_size,
            seed: report.seed,
            gd_config: report.gd_config.clone(),
            ransac_config: report.ransac_config.clone(),
            gd_status: report.gd_status,
            cost_trace: report
                .cost_trace
                .entries
                .iter()
                .map(|e| (e.iteration, e.cost, e.grad_norm, e.step))
                .collect(),
            removed_ransac: report.removed_ransac.clone(),
            removed_pca: report.removed_pca.clone(),
            removed_gd: report.removed_gd.clone(),
            survivors: report.survivors.clone(),
            residuals: report.outcomes.iter().map(|o| o.residual).collect(),
            mse: report.mse,
            removal_warning: report.removal_warning,
            alpha_pca: matrix_to_nested(report.alpha_pca.matrix()),
            alpha_gd: matrix_to_nested(report.alpha_gd.matrix()),
        }
    }

    pub fn alpha_pca_embedding(&self) -> CmdResult<Embedding> {
        nested_to_embedding(&self.alpha_pca, "alpha_pca")
    }

    pub fn alpha_gd_embedding(&self) -> CmdResult<Embedding> {
        nested_to_embedding(&self.alpha_gd, "alpha_gd")
    }
}

pub fn write_report(path: &Path, report: &ReportFileV1) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CmdError::Other(format!("report serialization: {e}")))?;
    text.push('\n');
    atomic_write(path, &text)
}

pub fn read_report(path: &Path) -> CmdResult<ReportFileV1> {
    let text = fs::read_to_string(path)?;
    let report: ReportFileV1 = serde_json::from_str(&text)
        .map_err(|e| CmdError::Usage(format!("{}: {e}", path.display())))?;
    if report.version != 1 {
        return Err(CmdError::Usage(format!(
            "{}: unsupported report version {}",
            path.display(),
            report.version
        )));
    }
    Ok(report)
}
