//! CSV writers and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use railray::dynamics::ChannelSnapshot;
use railray::metrics::{ErrorReport, PowerDecomposition, CDF_LEVELS};
use railray::{Metric, SnapshotMetrics, TvCir};

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: &str =
    "timestamp_s,path_id,signature,delay_s,aod_az_rad,aod_el_rad,aoa_az_rad,aoa_el_rad,doppler_hz,\
t_vv_re,t_vv_im,t_vh_re,t_vh_im,t_hv_re,t_hv_im,t_hh_re,t_hh_im,tag";

/// Buffered CSV file with I/O errors mapped to runtime errors.
pub struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    pub fn create(path: &Path, header: &str) -> CliResult<CsvFile> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut f = CsvFile {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        f.line(header)?;
        Ok(f)
    }

    pub fn line(&mut self, text: &str) -> CliResult<()> {
        writeln!(self.out, "{text}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

pub fn join(fields: impl IntoIterator<Item = String>) -> String {
    fields.into_iter().collect::<Vec<_>>().join(",")
}

/// Appends one row per path of `snapshot`.
pub fn write_trace_rows(csv: &mut CsvFile, snapshot: &ChannelSnapshot) -> CliResult<()> {
    for (id, p) in snapshot.paths.iter().enumerate() {
        let t = &p.transfer;
        // Column order VV, VH, HV, HH with the matrix indexed [(rx, tx)].
        let entries = [t[(0, 0)], t[(1, 0)], t[(0, 1)], t[(1, 1)]];
        let mut fields = vec![
            snapshot.time.to_string(),
            id.to_string(),
            p.signature.to_string(),
            p.delay.to_string(),
            p.aod.0.to_string(),
            p.aod.1.to_string(),
            p.aoa.0.to_string(),
            p.aoa.1.to_string(),
            p.doppler_hz.to_string(),
        ];
        for z in entries {
            fields.push(z.re.to_string());
            fields.push(z.im.to_string());
        }
        fields.push(p.tag.as_str().to_string());
        csv.line(&join(fields))?;
    }
    Ok(())
}

pub fn metrics_header() -> String {
    join(std::iter::once("timestamp_s".to_string()).chain(Metric::ALL.iter().map(|m| m.name().to_string())))
}

pub fn metrics_row(m: &SnapshotMetrics) -> String {
    join(std::iter::once(m.time.to_string()).chain(Metric::ALL.iter().map(|&k| m.get(k).to_string())))
}

pub fn write_metrics(path: &Path, rows: &[SnapshotMetrics]) -> CliResult<PathBuf> {
    let mut csv = CsvFile::create(path, &metrics_header())?;
    for r in rows {
        csv.line(&metrics_row(r))?;
    }
    csv.finish()
}

/// Per-metric error summary with the absolute-error quantile table.
pub fn write_error_report(path: &Path, report: &ErrorReport) -> CliResult<PathBuf> {
    let header = join(
        ["metric", "rmse", "q10", "q90", "nrmse", "degenerate", "excluded"]
            .iter()
            .map(|s| s.to_string())
            .chain(CDF_LEVELS.iter().map(|q| format!("abs_err_p{}", q * 100.0))),
    );
    let mut csv = CsvFile::create(path, &header)?;
    for m in &report.metrics {
        let fields = [
            m.metric.name().to_string(),
            m.rmse.to_string(),
            m.q10.to_string(),
            m.q90.to_string(),
            m.nrmse.to_string(),
            m.degenerate.to_string(),
            m.excluded.to_string(),
        ];
        csv.line(&join(
            fields
                .into_iter()
                .chain(m.cdf_table().into_iter().map(|(_, v)| v.to_string())),
        ))?;
    }
    csv.finish()
}

/// Sorted absolute errors in long form, one row per sample.
pub fn write_error_cdf(path: &Path, report: &ErrorReport) -> CliResult<PathBuf> {
    let mut csv = CsvFile::create(path, "metric,rank,probability,abs_error")?;
    for m in &report.metrics {
        let n = m.abs_errors.len();
        for (i, e) in m.abs_errors.iter().enumerate() {
            csv.line(&format!(
                "{},{},{},{}",
                m.metric.name(),
                i,
                (i + 1) as f64 / n as f64,
                e
            ))?;
        }
    }
    csv.finish()
}

/// Delay bins as rows, timestamps as (re, im) column pairs.
pub fn write_tv_cir(path: &Path, cir: &TvCir) -> CliResult<PathBuf> {
    let header = join(
        std::iter::once("delay_s".to_string())
            .chain(cir.times.iter().flat_map(|t| [format!("t{t}_re"), format!("t{t}_im")])),
    );
    let mut csv = CsvFile::create(path, &header)?;
    for (j, tau) in cir.delays.iter().enumerate() {
        let row = join(
            std::iter::once(tau.to_string()).chain(
                cir.values
                    .iter()
                    .flat_map(|row| [row[j].re.to_string(), row[j].im.to_string()]),
            ),
        );
        csv.line(&row)?;
    }
    csv.finish()
}

pub fn write_power_decomposition(path: &Path, d: &PowerDecomposition) -> CliResult<PathBuf> {
    let mut csv = CsvFile::create(path, "timestamp_s,specular_dbm,scatter_dbm,total_dbm")?;
    for s in &d.series {
        csv.line(&format!("{},{},{},{}", s.time, s.specular, s.scatter, s.total))?;
    }
    csv.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn digest(path: &Path) -> CliResult<FileEntry> {
    let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileEntry {
        name: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        bytes: data.len() as u64,
        sha256: hex::encode(Sha256::digest(&data)),
    })
}

/// Everything needed to repeat a run: configuration echo, seed, software
/// version, timings and output digests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub software: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub scene_sha256: String,
    pub rt_invocations: Vec<(String, usize)>,
    pub timings_s: Vec<(String, f64)>,
    pub files: Vec<FileEntry>,
}

impl<C: Serialize> RunManifest<C> {
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
