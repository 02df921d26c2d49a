//! Experiment drivers behind the subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use railray::dynamics::{stream_snapshots, ChannelSnapshot, StreamConfig, StreamOutput, Trajectory};
use railray::metrics::{compare_streams, delay_stats, power_decomposition, synthesize_tv_cir, uniform_delay_grid};
use railray::rt::PathTag;
use railray::scene::{load_scene, Scene};
use railray::{ErrorReport, Metric, SnapshotMetrics};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, digest, CsvFile, RunManifest};
use crate::preset;

/// Pulse periods of delay axis kept beyond the longest path.
const CIR_SUPPORT: f64 = 8.0;

/// Outcome of one streamed run.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub kf_interval: f64,
    pub stream: StreamOutput,
    pub metrics_seconds: f64,
    pub wall_seconds: f64,
}

impl RunStats {
    /// Wall-clock of the channel computation (tracing, interpolation and
    /// scattering).
    pub fn compute_seconds(&self) -> f64 {
        self.stream.keyframe_seconds + self.stream.interpolation_seconds + self.stream.scatter_seconds
    }
}

/// Streams snapshots, reducing each to metrics and handing it to `each`.
pub fn stream_metrics(
    scene: &Scene,
    trajectory: &Trajectory,
    stream: &StreamConfig,
    tx_power_dbm: f64,
    mut each: impl FnMut(&ChannelSnapshot) -> CliResult<()>,
) -> CliResult<(Vec<SnapshotMetrics>, RunStats)> {
    let wall = Instant::now();
    let mut rows = Vec::new();
    let mut metrics_seconds = 0.0;
    let mut failure = None;
    let result = stream_snapshots(scene, trajectory, stream, |s| {
        let clock = Instant::now();
        rows.push(SnapshotMetrics::of(&s, tx_power_dbm));
        metrics_seconds += clock.elapsed().as_secs_f64();
        each(&s).map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            railray::Error::InvalidParameter(msg)
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let out = result?;
    Ok((
        rows,
        RunStats {
            kf_interval: stream.kf_interval,
            stream: out,
            metrics_seconds,
            wall_seconds: wall.elapsed().as_secs_f64(),
        },
    ))
}

fn output_dir(config: &ScenarioConfig) -> CliResult<PathBuf> {
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn scene_digest(config: &ScenarioConfig) -> CliResult<String> {
    match &config.scene {
        None => Ok(output::sha256_hex(preset::CANYON_SCENE.as_bytes())),
        Some(p) => Ok(output::sha256_hex(&std::fs::read(p).map_err(|e| CliError::io(p, e))?)),
    }
}

fn manifest(config: &ScenarioConfig, command: &str) -> CliResult<RunManifest<ScenarioConfig>> {
    Ok(RunManifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.into(),
        seed: config.seed,
        config: config.clone(),
        scene_sha256: scene_digest(config)?,
        rt_invocations: Vec::new(),
        timings_s: Vec::new(),
        files: Vec::new(),
    })
}

fn finish(mut m: RunManifest<ScenarioConfig>, dir: &Path, files: &[PathBuf]) -> CliResult<PathBuf> {
    m.files = files.iter().map(|f| digest(f)).collect::<CliResult<_>>()?;
    m.write(dir)
}

fn stage_timings(label: &str, s: &RunStats) -> Vec<(String, f64)> {
    vec![
        (format!("{label}keyframe_rt"), s.stream.keyframe_seconds),
        (format!("{label}interpolation"), s.stream.interpolation_seconds),
        (format!("{label}scatter"), s.stream.scatter_seconds),
        (format!("{label}metrics"), s.metrics_seconds),
        (format!("{label}wall"), s.wall_seconds),
    ]
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub stats: RunStats,
    pub rows: usize,
    pub files: Vec<PathBuf>,
}

/// Full snapshot stream with trace and metrics CSVs and a manifest.
pub fn cmd_run(config: &ScenarioConfig) -> CliResult<RunReport> {
    let scene = config.load_scene()?;
    let trajectory = config.trajectory()?;
    let dir = output_dir(config)?;
    let stream = config.stream_config(config.stream.kf_interval_s);
    let mut trace = CsvFile::create(&dir.join("trace.csv"), output::TRACE_HEADER)?;
    let (rows, stats) = stream_metrics(&scene, &trajectory, &stream, config.tx.power_dbm, |s| {
        output::write_trace_rows(&mut trace, s)
    })?;
    let files = vec![trace.finish()?, output::write_metrics(&dir.join("metrics.csv"), &rows)?];
    let mut m = manifest(config, "run")?;
    m.rt_invocations.push(("run".into(), stats.stream.rt_invocations));
    m.timings_s = stage_timings("", &stats);
    let mut all = files.clone();
    all.push(finish(m, &dir, &files)?);
    Ok(RunReport {
        rows: rows.len(),
        stats,
        files: all,
    })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub stats: RunStats,
    pub report: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub reference: RunStats,
    pub entries: Vec<SweepEntry>,
}

/// One exact reference run and one interpolated run per interval,
/// compared metric by metric.
pub fn sweep(scene: &Scene, config: &ScenarioConfig, intervals: &[f64]) -> CliResult<SweepReport> {
    let trajectory = config.trajectory()?;
    let step = config.stream.update_step_s;
    let (reference_rows, reference) = stream_metrics(
        scene,
        &trajectory,
        &config.stream_config(step),
        config.tx.power_dbm,
        |_| Ok(()),
    )?;
    let mut entries = Vec::new();
    for &k in intervals {
        let (rows, stats) = if (k - step).abs() <= 1e-9 * step {
            (reference_rows.clone(), reference.clone())
        } else {
            stream_metrics(
                scene,
                &trajectory,
                &config.stream_config(k),
                config.tx.power_dbm,
                |_| Ok(()),
            )?
        };
        let report =
            compare_streams(&reference_rows, &rows)?.with_timing(reference.compute_seconds(), stats.compute_seconds());
        entries.push(SweepEntry { stats, report });
    }
    Ok(SweepReport { reference, entries })
}

fn ms(k: f64) -> String {
    format!("{}ms", (k * 1000.0).round() as i64)
}

pub fn cmd_sweep(config: &ScenarioConfig) -> CliResult<SweepReport> {
    if config.stream.sweep_intervals_s.is_empty() {
        return Err(CliError::Config(
            "stream.sweep_intervals_s: no intervals to sweep".into(),
        ));
    }
    let scene = config.load_scene()?;
    let dir = output_dir(config)?;
    let report = sweep(&scene, config, &config.stream.sweep_intervals_s)?;
    let mut files = Vec::new();

    let header = output::join(
        std::iter::once("metric".to_string())
            .chain(
                report
                    .entries
                    .iter()
                    .map(|e| format!("nrmse_{}", ms(e.stats.kf_interval))),
            )
            .chain(std::iter::once("degenerate".to_string())),
    );
    let mut table = CsvFile::create(&dir.join("nrmse.csv"), &header)?;
    for metric in Metric::ALL {
        let degenerate = report.entries.first().is_some_and(|e| e.report.get(metric).degenerate);
        table.line(&output::join(
            std::iter::once(metric.name().to_string())
                .chain(report.entries.iter().map(|e| e.report.get(metric).nrmse.to_string()))
                .chain(std::iter::once(degenerate.to_string())),
        ))?;
    }
    files.push(table.finish()?);

    let mut timing = CsvFile::create(
        &dir.join("timing.csv"),
        "kf_interval_s,rt_invocations,keyframe_rt_s,interpolation_s,scatter_s,compute_s,normalized_time",
    )?;
    let reference = &report.reference;
    let row = |s: &RunStats| {
        format!(
            "{},{},{},{},{},{},{}",
            s.kf_interval,
            s.stream.rt_invocations,
            s.stream.keyframe_seconds,
            s.stream.interpolation_seconds,
            s.stream.scatter_seconds,
            s.compute_seconds(),
            s.compute_seconds() / reference.compute_seconds()
        )
    };
    timing.line(&row(reference))?;
    for e in &report.entries {
        timing.line(&row(&e.stats))?;
    }
    files.push(timing.finish()?);

    for e in &report.entries {
        let tag = ms(e.stats.kf_interval);
        files.push(output::write_error_report(
            &dir.join(format!("errors_{tag}.csv")),
            &e.report,
        )?);
        files.push(output::write_error_cdf(&dir.join(format!("cdf_{tag}.csv")), &e.report)?);
    }

    let mut m = manifest(config, "sweep")?;
    m.rt_invocations
        .push(("reference".into(), reference.stream.rt_invocations));
    m.timings_s = stage_timings("reference_", reference);
    for e in &report.entries {
        let tag = ms(e.stats.kf_interval);
        m.rt_invocations.push((tag.clone(), e.stats.stream.rt_invocations));
        m.timings_s.extend(stage_timings(&format!("{tag}_"), &e.stats));
    }
    finish(m, &dir, &files)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterSummary {
    pub window_start_s: f64,
    pub window_end_s: f64,
    pub snapshots: usize,
    pub specular_fraction: f64,
    pub scatter_fraction: f64,
    pub mean_delay_spread_with_scatter_s: f64,
    pub mean_delay_spread_without_scatter_s: f64,
}

fn mean_finite(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Snapshots over the scatter window with every path computed exactly.
pub fn scatter_window_snapshots(scene: &Scene, config: &ScenarioConfig) -> CliResult<(f64, f64, Vec<ChannelSnapshot>)> {
    let full = config.trajectory()?;
    let [t0, t1] = config.scatter.window_s.unwrap_or([0.0, full.duration()]);
    let trajectory = full.between(t0, t1)?;
    let step = config.stream.update_step_s;
    let mut stream = config.stream_config(step);
    stream.scatter_window = None;
    let mut snapshots = Vec::new();
    stream_snapshots(scene, &trajectory, &stream, |mut s| {
        s.time += t0;
        snapshots.push(s);
        Ok(())
    })?;
    Ok((t0, t1, snapshots))
}

pub fn cmd_scatter_study(config: &ScenarioConfig) -> CliResult<ScatterSummary> {
    let scene = config.load_scene()?;
    if scene.scatterers().is_empty() {
        return Err(CliError::Config(
            "scatter study needs a scene with at least one scatterer".into(),
        ));
    }
    let dir = output_dir(config)?;
    let (t0, t1, snapshots) = scatter_window_snapshots(&scene, config)?;
    let pair = config.pair();
    let delays = uniform_delay_grid(
        &snapshots,
        config.cir.bandwidth_hz,
        config.cir.resolution_s,
        CIR_SUPPORT,
    );
    let cir = |only| {
        synthesize_tv_cir(
            &snapshots,
            config.cir.bandwidth_hz,
            config.cir.rolloff,
            pair,
            &delays,
            only,
        )
    };
    let decomposition = power_decomposition(&snapshots, pair, config.tx.power_dbm);
    let summary = ScatterSummary {
        window_start_s: t0,
        window_end_s: t1,
        snapshots: snapshots.len(),
        specular_fraction: decomposition.specular_fraction,
        scatter_fraction: decomposition.scatter_fraction,
        mean_delay_spread_with_scatter_s: mean_finite(snapshots.iter().map(|s| delay_stats(&s.paths).1)),
        mean_delay_spread_without_scatter_s: mean_finite(snapshots.iter().map(|s| {
            let specular: Vec<_> = s.paths.iter().filter(|p| p.tag == PathTag::Specular).cloned().collect();
            delay_stats(&specular).1
        })),
    };
    let mut files = vec![
        output::write_tv_cir(&dir.join("cir_total.csv"), &cir(None)?)?,
        output::write_tv_cir(&dir.join("cir_scatter.csv"), &cir(Some(PathTag::Scatter))?)?,
        output::write_power_decomposition(&dir.join("power.csv"), &decomposition)?,
    ];
    let mut csv = CsvFile::create(&dir.join("scatter_summary.csv"), "quantity,value")?;
    for (k, v) in [
        ("window_start_s", t0),
        ("window_end_s", t1),
        ("specular_fraction", summary.specular_fraction),
        ("scatter_fraction", summary.scatter_fraction),
        (
            "mean_delay_spread_with_scatter_s",
            summary.mean_delay_spread_with_scatter_s,
        ),
        (
            "mean_delay_spread_without_scatter_s",
            summary.mean_delay_spread_without_scatter_s,
        ),
    ] {
        csv.line(&format!("{k},{v}"))?;
    }
    files.push(csv.finish()?);
    finish(manifest(config, "scatter-study")?, &dir, &files)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub mode: String,
    pub stage: String,
    pub samples: Vec<f64>,
    pub min: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub stages: Vec<StageTiming>,
    pub exact_rt_invocations: usize,
    pub interpolated_rt_invocations: usize,
    /// Median exact compute time over median interpolated compute time.
    pub speedup: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Repeated exact and interpolated runs with per-stage wall-clock.
pub fn cmd_bench(config: &ScenarioConfig) -> CliResult<BenchReport> {
    let scene = config.load_scene()?;
    let trajectory = config.trajectory()?;
    let dir = output_dir(config)?;
    let modes = [
        ("exact", config.stream.update_step_s),
        ("interpolated", config.stream.kf_interval_s),
    ];
    let mut stages = Vec::new();
    let mut invocations = [0usize; 2];
    let mut compute_medians = [0.0f64; 2];
    let mut samples_csv = CsvFile::create(&dir.join("bench_samples.csv"), "mode,repeat,stage,seconds")?;
    for (m, (mode, kf)) in modes.iter().enumerate() {
        let mut per_stage: Vec<(String, Vec<f64>)> = Vec::new();
        for r in 0..config.bench.repeats {
            let (_, stats) = stream_metrics(
                &scene,
                &trajectory,
                &config.stream_config(*kf),
                config.tx.power_dbm,
                |_| Ok(()),
            )?;
            invocations[m] = stats.stream.rt_invocations;
            let mut t = stage_timings("", &stats);
            t.push(("compute".into(), stats.compute_seconds()));
            for (stage, secs) in t {
                samples_csv.line(&format!("{mode},{r},{stage},{secs}"))?;
                match per_stage.iter_mut().find(|(s, _)| *s == stage) {
                    Some((_, v)) => v.push(secs),
                    None => per_stage.push((stage, vec![secs])),
                }
            }
        }
        for (stage, samples) in per_stage {
            let med = median(&samples);
            if stage == "compute" {
                compute_medians[m] = med;
            }
            stages.push(StageTiming {
                mode: mode.to_string(),
                min: samples.iter().copied().fold(f64::INFINITY, f64::min),
                median: med,
                stage,
                samples,
            });
        }
    }
    let report = BenchReport {
        stages,
        exact_rt_invocations: invocations[0],
        interpolated_rt_invocations: invocations[1],
        speedup: compute_medians[0] / compute_medians[1],
    };
    let mut files = vec![samples_csv.finish()?];
    let mut summary = CsvFile::create(&dir.join("bench_summary.csv"), "mode,stage,repeats,min_s,median_s")?;
    for s in &report.stages {
        summary.line(&format!(
            "{},{},{},{},{}",
            s.mode,
            s.stage,
            s.samples.len(),
            s.min,
            s.median
        ))?;
    }
    summary.line(&format!("speedup,compute,{},,{}", config.bench.repeats, report.speedup))?;
    files.push(summary.finish()?);
    let mut m = manifest(config, "bench")?;
    m.rt_invocations = vec![
        ("exact".into(), invocations[0]),
        ("interpolated".into(), invocations[1]),
    ];
    finish(m, &dir, &files)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneSummary {
    pub buildings: usize,
    pub facades: usize,
    pub edges: usize,
    pub scatterers: usize,
}

/// Parses and validates a scene file.
pub fn cmd_validate_scene(path: &Path) -> CliResult<SceneSummary> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read scene file {}: {e}", path.display())))?;
    let scene = load_scene(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(SceneSummary {
        buildings: scene.buildings().len(),
        facades: scene.facades().len(),
        edges: scene.edges().len(),
        scatterers: scene.scatterers().len(),
    })
}
