//! Time axis: exact keyframes along the trajectory, path tracking between
//! them and channel snapshots at the update rate.

mod track;
mod trajectory;

use std::time::Instant;

use rayon::prelude::*;

use crate::em::{AntennaConfig, CarrierConfig};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::po::{ScatterModel, ScatterPolicy};
use crate::rt::{RayPath, TraceLimits, Tracer};
use crate::scene::Scene;

pub use track::{
    apply_birth_death, interpolate_path, match_paths, schedule_ramp, PathMatch, Ramp, RampKind, TrackedPath,
};
pub use trajectory::{Trajectory, END_TOLERANCE};

/// Receiver position where the channel was traced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe {
    pub index: usize,
    pub time: f64,
    pub rx: Vec3,
    pub paths: Vec<RayPath>,
}

/// Channel at one update instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    pub index: usize,
    pub time: f64,
    pub rx: Vec3,
    pub paths: Vec<RayPath>,
}

/// Everything except scene and trajectory that a snapshot stream needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub tx: Vec3,
    pub carrier: CarrierConfig,
    pub tx_antenna: AntennaConfig,
    pub rx_antenna: AntennaConfig,
    pub update_step: f64,
    /// Spacing of exact traces; an integer multiple of `update_step`.
    pub kf_interval: f64,
    pub limits: TraceLimits,
    pub scatter: ScatterPolicy,
    /// Scatter paths are only computed for snapshots inside this window.
    pub scatter_window: Option<(f64, f64)>,
    /// Track scatter paths between keyframes instead of recomputing them
    /// at every snapshot.
    pub interpolate_scatter: bool,
    /// Birth/death ramp length as a fraction of the keyframe interval.
    pub ramp_fraction: f64,
    pub seed: u64,
}

impl StreamConfig {
    pub fn new(tx: Vec3, carrier: CarrierConfig, update_step: f64, kf_interval: f64) -> StreamConfig {
        StreamConfig {
            tx,
            carrier,
            tx_antenna: AntennaConfig::default(),
            rx_antenna: AntennaConfig::default(),
            update_step,
            kf_interval,
            limits: TraceLimits::default(),
            scatter: ScatterPolicy::Off,
            scatter_window: None,
            interpolate_scatter: false,
            ramp_fraction: 0.5,
            seed: 0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kf_interval == self.update_step
    }

    fn in_scatter_window(&self, t: f64) -> bool {
        self.scatter_window.is_none_or(|(a, b)| t >= a - 1e-9 && t <= b + 1e-9)
    }
}

/// Bookkeeping of one stream.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StreamOutput {
    pub snapshots: usize,
    /// Number of exact traces (one per keyframe).
    pub rt_invocations: usize,
    pub keyframe_seconds: f64,
    pub interpolation_seconds: f64,
    pub scatter_seconds: f64,
}

/// Snapshot instants `i * step` up to the trajectory end (appended when it
/// is not a whole number of steps) and the keyframe snapshot indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub times: Vec<f64>,
    pub keyframes: Vec<usize>,
}

impl TimeGrid {
    pub fn new(duration: f64, update_step: f64, kf_interval: f64) -> Result<TimeGrid> {
        if !(update_step > 0.0) || !(duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "update step {update_step} s and duration {duration} s must be positive"
            )));
        }
        let m = (kf_interval / update_step).round();
        if m < 1.0 || (m * update_step - kf_interval).abs() > 1e-9 * kf_interval {
            return Err(Error::InvalidParameter(format!(
                "keyframe interval {kf_interval} s is not a whole multiple of the update step {update_step} s"
            )));
        }
        let m = m as usize;
        let n = (duration / update_step + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * update_step).collect();
        if duration - times[n] > 1e-9 {
            times.push(duration);
        }
        let last = times.len() - 1;
        let mut keyframes: Vec<usize> = (0..last).step_by(m).collect();
        keyframes.push(last);
        Ok(TimeGrid { times, keyframes })
    }
}

/// Exact paths at one receiver position.
struct ExactTracer<'a> {
    scene: &'a Scene,
    tracer: Tracer<'a>,
    scatter: ScatterModel,
    config: &'a StreamConfig,
}

impl<'a> ExactTracer<'a> {
    fn new(scene: &'a Scene, config: &'a StreamConfig) -> Result<Self> {
        let tracer = Tracer::new(
            scene,
            config.tx,
            config.carrier,
            config.tx_antenna,
            config.rx_antenna,
            config.limits,
        )?;
        let scatter = ScatterModel::new(scene, &config.carrier, config.scatter);
        Ok(ExactTracer {
            scene,
            tracer,
            scatter,
            config,
        })
    }

    fn specular(&self, trajectory: &Trajectory, t: f64) -> Result<(Vec3, Vec<RayPath>)> {
        let rx = trajectory.sample(t)?;
        let velocity = trajectory.velocity(t)?;
        let mut paths = self.tracer.trace(&rx)?;
        for p in &mut paths {
            p.set_rx_velocity(&velocity, &self.config.carrier);
        }
        Ok((rx, paths))
    }

    fn scattered(&self, trajectory: &Trajectory, t: f64) -> Result<Vec<RayPath>> {
        if self.config.scatter == ScatterPolicy::Off || !self.config.in_scatter_window(t) {
            return Ok(Vec::new());
        }
        let rx = trajectory.sample(t)?;
        let velocity = trajectory.velocity(t)?;
        let mut paths = self.scatter.paths(
            self.scene,
            &self.config.tx,
            &rx,
            &self.config.tx_antenna,
            &self.config.rx_antenna,
        )?;
        for p in &mut paths {
            p.set_rx_velocity(&velocity, &self.config.carrier);
        }
        Ok(paths)
    }

    fn keyframe(&self, trajectory: &Trajectory, index: usize, t: f64) -> Result<Keyframe> {
        let (rx, mut paths) = self.specular(trajectory, t)?;
        if self.config.interpolate_scatter {
            paths.extend(self.scattered(trajectory, t)?);
        }
        Ok(Keyframe {
            index,
            time: t,
            rx,
            paths,
        })
    }
}

/// Exact traces at `0, kf_interval, 2 kf_interval, ...` and at the
/// trajectory end, computed in parallel.
pub fn compute_keyframes(
    scene: &Scene,
    trajectory: &Trajectory,
    tx: Vec3,
    carrier: &CarrierConfig,
    kf_interval: f64,
    limits: &TraceLimits,
) -> Result<Vec<Keyframe>> {
    let mut config = StreamConfig::new(tx, *carrier, kf_interval, kf_interval);
    config.limits = *limits;
    let grid = TimeGrid::new(trajectory.duration(), kf_interval, kf_interval)?;
    let exact = ExactTracer::new(scene, &config)?;
    grid.keyframes
        .par_iter()
        .map(|&i| exact.keyframe(trajectory, i, grid.times[i]))
        .collect()
}

/// Keyframe intervals handled per parallel batch; bounds memory on long
/// runs.
const BATCH: usize = 32;

/// Streams one snapshot per update step to `sink`, in time order.
///
/// Keyframes are traced exactly in parallel; between them every path is
/// tracked by signature and interpolated, and paths seen at only one end
/// of an interval fade in or out along a seeded random ramp. Scatter paths
/// are computed exactly at every snapshot unless `interpolate_scatter` is
/// set. The output depends only on the inputs, not on thread count.
pub fn stream_snapshots<F>(
    scene: &Scene,
    trajectory: &Trajectory,
    config: &StreamConfig,
    mut sink: F,
) -> Result<StreamOutput>
where
    F: FnMut(ChannelSnapshot) -> Result<()>,
{
    if !(config.ramp_fraction >= 0.0 && config.ramp_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "ramp fraction {} outside [0, 1]",
            config.ramp_fraction
        )));
    }
    let grid = TimeGrid::new(trajectory.duration(), config.update_step, config.kf_interval)?;
    let exact = ExactTracer::new(scene, config)?;
    let mut stats = StreamOutput::default();
    let kfs = &grid.keyframes;
    let mut previous: Option<Keyframe> = None;

    let mut start = 0;
    while start < kfs.len() {
        let end = (start + BATCH).min(kfs.len() - 1).max(start);
        let clock = Instant::now();
        let first_new = if previous.is_some() { start + 1 } else { start };
        let fresh: Vec<Keyframe> = (first_new..=end)
            .into_par_iter()
            .map(|j| exact.keyframe(trajectory, kfs[j], grid.times[kfs[j]]))
            .collect::<Result<_>>()?;
        stats.keyframe_seconds += clock.elapsed().as_secs_f64();
        stats.rt_invocations += fresh.len();
        let batch: Vec<Keyframe> = previous.take().into_iter().chain(fresh).collect();

        let clock = Instant::now();
        let tracks: Vec<Vec<TrackedPath>> = batch
            .windows(2)
            .enumerate()
            .map(|(w, pair)| {
                TrackedPath::for_interval(&pair[0], &pair[1], start + w, config.ramp_fraction, config.seed)
            })
            .collect();
        let is_last = end == kfs.len() - 1;
        let lo = kfs[start];
        let hi = if is_last { kfs[end] + 1 } else { kfs[end] };
        let mut snapshots: Vec<ChannelSnapshot> = (lo..hi)
            .into_par_iter()
            .map(|i| {
                let w = batch.partition_point(|k| k.index <= i) - 1;
                let kf = &batch[w];
                let t = grid.times[i];
                if kf.index == i {
                    return Ok(ChannelSnapshot {
                        index: i,
                        time: t,
                        rx: kf.rx,
                        paths: kf.paths.clone(),
                    });
                }
                let mut paths = Vec::with_capacity(tracks[w].len());
                for tp in &tracks[w] {
                    if tp.gain(t) > 0.0 {
                        paths.push(interpolate_path(tp, t, trajectory, &config.carrier)?);
                    }
                }
                paths.sort_by(|a, b| {
                    (a.tag == crate::rt::PathTag::Scatter, a.interactions.len(), &a.signature).cmp(&(
                        b.tag == crate::rt::PathTag::Scatter,
                        b.interactions.len(),
                        &b.signature,
                    ))
                });
                Ok(ChannelSnapshot {
                    index: i,
                    time: t,
                    rx: trajectory.sample(t)?,
                    paths,
                })
            })
            .collect::<Result<_>>()?;
        stats.interpolation_seconds += clock.elapsed().as_secs_f64();

        if !config.interpolate_scatter && config.scatter != ScatterPolicy::Off {
            let clock = Instant::now();
            let scattered: Vec<Vec<RayPath>> = snapshots
                .par_iter()
                .map(|s| exact.scattered(trajectory, s.time))
                .collect::<Result<_>>()?;
            for (s, extra) in snapshots.iter_mut().zip(scattered) {
                s.paths.extend(extra);
            }
            stats.scatter_seconds += clock.elapsed().as_secs_f64();
        }

        for s in snapshots {
            stats.snapshots += 1;
            sink(s)?;
        }
        previous = batch.into_iter().last();
        if is_last {
            break;
        }
        start = end;
    }
    Ok(stats)
}

/// Collects a whole stream in memory.
pub fn collect_snapshots(
    scene: &Scene,
    trajectory: &Trajectory,
    config: &StreamConfig,
) -> Result<(Vec<ChannelSnapshot>, StreamOutput)> {
    let mut out = Vec::new();
    let stats = stream_snapshots(scene, trajectory, config, |s| {
        out.push(s);
        Ok(())
    })?;
    Ok((out, stats))
}
