//! Receiver trajectory: a polyline travelled at piecewise-constant speed.

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Slack allowed when sampling at the trajectory end, seconds.
pub const END_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<Vec3>,
    speeds: Vec<f64>,
    /// Time at which each segment starts; one extra entry for the end.
    times: Vec<f64>,
    duration: f64,
}

impl Trajectory {
    /// Constant-speed trajectory; its duration is the travel time.
    pub fn new(waypoints: Vec<Vec3>, speed: f64) -> Result<Trajectory> {
        let n = waypoints.len().saturating_sub(1);
        Trajectory::with_speeds(waypoints, vec![speed; n])
    }

    /// One speed per segment.
    pub fn with_speeds(waypoints: Vec<Vec3>, speeds: Vec<f64>) -> Result<Trajectory> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidParameter(
                "trajectory needs at least two waypoints".into(),
            ));
        }
        if speeds.len() != waypoints.len() - 1 {
            return Err(Error::InvalidParameter(format!(
                "{} speeds for {} trajectory segments",
                speeds.len(),
                waypoints.len() - 1
            )));
        }
        let mut times = vec![0.0];
        for (i, w) in waypoints.windows(2).enumerate() {
            let len = (w[1] - w[0]).norm();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "trajectory segment {i} has zero or non-finite length"
                )));
            }
            if !(speeds[i] > 0.0) || !speeds[i].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "trajectory speed {} must be positive",
                    speeds[i]
                )));
            }
            times.push(times[i] + len / speeds[i]);
        }
        let duration = times[times.len() - 1];
        Ok(Trajectory {
            waypoints,
            speeds,
            times,
            duration,
        })
    }

    /// Stops the trajectory at `duration`, which may not exceed the travel
    /// time by more than [`END_TOLERANCE`].
    pub fn truncated(mut self, duration: f64) -> Result<Trajectory> {
        if !(duration > 0.0) || duration > self.duration + END_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "duration {duration} s outside (0, {}] s of travel",
                self.duration
            )));
        }
        self.duration = duration;
        Ok(self)
    }

    /// The part travelled between `t0` and `t1`, re-timed to start at zero.
    pub fn between(&self, t0: f64, t1: f64) -> Result<Trajectory> {
        if !(t1 > t0) {
            return Err(Error::InvalidParameter(format!(
                "empty trajectory window [{t0}, {t1}] s"
            )));
        }
        let k0 = self.segment(t0)?;
        let k1 = self.segment(t1)?;
        let mut waypoints = vec![self.sample(t0)?];
        let mut speeds = vec![self.speeds[k0]];
        for k in k0 + 1..=k1 {
            if self.times[k] > t0 && self.times[k] < t1 {
                waypoints.push(self.waypoints[k]);
                speeds.push(self.speeds[k]);
            }
        }
        waypoints.push(self.sample(t1)?);
        Trajectory::with_speeds(waypoints, speeds)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn waypoints(&self) -> &[Vec3] {
        &self.waypoints
    }

    fn segment(&self, t: f64) -> Result<usize> {
        if !(t >= -END_TOLERANCE && t <= self.duration + END_TOLERANCE) {
            return Err(Error::domain(format!(
                "time {t} s outside trajectory [0, {}] s",
                self.duration
            )));
        }
        let k = self.times.partition_point(|&s| s <= t);
        Ok(k.saturating_sub(1).min(self.speeds.len() - 1))
    }

    /// Position at time `t`.
    pub fn sample(&self, t: f64) -> Result<Vec3> {
        let k = self.segment(t)?;
        let (a, b) = (self.waypoints[k], self.waypoints[k + 1]);
        let len = (b - a).norm();
        let travelled = (self.speeds[k] * (t - self.times[k])).clamp(0.0, len);
        Ok(a + (b - a) * (travelled / len))
    }

    /// Velocity at time `t` (the segment starting at `t` at a waypoint).
    pub fn velocity(&self, t: f64) -> Result<Vec3> {
        let k = self.segment(t)?;
        let d = self.waypoints[k + 1] - self.waypoints[k];
        Ok(d.normalize() * self.speeds[k])
    }
}
