//! Path tracking between two keyframes: matching, birth/death ramps and
//! interpolation.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Keyframe, Trajectory};
use crate::em::{CarrierConfig, PolMatrix, C64};
use crate::error::{Error, Result};
use crate::geom::{polyline_length, SPEED_OF_LIGHT};
use crate::rt::{end_angles, RayPath, Signature};

/// Paths of two consecutive keyframes paired by signature (indices into
/// each keyframe's path list).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathMatch {
    pub matched: Vec<(usize, usize)>,
    pub births: Vec<usize>,
    pub deaths: Vec<usize>,
}

pub fn match_paths(a: &Keyframe, b: &Keyframe) -> PathMatch {
    let index: HashMap<&Signature, usize> = b.paths.iter().enumerate().map(|(i, p)| (&p.signature, i)).collect();
    let mut out = PathMatch::default();
    let mut used = vec![false; b.paths.len()];
    for (i, p) in a.paths.iter().enumerate() {
        match index.get(&p.signature) {
            Some(&j) => {
                out.matched.push((i, j));
                used[j] = true;
            }
            None => out.deaths.push(i),
        }
    }
    out.births = (0..b.paths.len()).filter(|&j| !used[j]).collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampKind {
    Birth,
    Death,
}

/// Linear magnitude ramp over `[start, start + length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub kind: RampKind,
    pub start: f64,
    pub length: f64,
}

impl Ramp {
    pub fn gain(&self, t: f64) -> f64 {
        let rising = if self.length > 0.0 {
            ((t - self.start) / self.length).clamp(0.0, 1.0)
        } else if t >= self.start {
            1.0
        } else {
            0.0
        };
        match self.kind {
            RampKind::Birth => rising,
            RampKind::Death => 1.0 - rising,
        }
    }
}

/// Uniform draw in [0, 1) owned by one (seed, interval, signature) triple,
/// so schedules do not depend on processing order.
fn ramp_draw(seed: u64, interval: usize, signature: &Signature) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((interval as u64).to_le_bytes());
    h.update(signature.to_string().as_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key).random::<f64>()
}

/// Ramp schedule for a path born or dying inside `[t_a, t_b]`. The ramp
/// starts at a uniformly random instant chosen so that it completes
/// within the interval.
pub fn schedule_ramp(
    kind: RampKind,
    signature: &Signature,
    interval: usize,
    t_a: f64,
    t_b: f64,
    ramp_fraction: f64,
    seed: u64,
) -> Ramp {
    let span = t_b - t_a;
    let length = ramp_fraction.clamp(0.0, 1.0) * span;
    let u = ramp_draw(seed, interval, signature);
    Ramp {
        kind,
        start: t_a + (1.0 - u) * (span - length),
        length,
    }
}

/// Births and deaths of interval `interval` mapped to their ramps.
pub fn apply_birth_death(
    births: &[Signature],
    deaths: &[Signature],
    interval: usize,
    t_a: f64,
    t_b: f64,
    ramp_fraction: f64,
    seed: u64,
) -> Vec<(Signature, Ramp)> {
    births
        .iter()
        .map(|s| {
            (
                s.clone(),
                schedule_ramp(RampKind::Birth, s, interval, t_a, t_b, ramp_fraction, seed),
            )
        })
        .chain(deaths.iter().map(|s| {
            (
                s.clone(),
                schedule_ramp(RampKind::Death, s, interval, t_a, t_b, ramp_fraction, seed),
            )
        }))
        .collect()
}

/// One signature followed across a keyframe interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedPath {
    pub signature: Signature,
    pub left: Option<RayPath>,
    pub right: Option<RayPath>,
    pub t_left: f64,
    pub t_right: f64,
    /// Present for paths that exist at only one end of the interval.
    pub ramp: Option<Ramp>,
}

impl TrackedPath {
    /// Tracks for every path of an interval, in keyframe-path order
    /// (matched and dying paths first, then births).
    pub fn for_interval(
        a: &Keyframe,
        b: &Keyframe,
        interval: usize,
        ramp_fraction: f64,
        seed: u64,
    ) -> Vec<TrackedPath> {
        let m = match_paths(a, b);
        let mut out = Vec::with_capacity(a.paths.len() + m.births.len());
        let mut right_of = vec![None; a.paths.len()];
        for &(i, j) in &m.matched {
            right_of[i] = Some(j);
        }
        for (i, p) in a.paths.iter().enumerate() {
            let (right, ramp) = match right_of[i] {
                Some(j) => (Some(b.paths[j].clone()), None),
                None => (
                    None,
                    Some(schedule_ramp(
                        RampKind::Death,
                        &p.signature,
                        interval,
                        a.time,
                        b.time,
                        ramp_fraction,
                        seed,
                    )),
                ),
            };
            out.push(TrackedPath {
                signature: p.signature.clone(),
                left: Some(p.clone()),
                right,
                t_left: a.time,
                t_right: b.time,
                ramp,
            });
        }
        for &j in &m.births {
            let p = &b.paths[j];
            out.push(TrackedPath {
                signature: p.signature.clone(),
                left: None,
                right: Some(p.clone()),
                t_left: a.time,
                t_right: b.time,
                ramp: Some(schedule_ramp(
                    RampKind::Birth,
                    &p.signature,
                    interval,
                    a.time,
                    b.time,
                    ramp_fraction,
                    seed,
                )),
            });
        }
        out
    }

    pub fn gain(&self, t: f64) -> f64 {
        self.ramp.map_or(1.0, |r| r.gain(t))
    }
}

fn phase_advanced(entry: C64, magnitude: f64, delta_delay: f64, frequency: f64) -> C64 {
    C64::from_polar(magnitude, entry.arg() - 2.0 * PI * frequency * delta_delay)
}

/// The tracked path at time `t`.
///
/// Interior vertices move linearly between the two keyframes (or stay put
/// for a path present at only one of them) while the receiver follows the
/// trajectory exactly. Delay and angles follow from that geometry. Each
/// transfer entry interpolates its magnitude linearly and advances its
/// phase from the left keyframe by the delay change; Doppler is the
/// analytic rate of change of the polyline length. Ramping paths have
/// their magnitude scaled by the ramp gain.
pub fn interpolate_path(
    tracked: &TrackedPath,
    t: f64,
    trajectory: &Trajectory,
    carrier: &CarrierConfig,
) -> Result<RayPath> {
    let (ta, tb) = (tracked.t_left, tracked.t_right);
    if !(t >= ta && t <= tb) || !(tb > ta) {
        return Err(Error::domain(format!(
            "time {t} s outside tracked interval [{ta}, {tb}] s"
        )));
    }
    let span = tb - ta;
    let s = (t - ta) / span;
    let (anchor, anchor_time, other) = match (&tracked.left, &tracked.right) {
        (Some(l), None) => (l, ta, None),
        (Some(l), Some(r)) if s < 1.0 => (l, ta, Some(r)),
        (_, Some(r)) => (r, tb, None),
        (None, None) => return Err(Error::domain("tracked path has no keyframe")),
    };
    if s == 0.0 && anchor_time == ta || s == 1.0 && anchor_time == tb {
        if let Some(g) = tracked.ramp.map(|r| r.gain(t)) {
            let mut p = anchor.clone();
            p.transfer *= C64::from(g);
            return Ok(p);
        }
        return Ok(anchor.clone());
    }

    let n = anchor.vertices.len();
    let rx = trajectory.sample(t)?;
    let rx_velocity = trajectory.velocity(t)?;
    let mut vertices = anchor.vertices.clone();
    let mut rates = vec![crate::geom::Vec3::zeros(); n];
    if let Some(b) = other {
        if b.vertices.len() != n {
            return Err(Error::domain("matched paths differ in vertex count"));
        }
        for k in 1..n - 1 {
            vertices[k] = anchor.vertices[k] * (1.0 - s) + b.vertices[k] * s;
            rates[k] = (b.vertices[k] - anchor.vertices[k]) / span;
        }
    }
    vertices[n - 1] = rx;
    rates[n - 1] = rx_velocity;

    let length = polyline_length(&vertices);
    let delay = length / SPEED_OF_LIGHT;
    let mut rate = 0.0;
    for k in 0..n - 1 {
        let d = vertices[k + 1] - vertices[k];
        let l = d.norm();
        if l > 0.0 {
            rate += d.dot(&(rates[k + 1] - rates[k])) / l;
        }
    }
    let f = carrier.frequency();
    let gain = tracked.gain(t);
    let mut transfer = PolMatrix::zeros();
    for idx in 0..4 {
        let a = anchor.transfer[idx];
        let magnitude = match other {
            Some(b) => (1.0 - s) * a.norm() + s * b.transfer[idx].norm(),
            None => a.norm(),
        };
        transfer[idx] = phase_advanced(a, magnitude * gain, delay - anchor.delay, f);
    }
    let (aod, aoa) = end_angles(&vertices);
    let mut interactions = anchor.interactions.clone();
    for (k, rec) in interactions.iter_mut().enumerate() {
        rec.point = vertices[k + 1];
    }
    Ok(RayPath {
        signature: anchor.signature.clone(),
        interactions,
        vertices,
        length,
        delay,
        aod,
        aoa,
        transfer,
        doppler_hz: -f / SPEED_OF_LIGHT * rate,
        tag: anchor.tag,
    })
}
