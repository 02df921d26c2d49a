//! Per-snapshot channel metrics, impulse-response synthesis and stream
//! comparison.
//!
//! Empty or fully cancelled snapshots report `-inf` powers and `NaN`
//! statistics.

mod cir;
mod compare;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ChannelSnapshot;
use crate::em::PolPair;
use crate::geom::wrap_angle;
use crate::rt::{PathTag, RayPath};

pub use cir::{raised_cosine, raised_cosine_energy, synthesize_tv_cir, uniform_delay_grid, TvCir};
pub use compare::{compare_streams, quantile, ErrorReport, MetricError, CDF_LEVELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    PowerVv,
    PowerHv,
    PowerHh,
    PowerVh,
    MeanDelay,
    DelaySpread,
    MeanHaoa,
    HaoaSpread,
    MeanVaoa,
    VaoaSpread,
    MeanDoppler,
    DopplerSpread,
}

impl Metric {
    pub const ALL: [Metric; 12] = [
        Metric::PowerVv,
        Metric::PowerHv,
        Metric::PowerHh,
        Metric::PowerVh,
        Metric::MeanDelay,
        Metric::DelaySpread,
        Metric::MeanHaoa,
        Metric::HaoaSpread,
        Metric::MeanVaoa,
        Metric::VaoaSpread,
        Metric::MeanDoppler,
        Metric::DopplerSpread,
    ];

    /// Column name including the unit.
    pub fn name(self) -> &'static str {
        match self {
            Metric::PowerVv => "power_vv_dbm",
            Metric::PowerHv => "power_hv_dbm",
            Metric::PowerHh => "power_hh_dbm",
            Metric::PowerVh => "power_vh_dbm",
            Metric::MeanDelay => "mean_delay_s",
            Metric::DelaySpread => "delay_spread_s",
            Metric::MeanHaoa => "mean_haoa_rad",
            Metric::HaoaSpread => "haoa_spread_rad",
            Metric::MeanVaoa => "mean_vaoa_rad",
            Metric::VaoaSpread => "vaoa_spread_rad",
            Metric::MeanDoppler => "mean_doppler_hz",
            Metric::DopplerSpread => "doppler_spread_hz",
        }
    }

    /// Errors of this metric wrap around the circle.
    pub fn is_circular(self) -> bool {
        self == Metric::MeanHaoa
    }

    /// Below this reference spread (Q90 - Q10) the normalised error is
    /// not meaningful and the metric is flagged degenerate.
    pub fn degenerate_floor(self) -> f64 {
        match self {
            Metric::PowerVv | Metric::PowerHv | Metric::PowerHh | Metric::PowerVh => 1.0,
            Metric::MeanDelay | Metric::DelaySpread => 1e-9,
            Metric::MeanHaoa | Metric::HaoaSpread | Metric::MeanVaoa | Metric::VaoaSpread => 2f64.to_radians(),
            Metric::MeanDoppler | Metric::DopplerSpread => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMetrics {
    pub time: f64,
    pub power_vv: f64,
    pub power_hv: f64,
    pub power_hh: f64,
    pub power_vh: f64,
    pub mean_delay: f64,
    pub delay_spread: f64,
    pub mean_haoa: f64,
    pub haoa_spread: f64,
    pub mean_vaoa: f64,
    pub vaoa_spread: f64,
    pub mean_doppler: f64,
    pub doppler_spread: f64,
}

impl SnapshotMetrics {
    pub fn of(snapshot: &ChannelSnapshot, tx_power_dbm: f64) -> SnapshotMetrics {
        SnapshotMetrics::of_paths(snapshot.time, &snapshot.paths, tx_power_dbm)
    }

    pub fn of_paths(time: f64, paths: &[RayPath], tx_power_dbm: f64) -> SnapshotMetrics {
        let (mean_delay, delay_spread) = delay_stats(paths);
        let (mean_haoa, haoa_spread, mean_vaoa, vaoa_spread) = angle_stats(paths);
        let (mean_doppler, doppler_spread) = doppler_stats(paths);
        SnapshotMetrics {
            time,
            power_vv: narrowband_power(paths, PolPair::VV, tx_power_dbm),
            power_hv: narrowband_power(paths, PolPair::HV, tx_power_dbm),
            power_hh: narrowband_power(paths, PolPair::HH, tx_power_dbm),
            power_vh: narrowband_power(paths, PolPair::VH, tx_power_dbm),
            mean_delay,
            delay_spread,
            mean_haoa,
            haoa_spread,
            mean_vaoa,
            vaoa_spread,
            mean_doppler,
            doppler_spread,
        }
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::PowerVv => self.power_vv,
            Metric::PowerHv => self.power_hv,
            Metric::PowerHh => self.power_hh,
            Metric::PowerVh => self.power_vh,
            Metric::MeanDelay => self.mean_delay,
            Metric::DelaySpread => self.delay_spread,
            Metric::MeanHaoa => self.mean_haoa,
            Metric::HaoaSpread => self.haoa_spread,
            Metric::MeanVaoa => self.mean_vaoa,
            Metric::VaoaSpread => self.vaoa_spread,
            Metric::MeanDoppler => self.mean_doppler,
            Metric::DopplerSpread => self.doppler_spread,
        }
    }
}

/// Received power of the coherent sum of all paths for one polarization
/// pair, dBm.
pub fn narrowband_power(paths: &[RayPath], pair: PolPair, tx_power_dbm: f64) -> f64 {
    let sum: C64 = paths.iter().map(|p| pair.entry(&p.transfer)).sum();
    let m = sum.norm();
    if m > 0.0 {
        tx_power_dbm + 20.0 * m.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Power-weighted mean and RMS spread of `value` over paths.
fn weighted_moments(paths: &[RayPath], value: impl Fn(&RayPath) -> f64) -> (f64, f64) {
    let total: f64 = paths.iter().map(RayPath::power).sum();
    if !(total > 0.0) {
        return (f64::NAN, f64::NAN);
    }
    let mean = paths.iter().map(|p| p.power() * value(p)).sum::<f64>() / total;
    let var = paths.iter().map(|p| p.power() * (value(p) - mean).powi(2)).sum::<f64>() / total;
    (mean, var.max(0.0).sqrt())
}

/// Power-weighted mean delay and delay spread, seconds. Path weights are
/// the squared Frobenius norms of the transfer matrices.
pub fn delay_stats(paths: &[RayPath]) -> (f64, f64) {
    weighted_moments(paths, |p| p.delay)
}

/// Mean and spread of the horizontal (circular) and vertical (linear)
/// arrival angles, radians.
///
/// The horizontal mean is the argument of the power-weighted sum of unit
/// phasors; its spread is the power-weighted RMS of azimuth offsets from
/// that mean, wrapped to (-pi, pi].
pub fn angle_stats(paths: &[RayPath]) -> (f64, f64, f64, f64) {
    let total: f64 = paths.iter().map(RayPath::power).sum();
    if !(total > 0.0) {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let phasor: C64 = paths.iter().map(|p| C64::from_polar(p.power(), p.aoa.0)).sum();
    let mean_h = phasor.arg();
    let spread_h = (paths
        .iter()
        .map(|p| p.power() * wrap_angle(p.aoa.0 - mean_h).powi(2))
        .sum::<f64>()
        / total)
        .sqrt();
    let (mean_v, spread_v) = weighted_moments(paths, |p| p.aoa.1);
    (mean_h, spread_h, mean_v, spread_v)
}

/// Power-weighted mean Doppler shift and Doppler spread, Hz.
pub fn doppler_stats(paths: &[RayPath]) -> (f64, f64) {
    weighted_moments(paths, |p| p.doppler_hz)
}

/// Narrowband power of the specular subset, the scatter subset and all
/// paths at one instant, dBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub time: f64,
    pub specular: f64,
    pub scatter: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerDecomposition {
    pub series: Vec<PowerSplit>,
    /// Mean specular power over mean total power, linear.
    pub specular_fraction: f64,
    /// Mean scatter power over mean total power, linear.
    pub scatter_fraction: f64,
}

fn db_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Specular, scattered and total narrowband power series and their
/// interval-average fractions. Subsets are summed coherently on their own.
pub fn power_decomposition(snapshots: &[ChannelSnapshot], pair: PolPair, tx_power_dbm: f64) -> PowerDecomposition {
    let mut series = Vec::with_capacity(snapshots.len());
    let (mut spec, mut scat, mut tot) = (0.0, 0.0, 0.0);
    for s in snapshots {
        let subset = |tag: PathTag| -> Vec<RayPath> { s.paths.iter().filter(|p| p.tag == tag).cloned().collect() };
        let split = PowerSplit {
            time: s.time,
            specular: narrowband_power(&subset(PathTag::Specular), pair, tx_power_dbm),
            scatter: narrowband_power(&subset(PathTag::Scatter), pair, tx_power_dbm),
            total: narrowband_power(&s.paths, pair, tx_power_dbm),
        };
        spec += db_to_linear(split.specular);
        scat += db_to_linear(split.scatter);
        tot += db_to_linear(split.total);
        series.push(split);
    }
    let frac = |x: f64| if tot > 0.0 { x / tot } else { f64::NAN };
    PowerDecomposition {
        series,
        specular_fraction: frac(spec),
        scatter_fraction: frac(scat),
    }
}
