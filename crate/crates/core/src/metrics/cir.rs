use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::dynamics::ChannelSnapshot;
use crate::em::PolPair;
use crate::error::{Error, Result};
use crate::rt::PathTag;

/// Unit-peak raised-cosine impulse response with symbol period `1/bandwidth`.
pub fn raised_cosine(t: f64, bandwidth: f64, rolloff: f64) -> f64 {
    let x = t * bandwidth;
    let sinc = |u: f64| if u == 0.0 { 1.0 } else { (PI * u).sin() / (PI * u) };
    let d = 1.0 - (2.0 * rolloff * x).powi(2);
    if rolloff > 0.0 && d.abs() < 1e-8 {
        PI / 4.0 * sinc(1.0 / (2.0 * rolloff))
    } else {
        sinc(x) * (PI * rolloff * x).cos() / d
    }
}

/// Integral of the squared pulse over all time, seconds.
pub fn raised_cosine_energy(bandwidth: f64, rolloff: f64) -> f64 {
    (1.0 - rolloff / 4.0) / bandwidth
}

/// Time-variant impulse response for one polarization pair.
/// `values[i][j]` is the amplitude at `times[i]` and `delays[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TvCir {
    pub pair: PolPair,
    pub times: Vec<f64>,
    pub delays: Vec<f64>,
    pub values: Vec<Vec<C64>>,
}

impl TvCir {
    /// Delay-integrated energy of the response at time index `i`.
    pub fn energy(&self, i: usize) -> f64 {
        let step = if self.delays.len() > 1 {
            self.delays[1] - self.delays[0]
        } else {
            0.0
        };
        self.values[i].iter().map(|z| z.norm_sqr()).sum::<f64>() * step
    }
}

/// Delay grid from zero to beyond the longest path delay by `support`
/// pulse periods, spaced by `resolution`.
pub fn uniform_delay_grid(snapshots: &[ChannelSnapshot], bandwidth: f64, resolution: f64, support: f64) -> Vec<f64> {
    let max_delay = snapshots
        .iter()
        .flat_map(|s| s.paths.iter().map(|p| p.delay))
        .fold(0.0, f64::max);
    let end = max_delay + support / bandwidth;
    let n = (end / resolution).ceil() as usize + 1;
    (0..n).map(|i| i as f64 * resolution).collect()
}

/// Sum of pulse-shaped path amplitudes on `delays` for every snapshot.
/// With `only` set, paths of other tags are left out.
pub fn synthesize_tv_cir(
    snapshots: &[ChannelSnapshot],
    bandwidth: f64,
    rolloff: f64,
    pair: PolPair,
    delays: &[f64],
    only: Option<PathTag>,
) -> Result<TvCir> {
    if !(bandwidth > 0.0) || !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth {bandwidth} Hz must be positive and roll-off {rolloff} within [0, 1]"
        )));
    }
    let limit = 1.0 / (2.0 * bandwidth) * (1.0 + 1e-9);
    if delays.len() < 2 || delays.windows(2).any(|w| !(w[1] > w[0]) || w[1] - w[0] > limit) {
        return Err(Error::InvalidParameter(format!(
            "delay grid must be increasing with spacing at most {:.3e} s",
            1.0 / (2.0 * bandwidth)
        )));
    }
    let values = snapshots
        .par_iter()
        .map(|s| {
            let mut row = vec![C64::new(0.0, 0.0); delays.len()];
            for p in s.paths.iter().filter(|p| only.is_none_or(|tag| p.tag == tag)) {
                let a = pair.entry(&p.transfer);
                for (v, &tau) in row.iter_mut().zip(delays) {
                    *v += a * raised_cosine(tau - p.delay, bandwidth, rolloff);
                }
            }
            row
        })
        .collect();
    Ok(TvCir {
        pair,
        times: snapshots.iter().map(|s| s.time).collect(),
        delays: delays.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::PolMatrix;
    use crate::geom::Vec3;
    use crate::rt::RayPath;

    const B: f64 = 100e6;
    const BETA: f64 = 0.95;

    fn snapshot(paths: &[(f64, f64)]) -> ChannelSnapshot {
        let paths = paths
            .iter()
            .map(|&(a, delay)| {
                let mut p = RayPath::new(
                    vec![Vec3::new(10.0, 0.0, 0.0), Vec3::zeros()],
                    vec![],
                    PolMatrix::identity() * C64::new(a, 0.0),
                    PathTag::Specular,
                );
                p.delay = delay;
                p
            })
            .collect();
        ChannelSnapshot {
            index: 0,
            time: 0.0,
            rx: Vec3::zeros(),
            paths,
        }
    }

    fn grid(end: f64, step: f64) -> Vec<f64> {
        (0..=(end / step).round() as usize).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn pulse_shape() {
        assert_eq!(raised_cosine(0.0, B, BETA), 1.0);
        assert!(raised_cosine(1.0 / B, B, 0.0).abs() < 1e-12);
        assert!(raised_cosine(3.0 / B, B, BETA).abs() < 1e-12);
        let singular = 1.0 / (2.0 * BETA * B);
        let near = raised_cosine(singular * (1.0 + 1e-6), B, BETA);
        assert!((raised_cosine(singular, B, BETA) - near).abs() < 1e-5);
        assert_eq!(raised_cosine(0.3e-8, B, BETA), raised_cosine(-0.3e-8, B, BETA));
    }

    #[test]
    fn pulse_energy_matches_numeric_integral() {
        let dt = 1e-11;
        let e: f64 = (-200_000..=200_000)
            .map(|i| raised_cosine(i as f64 * dt, B, BETA).powi(2))
            .sum::<f64>()
            * dt;
        assert!((e / raised_cosine_energy(B, BETA) - 1.0).abs() < 1e-4, "{e}");
    }

    #[test]
    fn single_path_peak() {
        let cir = synthesize_tv_cir(
            &[snapshot(&[(1.0, 200e-9)])],
            B,
            BETA,
            PolPair::VV,
            &grid(500e-9, 1e-9),
            None,
        )
        .unwrap();
        let row = &cir.values[0];
        let peak = (0..row.len())
            .max_by(|&a, &b| row[a].norm().total_cmp(&row[b].norm()))
            .unwrap();
        assert_eq!(peak, 200);
        assert!((row[peak].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_paths_resolved() {
        let cir = synthesize_tv_cir(
            &[snapshot(&[(1.0, 100e-9), (0.8, 150e-9)])],
            B,
            BETA,
            PolPair::VV,
            &grid(300e-9, 0.5e-9),
            None,
        )
        .unwrap();
        let mag = |t: f64| cir.values[0][(t / 0.5e-9).round() as usize].norm();
        let valley = (200..=300)
            .map(|i| mag(i as f64 * 0.5e-9))
            .fold(f64::INFINITY, f64::min);
        let smaller = mag(150e-9).min(mag(100e-9));
        assert!(20.0 * (smaller / valley).log10() >= 3.0);
    }

    #[test]
    fn energy_with_separated_paths() {
        let snap = snapshot(&[(1.0, 100e-9), (0.5, 200e-9), (0.3, 400e-9)]);
        let delays = uniform_delay_grid(std::slice::from_ref(&snap), B, 0.25e-9, 60.0);
        let cir = synthesize_tv_cir(&[snap], B, BETA, PolPair::VV, &delays, None).unwrap();
        let expected = (1.0 + 0.25 + 0.09) * raised_cosine_energy(B, BETA);
        assert!(
            (cir.energy(0) / expected - 1.0).abs() < 0.01,
            "{}",
            cir.energy(0) / expected
        );
    }

    #[test]
    fn coarse_grid_rejected() {
        let s = snapshot(&[(1.0, 0.0)]);
        assert!(synthesize_tv_cir(
            std::slice::from_ref(&s),
            B,
            BETA,
            PolPair::VV,
            &grid(100e-9, 6e-9),
            None
        )
        .is_err());
        assert!(synthesize_tv_cir(
            std::slice::from_ref(&s),
            B,
            BETA,
            PolPair::VV,
            &grid(100e-9, 5e-9),
            None
        )
        .is_ok());
    }

    #[test]
    fn tag_filter() {
        let s = snapshot(&[(1.0, 0.0)]);
        let cir = synthesize_tv_cir(&[s], B, BETA, PolPair::VV, &grid(50e-9, 1e-9), Some(PathTag::Scatter)).unwrap();
        assert!(cir.values[0].iter().all(|z| z.norm() == 0.0));
    }
}
