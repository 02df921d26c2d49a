use serde::Serialize;

use super::{Metric, SnapshotMetrics};
use crate::error::{Error, Result};
use crate::geom::wrap_angle;

/// Levels of the quantile table printed next to each error distribution.
pub const CDF_LEVELS: [f64; 11] = [0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99, 0.999, 1.0];

/// Linearly interpolated quantile of already sorted samples.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricError {
    pub metric: Metric,
    pub rmse: f64,
    pub q10: f64,
    pub q90: f64,
    /// `rmse / (q90 - q10)`; NaN when degenerate unless the error is zero.
    pub nrmse: f64,
    pub degenerate: bool,
    /// Timestamps where exactly one stream had a finite value.
    pub excluded: usize,
    /// Sorted absolute errors.
    pub abs_errors: Vec<f64>,
}

impl MetricError {
    pub fn cdf_table(&self) -> Vec<(f64, f64)> {
        CDF_LEVELS.iter().map(|&q| (q, quantile(&self.abs_errors, q))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub metrics: Vec<MetricError>,
    pub reference_seconds: f64,
    pub test_seconds: f64,
}

impl ErrorReport {
    pub fn get(&self, metric: Metric) -> &MetricError {
        self.metrics
            .iter()
            .find(|m| m.metric == metric)
            .expect("every metric is reported")
    }

    /// Test compute time relative to the reference run.
    pub fn normalized_time(&self) -> f64 {
        self.test_seconds / self.reference_seconds
    }

    /// Metrics whose normalisation is meaningful.
    pub fn summary(&self) -> impl Iterator<Item = &MetricError> {
        self.metrics.iter().filter(|m| !m.degenerate)
    }

    pub fn with_timing(mut self, reference_seconds: f64, test_seconds: f64) -> ErrorReport {
        self.reference_seconds = reference_seconds;
        self.test_seconds = test_seconds;
        self
    }
}

/// Per-metric errors of `test` against `reference`. Both series must share
/// timestamps. Values that are non-finite in both streams count as equal.
pub fn compare_streams(reference: &[SnapshotMetrics], test: &[SnapshotMetrics]) -> Result<ErrorReport> {
    if reference.len() != test.len() {
        return Err(Error::StreamMismatch(format!(
            "{} reference and {} test snapshots",
            reference.len(),
            test.len()
        )));
    }
    if let Some((r, t)) = reference.iter().zip(test).find(|(r, t)| (r.time - t.time).abs() > 1e-9) {
        return Err(Error::StreamMismatch(format!(
            "timestamps {} s and {} s differ",
            r.time, t.time
        )));
    }
    let metrics = Metric::ALL
        .iter()
        .map(|&metric| {
            let mut errors = Vec::with_capacity(reference.len());
            let mut excluded = 0;
            for (r, t) in reference.iter().zip(test) {
                let (a, b) = (r.get(metric), t.get(metric));
                match (a.is_finite(), b.is_finite()) {
                    (true, true) => {
                        let e = if metric.is_circular() { wrap_angle(b - a) } else { b - a };
                        errors.push(e);
                    }
                    (false, false) if a == b || (a.is_nan() && b.is_nan()) => errors.push(0.0),
                    _ => excluded += 1,
                }
            }
            let rmse = if errors.is_empty() {
                f64::NAN
            } else {
                (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
            };
            let mut values: Vec<f64> = reference
                .iter()
                .map(|r| r.get(metric))
                .filter(|v| v.is_finite())
                .collect();
            values.sort_by(f64::total_cmp);
            let q10 = quantile(&values, 0.10);
            let q90 = quantile(&values, 0.90);
            let gap = q90 - q10;
            let degenerate = !(gap >= metric.degenerate_floor());
            let nrmse = if rmse == 0.0 {
                0.0
            } else if degenerate {
                f64::NAN
            } else {
                rmse / gap
            };
            let mut abs_errors: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
            abs_errors.sort_by(f64::total_cmp);
            MetricError {
                metric,
                rmse,
                q10,
                q90,
                nrmse,
                degenerate,
                excluded,
                abs_errors,
            }
        })
        .collect();
    Ok(ErrorReport {
        metrics,
        reference_seconds: f64::NAN,
        test_seconds: f64::NAN,
    })
}
