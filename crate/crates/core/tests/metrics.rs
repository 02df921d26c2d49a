use num_complex::Complex64 as C64;
use proptest::prelude::*;
use railray::em::PolPair;
use railray::metrics::{angle_stats, compare_streams, delay_stats, doppler_stats, quantile};
use railray::{Error, Metric, PathTag, PolMatrix, RayPath, SnapshotMetrics, Vec3};
use std::f64::consts::PI;

fn path(amp: f64, phase: f64, delay: f64, az: f64, el: f64, doppler: f64) -> RayPath {
    let dir = Vec3::new(az.cos() * el.cos(), az.sin() * el.cos(), el.sin());
    let mut p = RayPath::new(
        vec![dir * 50.0, Vec3::zeros()],
        vec![],
        PolMatrix::new(
            C64::from_polar(amp, phase),
            C64::from_polar(0.1 * amp, phase + 1.0),
            C64::from_polar(0.2 * amp, phase - 0.5),
            C64::from_polar(0.9 * amp, -phase),
        ),
        PathTag::Specular,
    );
    p.delay = delay;
    p.doppler_hz = doppler;
    p
}

fn series(values: &[f64]) -> Vec<SnapshotMetrics> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut m = SnapshotMetrics::of_paths(i as f64 * 0.01, &[path(1e-4, 0.0, 1e-6, 0.3, 0.05, 10.0)], 43.0);
            m.power_vv = v;
            m
        })
        .collect()
}

fn path_strategy() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64, f64)>> {
    prop::collection::vec(
        (
            1e-6f64..1e-2,
            -PI..PI,
            0.0f64..2e-6,
            -PI..PI,
            -0.5f64..0.5,
            -200.0f64..200.0,
        ),
        1..12,
    )
}

fn build(spec: &[(f64, f64, f64, f64, f64, f64)]) -> Vec<RayPath> {
    spec.iter()
        .map(|&(a, ph, d, az, el, f)| path(a, ph, d, az, el, f))
        .collect()
}

#[test]
fn nrmse_of_constant_offset() {
    // Reference spread of 22.9 dB between the 10% and 90% quantiles.
    let reference: Vec<f64> = (0..=100)
        .map(|i| -100.0 + 22.9 * (i as f64 / 100.0 - 0.1) / 0.8)
        .collect();
    let test: Vec<f64> = reference.iter().map(|v| v + 2.29).collect();
    let report = compare_streams(&series(&reference), &series(&test)).unwrap();
    let vv = report.get(Metric::PowerVv);
    assert!((vv.q90 - vv.q10 - 22.9).abs() < 1e-9);
    assert!((vv.rmse - 2.29).abs() < 1e-9);
    assert!((vv.nrmse - 0.10).abs() < 1e-9);
    assert!(!vv.degenerate);
}

#[test]
fn self_comparison_is_zero() {
    let values: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin() * 10.0 - 80.0).collect();
    let s = series(&values);
    let report = compare_streams(&s, &s).unwrap();
    for m in &report.metrics {
        assert_eq!(m.rmse, 0.0, "{:?}", m.metric);
        assert_eq!(m.nrmse, 0.0, "{:?}", m.metric);
    }
}

#[test]
fn narrow_reference_flagged_degenerate() {
    let mut reference = series(&[0.0; 40]);
    let mut test = reference.clone();
    for (i, (r, t)) in reference.iter_mut().zip(test.iter_mut()).enumerate() {
        r.vaoa_spread = (1.3f64 * i as f64 / 39.0).to_radians() / 0.8;
        t.vaoa_spread = r.vaoa_spread + 0.01;
    }
    let report = compare_streams(&reference, &test).unwrap();
    let m = report.get(Metric::VaoaSpread);
    assert!(m.degenerate && m.nrmse.is_nan());
    assert!(report.summary().all(|e| e.metric != Metric::VaoaSpread));
}

#[test]
fn mismatched_timestamps_rejected() {
    let a = series(&[1.0, 2.0, 3.0]);
    let mut b = a.clone();
    b[1].time += 0.005;
    assert!(matches!(compare_streams(&a, &b), Err(Error::StreamMismatch(_))));
    assert!(matches!(compare_streams(&a, &a[..2]), Err(Error::StreamMismatch(_))));
}

#[test]
fn haoa_errors_wrap() {
    let mut reference = series(&[0.0; 3]);
    let mut test = reference.clone();
    for (r, t) in reference.iter_mut().zip(test.iter_mut()) {
        r.mean_haoa = 179f64.to_radians();
        t.mean_haoa = -179f64.to_radians();
    }
    let report = compare_streams(&reference, &test).unwrap();
    assert!((report.get(Metric::MeanHaoa).rmse - 2f64.to_radians()).abs() < 1e-12);
}

#[test]
fn quantile_interpolates() {
    let v = [0.0, 10.0, 20.0, 30.0, 40.0];
    assert_eq!(quantile(&v, 0.1), 4.0);
    assert_eq!(quantile(&v, 0.9), 36.0);
    assert_eq!(quantile(&v, 1.0), 40.0);
}

#[test]
fn empty_snapshot_sentinels() {
    let m = SnapshotMetrics::of_paths(0.0, &[], 43.0);
    assert_eq!(m.power_vv, f64::NEG_INFINITY);
    assert!(m.delay_spread.is_nan() && m.haoa_spread.is_nan() && m.doppler_spread.is_nan());
    let ok = compare_streams(&[m], &[m]).unwrap();
    assert_eq!(ok.get(Metric::PowerVv).rmse, 0.0);
}

proptest! {
    #[test]
    fn spreads_invariant_under_power_scaling(spec in path_strategy(), scale in 1e-3f64..1e3) {
        let a = build(&spec);
        let b: Vec<RayPath> = a.iter().cloned().map(|mut p| { p.transfer *= C64::new(scale, 0.0); p }).collect();
        let (_, da) = delay_stats(&a);
        let (_, db) = delay_stats(&b);
        prop_assert!((da - db).abs() <= 1e-9 * da + 1e-15);
        let (_, ha, _, va) = angle_stats(&a);
        let (_, hb, _, vb) = angle_stats(&b);
        prop_assert!((ha - hb).abs() < 1e-9 && (va - vb).abs() < 1e-9);
        prop_assert!((doppler_stats(&a).1 - doppler_stats(&b).1).abs() < 1e-7);
        prop_assert!(da >= 0.0 && ha >= 0.0 && va >= 0.0);
    }

    #[test]
    fn azimuth_rotation_rotates_mean(spec in path_strategy(), alpha in -PI..PI) {
        let a = build(&spec);
        let rotated: Vec<_> = spec.iter().map(|&(am, ph, d, az, el, f)| (am, ph, d, az + alpha, el, f)).collect();
        let b = build(&rotated);
        let (ma, sa, _, _) = angle_stats(&a);
        let (mb, sb, _, _) = angle_stats(&b);
        // Rotation by alpha within 1e-9 whenever the phasor sum is not near zero.
        let total: f64 = a.iter().map(RayPath::power).sum();
        let phasor: C64 = a.iter().map(|p| C64::from_polar(p.power(), p.aoa.0)).sum();
        prop_assume!(phasor.norm() > 1e-3 * total);
        prop_assert!(railray::geom::wrap_angle(mb - ma - alpha).abs() < 1e-7);
        prop_assert!((sa - sb).abs() < 1e-7);
    }

    #[test]
    fn nrmse_invariant_under_offset(
        reference in prop::collection::vec(-120.0f64..-40.0, 20..60),
        noise in prop::collection::vec(-3.0f64..3.0, 60),
        offset in -50.0f64..50.0,
    ) {
        let test: Vec<f64> = reference.iter().zip(&noise).map(|(r, n)| r + n).collect();
        let a = compare_streams(&series(&reference), &series(&test)).unwrap();
        let shift = |v: &[f64]| v.iter().map(|x| x + offset).collect::<Vec<_>>();
        let b = compare_streams(&series(&shift(&reference)), &series(&shift(&test))).unwrap();
        let (ea, eb) = (a.get(Metric::PowerVv), b.get(Metric::PowerVv));
        prop_assert!((ea.rmse - eb.rmse).abs() < 1e-9);
        prop_assert!(ea.nrmse.is_nan() == eb.nrmse.is_nan());
        if !ea.nrmse.is_nan() {
            prop_assert!((ea.nrmse - eb.nrmse).abs() < 1e-9);
        }
    }

    #[test]
    fn rmse_symmetric(
        reference in prop::collection::vec(-120.0f64..-40.0, 20..40),
        test in prop::collection::vec(-120.0f64..-40.0, 40),
    ) {
        let test = &test[..reference.len()];
        let a = compare_streams(&series(&reference), &series(test)).unwrap();
        let b = compare_streams(&series(test), &series(&reference)).unwrap();
        for m in Metric::ALL {
            prop_assert!((a.get(m).rmse - b.get(m).rmse).abs() < 1e-12);
        }
    }

    #[test]
    fn narrowband_power_is_coherent_sum(spec in path_strategy()) {
        let paths = build(&spec);
        let m = SnapshotMetrics::of_paths(0.0, &paths, 43.0);
        for (pair, got) in [(PolPair::VV, m.power_vv), (PolPair::HV, m.power_hv), (PolPair::HH, m.power_hh), (PolPair::VH, m.power_vh)] {
            let (mut re, mut im) = (0.0, 0.0);
            for p in &paths {
                let z = pair.entry(&p.transfer);
                re += z.re;
                im += z.im;
            }
            let expected = 43.0 + 10.0 * (re * re + im * im).log10();
            prop_assert!((got - expected).abs() < 1e-9);
        }
    }
}
