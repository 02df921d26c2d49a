use proptest::prelude::*;
use railray::em::{knife_edge_loss_db, AntennaConfig, CarrierConfig, PolPair};
use railray::geom::{polyline_length, Vec3, SPEED_OF_LIGHT};
use railray::rt::{trace_rooftop, trace_specular, InteractionKind, RayPath, Signature, TraceLimits};
use railray::scene::{Building, Material, Scene};

fn carrier() -> CarrierConfig {
    CarrierConfig::new(1.9e9).unwrap()
}

fn trace(scene: &Scene, tx: Vec3, rx: Vec3, limits: TraceLimits) -> Vec<RayPath> {
    let a = AntennaConfig::default();
    trace_specular(scene, &tx, &rx, &carrier(), &a, &a, &limits).unwrap()
}

fn no_edges() -> TraceLimits {
    TraceLimits {
        max_vertical_diffractions: 0,
        ..TraceLimits::default()
    }
}

fn two_walls() -> Scene {
    Scene::new(
        vec![
            Building::rect(1, [-500.0, 10.0], [500.0, 11.0], 30.0, Material::concrete()),
            Building::rect(2, [-500.0, -11.0], [500.0, -10.0], 30.0, Material::concrete()),
        ],
        vec![],
        Material::ground(),
    )
    .unwrap()
}

#[test]
fn empty_scene_gives_line_of_sight_only() {
    let tx = Vec3::new(0.0, 0.0, 20.0);
    let rx = Vec3::new(300.0, 40.0, 1.5);
    let paths = trace(&Scene::empty(), tx, rx, TraceLimits::default());
    assert_eq!(paths.len(), 1);
    assert!(paths[0].signature.is_los());
    assert_eq!(paths[0].delay, (rx - tx).norm() / SPEED_OF_LIGHT);
}

#[test]
fn single_wall_reflection_matches_image() {
    let scene = Scene::new(
        vec![Building::rect(
            1,
            [-1000.0, 10.0],
            [1000.0, 12.0],
            40.0,
            Material::concrete(),
        )],
        vec![],
        Material::ground(),
    )
    .unwrap();
    let tx = Vec3::new(-30.0, 0.0, 20.0);
    let rx = Vec3::new(45.0, -5.0, 1.5);
    let paths = trace(&scene, tx, rx, no_edges());
    assert_eq!(paths.len(), 2);
    let image = Vec3::new(tx.x, 20.0 - tx.y, tx.z);
    assert!((paths[1].length - (rx - image).norm()).abs() < 1e-9);
}

#[test]
fn two_parallel_walls_give_five_paths() {
    let tx = Vec3::new(-20.0, 2.0, 10.0);
    let rx = Vec3::new(30.0, -3.0, 1.5);
    let paths = trace(&two_walls(), tx, rx, no_edges());
    assert_eq!(paths.len(), 5);
    let hand = |image_y: f64| ((rx.x - tx.x).powi(2) + (rx.y - image_y).powi(2) + (rx.z - tx.z).powi(2)).sqrt();
    let mut expected = vec![hand(2.0), hand(18.0), hand(-22.0), hand(-38.0), hand(42.0)];
    let mut got: Vec<f64> = paths.iter().map(|p| p.length).collect();
    expected.sort_by(f64::total_cmp);
    got.sort_by(f64::total_cmp);
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-9, "{g} vs {e}");
    }
    let counts: Vec<usize> = paths.iter().map(|p| p.interactions.len()).collect();
    assert_eq!(counts, vec![0, 1, 1, 2, 2]);
}

#[test]
fn reflection_order_limit_is_respected() {
    let tx = Vec3::new(-20.0, 2.0, 10.0);
    let rx = Vec3::new(30.0, -3.0, 1.5);
    for (order, n) in [(0, 1), (1, 3), (2, 5)] {
        let limits = TraceLimits {
            max_reflections: order,
            ..no_edges()
        };
        assert_eq!(trace(&two_walls(), tx, rx, limits).len(), n);
    }
}

#[test]
fn box_between_antennas_gives_two_roof_edges() {
    let scene = Scene::new(
        vec![Building::rect(
            7,
            [-10.0, -10.0],
            [10.0, 10.0],
            20.0,
            Material::concrete(),
        )],
        vec![],
        Material::ground(),
    )
    .unwrap();
    let a = AntennaConfig::default();
    let c = carrier();
    let tx = Vec3::new(-50.0, 0.0, 10.0);
    let rx = Vec3::new(50.0, 0.0, 1.5);
    let p = trace_rooftop(&scene, &tx, &rx, &c, &a, &a).unwrap().unwrap();
    assert_eq!(p.interactions.len(), 2);
    assert!(p
        .interactions
        .iter()
        .all(|r| r.kind == InteractionKind::RooftopDiffraction && r.object_id == 7));
    assert!((p.interactions[0].point - Vec3::new(-10.0, 0.0, 20.0)).norm() < 1e-9);
    assert!((p.interactions[1].point - Vec3::new(10.0, 0.0, 20.0)).norm() < 1e-9);

    let high = trace_rooftop(
        &scene,
        &Vec3::new(-50.0, 0.0, 40.0),
        &Vec3::new(50.0, 0.0, 35.0),
        &c,
        &a,
        &a,
    )
    .unwrap();
    assert!(high.is_none());
}

/// Knife-edge parameter from hand geometry along the profile.
fn v_param(prev: (f64, f64), edge: (f64, f64), next: (f64, f64), lambda: f64) -> f64 {
    let (d1, d2) = (edge.0 - prev.0, next.0 - edge.0);
    let h = edge.1 - (prev.1 + (next.1 - prev.1) * d1 / (d1 + d2));
    h * (2.0 * (d1 + d2) / (lambda * d1 * d2)).sqrt()
}

#[test]
fn two_boxes_combine_losses_in_db() {
    let scene = Scene::new(
        vec![
            Building::rect(1, [-30.0, -10.0], [-20.0, 10.0], 15.0, Material::concrete()),
            Building::rect(2, [20.0, -10.0], [30.0, 10.0], 18.0, Material::concrete()),
        ],
        vec![],
        Material::ground(),
    )
    .unwrap();
    let a = AntennaConfig::default();
    let c = carrier();
    let tx = Vec3::new(-60.0, 0.0, 5.0);
    let rx = Vec3::new(60.0, 0.0, 3.0);
    let p = trace_rooftop(&scene, &tx, &rx, &c, &a, &a).unwrap().unwrap();
    assert_eq!(p.interactions.len(), 4);

    // profile coordinates: s from tx, z
    let prof = [
        (0.0, 5.0),
        (30.0, 15.0),
        (40.0, 15.0),
        (80.0, 18.0),
        (90.0, 18.0),
        (120.0, 3.0),
    ];
    let lambda = c.wavelength();
    let expected: f64 = (1..5)
        .map(|i| knife_edge_loss_db(v_param(prof[i - 1], prof[i], prof[i + 1], lambda)))
        .sum();
    let free = lambda / (4.0 * std::f64::consts::PI * p.length);
    let loss = -20.0 * (PolPair::VV.entry(&p.transfer).norm() / free).log10();
    assert!((loss - expected).abs() < 1e-9, "{loss} vs {expected}");
}

#[test]
fn edge_diffraction_reaches_around_a_corner() {
    let scene = Scene::new(
        vec![Building::rect(3, [0.0, 0.0], [40.0, 40.0], 25.0, Material::concrete())],
        vec![],
        Material::ground(),
    )
    .unwrap();
    let tx = Vec3::new(-30.0, 20.0, 10.0);
    let rx = Vec3::new(20.0, -30.0, 1.5);
    let paths = trace(
        &scene,
        tx,
        rx,
        TraceLimits {
            rooftop: false,
            ..TraceLimits::default()
        },
    );
    let d: Vec<_> = paths
        .iter()
        .filter(|p| p.interactions.len() == 1 && p.interactions[0].kind == InteractionKind::VerticalEdgeDiffraction)
        .collect();
    assert_eq!(d.len(), 1);
    let q = d[0].interactions[0].point;
    assert!((q.x.abs() + q.y.abs()) < 1e-12);
    // shortest path over the edge: straight line in the unfolded plane
    let (d1, d2) = (
        (tx.x.powi(2) + tx.y.powi(2)).sqrt(),
        (rx.x.powi(2) + rx.y.powi(2)).sqrt(),
    );
    assert!((d[0].length - ((d1 + d2).powi(2) + (tx.z - rx.z).powi(2)).sqrt()).abs() < 1e-9);
}

#[test]
fn transmitter_inside_building_is_rejected() {
    let scene = two_walls();
    let a = AntennaConfig::default();
    let r = trace_specular(
        &scene,
        &Vec3::new(0.0, 10.5, 5.0),
        &Vec3::new(10.0, 0.0, 1.5),
        &carrier(),
        &a,
        &a,
        &TraceLimits::default(),
    );
    assert!(r.is_err());
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos()
}

fn check_invariants(scene: &Scene, tx: Vec3, rx: Vec3) -> Result<(), TestCaseError> {
    let fwd = trace(scene, tx, rx, TraceLimits::default());
    let bwd = trace(scene, rx, tx, TraceLimits::default());

    let mut seen = std::collections::HashSet::new();
    for p in &fwd {
        prop_assert!(seen.insert(p.signature.clone()), "duplicate {}", p.signature);
        prop_assert!((polyline_length(&p.vertices) - p.length).abs() < 1e-9);
        for w in p.vertices.windows(2) {
            prop_assert!(scene.is_los(&w[0], &w[1]));
        }
        for (i, rec) in p.interactions.iter().enumerate() {
            if rec.kind == InteractionKind::Reflection {
                let f = scene.facade(rec.object_id, rec.element_id).unwrap();
                prop_assert!(f.hosts(&rec.point));
                let n = f.normal3();
                let back = p.vertices[i] - p.vertices[i + 1];
                let out = p.vertices[i + 2] - p.vertices[i + 1];
                prop_assert!((angle_between(&back, &n) - angle_between(&out, &n)).abs() < 1e-9);
            }
        }
    }

    let mut a: Vec<(Signature, f64)> = fwd.iter().map(|p| (p.signature.clone(), p.length)).collect();
    let mut b: Vec<(Signature, f64)> = bwd.iter().map(|p| (p.signature.reversed(), p.length)).collect();
    a.sort_by(|x, y| x.0.cmp(&y.0));
    b.sort_by(|x, y| x.0.cmp(&y.0));
    let sa: Vec<_> = a.iter().map(|x| x.0.to_string()).collect();
    let sb: Vec<_> = b.iter().map(|x| x.0.to_string()).collect();
    prop_assert_eq!(sa, sb);
    for (x, y) in a.iter().zip(&b) {
        prop_assert!((x.1 - y.1).abs() < 1e-9);
    }

    let mut previous: Vec<Signature> = Vec::new();
    for order in 0..=2 {
        let limits = TraceLimits {
            max_reflections: order,
            ..TraceLimits::default()
        };
        let now: Vec<Signature> = trace(scene, tx, rx, limits).into_iter().map(|p| p.signature).collect();
        for s in &previous {
            prop_assert!(now.contains(s), "{} lost at order {}", s, order);
        }
        previous = now;
    }
    Ok(())
}

fn block_scene(heights: &[f64]) -> Scene {
    let mut buildings = Vec::new();
    for (i, &h) in heights.iter().enumerate() {
        let (cx, cy) = ((i % 3) as f64 * 60.0 - 60.0, (i / 3) as f64 * 60.0 - 60.0);
        buildings.push(Building::rect(
            i as u32,
            [cx - 20.0, cy - 15.0],
            [cx + 20.0, cy + 15.0],
            h,
            Material::concrete(),
        ));
    }
    Scene::new(buildings, vec![], Material::ground()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tracer_invariants(
        heights in proptest::collection::vec(5.0f64..40.0, 9),
        gx in 0usize..2, gy in 0usize..3, hx in 0usize..3, hy in 0usize..2,
        jitter in proptest::array::uniform4(-4.0f64..4.0),
        ztx in 2.0f64..45.0, zrx in 1.0f64..10.0,
    ) {
        let scene = block_scene(&heights);
        // antennas in the streets between blocks
        let tx = Vec3::new(gx as f64 * 60.0 - 30.0 + jitter[0], gy as f64 * 60.0 - 60.0 + jitter[1], ztx);
        let rx = Vec3::new(hx as f64 * 60.0 - 60.0 + jitter[2], hy as f64 * 60.0 - 30.0 + jitter[3], zrx);
        check_invariants(&scene, tx, rx)?;
    }
}
