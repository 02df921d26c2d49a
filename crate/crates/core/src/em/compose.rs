//! Polarimetric transfer matrix of a traced path.

use std::f64::consts::PI;

use super::{
    bend_dyad, dot_rc, fresnel_reflection, knife_edge_diffraction, outer, reflection_dyad, spherical_basis, to_cvec,
    utd_vertical_edge, AntennaConfig, CarrierConfig, Dyad, PolMatrix, WedgeGeometry, C64,
};
use crate::error::{Error, Result};
use crate::geom::{xy, Vec3, EPS_GEOM};
use crate::rt::{InteractionKind, InteractionRecord};
use crate::scene::Scene;

/// Transfer matrix of the path `vertices` (tx, interaction points..., rx).
///
/// Reflections use the facade's Fresnel coefficients, vertical-edge
/// diffractions the UTD wedge coefficients and rooftop diffractions the
/// magnitude of the knife-edge coefficient of each edge with its parameter
/// taken relative to the neighbouring vertices. Paths with a vertical-edge
/// diffraction spread as `1 / sqrt(s s' (s + s'))` with unfolded lengths
/// either side of the edge; all others as `1 / L`.
pub fn compose_path_matrix(
    vertices: &[Vec3],
    interactions: &[InteractionRecord],
    scene: &Scene,
    carrier: &CarrierConfig,
    tx_antenna: &AntennaConfig,
    rx_antenna: &AntennaConfig,
) -> Result<PolMatrix> {
    if vertices.len() != interactions.len() + 2 {
        return Err(Error::domain(format!(
            "{} vertices for {} interactions",
            vertices.len(),
            interactions.len()
        )));
    }
    let mut dirs = Vec::with_capacity(vertices.len() - 1);
    let mut lengths = Vec::with_capacity(vertices.len() - 1);
    for w in vertices.windows(2) {
        let d = w[1] - w[0];
        let l = d.norm();
        if !(l > EPS_GEOM) {
            return Err(Error::domain("zero-length path segment"));
        }
        dirs.push(d / l);
        lengths.push(l);
    }
    let total: f64 = lengths.iter().sum();

    let mut chain = Dyad::identity();
    let mut spreading = 1.0 / total;
    for (i, rec) in interactions.iter().enumerate() {
        let (k_in, k_out) = (dirs[i], dirs[i + 1]);
        let dyad = match rec.kind {
            InteractionKind::Reflection => {
                let f = scene
                    .facade(rec.object_id, rec.element_id)
                    .ok_or_else(|| Error::domain(format!("no facade {}:{}", rec.object_id, rec.element_id)))?;
                let n = f.normal3();
                let incidence = k_in.dot(&n).abs().min(1.0).acos();
                let (te, tm) = fresnel_reflection(&f.material, incidence, carrier);
                reflection_dyad(&k_in, &k_out, &n, te, tm)
            }
            InteractionKind::VerticalEdgeDiffraction => {
                let s_src: f64 = lengths[..=i].iter().sum();
                let s_obs = total - s_src;
                spreading = 1.0 / (s_src * s_obs * (s_src + s_obs)).sqrt();
                edge_dyad(scene, rec, &k_in, &k_out, s_src, s_obs, carrier)?
            }
            InteractionKind::RooftopDiffraction => {
                let v = knife_edge_parameter(&vertices[i], &vertices[i + 1], &vertices[i + 2], carrier.wavelength());
                bend_dyad(&k_in, &k_out, C64::from(knife_edge_diffraction(v).norm()))
            }
            InteractionKind::Scattering => {
                return Err(Error::domain("scattering interactions are composed by the PO module"));
            }
        };
        chain = dyad * chain;
    }

    let scalar = C64::from_polar(
        carrier.wavelength() / (4.0 * PI) * spreading * tx_antenna.amplitude() * rx_antenna.amplitude(),
        -carrier.wavenumber() * total,
    );
    Ok(project(&chain, &dirs[0], &-dirs[dirs.len() - 1]) * scalar)
}

/// Projects a field dyad onto the transmit basis at `tx_dir` (leaving the
/// transmitter) and the receive basis at `rx_dir` (leaving the receiver).
pub(crate) fn project(chain: &Dyad, tx_dir: &Vec3, rx_dir: &Vec3) -> PolMatrix {
    let tb = spherical_basis(tx_dir);
    let rb = spherical_basis(rx_dir);
    let mut m = PolMatrix::zeros();
    for (c, t) in tb.iter().enumerate() {
        let field = chain * to_cvec(t);
        for (r, e) in rb.iter().enumerate() {
            m[(r, c)] = dot_rc(e, &field);
        }
    }
    m
}

/// Fresnel-Kirchhoff parameter of the knife edge at `edge` between its
/// neighbours, using horizontal distances in the vertical plane.
pub(crate) fn knife_edge_parameter(prev: &Vec3, edge: &Vec3, next: &Vec3, wavelength: f64) -> f64 {
    let d1 = (xy(edge) - xy(prev)).norm();
    let d2 = (xy(next) - xy(edge)).norm();
    if d1 <= 0.0 || d2 <= 0.0 {
        return 0.0;
    }
    let line = prev.z + (next.z - prev.z) * d1 / (d1 + d2);
    let h = edge.z - line;
    h * (2.0 * (d1 + d2) / (wavelength * d1 * d2)).sqrt()
}

fn edge_dyad(
    scene: &Scene,
    rec: &InteractionRecord,
    k_in: &Vec3,
    k_out: &Vec3,
    s_src: f64,
    s_obs: f64,
    carrier: &CarrierConfig,
) -> Result<Dyad> {
    let edge = scene
        .vertical_edge(rec.object_id, rec.element_id)
        .ok_or_else(|| Error::domain(format!("no vertical edge {}:{}", rec.object_id, rec.element_id)))?;
    let to_src = -xy(k_in);
    let to_obs = xy(k_out);
    if to_src.norm() < 1e-12 || to_obs.norm() < 1e-12 {
        return Err(Error::domain("ray runs along the diffracting edge"));
    }
    let geometry = WedgeGeometry {
        n: edge.wedge_n,
        phi_src: edge.exterior_angle(&to_src.normalize()),
        phi_obs: edge.exterior_angle(&to_obs.normalize()),
        beta0: k_in.z.clamp(-1.0, 1.0).acos(),
        s_src,
        s_obs,
    };
    let facades = scene.facades();
    let (ds, dh) = utd_vertical_edge(
        &geometry,
        carrier,
        &facades[edge.face0].material,
        &facades[edge.face_n].material,
    )?;
    let e = Vec3::z();
    let phi_in = -e.cross(k_in).normalize();
    let phi_out = e.cross(k_out).normalize();
    let beta_in = k_in.cross(&phi_in);
    let beta_out = k_out.cross(&phi_out);
    Ok(outer(&beta_out, &beta_in) * (-ds) + outer(&phi_out, &phi_in) * (-dh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{free_space_transport, PolPair};
    use crate::geom::mirror_point;
    use crate::scene::{Building, Material};

    fn carrier() -> CarrierConfig {
        CarrierConfig::new(1.9e9).unwrap()
    }

    fn wall(material: Material) -> Scene {
        // facade 0 of this box is the plane y = 0 facing -y
        Scene::new(
            vec![Building::rect(1, [-500.0, 0.0], [500.0, 5.0], 30.0, material)],
            vec![],
            Material::ground(),
        )
        .unwrap()
    }

    fn reflection(point: Vec3) -> InteractionRecord {
        InteractionRecord {
            kind: InteractionKind::Reflection,
            object_id: 1,
            element_id: 0,
            point,
        }
    }

    #[test]
    fn los_matrix_is_diagonal_free_space() {
        let c = carrier();
        let a = AntennaConfig::default();
        let tx = Vec3::new(0.0, 0.0, 10.0);
        let rx = Vec3::new(100.0, 0.0, 10.0);
        let t = compose_path_matrix(&[tx, rx], &[], &Scene::empty(), &c, &a, &a).unwrap();
        let g = free_space_transport(100.0, &c).unwrap();
        assert!((PolPair::VV.entry(&t).norm() - c.wavelength() / (4.0 * PI * 100.0)).abs() < 1e-15);
        assert!(PolPair::HV.entry(&t).norm() < 1e-15 && PolPair::VH.entry(&t).norm() < 1e-15);
        assert!((PolPair::VV.entry(&t) - g).norm() < 1e-14);
        // phi-hat of the two antenna frames are antiparallel along the link
        assert!((PolPair::HH.entry(&t) + g).norm() < 1e-14);
    }

    #[test]
    fn antenna_gains_scale_amplitude() {
        let c = carrier();
        let tx = Vec3::new(0.0, 0.0, 10.0);
        let rx = Vec3::new(100.0, 0.0, 10.0);
        let g3 = AntennaConfig { gain_dbi: 3.0 };
        let a = compose_path_matrix(&[tx, rx], &[], &Scene::empty(), &c, &g3, &g3).unwrap();
        let b = compose_path_matrix(
            &[tx, rx],
            &[],
            &Scene::empty(),
            &c,
            &AntennaConfig::default(),
            &AntennaConfig::default(),
        )
        .unwrap();
        let db = 20.0 * (a[(0, 0)].norm() / b[(0, 0)].norm()).log10();
        assert!((db - 6.0).abs() < 1e-9);
    }

    /// Reflection point on the plane y = 0 by hand image construction.
    fn wall_path(tx: Vec3, rx: Vec3) -> (Vec<Vec3>, f64) {
        let image = Vec3::new(tx.x, -tx.y, tx.z);
        let t = image.y / (image.y - rx.y);
        let p = image + (rx - image) * t;
        (vec![tx, p, rx], (rx - image).norm())
    }

    #[test]
    fn pec_wall_reflection_magnitude() {
        let c = carrier();
        let a = AntennaConfig::default();
        let scene = wall(Material::pec());
        let tx = Vec3::new(-40.0, -12.0, 10.0);
        let rx = Vec3::new(35.0, -7.0, 10.0);
        let (v, l) = wall_path(tx, rx);
        let t = compose_path_matrix(&v, &[reflection(v[1])], &scene, &c, &a, &a).unwrap();
        let expected = c.wavelength() / (4.0 * PI * l);
        // V is parallel to the facade's vertical axis: TE polarization
        assert!((PolPair::VV.entry(&t).norm() - expected).abs() < 1e-12 * expected);
        assert!(PolPair::HV.entry(&t).norm() < 1e-12 * expected);
        let image = mirror_point(&tx, &Vec3::zeros(), &Vec3::new(0.0, -1.0, 0.0));
        assert!(((rx - image).norm() - crate::geom::polyline_length(&v)).abs() < 1e-9);
    }

    #[test]
    fn dielectric_reflection_below_free_space() {
        let c = carrier();
        let a = AntennaConfig::default();
        let scene = wall(Material::concrete());
        for (tx, rx) in [
            (Vec3::new(-40.0, -12.0, 10.0), Vec3::new(35.0, -7.0, 2.0)),
            (Vec3::new(-4.0, -30.0, 25.0), Vec3::new(3.0, -1.0, 1.5)),
        ] {
            let (v, l) = wall_path(tx, rx);
            let t = compose_path_matrix(&v, &[reflection(v[1])], &scene, &c, &a, &a).unwrap();
            let fs = c.wavelength() / (4.0 * PI * l);
            for pair in [PolPair::VV, PolPair::VH, PolPair::HV, PolPair::HH] {
                assert!(pair.entry(&t).norm() <= fs * (1.0 + 1e-12));
            }
            let power: f64 = t.iter().map(|z| z.norm_sqr()).sum();
            assert!(power <= 2.0 * fs * fs * (1.0 + 1e-12));
        }
    }

    fn assert_transpose(a: &PolMatrix, b: &PolMatrix) {
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for r in 0..2 {
            for col in 0..2 {
                assert!((a[(r, col)] - b[(col, r)]).norm() <= 1e-10 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn reflection_is_reciprocal() {
        let c = carrier();
        let a = AntennaConfig::default();
        let scene = wall(Material::concrete());
        let tx = Vec3::new(-40.0, -12.0, 20.0);
        let rx = Vec3::new(35.0, -7.0, 1.5);
        let (v, _) = wall_path(tx, rx);
        let fwd = compose_path_matrix(&v, &[reflection(v[1])], &scene, &c, &a, &a).unwrap();
        let rev: Vec<Vec3> = v.iter().rev().copied().collect();
        let bwd = compose_path_matrix(&rev, &[reflection(v[1])], &scene, &c, &a, &a).unwrap();
        assert_transpose(&fwd, &bwd);
    }

    #[test]
    fn edge_and_rooftop_paths_are_reciprocal() {
        let c = carrier();
        let a = AntennaConfig::default();
        let scene = Scene::new(
            vec![Building::rect(1, [0.0, 0.0], [10.0, 10.0], 20.0, Material::concrete())],
            vec![],
            Material::ground(),
        )
        .unwrap();
        // vertex 0 of the box is (0, 0); its edge element is n + 1 = 5
        let tx = Vec3::new(-30.0, 5.0, 12.0);
        let rx = Vec3::new(20.0, -25.0, 2.0);
        let (d1, d2) = ((xy(&tx)).norm(), (xy(&rx)).norm());
        let q = Vec3::new(0.0, 0.0, tx.z + (rx.z - tx.z) * d1 / (d1 + d2));
        let rec = InteractionRecord {
            kind: InteractionKind::VerticalEdgeDiffraction,
            object_id: 1,
            element_id: 5,
            point: q,
        };
        let fwd = compose_path_matrix(&[tx, q, rx], &[rec], &scene, &c, &a, &a).unwrap();
        let bwd = compose_path_matrix(&[rx, q, tx], &[rec], &scene, &c, &a, &a).unwrap();
        assert!(fwd.iter().all(|z| z.is_finite()) && fwd[(0, 0)].norm() > 0.0);
        assert_transpose(&fwd, &bwd);

        let tx = Vec3::new(-30.0, 5.0, 10.0);
        let rx = Vec3::new(40.0, 5.0, 1.5);
        let p1 = Vec3::new(0.0, 5.0, 20.0);
        let p2 = Vec3::new(10.0, 5.0, 20.0);
        let recs = [
            InteractionRecord {
                kind: InteractionKind::RooftopDiffraction,
                object_id: 1,
                element_id: 3,
                point: p1,
            },
            InteractionRecord {
                kind: InteractionKind::RooftopDiffraction,
                object_id: 1,
                element_id: 1,
                point: p2,
            },
        ];
        let fwd = compose_path_matrix(&[tx, p1, p2, rx], &recs, &scene, &c, &a, &a).unwrap();
        let rrev = [recs[1], recs[0]];
        let bwd = compose_path_matrix(&[rx, p2, p1, tx], &rrev, &scene, &c, &a, &a).unwrap();
        assert_transpose(&fwd, &bwd);
    }

    #[test]
    fn rejects_degenerate_input() {
        let c = carrier();
        let a = AntennaConfig::default();
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert!(compose_path_matrix(&[p, p], &[], &Scene::empty(), &c, &a, &a).is_err());
        assert!(compose_path_matrix(&[p], &[], &Scene::empty(), &c, &a, &a).is_err());
        let rec = InteractionRecord {
            kind: InteractionKind::Scattering,
            object_id: 0,
            element_id: 0,
            point: Vec3::zeros(),
        };
        let q = Vec3::new(9.0, 2.0, 3.0);
        assert!(compose_path_matrix(&[p, Vec3::zeros(), q], &[rec], &Scene::empty(), &c, &a, &a).is_err());
    }
}
