//! Image-method tracer for facade reflections and vertical-edge diffraction.

use super::{trace_rooftop, InteractionKind, InteractionRecord, PathTag, RayPath, TraceLimits};
use crate::em::{compose_path_matrix, AntennaConfig, CarrierConfig};
use crate::error::{Error, Result};
use crate::geom::{mirror_point, xy, Vec3, EPS_GEOM};
use crate::scene::{Facade, Scene, VerticalEdge};

const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Image {
    facade: usize,
    point: Vec3,
}

#[derive(Debug, Clone)]
struct ImagePair {
    first: usize,
    facade: usize,
    point: Vec3,
}

/// Tracer bound to one transmitter position. Everything that depends only
/// on the transmitter (images, lit edges, candidate interaction pairs) is
/// computed once, so tracing many receiver positions is cheap.
#[derive(Debug, Clone)]
pub struct Tracer<'a> {
    scene: &'a Scene,
    tx: Vec3,
    carrier: CarrierConfig,
    tx_antenna: AntennaConfig,
    rx_antenna: AntennaConfig,
    limits: TraceLimits,
    floor: f64,
    images: Vec<Image>,
    pairs: Vec<ImagePair>,
    lit_edges: Vec<usize>,
    reflect_then_edge: Vec<(usize, usize)>,
    edge_then_reflect: Vec<(usize, usize)>,
}

impl<'a> Tracer<'a> {
    pub fn new(
        scene: &'a Scene,
        tx: Vec3,
        carrier: CarrierConfig,
        tx_antenna: AntennaConfig,
        rx_antenna: AntennaConfig,
        limits: TraceLimits,
    ) -> Result<Self> {
        check_outside(scene, &tx, "transmitter")?;
        let facades = scene.facades();
        let edges = scene.edges();

        let images: Vec<Image> = facades
            .iter()
            .enumerate()
            .filter(|(_, f)| f.signed_distance(&tx) > EPS_GEOM)
            .map(|(i, f)| Image {
                facade: i,
                point: mirror_point(&tx, &f.origin3(), &f.normal3()),
            })
            .collect();

        let mut pairs = Vec::new();
        if limits.max_reflections >= 2 {
            for (k, img) in images.iter().enumerate() {
                let f1 = &facades[img.facade];
                for (j, f2) in facades.iter().enumerate() {
                    if j == img.facade || f2.signed_distance(&img.point) <= EPS_GEOM {
                        continue;
                    }
                    let ahead = |p: &crate::geom::Vec2| {
                        (p.x - f1.start.x) * f1.normal.x + (p.y - f1.start.y) * f1.normal.y > EPS_GEOM
                    };
                    if !ahead(&f2.start) && !ahead(&f2.end) {
                        continue;
                    }
                    pairs.push(ImagePair {
                        first: k,
                        facade: j,
                        point: mirror_point(&img.point, &f2.origin3(), &f2.normal3()),
                    });
                }
            }
        }

        let convex: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].wedge_n > 1.0 + 1e-9).collect();
        let lit_edges: Vec<usize> = convex
            .iter()
            .copied()
            .filter(|&e| exterior(&edges[e], &tx).is_some())
            .collect();

        let mut reflect_then_edge = Vec::new();
        let mut edge_then_reflect = Vec::new();
        if limits.max_vertical_diffractions >= 1 && limits.max_reflections >= 1 {
            for (k, img) in images.iter().enumerate() {
                let f = &facades[img.facade];
                for &e in &convex {
                    if in_front_of(img.facade, f, &edges[e]) && exterior(&edges[e], &img.point).is_some() {
                        reflect_then_edge.push((k, e));
                    }
                }
            }
            for &e in &lit_edges {
                for (i, f) in facades.iter().enumerate() {
                    if in_front_of(i, f, &edges[e]) {
                        edge_then_reflect.push((e, i));
                    }
                }
            }
        }

        Ok(Tracer {
            scene,
            tx,
            carrier,
            tx_antenna,
            rx_antenna,
            limits,
            floor: 10f64.powf(-limits.loss_floor_db / 20.0),
            images,
            pairs,
            lit_edges,
            reflect_then_edge,
            edge_then_reflect,
        })
    }

    pub fn tx(&self) -> &Vec3 {
        &self.tx
    }

    pub fn limits(&self) -> &TraceLimits {
        &self.limits
    }

    /// All valid paths to `rx`, ordered by interaction count and signature.
    pub fn trace(&self, rx: &Vec3) -> Result<Vec<RayPath>> {
        check_outside(self.scene, rx, "receiver")?;
        if (rx - self.tx).norm() <= EPS_GEOM {
            return Err(Error::domain("transmitter and receiver coincide"));
        }
        let scene = self.scene;
        let facades = scene.facades();
        let edges = scene.edges();
        let tx = self.tx;
        let max_r = self.limits.max_reflections;
        let max_d = self.limits.max_vertical_diffractions;
        let mut out = Vec::new();

        let los = scene.is_los(&tx, rx);
        if los {
            self.accept(vec![tx, *rx], vec![], &mut out)?;
        }

        if max_r >= 1 {
            for img in &self.images {
                let f = &facades[img.facade];
                if f.signed_distance(rx) <= EPS_GEOM {
                    continue;
                }
                if let Some(p) = crossing(f, &img.point, rx) {
                    self.accept(vec![tx, p, *rx], vec![reflection(f, p)], &mut out)?;
                }
            }
        }

        if max_r >= 2 {
            for pair in &self.pairs {
                let f2 = &facades[pair.facade];
                if f2.signed_distance(rx) <= EPS_GEOM {
                    continue;
                }
                let Some(p2) = crossing(f2, &pair.point, rx) else {
                    continue;
                };
                let first = &self.images[pair.first];
                let f1 = &facades[first.facade];
                let Some(p1) = crossing(f1, &first.point, &p2) else {
                    continue;
                };
                self.accept(
                    vec![tx, p1, p2, *rx],
                    vec![reflection(f1, p1), reflection(f2, p2)],
                    &mut out,
                )?;
            }
        }

        if max_d >= 1 {
            for &e in &self.lit_edges {
                if let Some(q) = edge_point(&edges[e], &tx, rx) {
                    self.accept(vec![tx, q, *rx], vec![diffraction(&edges[e], q)], &mut out)?;
                }
            }
            for &(k, e) in &self.reflect_then_edge {
                let img = &self.images[k];
                let edge = &edges[e];
                let Some(q) = edge_point(edge, &img.point, rx) else {
                    continue;
                };
                let f = &facades[img.facade];
                let Some(p) = crossing(f, &img.point, &q) else { continue };
                self.accept(
                    vec![tx, p, q, *rx],
                    vec![reflection(f, p), diffraction(edge, q)],
                    &mut out,
                )?;
            }
            for &(e, i) in &self.edge_then_reflect {
                let f = &facades[i];
                if f.signed_distance(rx) <= EPS_GEOM {
                    continue;
                }
                let edge = &edges[e];
                let image = mirror_point(rx, &f.origin3(), &f.normal3());
                let Some(q) = edge_point(edge, &tx, &image) else {
                    continue;
                };
                let Some(p) = crossing(f, &q, &image) else { continue };
                self.accept(
                    vec![tx, q, p, *rx],
                    vec![diffraction(edge, q), reflection(f, p)],
                    &mut out,
                )?;
            }
        }

        if self.limits.rooftop && !los {
            if let Some(p) = trace_rooftop(scene, &tx, rx, &self.carrier, &self.tx_antenna, &self.rx_antenna)? {
                if max_abs(&p) >= self.floor {
                    out.push(p);
                }
            }
        }

        out.sort_by(|a, b| (a.interactions.len(), &a.signature).cmp(&(b.interactions.len(), &b.signature)));
        Ok(out)
    }

    fn accept(&self, vertices: Vec<Vec3>, interactions: Vec<InteractionRecord>, out: &mut Vec<RayPath>) -> Result<()> {
        if !interactions.is_empty() && !vertices.windows(2).all(|w| self.scene.is_los(&w[0], &w[1])) {
            return Ok(());
        }
        let transfer = compose_path_matrix(
            &vertices,
            &interactions,
            self.scene,
            &self.carrier,
            &self.tx_antenna,
            &self.rx_antenna,
        )?;
        let path = RayPath::new(vertices, interactions, transfer, PathTag::Specular);
        if max_abs(&path) >= self.floor {
            out.push(path);
        }
        Ok(())
    }
}

/// Traces every specular path between `tx` and `rx` under `limits`.
pub fn trace_specular(
    scene: &Scene,
    tx: &Vec3,
    rx: &Vec3,
    carrier: &CarrierConfig,
    tx_antenna: &AntennaConfig,
    rx_antenna: &AntennaConfig,
    limits: &TraceLimits,
) -> Result<Vec<RayPath>> {
    Tracer::new(scene, *tx, *carrier, *tx_antenna, *rx_antenna, *limits)?.trace(rx)
}

fn check_outside(scene: &Scene, p: &Vec3, what: &str) -> Result<()> {
    if !p.iter().all(|c| c.is_finite()) {
        return Err(Error::domain(format!("{what} position is not finite")));
    }
    if let Some(b) = scene.building_containing(p) {
        return Err(Error::domain(format!(
            "{what} at {:?} is inside building {}",
            p.as_slice(),
            b.id
        )));
    }
    Ok(())
}

fn max_abs(p: &RayPath) -> f64 {
    p.transfer.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn reflection(f: &Facade, point: Vec3) -> InteractionRecord {
    InteractionRecord {
        kind: InteractionKind::Reflection,
        object_id: f.object_id,
        element_id: f.element_id,
        point,
    }
}

fn diffraction(e: &VerticalEdge, point: Vec3) -> InteractionRecord {
    InteractionRecord {
        kind: InteractionKind::VerticalEdgeDiffraction,
        object_id: e.object_id,
        element_id: e.element_id,
        point,
    }
}

/// Point where the open segment `a -> b` crosses the facade rectangle.
fn crossing(f: &Facade, a: &Vec3, b: &Vec3) -> Option<Vec3> {
    let (t, p) = f.intersect(a, b)?;
    (t > 1e-12 && t < 1.0 - 1e-12).then_some(p)
}

fn in_front_of(index: usize, f: &Facade, e: &VerticalEdge) -> bool {
    if e.face0 == index || e.face_n == index {
        return false;
    }
    let p = Vec3::new(e.position.x, e.position.y, 0.0);
    f.signed_distance(&p) > EPS_GEOM
}

/// Exterior wedge angle of the direction from the edge towards `p`, if `p`
/// lies strictly outside the wedge.
fn exterior(e: &VerticalEdge, p: &Vec3) -> Option<f64> {
    let d = xy(p) - e.position;
    let n = d.norm();
    if n <= EPS_GEOM {
        return None;
    }
    let phi = e.exterior_angle(&(d / n));
    (phi > ANGLE_EPS && phi < e.wedge_n * std::f64::consts::PI - ANGLE_EPS).then_some(phi)
}

/// Diffraction point on the edge for the shortest path `src -> edge -> obs`.
fn edge_point(e: &VerticalEdge, src: &Vec3, obs: &Vec3) -> Option<Vec3> {
    exterior(e, src)?;
    exterior(e, obs)?;
    let d1 = (xy(src) - e.position).norm();
    let d2 = (xy(obs) - e.position).norm();
    let z = src.z + (obs.z - src.z) * d1 / (d1 + d2);
    (z >= 0.0 && z <= e.height).then(|| Vec3::new(e.position.x, e.position.y, z))
}
