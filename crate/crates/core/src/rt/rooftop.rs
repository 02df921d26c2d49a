//! Over-rooftop diffraction in the vertical plane through tx and rx.

use super::{InteractionKind, InteractionRecord, PathTag, RayPath};
use crate::em::{compose_path_matrix, AntennaConfig, CarrierConfig};
use crate::error::Result;
use crate::geom::{cross2, xy, Vec3, EPS_GEOM};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy)]
struct Crossing {
    s: f64,
    z: f64,
    object_id: u32,
    element_id: u32,
}

/// Over-rooftop path when the direct path is blocked.
///
/// The path runs through every roof edge crossed by the vertical tx-rx
/// plane, so each building contributes its near and far edge. Returns
/// `None` when line of sight exists or nothing is crossed.
pub fn trace_rooftop(
    scene: &Scene,
    tx: &Vec3,
    rx: &Vec3,
    carrier: &CarrierConfig,
    tx_antenna: &AntennaConfig,
    rx_antenna: &AntennaConfig,
) -> Result<Option<RayPath>> {
    if scene.is_los(tx, rx) {
        return Ok(None);
    }
    let (a, b) = (xy(tx), xy(rx));
    let r = b - a;
    let span = r.norm();
    if span <= EPS_GEOM {
        return Ok(None);
    }

    let mut crossings = Vec::new();
    for bi in scene.buildings_along(&a, &b) {
        for f in &scene.facades()[scene.facade_range(bi)] {
            let q = f.end - f.start;
            let denom = cross2(&r, &q);
            if denom.abs() < 1e-15 {
                continue;
            }
            let w = f.start - a;
            let t = cross2(&w, &q) / denom;
            let u = cross2(&w, &r) / denom;
            if t > 0.0 && t < 1.0 && (0.0..=1.0).contains(&u) {
                crossings.push(Crossing {
                    s: t * span,
                    z: f.height,
                    object_id: f.object_id,
                    element_id: f.element_id,
                });
            }
        }
    }
    crossings.sort_by(|x, y| {
        x.s.total_cmp(&y.s)
            .then((x.object_id, x.element_id).cmp(&(y.object_id, y.element_id)))
    });
    crossings.dedup_by(|later, kept| (later.s - kept.s).abs() < 1e-9 && later.z == kept.z);

    if crossings.is_empty() {
        return Ok(None);
    }

    let dir = r / span;
    let mut vertices = vec![*tx];
    let mut interactions = Vec::new();
    for c in &crossings {
        let h = a + dir * c.s;
        let point = Vec3::new(h.x, h.y, c.z);
        vertices.push(point);
        interactions.push(InteractionRecord {
            kind: InteractionKind::RooftopDiffraction,
            object_id: c.object_id,
            element_id: c.element_id,
            point,
        });
    }
    vertices.push(*rx);
    if !vertices.windows(2).all(|w| scene.is_los(&w[0], &w[1])) {
        return Ok(None);
    }
    let transfer = compose_path_matrix(&vertices, &interactions, scene, carrier, tx_antenna, rx_antenna)?;
    Ok(Some(RayPath::new(vertices, interactions, transfer, PathTag::Specular)))
}
