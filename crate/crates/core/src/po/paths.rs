//! Scatter paths: antenna legs combined around a PO scatterer.

use super::{mesh_cylinder, po_scattered_matrix, FacetMesh, ScatterLeg, ScatterPolicy};
use crate::em::{fresnel_reflection, reflection_dyad, AntennaConfig, CarrierConfig, Dyad};
use crate::error::Result;
use crate::geom::{cross2, mirror_point, xy, Vec3, EPS_GEOM};
use crate::rt::{InteractionKind, InteractionRecord, PathTag, RayPath};
use crate::scene::{CylinderScatterer, Scene};

/// Leg shape before the reference point is known.
#[derive(Debug, Clone, Copy)]
enum LegShape {
    Direct,
    Reflected { facade: usize, virtual_antenna: Vec3 },
}

impl LegShape {
    fn virtual_antenna(&self, antenna: &Vec3) -> Vec3 {
        match self {
            LegShape::Direct => *antenna,
            LegShape::Reflected { virtual_antenna, .. } => *virtual_antenna,
        }
    }
}

/// Meshes of every scatterer of a scene, built once per carrier.
#[derive(Debug, Clone)]
pub struct ScatterModel {
    policy: ScatterPolicy,
    carrier: CarrierConfig,
    meshes: Vec<FacetMesh>,
}

impl ScatterModel {
    pub fn new(scene: &Scene, carrier: &CarrierConfig, policy: ScatterPolicy) -> ScatterModel {
        let meshes = if policy == ScatterPolicy::Off {
            Vec::new()
        } else {
            scene.scatterers().iter().map(|s| mesh_cylinder(s, carrier)).collect()
        };
        ScatterModel {
            policy,
            carrier: *carrier,
            meshes,
        }
    }

    pub fn policy(&self) -> ScatterPolicy {
        self.policy
    }

    pub fn meshes(&self) -> &[FacetMesh] {
        &self.meshes
    }

    /// Scatter paths between `tx` and `rx`, ordered by interaction count
    /// and signature.
    pub fn paths(
        &self,
        scene: &Scene,
        tx: &Vec3,
        rx: &Vec3,
        tx_antenna: &AntennaConfig,
        rx_antenna: &AntennaConfig,
    ) -> Result<Vec<RayPath>> {
        let mut out = Vec::new();
        for (cyl, mesh) in scene.scatterers().iter().zip(&self.meshes) {
            let tx_legs = self.leg_shapes(scene, cyl, tx);
            let rx_legs = self.leg_shapes(scene, cyl, rx);
            for lt in &tx_legs {
                for lr in &rx_legs {
                    let vt = lt.virtual_antenna(tx);
                    let vr = lr.virtual_antenna(rx);
                    let reference = reference_point(cyl, &vt, &vr);
                    let Some(leg_t) = self.complete_leg(scene, tx, lt, &reference) else {
                        continue;
                    };
                    let Some(leg_r) = self.complete_leg(scene, rx, lr, &reference) else {
                        continue;
                    };
                    let (transfer, _) =
                        po_scattered_matrix(mesh, &leg_t, &leg_r, &self.carrier, tx_antenna, rx_antenna)?;
                    if transfer.iter().all(|z| z.norm() == 0.0) {
                        continue;
                    }
                    let mut vertices = leg_t.polyline.clone();
                    vertices.extend(leg_r.polyline.iter().rev().skip(1));
                    let mut interactions = leg_t.interactions.clone();
                    interactions.push(InteractionRecord {
                        kind: InteractionKind::Scattering,
                        object_id: cyl.id,
                        element_id: 0,
                        point: reference,
                    });
                    interactions.extend(leg_r.interactions.iter().rev());
                    out.push(RayPath::new(vertices, interactions, transfer, PathTag::Scatter));
                }
            }
        }
        out.sort_by(|a, b| (a.interactions.len(), &a.signature).cmp(&(b.interactions.len(), &b.signature)));
        Ok(out)
    }

    fn leg_shapes(&self, scene: &Scene, cyl: &CylinderScatterer, antenna: &Vec3) -> Vec<LegShape> {
        let mut legs = vec![LegShape::Direct];
        if self.policy != ScatterPolicy::DirectAndReflection {
            return legs;
        }
        let axis = xy(&cyl.base);
        for (i, f) in scene.facades().iter().enumerate() {
            let axis3 = Vec3::new(axis.x, axis.y, 0.0);
            if f.signed_distance(antenna) <= EPS_GEOM || f.signed_distance(&axis3) <= EPS_GEOM {
                continue;
            }
            let image = mirror_point(antenna, &f.origin3(), &f.normal3());
            // horizontal crossing of image -> axis with the facade line
            let r = axis - xy(&image);
            let q = f.end - f.start;
            let denom = cross2(&r, &q);
            if denom.abs() < 1e-15 {
                continue;
            }
            let u = cross2(&(f.start - xy(&image)), &r) / denom;
            if (-1e-9..=1.0 + 1e-9).contains(&u) {
                legs.push(LegShape::Reflected {
                    facade: i,
                    virtual_antenna: image,
                });
            }
        }
        legs
    }

    fn complete_leg(&self, scene: &Scene, antenna: &Vec3, shape: &LegShape, reference: &Vec3) -> Option<ScatterLeg> {
        match *shape {
            LegShape::Direct => scene
                .is_los(antenna, reference)
                .then(|| ScatterLeg::direct(*antenna, *reference)),
            LegShape::Reflected {
                facade,
                virtual_antenna,
            } => {
                let f = &scene.facades()[facade];
                let (t, p) = f.intersect(&virtual_antenna, reference)?;
                if !(t > 1e-12 && t < 1.0 - 1e-12) {
                    return None;
                }
                if !scene.is_los(antenna, &p) || !scene.is_los(&p, reference) {
                    return None;
                }
                let n = f.normal3();
                let k_in = (p - antenna).normalize();
                let k_out = (reference - p).normalize();
                let incidence = k_in.dot(&n).abs().min(1.0).acos();
                let (te, tm) = fresnel_reflection(&f.material, incidence, &self.carrier);
                let dyad: Dyad = reflection_dyad(&k_in, &k_out, &n, te, tm);
                Some(ScatterLeg {
                    polyline: vec![*antenna, p, *reference],
                    interactions: vec![InteractionRecord {
                        kind: InteractionKind::Reflection,
                        object_id: f.object_id,
                        element_id: f.element_id,
                        point: p,
                    }],
                    unobstructed: true,
                    virtual_antenna,
                    normals: vec![n],
                    dyad,
                })
            }
        }
    }
}

/// Point on the scatterer axis where the unfolded source-observer line
/// crosses it, clamped to the cylinder's extent.
fn reference_point(cyl: &CylinderScatterer, src: &Vec3, obs: &Vec3) -> Vec3 {
    let axis = xy(&cyl.base);
    let d1 = (xy(src) - axis).norm();
    let d2 = (xy(obs) - axis).norm();
    let z = if d1 + d2 > 0.0 {
        src.z + (obs.z - src.z) * d1 / (d1 + d2)
    } else {
        0.5 * (src.z + obs.z)
    };
    cyl.axis_point(z.clamp(cyl.base.z, cyl.base.z + cyl.height))
}

/// Scatter paths of every scatterer in `scene` between `tx` and `rx`.
pub fn enumerate_scatter_paths(
    scene: &Scene,
    tx: &Vec3,
    rx: &Vec3,
    carrier: &CarrierConfig,
    tx_antenna: &AntennaConfig,
    rx_antenna: &AntennaConfig,
    policy: ScatterPolicy,
) -> Result<Vec<RayPath>> {
    ScatterModel::new(scene, carrier, policy).paths(scene, tx, rx, tx_antenna, rx_antenna)
}
