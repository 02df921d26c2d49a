//! Physical-optics scattering from trackside cylinders.
//!
//! Each cylinder is meshed into half-wavelength facets. A facet that is lit
//! from the (virtual) source and visible from the (virtual) observer
//! contributes the PO field of a flat PEC plate with spherical spreading
//! measured from its own centre, so no far-field assumption is made at the
//! level of the whole cylinder.

mod mesh;
mod paths;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::em::{spherical_basis, to_cvec, AntennaConfig, CVec3, CarrierConfig, Dyad, PolMatrix, C64};
use crate::error::{Error, Result};
use crate::geom::{mirror_dir, polyline_length, Vec3, SPEED_OF_LIGHT};
use crate::rt::InteractionRecord;

pub use mesh::{mesh_cylinder, BoundingCylinder, Facet, FacetMesh};
pub use paths::{enumerate_scatter_paths, ScatterModel};

/// Which antenna-to-scatterer legs are considered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatterPolicy {
    /// No scatter paths.
    Off,
    /// Line-of-sight legs only.
    #[default]
    Direct,
    /// Line-of-sight legs and legs with one facade reflection.
    DirectAndReflection,
}

/// Propagation leg between an antenna and a scatterer's reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterLeg {
    /// Antenna, reflection points..., scatterer reference point.
    pub polyline: Vec<Vec3>,
    /// Reflections in order from the antenna.
    pub interactions: Vec<InteractionRecord>,
    pub unobstructed: bool,
    /// The antenna mirrored through every reflection of the leg.
    pub virtual_antenna: Vec3,
    /// Unit facade normals of the reflections, in order from the antenna.
    pub normals: Vec<Vec3>,
    /// Product of reflection dyads along the leg (antenna to scatterer).
    pub dyad: Dyad,
}

impl ScatterLeg {
    /// Unobstructed leg without reflections.
    pub fn direct(antenna: Vec3, reference: Vec3) -> ScatterLeg {
        ScatterLeg {
            polyline: vec![antenna, reference],
            interactions: Vec::new(),
            unobstructed: true,
            virtual_antenna: antenna,
            normals: Vec::new(),
            dyad: Dyad::identity(),
        }
    }

    pub fn antenna(&self) -> &Vec3 {
        &self.polyline[0]
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.polyline)
    }

    /// Direction leaving the real antenna that reaches `target` along the
    /// unfolded leg.
    fn departure(&self, target: &Vec3) -> Vec3 {
        let mut d = (target - self.virtual_antenna).normalize();
        for n in self.normals.iter().rev() {
            d = mirror_dir(&d, n);
        }
        d
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Polarimetric contribution of one scatterer for the given legs and the
/// effective delay (sum of leg lengths over c).
///
/// `incident` runs from the transmitter to the scatterer and `scattered`
/// from the receiver to the scatterer; the scattered field travels it in
/// reverse.
pub fn po_scattered_matrix(
    mesh: &FacetMesh,
    incident: &ScatterLeg,
    scattered: &ScatterLeg,
    carrier: &CarrierConfig,
    tx_antenna: &AntennaConfig,
    rx_antenna: &AntennaConfig,
) -> Result<(PolMatrix, f64)> {
    if let Some(b) = &mesh.bounds {
        for p in [&incident.virtual_antenna, &scattered.virtual_antenna] {
            if b.contains(p) {
                return Err(Error::domain(format!(
                    "antenna at {:?} is inside scatterer {}",
                    p.as_slice(),
                    mesh.scatterer_id
                )));
            }
        }
    }
    let k = carrier.wavenumber();
    let lambda = carrier.wavelength();
    let src = incident.virtual_antenna;
    let obs = scattered.virtual_antenna;
    let mut sum = PolMatrix::zeros();
    for f in &mesh.facets {
        let di = f.center - src;
        let ri = di.norm();
        let ki = di / ri;
        let cos_i = ki.dot(&f.normal);
        if cos_i >= 0.0 {
            continue;
        }
        let ds = obs - f.center;
        let rs = ds.norm();
        let s = ds / rs;
        let cos_s = s.dot(&f.normal);
        if cos_s <= 0.0 {
            continue;
        }
        let q = ki - s;
        let shape = sinc(0.5 * k * q.dot(&f.a)) * sinc(0.5 * k * q.dot(&f.b));
        // symmetrised PEC surface-current operator: reciprocal in (ki, s)
        let op = (ki * f.normal.transpose() - f.normal * s.transpose()
            + nalgebra::Matrix3::identity() * (cos_s - cos_i))
            * 0.5;
        let amp = C64::from_polar(f.area / lambda * shape / (ri * rs), -k * (ri + rs)) * C64::new(0.0, -1.0);

        let tb = spherical_basis(&incident.departure(&f.center));
        let rb = spherical_basis(&scattered.departure(&f.center));
        let ut: [CVec3; 2] = [incident.dyad * to_cvec(&tb[0]), incident.dyad * to_cvec(&tb[1])];
        let ur: [CVec3; 2] = [scattered.dyad * to_cvec(&rb[0]), scattered.dyad * to_cvec(&rb[1])];
        let opc = op.map(C64::from);
        for (c, u) in ut.iter().enumerate() {
            let field = opc * u;
            for (r, v) in ur.iter().enumerate() {
                sum[(r, c)] += amp * v.dot(&field);
            }
        }
    }
    let scale = lambda / (4.0 * PI) * tx_antenna.amplitude() * rx_antenna.amplitude();
    let delay = (incident.length() + scattered.length()) / SPEED_OF_LIGHT;
    Ok((sum * C64::from(scale), delay))
}

/// Bistatic RCS equivalent to a transfer entry `t` for source and observer
/// at distances `r_src` and `r_obs` from the scatterer.
pub fn equivalent_rcs(t: C64, r_src: f64, r_obs: f64, carrier: &CarrierConfig) -> f64 {
    let a = t.norm() * 4.0 * PI / carrier.wavelength() * r_src * r_obs;
    4.0 * PI * a * a
}
