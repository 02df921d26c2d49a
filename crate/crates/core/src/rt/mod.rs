//! Exact specular ray tracing between one transmitter and one receiver.

mod rooftop;
mod specular;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::em::{CarrierConfig, PolMatrix};
use crate::geom::{az_el, polyline_length, Vec3, SPEED_OF_LIGHT};

pub use rooftop::trace_rooftop;
pub use specular::{trace_specular, Tracer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InteractionKind {
    Reflection,
    VerticalEdgeDiffraction,
    RooftopDiffraction,
    Scattering,
}

impl InteractionKind {
    fn code(self) -> char {
        match self {
            InteractionKind::Reflection => 'R',
            InteractionKind::VerticalEdgeDiffraction => 'D',
            InteractionKind::RooftopDiffraction => 'T',
            InteractionKind::Scattering => 'S',
        }
    }
}

/// One interaction along a path: what happened, on which element, where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionRecord {
    pub kind: InteractionKind,
    pub object_id: u32,
    pub element_id: u32,
    pub point: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignatureEntry {
    pub kind: InteractionKind,
    pub object_id: u32,
    pub element_id: u32,
}

/// Ordered interaction sequence identifying a path across receiver
/// positions. Empty for line of sight.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature(pub Vec<SignatureEntry>);

impl Signature {
    pub fn of(interactions: &[InteractionRecord]) -> Signature {
        Signature(
            interactions
                .iter()
                .map(|r| SignatureEntry {
                    kind: r.kind,
                    object_id: r.object_id,
                    element_id: r.element_id,
                })
                .collect(),
        )
    }

    pub fn is_los(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Signature {
        Signature(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("LOS");
        }
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{}({}:{})", e.kind.code(), e.object_id, e.element_id)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathTag {
    Specular,
    Scatter,
}

impl PathTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PathTag::Specular => "specular",
            PathTag::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    pub signature: Signature,
    pub interactions: Vec<InteractionRecord>,
    /// Polyline tx, interaction points..., rx.
    pub vertices: Vec<Vec3>,
    pub length: f64,
    pub delay: f64,
    /// Departure direction at the transmitter, (azimuth, elevation) rad.
    pub aod: (f64, f64),
    /// Arrival direction at the receiver, pointing back along the incoming
    /// ray, (azimuth, elevation) rad.
    pub aoa: (f64, f64),
    pub transfer: PolMatrix,
    pub doppler_hz: f64,
    pub tag: PathTag,
}

impl RayPath {
    /// Builds a path from its geometry; delay and angles follow from the
    /// polyline, Doppler starts at zero.
    pub fn new(
        vertices: Vec<Vec3>,
        interactions: Vec<InteractionRecord>,
        transfer: PolMatrix,
        tag: PathTag,
    ) -> RayPath {
        let length = polyline_length(&vertices);
        let (aod, aoa) = end_angles(&vertices);
        RayPath {
            signature: Signature::of(&interactions),
            interactions,
            vertices,
            length,
            delay: length / SPEED_OF_LIGHT,
            aod,
            aoa,
            transfer,
            doppler_hz: 0.0,
            tag,
        }
    }

    pub fn tx(&self) -> &Vec3 {
        &self.vertices[0]
    }

    pub fn rx(&self) -> &Vec3 {
        &self.vertices[self.vertices.len() - 1]
    }

    /// Sum of squared transfer magnitudes over all four polarization pairs.
    pub fn power(&self) -> f64 {
        self.transfer.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Doppler shift of this path for a receiver moving at `velocity` with
    /// everything else static.
    pub fn set_rx_velocity(&mut self, velocity: &Vec3, carrier: &CarrierConfig) {
        let n = self.vertices.len();
        let last = (self.vertices[n - 1] - self.vertices[n - 2]).normalize();
        self.doppler_hz = -carrier.frequency() / SPEED_OF_LIGHT * last.dot(velocity);
    }
}

/// Departure and arrival (azimuth, elevation) of a polyline.
pub fn end_angles(vertices: &[Vec3]) -> ((f64, f64), (f64, f64)) {
    let n = vertices.len();
    (
        az_el(&(vertices[1] - vertices[0])),
        az_el(&(vertices[n - 2] - vertices[n - 1])),
    )
}

/// Interaction limits for one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceLimits {
    pub max_reflections: u32,
    pub max_vertical_diffractions: u32,
    /// Over-rooftop paths when line of sight is blocked (any number of
    /// roof edges).
    pub rooftop: bool,
    /// Paths whose strongest transfer entry is weaker than this loss are
    /// dropped.
    pub loss_floor_db: f64,
}

impl Default for TraceLimits {
    fn default() -> Self {
        TraceLimits {
            max_reflections: 2,
            max_vertical_diffractions: 1,
            rooftop: true,
            loss_floor_db: 250.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_text() {
        let rec = |kind, o, e| InteractionRecord {
            kind,
            object_id: o,
            element_id: e,
            point: Vec3::zeros(),
        };
        assert_eq!(Signature::default().to_string(), "LOS");
        let s = Signature::of(&[
            rec(InteractionKind::Reflection, 3, 1),
            rec(InteractionKind::VerticalEdgeDiffraction, 4, 7),
        ]);
        assert_eq!(s.to_string(), "R(3:1)-D(4:7)");
        assert_eq!(s.reversed().to_string(), "D(4:7)-R(3:1)");
    }

    #[test]
    fn angles_and_delay_follow_geometry() {
        let v = vec![
            Vec3::new(0.0, 0.0, 10.0),
            Vec3::new(10.0, 10.0, 10.0),
            Vec3::new(10.0, 20.0, 0.0),
        ];
        let p = RayPath::new(v, vec![], PolMatrix::zeros(), PathTag::Specular);
        assert!((p.aod.0 - std::f64::consts::FRAC_PI_4).abs() < 1e-15 && p.aod.1 == 0.0);
        assert!((p.aoa.0 + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((p.aoa.1 - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((p.delay - p.length / SPEED_OF_LIGHT).abs() < 1e-20);
    }

    #[test]
    fn head_on_doppler() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        let mut p = RayPath::new(
            vec![Vec3::new(0.0, 0.0, 5.0), Vec3::new(500.0, 0.0, 5.0)],
            vec![],
            PolMatrix::zeros(),
            PathTag::Specular,
        );
        p.set_rx_velocity(&Vec3::new(-100.0 / 3.6, 0.0, 0.0), &c);
        assert!((p.doppler_hz - 176.05).abs() < 0.05);
    }
}
