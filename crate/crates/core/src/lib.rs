//! Deterministic dynamic radio-channel simulation for links between a fixed
//! base station and an antenna on a moving train.
//!
//! The crate is organised bottom-up:
//!
//! * [`scene`] holds the extruded-building environment, cylindrical
//!   trackside scatterers and the occlusion queries every tracer relies on.
//! * [`em`] provides the electromagnetic primitives (free-space transport,
//!   Fresnel reflection, knife-edge and UTD wedge diffraction) and composes
//!   them into a 2x2 polarimetric transfer matrix per ray path.
//! * [`rt`] traces exact specular paths (image method) and over-rooftop
//!   diffraction at a single transmitter/receiver pair.
//! * [`po`] meshes cylinders into half-wavelength facets and evaluates the
//!   physical-optics scattered field, producing scatter paths that merge with
//!   the specular ones.
//! * [`dynamics`] walks the receiver along its trajectory, computes exact
//!   keyframes, tracks paths between them and interpolates the channel at
//!   the update rate.
//! * [`metrics`] reduces snapshots to narrowband powers and delay, angle and
//!   Doppler statistics, synthesises time-variant impulse responses and
//!   compares interpolated runs against exact ones.

// Negated comparisons are used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod em;
mod error;
pub mod geom;
pub mod metrics;
pub mod po;
pub mod rt;
pub mod scene;

pub use dynamics::{ChannelSnapshot, Keyframe, StreamConfig, StreamOutput, TrackedPath, Trajectory};
pub use em::{AntennaConfig, CarrierConfig, PolMatrix};
pub use error::{Error, Result};
pub use geom::{Vec2, Vec3, EPS_GEOM, SPEED_OF_LIGHT};
pub use metrics::{ErrorReport, Metric, SnapshotMetrics, TvCir};
pub use po::{FacetMesh, ScatterPolicy};
pub use rt::{InteractionKind, InteractionRecord, PathTag, RayPath, Signature, TraceLimits};
pub use scene::{Building, CylinderScatterer, Material, Scene};
