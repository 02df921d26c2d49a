//! Electromagnetic primitives and per-path polarimetric transfer matrices.
//!
//! Transfer matrices are amplitude gains between isotropic (0 dBi) ports:
//! a line-of-sight path of length `d` carries `lambda / (4 pi d)` on its
//! co-polar entries. Rows index the receive polarization and columns the
//! transmit polarization, both in the order (V, H). Each antenna uses the
//! spherical frame centred on itself, so for two antennas facing each other
//! the H vectors are antiparallel and a line-of-sight HH entry carries a
//! sign flip relative to VV.

mod compose;
mod fresnel;
mod utd;

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Vec3, SPEED_OF_LIGHT};

pub use compose::compose_path_matrix;
pub use fresnel::{fresnel_integrals, fresnel_reflection, knife_edge_diffraction, knife_edge_loss_db};
pub use utd::{utd_transition, utd_vertical_edge, WedgeGeometry};

pub type C64 = Complex64;
/// Complex field vector.
pub type CVec3 = Vector3<C64>;
/// Complex 3x3 dyad acting on field vectors.
pub type Dyad = Matrix3<C64>;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// 2x2 complex transfer matrix indexed `[(rx_pol, tx_pol)]`.
pub type PolMatrix = Matrix2<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    V,
    H,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::V => 0,
            Pol::H => 1,
        }
    }
}

/// Ordered (transmit, receive) polarization pair; `VH` transmits V and
/// receives H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolPair {
    pub tx: Pol,
    pub rx: Pol,
}

impl PolPair {
    pub const VV: PolPair = PolPair { tx: Pol::V, rx: Pol::V };
    pub const VH: PolPair = PolPair { tx: Pol::V, rx: Pol::H };
    pub const HV: PolPair = PolPair { tx: Pol::H, rx: Pol::V };
    pub const HH: PolPair = PolPair { tx: Pol::H, rx: Pol::H };

    pub fn entry(self, m: &PolMatrix) -> C64 {
        m[(self.rx.index(), self.tx.index())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig {
    frequency: f64,
}

impl CarrierConfig {
    pub fn new(frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {frequency_hz}"
            )));
        }
        Ok(CarrierConfig {
            frequency: frequency_hz,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }
}

/// Dual-polar V/H omnidirectional antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaConfig {
    pub gain_dbi: f64,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig { gain_dbi: 0.0 }
    }
}

impl AntennaConfig {
    pub fn amplitude(&self) -> f64 {
        10f64.powf(self.gain_dbi / 20.0)
    }

    /// Field polarization vectors (V = theta-hat, H = phi-hat) for a ray
    /// leaving the antenna along `dir`.
    pub fn basis(&self, dir: &Vec3) -> [Vec3; 2] {
        spherical_basis(dir)
    }
}

/// Spherical unit vectors (theta-hat, phi-hat) at direction `dir`. Along
/// the vertical axis phi = 0 is used.
pub fn spherical_basis(dir: &Vec3) -> [Vec3; 2] {
    let d = dir.normalize();
    let rho = (d.x * d.x + d.y * d.y).sqrt();
    let (cp, sp) = if rho < 1e-12 {
        (1.0, 0.0)
    } else {
        (d.x / rho, d.y / rho)
    };
    let theta = Vec3::new(d.z * cp, d.z * sp, -rho);
    let phi = Vec3::new(-sp, cp, 0.0);
    [theta, phi]
}

/// Free-space transport between isotropic ports:
/// `lambda / (4 pi d) * exp(-j 2 pi d / lambda)`.
pub fn free_space_transport(distance: f64, carrier: &CarrierConfig) -> Result<C64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::domain(format!(
            "free-space distance must be positive, got {distance}"
        )));
    }
    let lambda = carrier.wavelength();
    Ok(C64::from_polar(
        lambda / (4.0 * PI * distance),
        -2.0 * PI * distance / lambda,
    ))
}

pub(crate) fn to_cvec(v: &Vec3) -> CVec3 {
    CVec3::new(C64::from(v.x), C64::from(v.y), C64::from(v.z))
}

pub(crate) fn outer(a: &Vec3, b: &Vec3) -> Dyad {
    to_cvec(a) * to_cvec(b).transpose()
}

/// Bilinear (non-conjugating) product of a real vector with a complex one.
pub(crate) fn dot_rc(a: &Vec3, b: &CVec3) -> C64 {
    b[0] * a.x + b[1] * a.y + b[2] * a.z
}

/// Reflection dyad `G_te e_perp e_perp + G_tm e_par_out e_par_in` for a ray
/// going from `k_in` to `k_out` off a plane with unit normal `normal`.
pub(crate) fn reflection_dyad(k_in: &Vec3, k_out: &Vec3, normal: &Vec3, g_te: C64, g_tm: C64) -> Dyad {
    let mut perp = k_in.cross(normal);
    if perp.norm() < 1e-12 {
        perp = Vec3::z().cross(normal);
        if perp.norm() < 1e-12 {
            perp = Vec3::x();
        }
    }
    let perp = perp.normalize();
    let par_in = perp.cross(k_in);
    let par_out = perp.cross(k_out);
    outer(&perp, &perp) * g_te + outer(&par_out, &par_in) * g_tm
}

/// Bend dyad for a ray turning from `k_in` to `k_out` with the same scalar
/// coefficient for both transverse components.
pub(crate) fn bend_dyad(k_in: &Vec3, k_out: &Vec3, coeff: C64) -> Dyad {
    let mut perp = k_in.cross(k_out);
    if perp.norm() < 1e-12 {
        perp = Vec3::z().cross(k_in);
        if perp.norm() < 1e-12 {
            perp = Vec3::x();
        }
    }
    let perp = perp.normalize();
    let par_in = perp.cross(k_in);
    let par_out = perp.cross(k_out);
    (outer(&perp, &perp) + outer(&par_out, &par_in)) * coeff
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_identity() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        assert_eq!(c.wavelength() * c.frequency(), SPEED_OF_LIGHT);
        assert!((c.wavelength() - 0.15779).abs() < 1e-5);
        assert!(CarrierConfig::new(0.0).is_err());
    }

    #[test]
    fn fspl_at_one_meter() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        let g = free_space_transport(1.0, &c).unwrap();
        // 20 log10(4 pi / lambda) with lambda = 0.157785 m
        let expected = 20.0 * (4.0 * PI / c.wavelength()).log10();
        assert!((-20.0 * g.norm().log10() - expected).abs() < 1e-12);
        assert!((expected - 38.0).abs() < 0.05);
    }

    #[test]
    fn full_cycle_phase_and_inverse_distance() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        let l = c.wavelength();
        let g = free_space_transport(l, &c).unwrap();
        let unit = g / g.norm();
        assert!((unit - C64::new(1.0, 0.0)).norm() < 1e-12);
        let r = free_space_transport(20.0, &c).unwrap().norm() / free_space_transport(10.0, &c).unwrap().norm();
        assert!((r - 0.5).abs() < 1e-15);
        assert!(free_space_transport(0.0, &c).is_err());
        assert!(free_space_transport(-1.0, &c).is_err());
    }

    #[test]
    fn basis_is_orthonormal() {
        for d in [
            Vec3::new(1.0, 2.0, 0.3),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(-1.0, 0.0, -2.0),
        ] {
            let [t, p] = spherical_basis(&d);
            let dn = d.normalize();
            assert!((t.norm() - 1.0).abs() < 1e-12 && (p.norm() - 1.0).abs() < 1e-12);
            assert!(t.dot(&p).abs() < 1e-12 && t.dot(&dn).abs() < 1e-12 && p.dot(&dn).abs() < 1e-12);
        }
    }
}
