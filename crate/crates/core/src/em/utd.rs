//! Uniform theory of diffraction for straight wedges.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::{fresnel_integrals, fresnel_reflection, CarrierConfig, C64};
use crate::error::{Error, Result};
use crate::scene::Material;

/// Ray-fixed wedge geometry for one diffraction point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeGeometry {
    /// Exterior wedge angle over pi (2 for a half-plane, 1.5 for a right
    /// angle corner).
    pub n: f64,
    /// Angle of the source direction measured from the 0-face through the
    /// exterior, radians.
    pub phi_src: f64,
    /// Angle of the observer direction, same convention.
    pub phi_obs: f64,
    /// Angle between the incident ray and the edge.
    pub beta0: f64,
    /// Distance from the (possibly image) source to the edge.
    pub s_src: f64,
    /// Distance from the edge to the (possibly image) observer.
    pub s_obs: f64,
}

/// UTD transition function `F(x) = 2 j sqrt(x) e^{jx} int_sqrt(x)^inf e^{-j t^2} dt`.
pub fn utd_transition(x: f64) -> C64 {
    if x <= 0.0 {
        return C64::new(0.0, 0.0);
    }
    let u = (2.0 * x / PI).sqrt();
    let (c, s) = fresnel_integrals(u);
    let tail = C64::new(0.5 - c, -(0.5 - s)) * (PI / 2.0).sqrt();
    C64::new(0.0, 2.0 * x.sqrt()) * C64::from_polar(1.0, x) * tail
}

/// `cot((pi + sign * beta) / 2n) * F(k L a^sign(beta))`, with the
/// boundary limit used when the cotangent is singular.
fn boundary_term(sign: f64, beta: f64, n: f64, kl: f64) -> C64 {
    let arg = (PI + sign * beta) / (2.0 * n);
    let delta = arg - (arg / PI).round() * PI;
    if delta.abs() < 1e-9 {
        let eps = 2.0 * n * delta;
        let sgn = if eps >= 0.0 { 1.0 } else { -1.0 };
        let e4 = C64::from_polar(1.0, FRAC_PI_4);
        return (C64::from((2.0 * PI * kl).sqrt() * sgn) - e4 * (2.0 * kl * eps)) * e4 * n;
    }
    let big_n = ((beta + sign * PI) / (2.0 * PI * n)).round();
    let a = 2.0 * ((2.0 * PI * n * big_n - beta) / 2.0).cos().powi(2);
    utd_transition(kl * a) * (1.0 / delta.tan())
}

/// Soft and hard diffraction coefficients `(D_s, D_h)` of a wedge whose
/// faces are `face0` and `face_n`.
///
/// Kouyoumjian-Pathak coefficients with the reflection-boundary terms
/// weighted by each face's Fresnel coefficient (soft uses TE, hard uses TM).
/// The face coefficients are evaluated at the grazing angle
/// `(pi - |phi - phi'|) / 2`, which is symmetric in source and observer.
pub fn utd_vertical_edge(
    geometry: &WedgeGeometry,
    carrier: &CarrierConfig,
    face0: &Material,
    face_n: &Material,
) -> Result<(C64, C64)> {
    let g = geometry;
    if !(g.s_src > 0.0) || !(g.s_obs > 0.0) {
        return Err(Error::domain("source or observer lies on the diffracting edge"));
    }
    let sin_b = g.beta0.sin();
    if sin_b.abs() < 1e-12 {
        return Err(Error::domain("ray is parallel to the diffracting edge"));
    }
    if !(g.n >= 1.0 && g.n <= 2.0) {
        return Err(Error::domain(format!("wedge index n = {} outside [1, 2]", g.n)));
    }
    let k = carrier.wavenumber();
    let l = g.s_src * g.s_obs * sin_b * sin_b / (g.s_src + g.s_obs);
    let kl = k * l;
    let diff = g.phi_obs - g.phi_src;
    let sum = g.phi_obs + g.phi_src;
    let t1 = boundary_term(1.0, diff, g.n, kl);
    let t2 = boundary_term(-1.0, diff, g.n, kl);
    let t3 = boundary_term(1.0, sum, g.n, kl);
    let t4 = boundary_term(-1.0, sum, g.n, kl);

    let grazing = ((PI - diff.abs()) / 2.0).clamp(0.0, FRAC_PI_2);
    let incidence = FRAC_PI_2 - grazing;
    let (r0_te, r0_tm) = fresnel_reflection(face0, incidence, carrier);
    let (rn_te, rn_tm) = fresnel_reflection(face_n, incidence, carrier);

    let pref = -C64::from_polar(1.0, -FRAC_PI_4) / (2.0 * g.n * (2.0 * PI * k).sqrt() * sin_b);
    let ds = pref * (t1 + t2 + rn_te * t3 + r0_te * t4);
    let dh = pref * (t1 + t2 + rn_tm * t3 + r0_tm * t4);
    Ok((ds, dh))
}
