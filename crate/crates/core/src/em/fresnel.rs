use std::f64::consts::{FRAC_PI_2, PI};

use super::{CarrierConfig, C64, EPS0};
use crate::scene::Material;

/// Reflection coefficients `(gamma_te, gamma_tm)` of a half-space at
/// `incidence` radians from the surface normal.
///
/// The lossy permittivity is `eps_r - j sigma / (2 pi f eps0)`. TE is the
/// field perpendicular to the plane of incidence. With the parallel basis
/// `e_par = e_perp x k` the PEC limit is `(-1, +1)`.
pub fn fresnel_reflection(material: &Material, incidence: f64, carrier: &CarrierConfig) -> (C64, C64) {
    if material.pec {
        return (C64::new(-1.0, 0.0), C64::new(1.0, 0.0));
    }
    let omega = 2.0 * PI * carrier.frequency();
    let eps = C64::new(material.eps_r, -material.sigma / (omega * EPS0));
    let theta = incidence.clamp(0.0, FRAC_PI_2);
    let (s, c) = theta.sin_cos();
    let root = (eps - s * s).sqrt();
    let te = (c - root) / (c + root);
    let tm = (eps * c - root) / (eps * c + root);
    (te, tm)
}

/// Normalized Fresnel integrals `C(x) = int_0^x cos(pi t^2 / 2) dt` and
/// `S(x) = int_0^x sin(pi t^2 / 2) dt`.
///
/// Power series below |x| = 1.5, modified-Lentz continued fraction of the
/// complementary error function above.
pub fn fresnel_integrals(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const MAXIT: usize = 1000;
    let ax = x.abs();
    let (c, s) = if ax < 1e-150 {
        (ax, 0.0)
    } else if ax <= 1.5 {
        let fact = FRAC_PI_2 * ax * ax;
        let (mut sum, mut sums, mut sumc) = (0.0, 0.0, ax);
        let mut sign = 1.0;
        let mut term = ax;
        let mut odd = true;
        let mut n = 3.0;
        for k in 1..=MAXIT {
            term *= fact / k as f64;
            sum += sign * term / n;
            let test = sum.abs() * EPS;
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if term < test {
                break;
            }
            odd = !odd;
            n += 2.0;
        }
        (sumc, sums)
    } else {
        let pix2 = PI * ax * ax;
        let mut b = C64::new(1.0, -pix2);
        let mut cc = C64::new(1e300, 0.0);
        let mut d = C64::new(1.0, 0.0) / b;
        let mut h = d;
        let mut n = -1.0;
        for _ in 2..=MAXIT {
            n += 2.0;
            let a = -n * (n + 1.0);
            b += C64::new(4.0, 0.0);
            d = C64::new(1.0, 0.0) / (d * a + b);
            cc = b + C64::new(a, 0.0) / cc;
            let del = cc * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < EPS {
                break;
            }
        }
        h *= C64::new(ax, -ax);
        let cs = C64::new(0.5, 0.5) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, 0.5 * pix2) * h);
        (cs.re, cs.im)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// Complex knife-edge field ratio for Fresnel-Kirchhoff parameter `v`:
/// `(1 + j)/2 * int_v^inf exp(-j pi t^2 / 2) dt`.
pub fn knife_edge_diffraction(v: f64) -> C64 {
    let (c, s) = fresnel_integrals(v);
    C64::new(0.5, 0.5) * C64::new(0.5 - c, -(0.5 - s))
}

/// Knife-edge loss in dB (positive means attenuation).
pub fn knife_edge_loss_db(v: f64) -> f64 {
    -20.0 * knife_edge_diffraction(v).norm().log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature, independent of the series/CF code.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn fresnel_integrals_match_quadrature() {
        for &x in &[0.1, 0.7, 1.2, 1.5, 1.6, 2.5, 4.0, -1.3, -3.2] {
            let (c, s) = fresnel_integrals(x);
            let cq = simpson(|t| (FRAC_PI_2 * t * t).cos(), 0.0, x, 20_000);
            let sq = simpson(|t| (FRAC_PI_2 * t * t).sin(), 0.0, x, 20_000);
            assert!((c - cq).abs() < 1e-9, "C({x}) = {c} vs {cq}");
            assert!((s - sq).abs() < 1e-9, "S({x}) = {s} vs {sq}");
        }
        let (c, s) = fresnel_integrals(60.0);
        assert!((c - 0.5).abs() < 0.01 && (s - 0.5).abs() < 0.01);
    }

    #[test]
    fn knife_edge_shadow_boundary() {
        let loss = knife_edge_loss_db(0.0);
        assert!((loss - 6.0206).abs() < 0.01, "{loss}");
        assert!((knife_edge_diffraction(0.0).norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn knife_edge_deep_lit_region() {
        assert!(knife_edge_loss_db(-40.0).abs() < 0.1);
        assert!(knife_edge_loss_db(-400.0).abs() < 0.01);
    }

    #[test]
    fn knife_edge_matches_brute_force_at_v1() {
        // |(1+j)/2 * int_1^inf e^{-j pi t^2/2} dt| with the tail split at a
        // large T and the remainder taken from C, S -> 1/2
        let t_end = 1.0;
        let re = simpson(|t| (FRAC_PI_2 * t * t).cos(), 0.0, t_end, 40_000);
        let im = simpson(|t| (FRAC_PI_2 * t * t).sin(), 0.0, t_end, 40_000);
        let tail = C64::new(0.5 - re, -(0.5 - im));
        let brute = -20.0 * (C64::new(0.5, 0.5) * tail).norm().log10();
        let loss = knife_edge_loss_db(1.0);
        assert!((loss - brute).abs() < 0.2, "{loss} vs {brute}");
        assert!((loss - 13.86).abs() < 0.05, "{loss}");
    }

    #[test]
    fn pec_limit() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        for a in [0.0, 0.4, 1.2, 1.5] {
            let (te, tm) = fresnel_reflection(&Material::pec(), a, &c);
            assert_eq!(te, C64::new(-1.0, 0.0));
            assert_eq!(tm, C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn normal_incidence_dielectric() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        let (te, tm) = fresnel_reflection(&Material::dielectric(5.0, 0.0), 0.0, &c);
        let expected = (5f64.sqrt() - 1.0) / (5f64.sqrt() + 1.0);
        assert!((te.norm() - expected).abs() < 1e-12);
        assert!((te + tm).norm() < 1e-12);
        assert!((expected - 0.382).abs() < 1e-3);
    }

    #[test]
    fn grazing_incidence() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        let (te, _) = fresnel_reflection(&Material::concrete(), FRAC_PI_2 - 1e-6, &c);
        assert!((te + 1.0).norm() < 1e-4);
    }

    #[test]
    fn passive_materials_do_not_amplify() {
        let c = CarrierConfig::new(1.9e9).unwrap();
        for eps in [1.0, 2.0, 5.0, 15.0, 80.0] {
            for sigma in [0.0, 0.01, 0.1, 1.0, 10.0] {
                for i in 0..=50 {
                    let a = i as f64 / 50.0 * (FRAC_PI_2 - 1e-9);
                    let (te, tm) = fresnel_reflection(&Material::dielectric(eps, sigma), a, &c);
                    assert!(te.norm() <= 1.0 + 1e-12 && tm.norm() <= 1.0 + 1e-12);
                }
            }
        }
    }
}
