//! Facet meshes for physical-optics integration.

use std::f64::consts::PI;

use crate::em::CarrierConfig;
use crate::geom::{Vec2, Vec3};
use crate::scene::CylinderScatterer;

/// Flat rectangular facet with edge vectors `a` and `b` centred on `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub center: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    pub a: Vec3,
    pub b: Vec3,
    pub area: f64,
}

/// Vertical cylinder enclosing a mesh; sources inside it are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingCylinder {
    pub axis: Vec2,
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl BoundingCylinder {
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = Vec2::new(p.x, p.y) - self.axis;
        d.norm() < self.radius && p.z >= self.z_min && p.z <= self.z_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetMesh {
    pub scatterer_id: u32,
    pub facets: Vec<Facet>,
    pub bounds: Option<BoundingCylinder>,
}

impl FacetMesh {
    /// Lateral surface of a cylinder tiled with facets no larger than
    /// `facet_size` in either direction. Facet centres lie on the surface.
    pub fn cylinder(cyl: &CylinderScatterer, facet_size: f64) -> FacetMesh {
        let n_phi = ((2.0 * PI * cyl.radius / facet_size).ceil() as usize).max(3);
        let n_z = ((cyl.height / facet_size).ceil() as usize).max(1);
        let width = 2.0 * PI * cyl.radius / n_phi as f64;
        let dz = cyl.height / n_z as f64;
        let mut facets = Vec::with_capacity(n_phi * n_z);
        for i in 0..n_phi {
            let phi = (i as f64 + 0.5) * 2.0 * PI / n_phi as f64;
            let normal = Vec3::new(phi.cos(), phi.sin(), 0.0);
            let tangent = Vec3::new(-phi.sin(), phi.cos(), 0.0);
            for j in 0..n_z {
                let z = cyl.base.z + (j as f64 + 0.5) * dz;
                facets.push(Facet {
                    center: Vec3::new(cyl.base.x, cyl.base.y, z) + normal * cyl.radius,
                    normal,
                    a: tangent * width,
                    b: Vec3::new(0.0, 0.0, dz),
                    area: width * dz,
                });
            }
        }
        FacetMesh {
            scatterer_id: cyl.id,
            facets,
            bounds: Some(BoundingCylinder {
                axis: Vec2::new(cyl.base.x, cyl.base.y),
                radius: cyl.radius,
                z_min: cyl.base.z,
                z_max: cyl.base.z + cyl.height,
            }),
        }
    }

    /// Flat rectangular plate of `width` along `u` and `height` along `v`
    /// (orthonormal), facing `u x v`.
    pub fn plate(id: u32, center: Vec3, u: Vec3, v: Vec3, width: f64, height: f64, facet_size: f64) -> FacetMesh {
        let (u, v) = (u.normalize(), v.normalize());
        let normal = u.cross(&v).normalize();
        let nu = (width / facet_size).ceil() as usize;
        let nv = (height / facet_size).ceil() as usize;
        let (du, dv) = (width / nu as f64, height / nv as f64);
        let mut facets = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let offset = u * ((i as f64 + 0.5) * du - width / 2.0) + v * ((j as f64 + 0.5) * dv - height / 2.0);
                facets.push(Facet {
                    center: center + offset,
                    normal,
                    a: u * du,
                    b: v * dv,
                    area: du * dv,
                });
            }
        }
        FacetMesh {
            scatterer_id: id,
            facets,
            bounds: None,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    pub fn max_edge(&self) -> f64 {
        self.facets
            .iter()
            .map(|f| f.a.norm().max(f.b.norm()))
            .fold(0.0, f64::max)
    }

    /// Number of facets lit from `source` and visible from `observer`.
    pub fn active_facets(&self, source: &Vec3, observer: &Vec3) -> usize {
        self.facets
            .iter()
            .filter(|f| (f.center - source).dot(&f.normal) < 0.0 && (observer - f.center).dot(&f.normal) > 0.0)
            .count()
    }
}

/// Half-wavelength mesh of a cylinder's lateral surface.
pub fn mesh_cylinder(cyl: &CylinderScatterer, carrier: &CarrierConfig) -> FacetMesh {
    FacetMesh::cylinder(cyl, carrier.wavelength() / 2.0)
}
