//! Extruded-polygon urban scene, trackside cylinders and occlusion queries.
//!
//! Every building with `n` footprint vertices exposes stable element ids:
//!
//! | element | ids |
//! |---------|-----|
//! | facade from vertex `i` to `i+1` | `i` (0..n) |
//! | rooftop polygon | `n` |
//! | vertical edge at vertex `i` | `n + 1 + i` |
//!
//! Rooftop (over-the-top) diffraction records reuse the facade id whose top
//! edge is crossed. The ground is the infinite plane `z = 0`.

mod file;
mod grid;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::{cross2, point_in_polygon, segments_intersect, xy, Vec2, Vec3, EPS_GEOM};

pub use file::load_scene;
use grid::Grid;

/// Object id reported for ground hits.
pub const GROUND_OBJECT_ID: u32 = u32::MAX;

/// Grid cell size used for the facade index, meters.
pub const GRID_CELL: f64 = 25.0;

/// Distances closer than this are treated as the same hit and resolved by
/// element id.
const TIE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Relative permittivity, >= 1.
    pub eps_r: f64,
    /// Conductivity, S/m.
    pub sigma: f64,
    /// Perfect electric conductor: |reflection| = 1 for both polarizations.
    pub pec: bool,
}

impl Material {
    pub const fn dielectric(eps_r: f64, sigma: f64) -> Self {
        Material {
            eps_r,
            sigma,
            pec: false,
        }
    }

    pub const fn pec() -> Self {
        Material {
            eps_r: 1.0,
            sigma: 0.0,
            pec: true,
        }
    }

    /// Default facade material (concrete-class).
    pub const fn concrete() -> Self {
        Material::dielectric(5.0, 0.1)
    }

    /// Default ground material (medium dry ground).
    pub const fn ground() -> Self {
        Material::dielectric(15.0, 0.005)
    }

    fn validate(&self, location: &str) -> Result<()> {
        if !self.pec && (!self.eps_r.is_finite() || self.eps_r < 1.0) {
            return Err(Error::scene(location, "relative permittivity must be >= 1"));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::scene(location, "conductivity must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub id: u32,
    /// Counterclockwise simple polygon, meters. Clockwise input is reversed
    /// on construction.
    pub footprint: Vec<Vec2>,
    pub height: f64,
    pub material: Material,
}

impl Building {
    pub fn new(id: u32, footprint: Vec<Vec2>, height: f64, material: Material) -> Self {
        Building {
            id,
            footprint,
            height,
            material,
        }
    }

    /// Axis-aligned box building.
    pub fn rect(id: u32, min: [f64; 2], max: [f64; 2], height: f64, material: Material) -> Self {
        let footprint = vec![
            Vec2::new(min[0], min[1]),
            Vec2::new(max[0], min[1]),
            Vec2::new(max[0], max[1]),
            Vec2::new(min[0], max[1]),
        ];
        Building::new(id, footprint, height, material)
    }

    pub fn rooftop_element(&self) -> u32 {
        self.footprint.len() as u32
    }

    pub fn edge_element(&self, vertex: usize) -> u32 {
        (self.footprint.len() + 1 + vertex) as u32
    }

    /// True if `p` lies strictly inside the extruded volume.
    pub fn contains(&self, p: &Vec3) -> bool {
        p.z > 0.0 && p.z < self.height && point_in_polygon(&xy(p), &self.footprint)
    }

    fn signed_area(poly: &[Vec2]) -> f64 {
        let n = poly.len();
        (0..n).map(|i| cross2(&poly[i], &poly[(i + 1) % n])).sum::<f64>() * 0.5
    }

    /// Checks shape invariants and normalizes orientation to counterclockwise.
    fn normalize(&mut self, location: &str) -> Result<()> {
        if self.footprint.len() >= 2 && self.footprint.first() == self.footprint.last() {
            self.footprint.pop();
        }
        let n = self.footprint.len();
        if n < 3 {
            return Err(Error::scene(
                location,
                format!("footprint has {n} vertices, need at least 3"),
            ));
        }
        if self.footprint.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::scene(location, "footprint has non-finite coordinates"));
        }
        if !(self.height > 0.0) || !self.height.is_finite() {
            return Err(Error::scene(
                location,
                format!("height must be positive, got {}", self.height),
            ));
        }
        for i in 0..n {
            let a = self.footprint[i];
            let b = self.footprint[(i + 1) % n];
            if (b - a).norm() <= EPS_GEOM {
                return Err(Error::scene(location, format!("footprint edge {i} has zero length")));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a0, a1) = (self.footprint[i], self.footprint[(i + 1) % n]);
                let (b0, b1) = (self.footprint[j], self.footprint[(j + 1) % n]);
                if segments_intersect(&a0, &a1, &b0, &b1) {
                    return Err(Error::scene(
                        location,
                        format!("self-intersecting footprint: edge {i} crosses edge {j}"),
                    ));
                }
            }
        }
        let area = Self::signed_area(&self.footprint);
        if area.abs() <= EPS_GEOM {
            return Err(Error::scene(location, "footprint has zero area"));
        }
        if area < 0.0 {
            self.footprint.reverse();
        }
        self.material.validate(&format!("{location}.material"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderScatterer {
    pub id: u32,
    /// Center of the bottom disc.
    pub base: Vec3,
    pub radius: f64,
    pub height: f64,
    pub material: Material,
}

impl CylinderScatterer {
    /// Vertical axis point at height `z` clamped to the cylinder extent.
    pub fn axis_point(&self, z: f64) -> Vec3 {
        Vec3::new(
            self.base.x,
            self.base.y,
            z.clamp(self.base.z, self.base.z + self.height),
        )
    }

    /// True if `p` lies within the closed bounding cylinder.
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = (xy(p) - xy(&self.base)).norm();
        d <= self.radius && p.z >= self.base.z && p.z <= self.base.z + self.height
    }
}

/// Vertical rectangle spanned by one footprint edge.
#[derive(Debug, Clone)]
pub struct Facade {
    pub building: usize,
    pub object_id: u32,
    pub element_id: u32,
    pub start: Vec2,
    pub end: Vec2,
    /// Unit direction from `start` to `end`.
    pub dir: Vec2,
    pub length: f64,
    /// Outward unit normal (horizontal).
    pub normal: Vec2,
    pub height: f64,
    pub material: Material,
}

impl Facade {
    pub fn normal3(&self) -> Vec3 {
        Vec3::new(self.normal.x, self.normal.y, 0.0)
    }

    pub fn origin3(&self) -> Vec3 {
        Vec3::new(self.start.x, self.start.y, 0.0)
    }

    /// Signed distance of `p` in front of the facade plane.
    #[inline]
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p.x - self.start.x) * self.normal.x + (p.y - self.start.y) * self.normal.y
    }

    /// True if `p` lies on the facade rectangle (within `EPS_GEOM`).
    pub fn hosts(&self, p: &Vec3) -> bool {
        let s = (xy(p) - self.start).dot(&self.dir);
        self.signed_distance(p).abs() <= EPS_GEOM
            && s >= -EPS_GEOM
            && s <= self.length + EPS_GEOM
            && p.z >= -EPS_GEOM
            && p.z <= self.height + EPS_GEOM
    }

    /// Intersection of the segment `p + t (q - p)` with the facade plane,
    /// returned as `(t, point)` when it falls inside the rectangle.
    #[inline]
    pub fn intersect(&self, p: &Vec3, q: &Vec3) -> Option<(f64, Vec3)> {
        let d = q - p;
        let denom = self.normal.x * d.x + self.normal.y * d.y;
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = -self.signed_distance(p) / denom;
        let point = p + d * t;
        let s = (point.x - self.start.x) * self.dir.x + (point.y - self.start.y) * self.dir.y;
        if s < -EPS_GEOM || s > self.length + EPS_GEOM || point.z < -EPS_GEOM || point.z > self.height + EPS_GEOM {
            return None;
        }
        Some((t, point))
    }
}

/// Vertical wedge edge at a footprint vertex.
#[derive(Debug, Clone)]
pub struct VerticalEdge {
    pub building: usize,
    pub object_id: u32,
    pub element_id: u32,
    pub position: Vec2,
    pub height: f64,
    /// Facade leaving the vertex (the "0-face" of the wedge).
    pub face0: usize,
    /// Facade arriving at the vertex (the "n-face").
    pub face_n: usize,
    /// Unit direction of the 0-face from the edge.
    pub dir0: Vec2,
    /// Exterior wedge angle divided by pi.
    pub wedge_n: f64,
    /// Interior angle below pi.
    pub convex: bool,
}

impl VerticalEdge {
    /// Angle of `dir` measured from the 0-face through the exterior of the
    /// wedge, in [0, 2 pi).
    pub fn exterior_angle(&self, dir: &Vec2) -> f64 {
        use std::f64::consts::PI;
        // exterior is clockwise from dir0 for counterclockwise footprints
        let a = (-cross2(&self.dir0, dir)).atan2(self.dir0.dot(dir));
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}

/// Which element of the scene a hit landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementRef {
    pub object_id: u32,
    pub element_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub point: Vec3,
    pub element: ElementRef,
    /// Distance from the segment start, meters.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct Scene {
    buildings: Vec<Building>,
    scatterers: Vec<CylinderScatterer>,
    ground_material: Material,
    facades: Vec<Facade>,
    edges: Vec<VerticalEdge>,
    /// First facade index of each building in `facades`/`edges`.
    offsets: Vec<usize>,
    bboxes: Vec<(Vec2, Vec2)>,
    grid: Grid,
}

impl Scene {
    /// Validates and indexes a scene. Clockwise footprints are reversed.
    pub fn new(
        buildings: Vec<Building>,
        scatterers: Vec<CylinderScatterer>,
        ground_material: Material,
    ) -> Result<Scene> {
        let mut buildings = buildings;
        let mut ids = HashSet::new();
        for (i, b) in buildings.iter_mut().enumerate() {
            let location = format!("buildings[{i}] (id {})", b.id);
            if !ids.insert(b.id) {
                return Err(Error::scene(location, "duplicate building id"));
            }
            b.normalize(&location)?;
        }
        let mut ids = HashSet::new();
        for (i, s) in scatterers.iter().enumerate() {
            let location = format!("scatterers[{i}] (id {})", s.id);
            if !ids.insert(s.id) {
                return Err(Error::scene(location, "duplicate scatterer id"));
            }
            if !(s.radius > 0.0) || !s.radius.is_finite() {
                return Err(Error::scene(
                    location,
                    format!("radius must be positive, got {}", s.radius),
                ));
            }
            if !(s.height > 0.0) || !s.height.is_finite() {
                return Err(Error::scene(
                    location,
                    format!("height must be positive, got {}", s.height),
                ));
            }
            if !s.base.iter().all(|c| c.is_finite()) {
                return Err(Error::scene(location, "base has non-finite coordinates"));
            }
            s.material.validate(&format!("{location}.material"))?;
        }
        ground_material.validate("ground_material")?;

        let mut facades = Vec::new();
        let mut edges = Vec::new();
        let mut offsets = Vec::with_capacity(buildings.len());
        let mut bboxes = Vec::with_capacity(buildings.len());
        for (bi, b) in buildings.iter().enumerate() {
            offsets.push(facades.len());
            let n = b.footprint.len();
            let base = facades.len();
            for i in 0..n {
                let start = b.footprint[i];
                let end = b.footprint[(i + 1) % n];
                let length = (end - start).norm();
                let dir = (end - start) / length;
                facades.push(Facade {
                    building: bi,
                    object_id: b.id,
                    element_id: i as u32,
                    start,
                    end,
                    dir,
                    length,
                    normal: Vec2::new(dir.y, -dir.x),
                    height: b.height,
                    material: b.material,
                });
            }
            for i in 0..n {
                let prev = b.footprint[(i + n - 1) % n];
                let here = b.footprint[i];
                let next = b.footprint[(i + 1) % n];
                let dir0 = (next - here).normalize();
                let dir_n = (prev - here).normalize();
                // counterclockwise angle from the 0-face to the n-face spans the interior
                let mut interior = cross2(&dir0, &dir_n).atan2(dir0.dot(&dir_n));
                if interior < 0.0 {
                    interior += 2.0 * std::f64::consts::PI;
                }
                edges.push(VerticalEdge {
                    building: bi,
                    object_id: b.id,
                    element_id: b.edge_element(i),
                    position: here,
                    height: b.height,
                    face0: base + i,
                    face_n: base + (i + n - 1) % n,
                    dir0,
                    wedge_n: (2.0 * std::f64::consts::PI - interior) / std::f64::consts::PI,
                    convex: interior < std::f64::consts::PI - 1e-9,
                });
            }
            let (mut lo, mut hi) = (b.footprint[0], b.footprint[0]);
            for v in &b.footprint {
                lo = lo.inf(v);
                hi = hi.sup(v);
            }
            bboxes.push((lo, hi));
        }
        let grid = Grid::build(&bboxes, GRID_CELL);
        Ok(Scene {
            buildings,
            scatterers,
            ground_material,
            facades,
            edges,
            offsets,
            bboxes,
            grid,
        })
    }

    pub fn empty() -> Scene {
        Scene::new(Vec::new(), Vec::new(), Material::ground()).expect("empty scene is valid")
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn scatterers(&self) -> &[CylinderScatterer] {
        &self.scatterers
    }

    pub fn ground_material(&self) -> Material {
        self.ground_material
    }

    pub fn facades(&self) -> &[Facade] {
        &self.facades
    }

    pub fn edges(&self) -> &[VerticalEdge] {
        &self.edges
    }

    /// Same buildings and ground, no scatterers.
    pub fn without_scatterers(&self) -> Scene {
        let mut s = self.clone();
        s.scatterers.clear();
        s
    }

    fn building_index(&self, object_id: u32) -> Option<usize> {
        self.buildings.iter().position(|b| b.id == object_id)
    }

    /// Facade by (building id, element id).
    pub fn facade(&self, object_id: u32, element_id: u32) -> Option<&Facade> {
        let bi = self.building_index(object_id)?;
        let n = self.buildings[bi].footprint.len();
        let e = element_id as usize;
        (e < n).then(|| &self.facades[self.offsets[bi] + e])
    }

    /// Vertical edge by (building id, element id).
    pub fn vertical_edge(&self, object_id: u32, element_id: u32) -> Option<&VerticalEdge> {
        let bi = self.building_index(object_id)?;
        let n = self.buildings[bi].footprint.len();
        let e = element_id as usize;
        (e > n && e <= 2 * n).then(|| &self.edges[self.offsets[bi] + e - n - 1])
    }

    pub fn scatterer(&self, id: u32) -> Option<&CylinderScatterer> {
        self.scatterers.iter().find(|s| s.id == id)
    }

    /// Returns the building containing `p`, if any.
    pub fn building_containing(&self, p: &Vec3) -> Option<&Building> {
        self.buildings.iter().find(|b| b.contains(p))
    }

    /// Nearest obstruction strictly between `p` and `q`, using the grid index.
    pub fn first_hit(&self, p: &Vec3, q: &Vec3) -> Option<Hit> {
        self.first_hit_impl(p, q, true)
    }

    /// Same as [`Scene::first_hit`] but scans every building.
    pub fn first_hit_brute_force(&self, p: &Vec3, q: &Vec3) -> Option<Hit> {
        self.first_hit_impl(p, q, false)
    }

    /// True iff the open segment between `p` and `q` is unobstructed.
    /// Symmetric in its arguments.
    pub fn is_los(&self, p: &Vec3, q: &Vec3) -> bool {
        let (a, b) = if (p.x, p.y, p.z) <= (q.x, q.y, q.z) {
            (p, q)
        } else {
            (q, p)
        };
        self.first_hit(a, b).is_none()
    }

    fn first_hit_impl(&self, p: &Vec3, q: &Vec3, indexed: bool) -> Option<Hit> {
        let d = q - p;
        let len = d.norm();
        if !(len > 2.0 * EPS_GEOM) {
            return None;
        }
        let mut hits = Vec::new();
        if indexed {
            let mut candidates = Vec::new();
            self.grid.candidates(&xy(p), &xy(q), &mut candidates);
            for b in candidates {
                self.building_hits(b as usize, p, q, len, &mut hits);
            }
        } else {
            for b in 0..self.buildings.len() {
                self.building_hits(b, p, q, len, &mut hits);
            }
        }
        if (p.z > EPS_GEOM && q.z < -EPS_GEOM) || (p.z < -EPS_GEOM && q.z > EPS_GEOM) {
            let t = -p.z / d.z;
            let dist = t * len;
            if dist > EPS_GEOM && dist < len - EPS_GEOM {
                hits.push(Hit {
                    point: p + d * t,
                    element: ElementRef {
                        object_id: GROUND_OBJECT_ID,
                        element_id: 0,
                    },
                    distance: dist,
                });
            }
        }
        select_hit(&hits)
    }

    fn building_hits(&self, bi: usize, p: &Vec3, q: &Vec3, len: f64, out: &mut Vec<Hit>) {
        let b = &self.buildings[bi];
        let (lo, hi) = self.bboxes[bi];
        if !segment_hits_box(p, q, &lo, &hi, b.height) {
            return;
        }
        let n = b.footprint.len();
        let off = self.offsets[bi];
        for f in &self.facades[off..off + n] {
            if let Some((t, point)) = f.intersect(p, q) {
                let dist = t * len;
                if dist > EPS_GEOM && dist < len - EPS_GEOM {
                    out.push(Hit {
                        point,
                        element: ElementRef {
                            object_id: f.object_id,
                            element_id: f.element_id,
                        },
                        distance: dist,
                    });
                }
            }
        }
        let h = b.height;
        let (dp, dq) = (p.z - h, q.z - h);
        if (dp > EPS_GEOM && dq < -EPS_GEOM) || (dp < -EPS_GEOM && dq > EPS_GEOM) {
            let d = q - p;
            let t = -dp / d.z;
            let dist = t * len;
            let point = p + d * t;
            if dist > EPS_GEOM && dist < len - EPS_GEOM && point_in_polygon(&xy(&point), &b.footprint) {
                out.push(Hit {
                    point,
                    element: ElementRef {
                        object_id: b.id,
                        element_id: b.rooftop_element(),
                    },
                    distance: dist,
                });
            }
        }
    }

    /// Buildings whose bounding boxes the 2D segment may touch, via the grid.
    pub(crate) fn buildings_along(&self, p: &Vec2, q: &Vec2) -> Vec<usize> {
        let mut c = Vec::new();
        self.grid.candidates(p, q, &mut c);
        c.into_iter().map(|b| b as usize).collect()
    }

    pub(crate) fn facade_range(&self, building: usize) -> std::ops::Range<usize> {
        let off = self.offsets[building];
        off..off + self.buildings[building].footprint.len()
    }
}

/// Nearest hit; near-ties go to the lowest (object, element) id.
fn select_hit(hits: &[Hit]) -> Option<Hit> {
    let dmin = hits.iter().map(|h| h.distance).fold(f64::INFINITY, f64::min);
    hits.iter()
        .filter(|h| h.distance <= dmin + TIE_DISTANCE)
        .min_by_key(|h| h.element)
        .copied()
}

fn segment_hits_box(p: &Vec3, q: &Vec3, lo: &Vec2, hi: &Vec2, height: f64) -> bool {
    let pad = 2.0 * EPS_GEOM;
    let lo3 = [lo.x - pad, lo.y - pad, -pad];
    let hi3 = [hi.x + pad, hi.y + pad, height + pad];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let d = q[k] - p[k];
        if d.abs() < 1e-300 {
            if p[k] < lo3[k] || p[k] > hi3[k] {
                return false;
            }
        } else {
            let (mut a, mut b) = ((lo3[k] - p[k]) / d, (hi3[k] - p[k]) / d);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}
