//! Small geometric helpers shared by the tracers.

use nalgebra::{Vector2, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Coincidence tolerance for endpoint exclusion and on-surface tests, meters.
pub const EPS_GEOM: f64 = 1e-6;

#[inline]
pub fn xy(p: &Vec3) -> Vec2 {
    Vec2::new(p.x, p.y)
}

#[inline]
pub fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Sum of segment lengths of a polyline.
pub fn polyline_length(vertices: &[Vec3]) -> f64 {
    vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Azimuth (from +x towards +y) and elevation (above the horizontal plane)
/// of a direction vector, radians.
pub fn az_el(dir: &Vec3) -> (f64, f64) {
    let n = dir.norm();
    let az = dir.y.atan2(dir.x);
    let el = (dir.z / n).clamp(-1.0, 1.0).asin();
    (az, el)
}

/// Mirror image of a point across the plane through `origin` with unit
/// normal `normal`.
#[inline]
pub fn mirror_point(p: &Vec3, origin: &Vec3, normal: &Vec3) -> Vec3 {
    p - normal * (2.0 * (p - origin).dot(normal))
}

/// Mirror of a direction across a plane with unit normal `normal`.
#[inline]
pub fn mirror_dir(d: &Vec3, normal: &Vec3) -> Vec3 {
    d - normal * (2.0 * d.dot(normal))
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Point-in-polygon by crossing number. Boundary points may land on either
/// side; callers that care resolve the boundary with facade tests.
pub fn point_in_polygon(p: &Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Proper or touching intersection of closed 2D segments `a0-a1`, `b0-b1`.
pub fn segments_intersect(a0: &Vec2, a1: &Vec2, b0: &Vec2, b1: &Vec2) -> bool {
    fn orient(p: &Vec2, q: &Vec2, r: &Vec2) -> f64 {
        cross2(&(q - p), &(r - p))
    }
    fn on_seg(p: &Vec2, q: &Vec2, r: &Vec2) -> bool {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    }
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_seg(b0, b1, a0))
        || (d2 == 0.0 && on_seg(b0, b1, a1))
        || (d3 == 0.0 && on_seg(a0, a1, b0))
        || (d4 == 0.0 && on_seg(a0, a1, b1))
}
