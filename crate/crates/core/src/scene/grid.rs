//! Uniform 2D grid over building footprints.

use crate::geom::{Vec2, EPS_GEOM};

#[derive(Debug, Clone)]
pub(super) struct Grid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl Grid {
    pub(super) fn build(bboxes: &[(Vec2, Vec2)], cell: f64) -> Grid {
        if bboxes.is_empty() {
            return Grid {
                origin: Vec2::zeros(),
                cell,
                nx: 0,
                ny: 0,
                cells: Vec::new(),
            };
        }
        let pad = 4.0 * EPS_GEOM;
        let mut lo = bboxes[0].0;
        let mut hi = bboxes[0].1;
        for (a, b) in bboxes {
            lo = lo.inf(a);
            hi = hi.sup(b);
        }
        let origin = lo - Vec2::new(1.0, 1.0);
        let nx = (((hi.x + 1.0 - origin.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y + 1.0 - origin.y) / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        for (i, (a, b)) in bboxes.iter().enumerate() {
            let (ix0, iy0) = (
                Self::clamp_idx((a.x - pad - origin.x) / cell, nx),
                Self::clamp_idx((a.y - pad - origin.y) / cell, ny),
            );
            let (ix1, iy1) = (
                Self::clamp_idx((b.x + pad - origin.x) / cell, nx),
                Self::clamp_idx((b.y + pad - origin.y) / cell, ny),
            );
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    cells[iy * nx + ix].push(i as u32);
                }
            }
        }
        Grid {
            origin,
            cell,
            nx,
            ny,
            cells,
        }
    }

    fn clamp_idx(v: f64, n: usize) -> usize {
        if v <= 0.0 {
            0
        } else {
            (v.floor() as usize).min(n - 1)
        }
    }

    /// Collects (sorted, deduplicated) building indices registered in every
    /// cell the closed 2D segment `p-q` passes through.
    pub(super) fn candidates(&self, p: &Vec2, q: &Vec2, out: &mut Vec<u32>) {
        out.clear();
        if self.cells.is_empty() {
            return;
        }
        let size = Vec2::new(self.nx as f64 * self.cell, self.ny as f64 * self.cell);
        let a = p - self.origin;
        let b = q - self.origin;
        let d = b - a;
        // Liang-Barsky clip against the grid rectangle
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for k in 0..2 {
            if d[k].abs() < 1e-300 {
                if a[k] < 0.0 || a[k] > size[k] {
                    return;
                }
            } else {
                let (mut u, mut v) = ((0.0 - a[k]) / d[k], (size[k] - a[k]) / d[k]);
                if u > v {
                    std::mem::swap(&mut u, &mut v);
                }
                t0 = t0.max(u);
                t1 = t1.min(v);
                if t0 > t1 {
                    return;
                }
            }
        }
        let start = a + d * t0;
        let mut ix = Self::clamp_idx(start.x / self.cell, self.nx) as i64;
        let mut iy = Self::clamp_idx(start.y / self.cell, self.ny) as i64;
        let end = a + d * t1;
        let ex = Self::clamp_idx(end.x / self.cell, self.nx) as i64;
        let ey = Self::clamp_idx(end.y / self.cell, self.ny) as i64;

        let step_x: i64 = if d.x > 0.0 { 1 } else { -1 };
        let step_y: i64 = if d.y > 0.0 { 1 } else { -1 };
        let next_boundary = |i: i64, step: i64| -> f64 {
            if step > 0 {
                (i + 1) as f64 * self.cell
            } else {
                i as f64 * self.cell
            }
        };
        let mut t_max_x = if d.x.abs() < 1e-300 {
            f64::INFINITY
        } else {
            (next_boundary(ix, step_x) - a.x) / d.x
        };
        let mut t_max_y = if d.y.abs() < 1e-300 {
            f64::INFINITY
        } else {
            (next_boundary(iy, step_y) - a.y) / d.y
        };
        let t_delta_x = if d.x.abs() < 1e-300 {
            f64::INFINITY
        } else {
            self.cell / d.x.abs()
        };
        let t_delta_y = if d.y.abs() < 1e-300 {
            f64::INFINITY
        } else {
            self.cell / d.y.abs()
        };

        let push_cell = |ix: i64, iy: i64, out: &mut Vec<u32>| {
            if ix >= 0 && iy >= 0 && (ix as usize) < self.nx && (iy as usize) < self.ny {
                out.extend_from_slice(&self.cells[iy as usize * self.nx + ix as usize]);
            }
        };
        let max_steps = self.nx + self.ny + 4;
        for _ in 0..max_steps {
            push_cell(ix, iy, out);
            if ix == ex && iy == ey {
                break;
            }
            if t_max_x.min(t_max_y) > t1 {
                break;
            }
            // near-corner crossings visit both neighbours so no cell is skipped
            if (t_max_x - t_max_y).abs() <= 1e-12 {
                push_cell(ix + step_x, iy, out);
                push_cell(ix, iy + step_y, out);
                ix += step_x;
                iy += step_y;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                ix += step_x;
                t_max_x += t_delta_x;
            } else {
                iy += step_y;
                t_max_y += t_delta_y;
            }
        }
        push_cell(ex, ey, out);
        out.sort_unstable();
        out.dedup();
    }
}
