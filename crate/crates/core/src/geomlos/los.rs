//! Segment against building-prism visibility.
//!
//! [`LosIndex`] buckets footprints on a uniform 2D grid and walks the
//! segment's ground projection cell by cell, testing only buildings tall
//! enough to reach the segment inside each cell.

use super::Position3D;
use crate::urbgen::{Building, CityLayout};
use crate::{Error, Result};

/// Slab test of a segment against the closed box `lo..=hi`.
pub fn segment_hits_box(a: [f64; 3], b: [f64; 3], lo: [f64; 3], hi: [f64; 3]) -> bool {
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for k in 0..3 {
        let d = b[k] - a[k];
        if d == 0.0 {
            if a[k] < lo[k] || a[k] > hi[k] {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo[k] - a[k]) / d, (hi[k] - a[k]) / d);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

pub fn segment_hits_building(a: &Position3D, b: &Position3D, bld: &Building) -> bool {
    segment_hits_box(
        [a.x, a.y, a.z],
        [b.x, b.y, b.z],
        [bld.x, bld.y, 0.0],
        [bld.x + bld.width, bld.y + bld.length, bld.height],
    )
}

/// Uniform-grid acceleration structure over one layout.
#[derive(Clone, Debug)]
pub struct LosIndex<'a> {
    buildings: &'a [Building],
    extent: f64,
    cell: f64,
    side: usize,
    cells: Vec<Vec<u32>>,
    cell_top: Vec<f64>,
    top: f64,
}

impl<'a> LosIndex<'a> {
    pub const DEFAULT_CELL: f64 = 20.0;

    pub fn new(layout: &'a CityLayout) -> Self {
        Self::with_cell(layout, Self::DEFAULT_CELL)
    }

    pub fn with_cell(layout: &'a CityLayout, cell: f64) -> Self {
        let extent = layout
            .buildings
            .iter()
            .map(|b| (b.x + b.width).max(b.y + b.length))
            .fold(layout.area_m, f64::max);
        let side = (extent / cell).ceil().max(1.0) as usize;
        let mut cells = vec![Vec::new(); side * side];
        let mut cell_top = vec![0.0_f64; side * side];
        let clamp = |v: f64| ((v / cell).floor().max(0.0) as usize).min(side - 1);
        for (id, b) in layout.buildings.iter().enumerate() {
            for j in clamp(b.y)..=clamp(b.y + b.length) {
                for i in clamp(b.x)..=clamp(b.x + b.width) {
                    cells[j * side + i].push(id as u32);
                    cell_top[j * side + i] = cell_top[j * side + i].max(b.height);
                }
            }
        }
        let top = layout.max_height();
        LosIndex { buildings: &layout.buildings, extent, cell, side, cells, cell_top, top }
    }

    fn cell_of(&self, v: f64) -> usize {
        ((v / self.cell).floor().max(0.0) as usize).min(self.side - 1)
    }

    /// Buildings whose closed footprint contains `(x, y)`.
    pub fn footprint_at(&self, x: f64, y: f64) -> Option<usize> {
        if x < 0.0 || y < 0.0 || x > self.extent || y > self.extent {
            return None;
        }
        let idx = self.cell_of(y) * self.side + self.cell_of(x);
        self.cells[idx]
            .iter()
            .map(|&id| id as usize)
            .find(|&id| self.buildings[id].covers(x, y))
    }

    /// Building whose closed volume contains `p`.
    pub fn volume_at(&self, p: &Position3D) -> Option<usize> {
        if p.z > self.top {
            return None;
        }
        let idx = self.cell_of(p.y) * self.side + self.cell_of(p.x);
        if p.x < 0.0 || p.y < 0.0 || p.x > self.extent || p.y > self.extent {
            return None;
        }
        self.cells[idx]
            .iter()
            .map(|&id| id as usize)
            .find(|&id| {
                let b = &self.buildings[id];
                b.covers(p.x, p.y) && p.z <= b.height
            })
    }

    /// True when the straight segment `a -> b` clears every building prism.
    pub fn is_los(&self, a: &Position3D, b: &Position3D) -> Result<bool> {
        for p in [a, b] {
            if let Some(id) = self.volume_at(p) {
                return Err(Error::EndpointInsideBuilding(id));
            }
        }
        Ok(!self.blocked(a, b))
    }

    fn blocked(&self, a: &Position3D, b: &Position3D) -> bool {
        if self.buildings.is_empty() {
            return false;
        }
        // Only the part of the segment at or below the tallest roof matters.
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        let dz = b.z - a.z;
        if dz == 0.0 {
            if a.z > self.top {
                return false;
            }
        } else {
            let t_top = (self.top - a.z) / dz;
            if dz > 0.0 {
                t1 = t1.min(t_top + 1e-12);
            } else {
                t0 = t0.max(t_top - 1e-12);
            }
        }
        // Clip the ground projection to the indexed square.
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        for (p, d) in [(a.x, dx), (a.y, dy)] {
            if d == 0.0 {
                if p < 0.0 || p > self.extent {
                    return false;
                }
            } else {
                let (mut ta, mut tb) = ((0.0 - p) / d, (self.extent - p) / d);
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
            }
        }
        if t0 > t1 {
            return false;
        }

        let c = self.cell;
        let mut ix = self.cell_of(a.x + t0 * dx);
        let mut iy = self.cell_of(a.y + t0 * dy);
        let step_x: isize = if dx > 0.0 { 1 } else { -1 };
        let step_y: isize = if dy > 0.0 { 1 } else { -1 };
        let boundary_t = |i: usize, p: f64, d: f64| -> f64 {
            if d > 0.0 {
                ((i + 1) as f64 * c - p) / d
            } else if d < 0.0 {
                (i as f64 * c - p) / d
            } else {
                f64::INFINITY
            }
        };
        let mut next_x = boundary_t(ix, a.x, dx);
        let mut next_y = boundary_t(iy, a.y, dy);
        let delta_x = if dx != 0.0 { c / dx.abs() } else { f64::INFINITY };
        let delta_y = if dy != 0.0 { c / dy.abs() } else { f64::INFINITY };

        let mut t = t0;
        loop {
            let t_exit = next_x.min(next_y).min(t1);
            let idx = iy * self.side + ix;
            let z_low = (a.z + t * dz).min(a.z + t_exit * dz);
            if self.cell_top[idx] >= z_low - 1e-9
                && self.cells[idx]
                    .iter()
                    .any(|&id| segment_hits_building(a, b, &self.buildings[id as usize]))
            {
                return true;
            }
            if t_exit >= t1 {
                return false;
            }
            if next_x < next_y {
                let n = ix as isize + step_x;
                if n < 0 || n >= self.side as isize {
                    return false;
                }
                ix = n as usize;
                next_x += delta_x;
            } else {
                let n = iy as isize + step_y;
                if n < 0 || n >= self.side as isize {
                    return false;
                }
                iy = n as usize;
                next_y += delta_y;
            }
            t = t_exit;
        }
    }
}

/// Convenience wrapper building a one-shot index.
pub fn is_los(layout: &CityLayout, abs: &Position3D, gu: &Position3D) -> Result<bool> {
    LosIndex::new(layout).is_los(abs, gu)
}
