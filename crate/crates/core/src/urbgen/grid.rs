//! Occupancy raster and rectangle index used while scattering buildings.

use super::{Building, Highway};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Cell {
    Free = 0,
    Building = 1,
    Highway = 2,
}

/// Occupancy grid `G(x, y)` over the square simulation area at 1 m
/// resolution. A cell belongs to a footprint when its center lies inside
/// that footprint.
#[derive(Clone, Debug)]
pub struct OccupancyGrid {
    side: usize,
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub const RESOLUTION: f64 = 1.0;

    pub fn new(area: f64) -> Self {
        let side = (area / Self::RESOLUTION).ceil().max(1.0) as usize;
        Self { side, cells: vec![Cell::Free; side * side] }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.side + i]
    }

    pub fn count(&self, state: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// Index range of cells whose centers fall in `[lo, hi]`.
    fn center_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = (lo / Self::RESOLUTION - 0.5).ceil().max(0.0) as usize;
        let last = (hi / Self::RESOLUTION - 0.5).floor();
        if last < 0.0 {
            return 0..0;
        }
        first..(last as usize + 1).min(self.side)
    }

    /// Index range of cells whose open interior overlaps `(lo, hi)`.
    fn touch_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = (lo / Self::RESOLUTION).floor().max(0.0) as usize;
        let last = (hi / Self::RESOLUTION).ceil().max(0.0) as usize;
        first..last.min(self.side)
    }

    pub fn mark_building(&mut self, b: &Building) {
        let xs = self.center_range(b.x, b.x + b.width);
        let ys = self.center_range(b.y, b.y + b.length);
        for j in ys {
            for i in xs.clone() {
                self.cells[j * self.side + i] = Cell::Building;
            }
        }
    }

    pub fn mark_highway(&mut self, h: &Highway) {
        let (x0, y0, x1, y1) = h.bounding_box();
        let xs = self.center_range(x0, x1);
        let ys = self.center_range(y0, y1);
        for j in ys {
            for i in xs.clone() {
                let cx = (i as f64 + 0.5) * Self::RESOLUTION;
                let cy = (j as f64 + 0.5) * Self::RESOLUTION;
                if h.contains(cx, cy) {
                    self.cells[j * self.side + i] = Cell::Highway;
                }
            }
        }
    }

    /// The raster part of the placement constraint: no occupied cell center
    /// inside the candidate, and no highway cell touched by it.
    pub fn admits(&self, b: &Building) -> bool {
        let xs = self.touch_range(b.x, b.x + b.width);
        let ys = self.touch_range(b.y, b.y + b.length);
        for j in ys.clone() {
            let row = &self.cells[j * self.side..(j + 1) * self.side];
            if row[xs.clone()].iter().any(|&c| c == Cell::Highway) {
                return false;
            }
        }
        let xs = self.center_range(b.x, b.x + b.width);
        let ys = self.center_range(b.y, b.y + b.length);
        for j in ys {
            let row = &self.cells[j * self.side..(j + 1) * self.side];
            if row[xs.clone()].iter().any(|&c| c != Cell::Free) {
                return false;
            }
        }
        true
    }
}

/// Bucketed index of placed footprints for exact overlap tests. Thin
/// buildings can miss every cell center, so the raster alone is not enough.
#[derive(Clone, Debug)]
pub struct RectIndex {
    bucket: f64,
    side: usize,
    buckets: Vec<Vec<usize>>,
}

impl RectIndex {
    pub fn new(area: f64, bucket: f64) -> Self {
        let side = (area / bucket).ceil().max(1.0) as usize;
        Self { bucket, side, buckets: vec![Vec::new(); side * side] }
    }

    fn span(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<usize> {
        let a = ((lo / self.bucket).floor().max(0.0) as usize).min(self.side - 1);
        let b = ((hi / self.bucket).floor().max(0.0) as usize).min(self.side - 1);
        a..=b
    }

    pub fn insert(&mut self, id: usize, b: &Building) {
        for j in self.span(b.y, b.y + b.length) {
            for i in self.span(b.x, b.x + b.width) {
                self.buckets[j * self.side + i].push(id);
            }
        }
    }

    pub fn overlaps_any(&self, candidate: &Building, placed: &[Building]) -> bool {
        for j in self.span(candidate.y, candidate.y + candidate.length) {
            for i in self.span(candidate.x, candidate.x + candidate.width) {
                if self.buckets[j * self.side + i]
                    .iter()
                    .any(|&id| placed[id].overlaps(candidate))
                {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, y: f64, w: f64, l: f64) -> Building {
        Building { x, y, width: w, length: l, height: 10.0 }
    }

    #[test]
    fn center_rule_marks_expected_cells() {
        let mut g = OccupancyGrid::new(10.0);
        g.mark_building(&b(1.2, 1.0, 2.0, 1.0));
        // centers 1.5 and 2.5 in x, 1.5 in y
        assert_eq!(g.count(Cell::Building), 2);
        assert_eq!(g.get(1, 1), Cell::Building);
        assert_eq!(g.get(2, 1), Cell::Building);
    }

    #[test]
    fn sliver_misses_centers_but_index_catches_it() {
        let placed = vec![b(5.1, 5.1, 0.3, 0.3)];
        let mut g = OccupancyGrid::new(20.0);
        g.mark_building(&placed[0]);
        assert_eq!(g.count(Cell::Building), 0);
        let mut idx = RectIndex::new(20.0, 4.0);
        idx.insert(0, &placed[0]);
        assert!(idx.overlaps_any(&b(5.0, 5.0, 1.0, 1.0), &placed));
        assert!(!idx.overlaps_any(&b(5.4, 5.0, 1.0, 1.0), &placed));
    }

    #[test]
    fn highway_cells_block_touching_candidates() {
        let mut g = OccupancyGrid::new(100.0);
        let h = Highway { x: 50.0, y: 50.0, width: 10.0, length: 100.0, phi: 0.0 };
        g.mark_highway(&h);
        assert_eq!(g.count(Cell::Highway), 1000);
        assert!(!g.admits(&b(10.0, 40.5, 5.0, 5.0)));
        assert!(g.admits(&b(10.0, 30.0, 5.0, 5.0)));
    }
}
