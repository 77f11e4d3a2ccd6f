use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A straight highway corridor. `(x, y)` is the center of its centerline;
/// `phi` is the direction of the length axis, measured from the x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Highway {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "l")]
    pub length: f64,
    pub phi: f64,
}

impl Highway {
    pub fn area(&self) -> f64 {
        self.width * self.length
    }

    fn half_extents(width: f64, length: f64, phi: f64) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        let (s, c) = (s.abs(), c.abs());
        (c * length / 2.0 + s * width / 2.0, s * length / 2.0 + c * width / 2.0)
    }

    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let (ex, ey) = Self::half_extents(self.width, self.length, self.phi);
        (self.x - ex, self.y - ey, self.x + ex, self.y + ey)
    }

    /// Interior overlap with the axis-aligned rectangle `[x0, x1] x [y0, y1]`
    /// by separating axes; shared edges do not count.
    pub fn overlaps_rect(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
        let (ex, ey) = Self::half_extents(self.width, self.length, self.phi);
        if !(x0 < self.x + ex && self.x - ex < x1 && y0 < self.y + ey && self.y - ey < y1) {
            return false;
        }
        let (s, c) = self.phi.sin_cos();
        let (cx, cy) = ((x0 + x1) / 2.0 - self.x, (y0 + y1) / 2.0 - self.y);
        let (hw, hl) = ((x1 - x0) / 2.0, (y1 - y0) / 2.0);
        let along = cx * c + cy * s;
        let across = -cx * s + cy * c;
        along.abs() < self.length / 2.0 + hw * c.abs() + hl * s.abs()
            && across.abs() < self.width / 2.0 + hw * s.abs() + hl * c.abs()
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        let (s, c) = self.phi.sin_cos();
        let (dx, dy) = (px - self.x, py - self.y);
        let along = dx * c + dy * s;
        let across = -dx * s + dy * c;
        along.abs() <= self.length / 2.0 && across.abs() <= self.width / 2.0
    }
}

/// Requested highway; missing length means "as long as the area side",
/// missing center means "uniformly random where the corridor fits".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighwaySpec {
    pub width: f64,
    #[serde(default)]
    pub length: Option<f64>,
    pub phi: f64,
    #[serde(default)]
    pub center: Option<(f64, f64)>,
}

impl HighwaySpec {
    /// `count` full-length corridors of `width` meters, alternating between
    /// orientations 0 and pi/2.
    pub fn defaults(count: usize, width: f64) -> Vec<HighwaySpec> {
        (0..count)
            .map(|j| HighwaySpec {
                width,
                length: None,
                phi: if j % 2 == 0 { 0.0 } else { FRAC_PI_2 },
                center: None,
            })
            .collect()
    }

    pub fn resolve<R: Rng + ?Sized>(&self, area: f64, rng: &mut R) -> Result<Highway> {
        let length = self.length.unwrap_or(area);
        if !(self.width > 0.0 && length > 0.0) {
            return Err(Error::InvalidHighway(format!(
                "width {} and length {length} must be positive",
                self.width
            )));
        }
        if !(0.0..PI).contains(&self.phi) {
            return Err(Error::InvalidHighway(format!("orientation {} not in [0, pi)", self.phi)));
        }
        let (ex, ey) = Highway::half_extents(self.width, length, self.phi);
        // Float noise from sin/cos at pi/2 must not reject an exact fit.
        let slack = 1e-9 * area;
        if 2.0 * ex > area + slack || 2.0 * ey > area + slack {
            return Err(Error::InvalidHighway(format!(
                "{:.1} x {:.1} m corridor at phi={:.3} does not fit a {area} m area",
                self.width, length, self.phi
            )));
        }
        let (ex, ey) = (ex.min(area / 2.0), ey.min(area / 2.0));
        let (x, y) = match self.center {
            Some((x, y)) => {
                if x - ex < -slack || x + ex > area + slack || y - ey < -slack || y + ey > area + slack
                {
                    return Err(Error::InvalidHighway(format!(
                        "corridor centered at ({x}, {y}) leaves the area"
                    )));
                }
                (x, y)
            }
            None => {
                let x = ex + rng.random::<f64>() * (area - 2.0 * ex);
                let y = ey + rng.random::<f64>() * (area - 2.0 * ey);
                (x, y)
            }
        };
        Ok(Highway { x, y, width: self.width, length, phi: self.phi })
    }
}
