//! Link geometry, line-of-sight decisions and Monte Carlo campaigns.

mod campaign;
mod los;
mod plos;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use campaign::{
    gu_grid, log_spaced, run_campaign, run_campaign_all, CampaignConfig, HeightSpec, LinkDataset,
    LinkSample, Spacing,
};
pub use los::{is_los, segment_hits_box, segment_hits_building, LosIndex};
pub use plos::{empirical_plos, PlosCurve, DEFAULT_BIN_WIDTH, DEFAULT_MIN_COUNT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// ABS to ground-user geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub abs: Position3D,
    pub gu: Position3D,
    /// Horizontal distance, m.
    pub r: f64,
    /// 3D distance, m.
    pub d: f64,
    /// Elevation angle seen from the ground user, rad.
    pub theta: f64,
}

pub fn link_geometry(abs: Position3D, gu: Position3D) -> Result<Link> {
    let dh = abs.z - gu.z;
    if !(dh > 0.0) {
        return Err(Error::DegenerateLink { abs_z: abs.z, gu_z: gu.z });
    }
    let r = (abs.x - gu.x).hypot(abs.y - gu.y);
    let d = r.hypot(dh);
    let theta = if r == 0.0 { FRAC_PI_2 } else { (dh / r).atan() };
    Ok(Link { abs, gu, r, d, theta })
}
