use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{link_geometry, LosIndex, Position3D};
use crate::rng::{self, tag};
use crate::urbgen::{self, EnvironmentClass, LayoutKind, LayoutOptions};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// ABS heights, either explicit or generated over a range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HeightSpec {
    List(Vec<f64>),
    Range { count: usize, min_m: f64, max_m: f64, spacing: Spacing },
}

impl Default for HeightSpec {
    fn default() -> Self {
        HeightSpec::Range { count: 30, min_m: 5.0, max_m: 1000.0, spacing: Spacing::Log }
    }
}

pub fn log_spaced(count: usize, min: f64, max: f64) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                min
            } else if i == count - 1 {
                max
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

impl HeightSpec {
    /// Heights in ascending order.
    pub fn heights(&self) -> Vec<f64> {
        let mut hs = match self {
            HeightSpec::List(v) => v.clone(),
            HeightSpec::Range { count, min_m, max_m, spacing } => match spacing {
                Spacing::Log => log_spaced(*count, *min_m, *max_m),
                Spacing::Linear => (0..*count)
                    .map(|i| {
                        if *count == 1 {
                            *min_m
                        } else {
                            min_m + (max_m - min_m) * i as f64 / (*count - 1) as f64
                        }
                    })
                    .collect(),
            },
        };
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        hs
    }
}

fn default_area() -> f64 {
    1000.0
}
fn default_pitch() -> f64 {
    20.0
}
fn default_gu_height() -> f64 {
    1.5
}
fn default_cities() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    /// Layout families pooled into each environment's dataset.
    pub layouts: Vec<LayoutKind>,
    pub envs: Vec<EnvironmentClass>,
    #[serde(default = "default_area")]
    pub area_m: f64,
    #[serde(default = "default_pitch")]
    pub gu_pitch_m: f64,
    #[serde(default = "default_gu_height")]
    pub gu_height_m: f64,
    #[serde(default)]
    pub heights: HeightSpec,
    #[serde(default = "default_cities")]
    pub cities_per_height: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub layout_options: LayoutOptions,
}

impl CampaignConfig {
    pub fn new(layouts: Vec<LayoutKind>, envs: Vec<EnvironmentClass>) -> Self {
        CampaignConfig {
            layouts,
            envs,
            area_m: default_area(),
            gu_pitch_m: default_pitch(),
            gu_height_m: default_gu_height(),
            heights: HeightSpec::default(),
            cities_per_height: default_cities(),
            seed: None,
            layout_options: LayoutOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.layouts.is_empty() || self.envs.is_empty() {
            return bad("campaign needs at least one layout and one environment".into());
        }
        if !(self.area_m > 0.0) {
            return bad(format!("area {} must be positive", self.area_m));
        }
        if !(self.gu_pitch_m > 0.0) {
            return bad(format!("GU pitch {} must be positive", self.gu_pitch_m));
        }
        if !(self.gu_height_m >= 0.0) {
            return bad(format!("GU height {} must be non-negative", self.gu_height_m));
        }
        if self.cities_per_height == 0 {
            return bad("cities per height must be at least 1".into());
        }
        let hs = self.heights.heights();
        if hs.is_empty() {
            return bad("no ABS heights".into());
        }
        if let Some(h) = hs.iter().find(|&&h| !(h > self.gu_height_m && h <= 1.0e4)) {
            return bad(format!("ABS height {h} outside ({}, 1e4] m", self.gu_height_m));
        }
        Ok(())
    }
}

/// One ABS-GU link record.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSample {
    pub height_m: f64,
    pub city_id: u32,
    pub abs_x: f64,
    pub abs_y: f64,
    pub gu_x: f64,
    pub gu_y: f64,
    pub r_m: f64,
    pub d_m: f64,
    pub theta_rad: f64,
    /// Geometric LoS flag.
    pub los: bool,
    pub pathloss_db: Option<f64>,
    pub shadow_db: Option<f64>,
    /// LoS state used when the path loss was synthesized.
    pub los_model: Option<bool>,
}

impl LinkSample {
    /// The LoS state that goes with `pathloss_db`.
    pub fn channel_los(&self) -> bool {
        self.los_model.unwrap_or(self.los)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkDataset {
    pub samples: Vec<LinkSample>,
}

impl LinkDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct heights, ascending.
    pub fn heights(&self) -> Vec<f64> {
        let mut hs: Vec<f64> = self.samples.iter().map(|s| s.height_m).collect();
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        hs
    }

    pub fn has_pathloss(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.pathloss_db.is_some())
    }
}

/// Ground-user grid points `(i * pitch, j * pitch)` inside the area.
pub fn gu_grid(area: f64, pitch: f64) -> Vec<(f64, f64)> {
    let n = (area / pitch + 1e-9).floor() as usize + 1;
    (0..n)
        .flat_map(|j| (0..n).map(move |i| (i as f64 * pitch, j as f64 * pitch)))
        .collect()
}

const ABS_REDRAWS: usize = 10_000;

#[derive(Clone, Copy)]
struct Unit {
    height_index: usize,
    layout_index: usize,
    city: usize,
}

fn run_unit(
    config: &CampaignConfig,
    env_index: usize,
    env: EnvironmentClass,
    heights: &[f64],
    grid: &[(f64, f64)],
    master: u64,
    u: Unit,
) -> Result<Vec<LinkSample>> {
    let kind = config.layouts[u.layout_index];
    let path = [env_index as u64, u.height_index as u64, u.layout_index as u64, u.city as u64];
    let layout_seed = rng::derive_seed(master, &[tag::LAYOUT, path[0], path[1], path[2], path[3]]);
    let layout = urbgen::generate(kind, &env.params(), config.area_m, layout_seed, &config.layout_options)?;
    let index = LosIndex::new(&layout);
    let h = heights[u.height_index];

    let mut rng = rng::substream(master, &[tag::ABS_POSITION, path[0], path[1], path[2], path[3]]);
    let mut abs = None;
    for _ in 0..ABS_REDRAWS {
        let p = Position3D::new(rng.random::<f64>() * config.area_m, rng.random::<f64>() * config.area_m, h);
        if index.volume_at(&p).is_none() {
            abs = Some(p);
            break;
        }
    }
    let abs = abs.ok_or_else(|| {
        Error::InvalidParams(format!("no free ABS position at {h} m after {ABS_REDRAWS} draws"))
    })?;

    let city_id = (u.layout_index * config.cities_per_height + u.city) as u32;
    let mut out = Vec::with_capacity(grid.len());
    for &(x, y) in grid {
        if index.footprint_at(x, y).is_some() {
            continue;
        }
        let gu = Position3D::new(x, y, config.gu_height_m);
        let link = link_geometry(abs, gu)?;
        let los = index.is_los(&abs, &gu)?;
        out.push(LinkSample {
            height_m: h,
            city_id,
            abs_x: abs.x,
            abs_y: abs.y,
            gu_x: x,
            gu_y: y,
            r_m: link.r,
            d_m: link.d,
            theta_rad: link.theta,
            los,
            pathloss_db: None,
            shadow_db: None,
            los_model: None,
        });
    }
    Ok(out)
}

fn campaign_for(config: &CampaignConfig, env_index: usize, master: u64) -> Result<LinkDataset> {
    let env = config.envs[env_index];
    let heights = config.heights.heights();
    let grid = gu_grid(config.area_m, config.gu_pitch_m);
    let units: Vec<Unit> = (0..heights.len())
        .flat_map(|height_index| {
            (0..config.layouts.len()).flat_map(move |layout_index| {
                (0..config.cities_per_height).map(move |city| Unit { height_index, layout_index, city })
            })
        })
        .collect();
    // Ordered collect: output order is (height, layout, city) regardless of
    // which worker finished first.
    let parts: Vec<Vec<LinkSample>> = units
        .par_iter()
        .map(|&u| run_unit(config, env_index, env, &heights, &grid, master, u))
        .collect::<Result<_>>()?;
    Ok(LinkDataset { samples: parts.into_iter().flatten().collect() })
}

/// Runs the campaign for one environment of `config`.
pub fn run_campaign(config: &CampaignConfig, env: EnvironmentClass, master: u64) -> Result<LinkDataset> {
    config.validate()?;
    let env_index = config
        .envs
        .iter()
        .position(|&e| e == env)
        .ok_or_else(|| Error::InvalidParams(format!("environment {env} not in campaign config")))?;
    campaign_for(config, env_index, master)
}

/// Runs every environment of `config`, in config order.
pub fn run_campaign_all(config: &CampaignConfig, master: u64) -> Result<Vec<(EnvironmentClass, LinkDataset)>> {
    config.validate()?;
    (0..config.envs.len())
        .map(|i| Ok((config.envs[i], campaign_for(config, i, master)?)))
        .collect()
}
