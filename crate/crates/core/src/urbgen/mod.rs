//! Urban layout generation from built-up parameters.
//!
//! All four layout families share the same `(alpha, beta, gamma)` and differ
//! only in how the built area is arranged:
//!
//! - **Manhattan**: identical square buildings on a regular grid.
//! - **SRU**: one building per Manhattan grid cell with randomized area and
//!   aspect ratio.
//! - **FUU**: Dirichlet-distributed areas scattered freely without overlap.
//! - **HEU**: FUU around reserved highway corridors.
//!
//! Every generator is a pure function of its inputs and seed.

mod grid;
mod highway;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::rng::{self, tag};
use crate::{Error, Result};

pub use grid::{Cell, OccupancyGrid, RectIndex};
pub use highway::{Highway, HighwaySpec};

/// Reference area the built-up parameters are defined over (1 km^2).
const KM2: f64 = 1.0e6;

/// Built-up parameters of an environment class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuiltUpParams {
    /// Fraction of land covered by buildings.
    pub alpha: f64,
    /// Buildings per km^2.
    pub beta: f64,
    /// Rayleigh scale of building height, m.
    pub gamma: f64,
}

impl BuiltUpParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if !(self.beta >= 1.0) {
            return Err(Error::InvalidParams(format!("beta {} < 1", self.beta)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma {} not positive", self.gamma)));
        }
        Ok(())
    }

    /// Average building footprint, m^2.
    pub fn mean_building_area(&self) -> f64 {
        self.alpha * KM2 / self.beta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentClass {
    Suburban,
    Urban,
    DenseUrban,
    HighRise,
}

impl EnvironmentClass {
    pub const ALL: [EnvironmentClass; 4] = [
        EnvironmentClass::Suburban,
        EnvironmentClass::Urban,
        EnvironmentClass::DenseUrban,
        EnvironmentClass::HighRise,
    ];

    pub fn params(self) -> BuiltUpParams {
        let (alpha, beta, gamma) = match self {
            EnvironmentClass::Suburban => (0.1, 750.0, 8.0),
            EnvironmentClass::Urban => (0.3, 500.0, 15.0),
            EnvironmentClass::DenseUrban => (0.5, 300.0, 20.0),
            EnvironmentClass::HighRise => (0.5, 300.0, 50.0),
        };
        BuiltUpParams { alpha, beta, gamma }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvironmentClass::Suburban => "suburban",
            EnvironmentClass::Urban => "urban",
            EnvironmentClass::DenseUrban => "dense-urban",
            EnvironmentClass::HighRise => "high-rise",
        }
    }
}

impl fmt::Display for EnvironmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvironmentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "suburban" => Ok(Self::Suburban),
            "urban" => Ok(Self::Urban),
            "dense-urban" | "denseurban" => Ok(Self::DenseUrban),
            "high-rise" | "highrise" => Ok(Self::HighRise),
            other => Err(Error::InvalidParams(format!("unknown environment '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Manhattan,
    Sru,
    Fuu,
    Heu,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 4] =
        [LayoutKind::Manhattan, LayoutKind::Sru, LayoutKind::Fuu, LayoutKind::Heu];

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Manhattan => "manhattan",
            LayoutKind::Sru => "sru",
            LayoutKind::Fuu => "fuu",
            LayoutKind::Heu => "heu",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "manhattan" => Ok(Self::Manhattan),
            "sru" => Ok(Self::Sru),
            "fuu" => Ok(Self::Fuu),
            "heu" => Ok(Self::Heu),
            other => Err(Error::InvalidParams(format!("unknown layout '{other}'"))),
        }
    }
}

/// Axis-aligned building prism: footprint `[x, x+width] x [y, y+length]`,
/// extruded from the ground to `height`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "l")]
    pub length: f64,
    #[serde(rename = "h")]
    pub height: f64,
}

impl Building {
    pub fn footprint_area(&self) -> f64 {
        self.width * self.length
    }

    /// Closed-footprint containment.
    pub fn covers(&self, px: f64, py: f64) -> bool {
        px >= self.x && px <= self.x + self.width && py >= self.y && py <= self.y + self.length
    }

    /// True when the footprints share interior area (touching edges do not
    /// count).
    pub fn overlaps(&self, other: &Building) -> bool {
        self.x < other.x + other.width
            && other.x < self.x + self.width
            && self.y < other.y + other.length
            && other.y < self.y + self.length
    }

    /// Exact area of the footprint intersection.
    pub fn intersection_area(&self, other: &Building) -> f64 {
        let w = (self.x + self.width).min(other.x + other.width) - self.x.max(other.x);
        let l = (self.y + self.length).min(other.y + other.length) - self.y.max(other.y);
        w.max(0.0) * l.max(0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutMeta {
    /// Number of buildings actually placed.
    pub effective_count: usize,
    /// SRU footprints shrunk to fit their grid cell.
    pub shrink_events: usize,
    /// Built area the generator aimed for (A_beta, or A'_beta for HEU), m^2.
    pub target_built_area_m2: f64,
    /// Summed highway area A_H, m^2.
    #[serde(default)]
    pub highway_area_m2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CityLayout {
    pub kind: LayoutKind,
    pub area_m: f64,
    pub seed: u64,
    pub env: BuiltUpParams,
    pub buildings: Vec<Building>,
    #[serde(default)]
    pub highways: Vec<Highway>,
    pub meta: LayoutMeta,
}

impl CityLayout {
    /// An obstacle-free area, handy for geometry checks.
    pub fn empty(area_m: f64) -> Self {
        CityLayout {
            kind: LayoutKind::Fuu,
            area_m,
            seed: 0,
            env: EnvironmentClass::Suburban.params(),
            buildings: Vec::new(),
            highways: Vec::new(),
            meta: LayoutMeta::default(),
        }
    }

    pub fn built_area(&self) -> f64 {
        self.buildings.iter().map(Building::footprint_area).sum()
    }

    pub fn max_height(&self) -> f64 {
        self.buildings.iter().map(|b| b.height).fold(0.0, f64::max)
    }
}

/// Options that only some layout kinds read.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutOptions {
    /// Highways for HEU. `None` selects [`HighwaySpec::defaults`] with two
    /// 40 m corridors.
    #[serde(default)]
    pub highways: Option<Vec<HighwaySpec>>,
}

/// Manhattan building width `W` and street width `S`, in meters.
pub fn manhattan_dims(params: &BuiltUpParams) -> Result<(f64, f64)> {
    let width = 1000.0 * (params.alpha / params.beta).sqrt();
    let street = 1000.0 * (1.0 / params.beta).sqrt() - width;
    if street <= 0.0 {
        return Err(Error::NonPositiveStreet { street });
    }
    params.validate()?;
    Ok((width, street))
}

/// Rayleigh quantile: the height below which a fraction `u` of buildings lie.
pub fn rayleigh_quantile(u: f64, gamma: f64) -> f64 {
    gamma * (-2.0 * (-u).ln_1p()).sqrt()
}

pub fn rayleigh_cdf(h: f64, gamma: f64) -> f64 {
    if h <= 0.0 {
        0.0
    } else {
        1.0 - (-(h * h) / (2.0 * gamma * gamma)).exp()
    }
}

/// Draws a building height from the Rayleigh law with scale `gamma`.
/// Zero is never returned.
pub fn sample_height<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return rayleigh_quantile(u, gamma);
        }
    }
}

/// Area and width of one SRU building for uniform draw `r`.
pub fn sru_footprint(mean_area: f64, r: f64) -> (f64, f64, f64) {
    let area = mean_area * (0.6 + 0.8 * r);
    let width = area.sqrt() * (0.5 + r);
    (area, width, area / width)
}

fn check_area(area: f64) -> Result<()> {
    if area > 0.0 && area.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("area side {area} m must be positive")))
    }
}

fn layout_rng(seed: u64) -> rng::SimRng {
    rng::substream(seed, &[tag::LAYOUT])
}

pub fn generate_manhattan(params: &BuiltUpParams, area: f64, seed: u64) -> Result<CityLayout> {
    check_area(area)?;
    let (width, street) = manhattan_dims(params)?;
    let pitch = width + street;
    let per_axis = (area / pitch + 1e-9).floor() as usize;
    let mut rng = layout_rng(seed);
    let mut buildings = Vec::with_capacity(per_axis * per_axis);
    for j in 0..per_axis {
        for i in 0..per_axis {
            buildings.push(Building {
                x: i as f64 * pitch + street / 2.0,
                y: j as f64 * pitch + street / 2.0,
                width,
                length: width,
                height: sample_height(params.gamma, &mut rng),
            });
        }
    }
    let meta = LayoutMeta {
        effective_count: buildings.len(),
        shrink_events: 0,
        target_built_area_m2: params.alpha * area * area,
        highway_area_m2: 0.0,
    };
    Ok(CityLayout { kind: LayoutKind::Manhattan, area_m: area, seed, env: *params, buildings, highways: vec![], meta })
}

/// Street margin kept inside each SRU cell, m.
const SRU_MARGIN: f64 = 1.0;

pub fn generate_sru(params: &BuiltUpParams, area: f64, seed: u64) -> Result<CityLayout> {
    check_area(area)?;
    let (width, street) = manhattan_dims(params)?;
    let pitch = width + street;
    let room = pitch - SRU_MARGIN;
    if room <= 0.0 {
        return Err(Error::CellOverflow { pitch });
    }
    let per_axis = (area / pitch + 1e-9).floor() as usize;
    let mean_area = params.mean_building_area();
    let mut rng = layout_rng(seed);
    let mut buildings = Vec::with_capacity(per_axis * per_axis);
    let mut shrink_events = 0;
    for j in 0..per_axis {
        for i in 0..per_axis {
            let r: f64 = rng.random();
            let (_, mut w, mut l) = sru_footprint(mean_area, r);
            let scale = (room / w).min(room / l);
            if scale < 1.0 {
                w *= scale;
                l *= scale;
                shrink_events += 1;
            }
            let x = i as f64 * pitch + SRU_MARGIN / 2.0 + rng.random::<f64>() * (room - w);
            let y = j as f64 * pitch + SRU_MARGIN / 2.0 + rng.random::<f64>() * (room - l);
            let height = sample_height(params.gamma, &mut rng);
            buildings.push(Building { x, y, width: w, length: l, height });
        }
    }
    let meta = LayoutMeta {
        effective_count: buildings.len(),
        shrink_events,
        target_built_area_m2: params.alpha * area * area,
        highway_area_m2: 0.0,
    };
    Ok(CityLayout { kind: LayoutKind::Sru, area_m: area, seed, env: *params, buildings, highways: vec![], meta })
}

/// `n` areas from a flat Dirichlet, scaled to sum to `total`.
pub fn dirichlet_areas<R: Rng + ?Sized>(n: usize, total: f64, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|e| total * e / sum).collect()
}

const PLACEMENT_TRIES: usize = 1000;
const ASPECT_REDRAWS: usize = 10;
const MAX_ASPECT: f64 = 4.0;

fn scatter(
    params: &BuiltUpParams,
    area: f64,
    built_area: f64,
    grid: &mut OccupancyGrid,
    highways: &[Highway],
    rng: &mut rng::SimRng,
) -> Result<Vec<Building>> {
    let count = ((params.beta * area * area / KM2).round() as usize).max(1);
    let areas = dirichlet_areas(count, built_area, rng);
    let mut order: Vec<usize> = (0..count).collect();
    // Largest first: big footprints need the most free space.
    order.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]).then(a.cmp(&b)));

    let mut index = RectIndex::new(area, 16.0);
    let mut placed: Vec<Building> = Vec::with_capacity(count);
    for &k in &order {
        let a = areas[k];
        let mut done = false;
        'aspect: for _ in 0..ASPECT_REDRAWS {
            let r: f64 = rng.random();
            let mut w = a.sqrt() * (0.5 + r);
            let aspect = (w * w / a).clamp(1.0 / MAX_ASPECT, MAX_ASPECT);
            w = (a * aspect).sqrt();
            let l = a / w;
            if w > area || l > area {
                continue;
            }
            for _ in 0..PLACEMENT_TRIES {
                let candidate = Building {
                    x: rng.random::<f64>() * (area - w),
                    y: rng.random::<f64>() * (area - l),
                    width: w,
                    length: l,
                    height: 0.0,
                };
                if grid.admits(&candidate)
                    && !index.overlaps_any(&candidate, &placed)
                    && !highways.iter().any(|h| {
                        h.overlaps_rect(candidate.x, candidate.y, candidate.x + w, candidate.y + l)
                    })
                {
                    let b = Building { height: sample_height(params.gamma, rng), ..candidate };
                    grid.mark_building(&b);
                    index.insert(placed.len(), &b);
                    placed.push(b);
                    done = true;
                    break 'aspect;
                }
            }
        }
        if !done {
            return Err(Error::PlacementExhausted { index: k, area: a });
        }
    }
    Ok(placed)
}

pub fn generate_fuu(params: &BuiltUpParams, area: f64, seed: u64) -> Result<CityLayout> {
    let mut layout = generate_heu(params, area, &[], seed)?;
    layout.kind = LayoutKind::Fuu;
    Ok(layout)
}

pub fn generate_heu(
    params: &BuiltUpParams,
    area: f64,
    highways: &[HighwaySpec],
    seed: u64,
) -> Result<CityLayout> {
    params.validate()?;
    check_area(area)?;
    let total = area * area;
    let built = params.alpha * total;
    let mut rng = layout_rng(seed);
    let highways: Vec<Highway> = highways
        .iter()
        .map(|spec| spec.resolve(area, &mut rng))
        .collect::<Result<_>>()?;
    let highway_area: f64 = highways.iter().map(Highway::area).sum();
    if !highways.is_empty() {
        let limit = (total - built).min(built);
        if highway_area >= limit {
            return Err(Error::HighwayTooLarge { highway_area, limit });
        }
    }
    let target = built - highway_area;

    let mut grid = OccupancyGrid::new(area);
    for h in &highways {
        grid.mark_highway(h);
    }
    let buildings = scatter(params, area, target, &mut grid, &highways, &mut rng)?;
    let meta = LayoutMeta {
        effective_count: buildings.len(),
        shrink_events: 0,
        target_built_area_m2: target,
        highway_area_m2: highway_area,
    };
    Ok(CityLayout { kind: LayoutKind::Heu, area_m: area, seed, env: *params, buildings, highways, meta })
}

/// Dispatches on the layout kind.
pub fn generate(
    kind: LayoutKind,
    params: &BuiltUpParams,
    area: f64,
    seed: u64,
    options: &LayoutOptions,
) -> Result<CityLayout> {
    match kind {
        LayoutKind::Manhattan => generate_manhattan(params, area, seed),
        LayoutKind::Sru => generate_sru(params, area, seed),
        LayoutKind::Fuu => generate_fuu(params, area, seed),
        LayoutKind::Heu => {
            let specs = options.highways.clone().unwrap_or_else(|| HighwaySpec::defaults(2, 40.0));
            generate_heu(params, area, &specs, seed)
        }
    }
}
