//! Height-dependent large-scale fading: log-distance path loss with a PLE
//! and shadow-fading spread that both decay exponentially in ABS height.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geomlos::{Link, LinkDataset, LinkSample};
use crate::plosmod::SigmoidParams;
use crate::rng::{self, tag};
use crate::tables::{self, LayoutKey, LOS_PLE, MAX_HEIGHT_M, SUBURBAN_BREAKPOINT_M};
use crate::urbgen::EnvironmentClass;
use crate::{Error, Result};

/// Speed of light, m/s.
pub const C: f64 = 299_792_458.0;
pub const DEFAULT_FC_HZ: f64 = 26.0e9;
pub const DEFAULT_D0_M: f64 = 1.0;

/// `v_inf + (v0 - v_inf) * exp(-h / h0)`.
pub fn exp_decay(h: f64, v0: f64, v_inf: f64, h0: f64) -> f64 {
    v_inf + (v0 - v_inf) * (-h / h0).exp()
}

/// Free-space path loss at the reference distance, dB.
pub fn fspl_reference(fc: f64, d0: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * d0 * fc / C).log10()
}

/// PLE exponential on the height interval `(h_min, h_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightSegment {
    pub h_min: f64,
    pub h_max: f64,
    pub n0: f64,
    pub n_inf: f64,
    pub h0: f64,
}

impl HeightSegment {
    pub fn eval(&self, h: f64) -> f64 {
        exp_decay(h, self.n0, self.n_inf, self.h0)
    }

    pub fn contains(&self, h: f64) -> bool {
        h > self.h_min && h <= self.h_max
    }
}

/// Contiguous PLE segments, ascending in height.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PleModel {
    pub segments: Vec<HeightSegment>,
}

impl PleModel {
    pub fn single(n0: f64, n_inf: f64, h0: f64, h_max: f64) -> Self {
        PleModel { segments: vec![HeightSegment { h_min: 0.0, h_max, n0, n_inf, h0 }] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        let Some(first) = self.segments.first() else {
            return bad("PLE model has no segments".into());
        };
        if first.h_min != 0.0 {
            return bad(format!("first PLE segment starts at {} m, not 0", first.h_min));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.h_min < s.h_max && s.h0 > 0.0) {
                return bad(format!("PLE segment {i} is malformed"));
            }
            if i > 0 && self.segments[i - 1].h_max != s.h_min {
                return bad(format!("gap between PLE segments {} and {i}", i - 1));
            }
        }
        Ok(())
    }

    pub fn h_max(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.h_max)
    }
}

pub fn ple_at(h: f64, model: &PleModel) -> Result<f64> {
    model
        .segments
        .iter()
        .find(|s| s.contains(h))
        .map(|s| s.eval(h))
        .ok_or(Error::HeightOutOfRange(h))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowModel {
    pub sigma0: f64,
    pub sigma_inf: f64,
    pub h0: f64,
}

impl ShadowModel {
    pub fn from_triple([sigma0, sigma_inf, h0]: [f64; 3]) -> Self {
        ShadowModel { sigma0, sigma_inf, h0 }
    }
}

pub fn shadow_sigma_at(h: f64, model: &ShadowModel) -> f64 {
    exp_decay(h, model.sigma0, model.sigma_inf, model.h0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LosLsf {
    pub n: f64,
    pub shadow: ShadowModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlosLsf {
    pub ple: PleModel,
    pub shadow: ShadowModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsfParams {
    pub los: LosLsf,
    pub nlos: NlosLsf,
    #[serde(default = "default_d0")]
    pub d0: f64,
    #[serde(default = "default_fc")]
    pub fc: f64,
    #[serde(default)]
    pub obstacle_offset_db: f64,
}

fn default_d0() -> f64 {
    DEFAULT_D0_M
}

fn default_fc() -> f64 {
    DEFAULT_FC_HZ
}

impl LsfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0 && self.fc > 0.0) {
            return Err(Error::InvalidParams(format!("d0 = {}, fc = {}", self.d0, self.fc)));
        }
        if !(self.obstacle_offset_db >= 0.0) {
            return Err(Error::InvalidParams(format!("obstacle offset {} dB", self.obstacle_offset_db)));
        }
        self.nlos.ple.validate()
    }

    pub fn reference_loss(&self) -> f64 {
        fspl_reference(self.fc, self.d0)
    }

    pub fn ple(&self, los: bool, h: f64) -> Result<f64> {
        if los {
            Ok(self.los.n)
        } else {
            ple_at(h, &self.nlos.ple)
        }
    }

    pub fn sigma(&self, los: bool, h: f64) -> f64 {
        shadow_sigma_at(h, if los { &self.los.shadow } else { &self.nlos.shadow })
    }

    /// Zero-shadow path loss for one state, offset included for NLoS.
    pub fn state_mean(&self, los: bool, d: f64, h: f64) -> Result<f64> {
        let n = self.ple(los, h)?;
        let offset = if los { 0.0 } else { self.obstacle_offset_db };
        Ok(self.reference_loss() + 10.0 * n * (d / self.d0).log10() + offset)
    }
}

pub fn builtin_lsf(layout: LayoutKey, env: EnvironmentClass) -> LsfParams {
    let row = tables::row_for(layout, env);
    let [n0, n_inf, h0] = row.nlos_ple;
    let ple = match row.nlos_ple_upper {
        Some([m0, m_inf, g0]) => PleModel {
            segments: vec![
                HeightSegment { h_min: 0.0, h_max: SUBURBAN_BREAKPOINT_M, n0, n_inf, h0 },
                HeightSegment { h_min: SUBURBAN_BREAKPOINT_M, h_max: MAX_HEIGHT_M, n0: m0, n_inf: m_inf, h0: g0 },
            ],
        },
        None => PleModel::single(n0, n_inf, h0, MAX_HEIGHT_M),
    };
    LsfParams {
        los: LosLsf { n: LOS_PLE, shadow: ShadowModel::from_triple(row.los_shadow) },
        nlos: NlosLsf { ple, shadow: ShadowModel::from_triple(row.nlos_shadow) },
        d0: DEFAULT_D0_M,
        fc: DEFAULT_FC_HZ,
        obstacle_offset_db: 0.0,
    }
}

/// Sigmoid-weighted mix of the LoS and NLoS mean path losses.
pub fn mean_attenuation(d: f64, h: f64, theta: f64, sigmoid: &SigmoidParams, lsf: &LsfParams) -> Result<f64> {
    let p = sigmoid.eval(theta);
    let los = lsf.state_mean(true, d, h)?;
    let nlos = lsf.state_mean(false, d, h)?;
    Ok(p * los + (1.0 - p) * nlos)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub los: bool,
    pub pathloss_db: f64,
    pub shadow_db: f64,
}

/// How the LoS state of a sampled link is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LosDraw {
    Fixed(bool),
    Sigmoid(SigmoidParams),
}

/// Samples one realization at distance `d`, ABS height `h`, elevation `theta`.
pub fn sample_channel_at<R: Rng + ?Sized>(
    d: f64,
    h: f64,
    theta: f64,
    state: LosDraw,
    lsf: &LsfParams,
    rng: &mut R,
) -> Result<ChannelSample> {
    let los = match state {
        LosDraw::Fixed(b) => b,
        LosDraw::Sigmoid(s) => rng.random::<f64>() < s.eval(theta),
    };
    let z: f64 = rng.sample(StandardNormal);
    let shadow_db = lsf.sigma(los, h) * z;
    let pathloss_db = lsf.state_mean(los, d, h)? + shadow_db;
    Ok(ChannelSample { los, pathloss_db, shadow_db })
}

pub fn sample_channel<R: Rng + ?Sized>(link: &Link, state: LosDraw, lsf: &LsfParams, rng: &mut R) -> Result<ChannelSample> {
    sample_channel_at(link.d, link.abs.z, link.theta, state, lsf, rng)
}

/// LoS state source when synthesizing path loss over a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LosMode {
    /// Geometric LoS flag of each link.
    Data,
    /// Bernoulli draw from the sigmoid.
    Sigmoid,
    /// Every link LoS.
    Los,
    /// Every link NLoS.
    Nlos,
}

impl std::str::FromStr for LosMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "data" => Ok(LosMode::Data),
            "sigmoid" => Ok(LosMode::Sigmoid),
            "los" => Ok(LosMode::Los),
            "nlos" => Ok(LosMode::Nlos),
            _ => Err(Error::InvalidParams(format!("unknown LoS mode '{s}'"))),
        }
    }
}

/// Sigmoid plus LSF parameters; either part may come from a table or a fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvironmentClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmoid: Option<SigmoidParams>,
    pub lsf: LsfParams,
}

impl ChannelModelParams {
    pub fn builtin(layout: LayoutKey, env: EnvironmentClass) -> Self {
        ChannelModelParams {
            layout: Some(layout),
            env: Some(env),
            sigmoid: Some(crate::plosmod::builtin_sigmoid(layout, env)),
            lsf: builtin_lsf(layout, env),
        }
    }

    pub fn draw_for(&self, mode: LosMode, sample: &LinkSample) -> Result<LosDraw> {
        Ok(match mode {
            LosMode::Data => LosDraw::Fixed(sample.los),
            LosMode::Los => LosDraw::Fixed(true),
            LosMode::Nlos => LosDraw::Fixed(false),
            LosMode::Sigmoid => LosDraw::Sigmoid(
                self.sigmoid.ok_or_else(|| Error::InvalidParams("sigmoid LoS mode needs sigmoid parameters".into()))?,
            ),
        })
    }
}

/// Fills `pathloss_db`, `shadow_db` and `los_model` for every link. Draws
/// come from one stream in dataset order.
pub fn synthesize(dataset: &LinkDataset, model: &ChannelModelParams, mode: LosMode, seed: u64) -> Result<LinkDataset> {
    model.lsf.validate()?;
    let mut rng = rng::substream(seed, &[tag::CHANNEL]);
    let samples = dataset
        .samples
        .iter()
        .map(|s| {
            let c = sample_channel_at(s.d_m, s.height_m, s.theta_rad, model.draw_for(mode, s)?, &model.lsf, &mut rng)?;
            Ok(LinkSample { pathloss_db: Some(c.pathloss_db), shadow_db: Some(c.shadow_db), los_model: Some(c.los), ..s.clone() })
        })
        .collect::<Result<_>>()?;
    Ok(LinkDataset { samples })
}

/// Geometry-only links around an ABS at the origin: horizontal distance
/// log-uniform on `[r_min, r_max]`, uniform azimuth. The geometric LoS flag
/// is left false.
pub fn synthetic_links(heights: &[f64], per_height: usize, r_min: f64, r_max: f64, gu_height: f64, seed: u64) -> Result<LinkDataset> {
    if !(r_min > 0.0 && r_max >= r_min) {
        return Err(Error::InvalidParams(format!("radius range [{r_min}, {r_max}]")));
    }
    let mut rng = rng::substream(seed, &[tag::SYNTH]);
    let (lo, hi) = (r_min.ln(), r_max.ln());
    let mut samples = Vec::with_capacity(heights.len() * per_height);
    for &h in heights {
        if h <= gu_height {
            return Err(Error::DegenerateLink { abs_z: h, gu_z: gu_height });
        }
        for _ in 0..per_height {
            let r = (lo + (hi - lo) * rng.random::<f64>()).exp();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let dz = h - gu_height;
            samples.push(LinkSample {
                height_m: h,
                city_id: 0,
                abs_x: 0.0,
                abs_y: 0.0,
                gu_x: r * phi.cos(),
                gu_y: r * phi.sin(),
                r_m: r,
                d_m: r.hypot(dz),
                theta_rad: dz.atan2(r),
                los: false,
                pathloss_db: None,
                shadow_db: None,
                los_model: None,
            });
        }
    }
    Ok(LinkDataset { samples })
}
