//! Published coefficient tables: sigmoid LoS probability and large-scale
//! fading parameters per layout and environment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lsfmod::LsfParams;
use crate::plosmod::SigmoidParams;
use crate::urbgen::{EnvironmentClass, LayoutKind};
use crate::{Error, Result};

/// A table block: one of the four layouts or the pooled "combined" fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKey {
    Manhattan,
    Sru,
    Fuu,
    Heu,
    Combined,
}

impl LayoutKey {
    pub const ALL: [LayoutKey; 5] =
        [LayoutKey::Manhattan, LayoutKey::Sru, LayoutKey::Fuu, LayoutKey::Heu, LayoutKey::Combined];

    pub fn name(self) -> &'static str {
        match self {
            LayoutKey::Manhattan => "manhattan",
            LayoutKey::Sru => "sru",
            LayoutKey::Fuu => "fuu",
            LayoutKey::Heu => "heu",
            LayoutKey::Combined => "combined",
        }
    }
}

impl From<LayoutKind> for LayoutKey {
    fn from(k: LayoutKind) -> Self {
        match k {
            LayoutKind::Manhattan => LayoutKey::Manhattan,
            LayoutKind::Sru => LayoutKey::Sru,
            LayoutKind::Fuu => LayoutKey::Fuu,
            LayoutKind::Heu => LayoutKey::Heu,
        }
    }
}

impl fmt::Display for LayoutKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "combined" | "all" => Ok(LayoutKey::Combined),
            other => other
                .parse::<LayoutKind>()
                .map(LayoutKey::from)
                .map_err(|_| Error::UnknownCombination(format!("layout '{s}'"))),
        }
    }
}

/// One environment row of a layout block. Triples are `(start, limit, h0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub layout: LayoutKey,
    pub env: EnvironmentClass,
    pub sigmoid: [f64; 4],
    pub los_shadow: [f64; 3],
    /// NLoS PLE below the breakpoint (or over the full range).
    pub nlos_ple: [f64; 3],
    /// NLoS PLE above the 100 m breakpoint (suburban rows only).
    pub nlos_ple_upper: Option<[f64; 3]>,
    pub nlos_shadow: [f64; 3],
}

/// LoS path-loss exponent shared by every row.
pub const LOS_PLE: f64 = 2.0;

/// Height splitting the two suburban NLoS regimes, m.
pub const SUBURBAN_BREAKPOINT_M: f64 = 100.0;

/// Upper end of the tabulated height range, m.
pub const MAX_HEIGHT_M: f64 = 1000.0;

use EnvironmentClass::{DenseUrban, HighRise, Suburban, Urban};
use LayoutKey::{Combined, Fuu, Heu, Manhattan, Sru};

const fn row(
    layout: LayoutKey,
    env: EnvironmentClass,
    sigmoid: [f64; 4],
    los_shadow: [f64; 3],
    nlos_ple: [f64; 3],
    nlos_ple_upper: Option<[f64; 3]>,
    nlos_shadow: [f64; 3],
) -> TableRow {
    TableRow { layout, env, sigmoid, los_shadow, nlos_ple, nlos_ple_upper, nlos_shadow }
}

#[rustfmt::skip]
pub const TABLE: [TableRow; 20] = [
    row(Manhattan, Suburban,   [-5.776, 13.96, -12.28, 1.945],  [3.9, 1.2, 46.0],  [4.2, 2.65, 16.0],   Some([2.5, 2.91, 172.0]),  [14.6, 11.2, 15.0]),
    row(Manhattan, Urban,      [-3.579, 9.018, -9.537, 2.799],  [5.3, 2.2, 46.0],  [4.62, 2.75, 49.0],  None,                      [14.9, 12.8, 610.0]),
    row(Manhattan, DenseUrban, [-3.274, 8.074, -8.839, 3.342],  [5.7, 2.8, 80.0],  [4.62, 2.80, 91.0],  None,                      [16.2, 7.6, 7.0]),
    row(Manhattan, HighRise,   [-4.008, 9.809, -10.23, 4.849],  [5.5, 3.3, 327.0], [4.55, 2.55, 319.0], None,                      [11.5, 17.5, 40.0]),

    row(Sru, Suburban,         [-9.31, 20.71, -16.64, 2.78],    [3.4, 1.2, 58.0],  [4.48, 2.67, 15.0],  Some([2.5, 2.94, 167.0]),  [18.6, 11.5, 12.0]),
    row(Sru, Urban,            [-4.933, 12.40, -12.83, 4.049],  [4.5, 2.2, 44.0],  [4.90, 2.79, 42.0],  None,                      [18.5, 13.9, 58.0]),
    row(Sru, DenseUrban,       [-4.253, 11.13, -12.37, 4.827],  [4.3, 2.5, 72.0],  [4.86, 2.85, 74.0],  None,                      [18.4, 15.3, 171.0]),
    row(Sru, HighRise,         [-13.16, 37.89, -37.91, 13.73],  [4.2, 3.1, 325.0], [4.81, 2.64, 252.0], None,                      [16.5, 18.3, 8.0]),

    row(Fuu, Suburban,         [-16.54, 30.55, -19.85, 2.668],  [2.3, 0.6, 144.0], [4.04, 2.72, 19.0],  Some([2.54, 2.95, 124.0]), [24.0, 11.2, 16.0]),
    row(Fuu, Urban,            [-6.686, 16.24, -14.42, 3.726],  [2.4, 1.3, 219.0], [4.64, 2.89, 36.0],  None,                      [20.7, 13.2, 66.0]),
    row(Fuu, DenseUrban,       [-2.772, 8.748, -11.10, 4.276],  [2.8, 1.7, 133.0], [4.76, 2.94, 66.0],  None,                      [19.4, 12.8, 328.0]),
    row(Fuu, HighRise,         [-6.721, 18.93, -20.69, 8.675],  [3.2, 2.3, 260.0], [4.72, 2.74, 238.0], None,                      [21.7, 16.7, 182.0]),

    row(Heu, Suburban,         [-11.49, 23.93, -17.67, 2.468],  [2.3, 0.9, 132.0], [4.19, 2.78, 12.0],  Some([2.41, 2.94, 76.0]),  [22.7, 12.1, 11.0]),
    row(Heu, Urban,            [-7.536, 17.33, -15.02, 3.709],  [2.7, 1.7, 104.0], [4.65, 2.91, 37.0],  None,                      [21.0, 14.2, 66.0]),
    row(Heu, DenseUrban,       [-5.589, 14.63, -14.35, 4.083],  [3.2, 2.0, 76.0],  [4.62, 2.95, 57.0],  None,                      [20.6, 14.6, 182.0]),
    row(Heu, HighRise,         [-7.308, 21.05, -21.34, 7.568],  [3.2, 2.5, 306.0], [4.58, 2.80, 195.0], None,                      [22.3, 16.1, 356.0]),

    row(Combined, Suburban,    [-12.5, 24.25, -16.99, 2.25],    [3.1, 1.1, 69.0],  [4.28, 2.70, 14.0],  Some([2.53, 2.93, 138.0]), [19.0, 11.6, 12.0]),
    row(Combined, Urban,       [-4.66, 11.42, -11.45, 3.369],   [4.0, 1.9, 49.0],  [4.71, 2.82, 42.0],  None,                      [18.3, 14.0, 76.0]),
    row(Combined, DenseUrban,  [-3.922, 9.727, -10.19, 3.826],  [4.3, 2.3, 59.0],  [4.70, 2.87, 73.0],  None,                      [18.4, 14.3, 375.0]),
    row(Combined, HighRise,    [-3.929, 9.645, -10.26, 5.137],  [4.1, 2.8, 220.0], [4.64, 2.68, 253.0], None,                      [16.6, 18.5, 7.0]),
];

pub fn row_for(layout: LayoutKey, env: EnvironmentClass) -> &'static TableRow {
    TABLE
        .iter()
        .find(|r| r.layout == layout && r.env == env)
        .expect("table covers every layout and environment")
}

/// Looks up a row by layout and environment names.
pub fn lookup(layout: &str, env: &str) -> Result<&'static TableRow> {
    let layout: LayoutKey = layout.parse()?;
    let env: EnvironmentClass =
        env.parse().map_err(|_| Error::UnknownCombination(format!("environment '{env}'")))?;
    Ok(row_for(layout, env))
}

/// Full model for one table row, as dumped by the `tables` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub layout: LayoutKey,
    pub env: EnvironmentClass,
    pub sigmoid: SigmoidParams,
    pub lsf: LsfParams,
}

impl TableEntry {
    pub fn new(layout: LayoutKey, env: EnvironmentClass) -> Self {
        TableEntry {
            layout,
            env,
            sigmoid: crate::plosmod::builtin_sigmoid(layout, env),
            lsf: crate::lsfmod::builtin_lsf(layout, env),
        }
    }
}

pub fn all_entries() -> Vec<TableEntry> {
    TABLE.iter().map(|r| TableEntry::new(r.layout, r.env)).collect()
}
