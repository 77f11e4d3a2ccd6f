use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::LinkSample;
use crate::{Error, Result};

/// 2 degrees.
pub const DEFAULT_BIN_WIDTH: f64 = std::f64::consts::PI / 90.0;
pub const DEFAULT_MIN_COUNT: u64 = 50;

/// Empirical LoS probability over uniform elevation bins. Only bins that
/// saw at least one link are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlosCurve {
    pub bin_width: f64,
    pub min_count: u64,
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    pub n_los: Vec<u64>,
    pub n_total: Vec<u64>,
}

impl PlosCurve {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Bins with enough samples to be used for fitting.
    pub fn reliable(&self, k: usize) -> bool {
        self.n_total[k] >= self.min_count
    }

    pub fn reliable_bins(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.reliable(k)).collect()
    }

    /// Builds a curve directly from per-bin counts (bins must be sorted).
    pub fn from_counts(bin_width: f64, min_count: u64, bins: Vec<(f64, u64, u64)>) -> Self {
        let mut c = PlosCurve { bin_width, min_count, theta: vec![], p: vec![], n_los: vec![], n_total: vec![] };
        for (theta, n_los, n_total) in bins {
            c.theta.push(theta);
            c.n_los.push(n_los);
            c.n_total.push(n_total);
            c.p.push(if n_total == 0 { 0.0 } else { n_los as f64 / n_total as f64 });
        }
        c
    }
}

/// Bins links by elevation and reports `N_LoS / N_Total` per bin.
pub fn empirical_plos(samples: &[LinkSample], bin_width: f64, min_count: u64) -> Result<PlosCurve> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(bin_width > 0.0 && bin_width <= FRAC_PI_2) {
        return Err(Error::InvalidParams(format!("bin width {bin_width} rad")));
    }
    let nbins = ((FRAC_PI_2 / bin_width - 1e-9).ceil() as usize).max(1);
    let mut los = vec![0_u64; nbins];
    let mut total = vec![0_u64; nbins];
    for s in samples {
        let k = ((s.theta_rad / bin_width).floor().max(0.0) as usize).min(nbins - 1);
        total[k] += 1;
        los[k] += s.los as u64;
    }
    let bins = (0..nbins)
        .filter(|&k| total[k] > 0)
        .map(|k| ((k as f64 + 0.5) * bin_width, los[k], total[k]))
        .collect();
    Ok(PlosCurve::from_counts(bin_width, min_count, bins))
}
