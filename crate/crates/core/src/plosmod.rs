//! Elevation-based LoS probability: the four-coefficient sigmoid
//! `P(theta) = 1 / (1 + exp(x1 theta^3 + x2 theta^2 + x3 theta + x4))`
//! with `theta` in radians.

use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geomlos::PlosCurve;
use crate::optim::NelderMead;
use crate::rng::{self, tag};
use crate::tables::{self, LayoutKey};
use crate::urbgen::EnvironmentClass;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl SigmoidParams {
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x2, x3, x4 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    /// Polynomial inside the exponential.
    pub fn exponent(&self, theta: f64) -> f64 {
        ((self.x1 * theta + self.x2) * theta + self.x3) * theta + self.x4
    }

    pub fn eval(&self, theta: f64) -> f64 {
        sigmoid_plos(theta, self)
    }
}

pub fn sigmoid_plos(theta: f64, params: &SigmoidParams) -> f64 {
    1.0 / (1.0 + params.exponent(theta).exp())
}

pub fn builtin_sigmoid(layout: LayoutKey, env: EnvironmentClass) -> SigmoidParams {
    let [x1, x2, x3, x4] = tables::row_for(layout, env).sigmoid;
    SigmoidParams::new(x1, x2, x3, x4)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Unweighted RMSE over the fitted bins, probability units.
    pub rmse: f64,
    /// RMSE weighted by bin counts.
    pub weighted_rmse: f64,
    pub iters: usize,
    pub bins_used: usize,
    pub converged: bool,
    /// Declared acceptance tolerance for `rmse`.
    pub rmse_tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub min_bins: usize,
    pub min_span: f64,
    pub restarts: usize,
    pub rmse_tolerance: f64,
    pub initial: SigmoidParams,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            min_bins: 8,
            min_span: 40f64.to_radians(),
            restarts: 5,
            rmse_tolerance: 0.05,
            initial: SigmoidParams::new(-5.0, 12.0, -12.0, 4.0),
        }
    }
}

/// Weighted least squares on the logit of the empirical probabilities. A
/// linear problem whose solution is a good simplex starting point.
fn logit_start(theta: &[f64], p: &[f64], n: &[f64]) -> Option<SigmoidParams> {
    let mut ata = Matrix4::<f64>::zeros();
    let mut aty = Vector4::<f64>::zeros();
    for ((&t, &pk), &nk) in theta.iter().zip(p).zip(n) {
        let lo = 0.5 / nk.max(1.0);
        let pc = pk.clamp(lo, 1.0 - lo);
        let y = ((1.0 - pc) / pc).ln();
        let w = nk * pc * (1.0 - pc);
        let row = Vector4::new(t * t * t, t * t, t, 1.0);
        ata += w * row * row.transpose();
        aty += w * y * row;
    }
    let x = ata.lu().solve(&aty)?;
    x.iter().all(|v| v.is_finite()).then(|| SigmoidParams::new(x[0], x[1], x[2], x[3]))
}

/// Count-weighted least-squares fit of the sigmoid to the reliable bins of
/// an empirical curve.
pub fn fit_sigmoid(curve: &PlosCurve) -> Result<(SigmoidParams, FitDiagnostics)> {
    fit_sigmoid_with(curve, &FitOptions::default())
}

pub fn fit_sigmoid_with(curve: &PlosCurve, opts: &FitOptions) -> Result<(SigmoidParams, FitDiagnostics)> {
    let bins = curve.reliable_bins();
    if bins.len() < opts.min_bins {
        return Err(Error::InsufficientBins(format!(
            "{} bins with at least {} links, need {}",
            bins.len(),
            curve.min_count,
            opts.min_bins
        )));
    }
    let theta: Vec<f64> = bins.iter().map(|&k| curve.theta[k]).collect();
    let p: Vec<f64> = bins.iter().map(|&k| curve.p[k]).collect();
    let w: Vec<f64> = bins.iter().map(|&k| curve.n_total[k] as f64).collect();
    let span = theta.last().unwrap() - theta[0];
    if span < opts.min_span {
        return Err(Error::InsufficientBins(format!(
            "bins span {:.1} deg, need {:.1}",
            span.to_degrees(),
            opts.min_span.to_degrees()
        )));
    }
    let wsum: f64 = w.iter().sum();
    let objective = |x: &[f64]| {
        let s = SigmoidParams::from_slice(x);
        theta
            .iter()
            .zip(&p)
            .zip(&w)
            .map(|((&t, &pk), &wk)| wk * (s.eval(t) - pk).powi(2))
            .sum::<f64>()
            / wsum
    };

    let mut starts = Vec::with_capacity(opts.restarts + 1);
    if let Some(s) = logit_start(&theta, &p, &w) {
        starts.push(s.as_array());
    }
    let base = opts.initial.as_array();
    starts.push(base);
    let mut prng = rng::substream(0, &[tag::FIT_RESTART]);
    while starts.len() < opts.restarts.max(1) {
        let mut x = base;
        for v in x.iter_mut() {
            let z: f64 = prng.sample(StandardNormal);
            *v += z * (0.3 * v.abs() + 0.5);
        }
        starts.push(x);
    }

    let nm = NelderMead { f_tol: 1e-20, x_tol: 1e-13, ..NelderMead::default() };
    let mut best: Option<crate::optim::Minimum> = None;
    let mut iters = 0;
    let mut any_converged = false;
    for x0 in &starts {
        let step: Vec<f64> = x0.iter().map(|v| 0.1 * v.abs() + 0.1).collect();
        let m = nm.minimize(objective, x0, &step);
        iters += m.iters;
        any_converged |= m.converged;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    if !any_converged || !best.f.is_finite() {
        return Err(Error::NonConvergence { iters });
    }
    let params = SigmoidParams::from_slice(&best.x);
    let rmse = (theta.iter().zip(&p).map(|(&t, &pk)| (params.eval(t) - pk).powi(2)).sum::<f64>()
        / theta.len() as f64)
        .sqrt();
    let diag = FitDiagnostics {
        rmse,
        weighted_rmse: best.f.sqrt(),
        iters,
        bins_used: theta.len(),
        converged: any_converged,
        rmse_tolerance: opts.rmse_tolerance,
        within_tolerance: rmse <= opts.rmse_tolerance,
    };
    Ok((params, diag))
}
