//! Re-derives LSF parameters from a link dataset: per-height PLE by
//! regression with the intercept pinned to the reference loss, shadow
//! spread from the residuals, and exponential fits over height.

use serde::{Deserialize, Serialize};

use crate::geomlos::LinkDataset;
use crate::lsfmod::{
    exp_decay, fspl_reference, HeightSegment, LosLsf, LsfParams, NlosLsf, PleModel, ShadowModel,
    DEFAULT_D0_M, DEFAULT_FC_HZ,
};
use crate::optim::NelderMead;
use crate::tables::MAX_HEIGHT_M;
use crate::{Error, Result};

pub const MIN_LINKS: usize = 30;
pub const MIN_LOG_SPREAD: f64 = 0.3;
pub const MIN_DISTANCE_M: f64 = 10.0;
pub const MIN_FIT_POINTS: usize = 5;
pub const MIN_HEIGHTS: usize = 8;
pub const H0_RANGE: (f64, f64) = (1.0, 5000.0);

/// Links of one ABS height split by channel state, as `(d, pathloss_db)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeightSlice {
    pub height: f64,
    pub los: Vec<(f64, f64)>,
    pub nlos: Vec<(f64, f64)>,
}

impl HeightSlice {
    pub fn state(&self, los: bool) -> &[(f64, f64)] {
        if los {
            &self.los
        } else {
            &self.nlos
        }
    }
}

/// Groups links by height, dropping links shorter than `min_distance`.
pub fn slices(dataset: &LinkDataset, min_distance: f64) -> Result<Vec<HeightSlice>> {
    if !dataset.has_pathloss() {
        return Err(Error::MissingPathloss);
    }
    let mut out: Vec<HeightSlice> = dataset
        .heights()
        .into_iter()
        .map(|height| HeightSlice { height, ..Default::default() })
        .collect();
    for s in &dataset.samples {
        if s.d_m < min_distance {
            continue;
        }
        let k = out.binary_search_by(|x| x.height.total_cmp(&s.height_m)).expect("height listed");
        let pl = s.pathloss_db.expect("checked above");
        if s.channel_los() {
            out[k].los.push((s.d_m, pl));
        } else {
            out[k].nlos.push((s.d_m, pl));
        }
    }
    Ok(out)
}

/// Least-squares PLE through the fixed intercept `l0` at `d0`.
pub fn estimate_ple(points: &[(f64, f64)], l0: f64, d0: f64) -> Result<f64> {
    let g: Vec<f64> = points.iter().map(|&(d, _)| (d / d0).log10()).collect();
    let spread = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - g.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(spread >= MIN_LOG_SPREAD) {
        return Err(Error::InsufficientSpread { spread: spread.max(0.0) });
    }
    if points.len() < MIN_LINKS {
        return Err(Error::TooFewSamples { got: points.len(), need: MIN_LINKS });
    }
    let (num, den) = points
        .iter()
        .zip(&g)
        .fold((0.0, 0.0), |(num, den), (&(_, pl), &gi)| (num + (pl - l0) * gi, den + gi * gi));
    Ok(num / (10.0 * den))
}

/// Deviations from the fitted log-distance line.
pub fn shadow_residuals(points: &[(f64, f64)], n: f64, l0: f64, d0: f64) -> Vec<f64> {
    points.iter().map(|&(d, pl)| pl - (l0 + 10.0 * n * (d / d0).log10())).collect()
}

/// Sample standard deviation with the mean removed.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub v0: f64,
    pub v_inf: f64,
    pub h0: f64,
    pub rmse: f64,
    pub points: usize,
    pub iters: usize,
    /// False when the data are flat or `h0` sits on a bound.
    pub h0_identifiable: bool,
}

impl ExpFit {
    pub fn eval(&self, h: f64) -> f64 {
        exp_decay(h, self.v0, self.v_inf, self.h0)
    }
}

fn h0_of(s: f64) -> f64 {
    s.exp().clamp(H0_RANGE.0, H0_RANGE.1)
}

/// Closed-form `(v0, v_inf)` for a fixed `h0`, since the model is linear in
/// them: `v = v0 * e + v_inf * (1 - e)`.
fn linear_given_h0(points: &[(f64, f64)], h0: f64) -> Option<(f64, f64)> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(h, v) in points {
        let e = (-h / h0).exp();
        let f = 1.0 - e;
        a11 += e * e;
        a12 += e * f;
        a22 += f * f;
        b1 += e * v;
        b2 += f * v;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-12 * (a11 * a22).max(1e-300) {
        return None;
    }
    Some(((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det))
}

/// Least-squares fit of `v_inf + (v0 - v_inf) exp(-h/h0)` with `h0`
/// restricted to [1, 5000] m.
pub fn fit_exponential(points: &[(f64, f64)], asymptote_guess: Option<f64>) -> Result<ExpFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewSamples { got: points.len(), need: MIN_FIT_POINTS });
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sse = |x: &[f64]| {
        let h0 = h0_of(x[2]);
        pts.iter().map(|&(h, v)| (exp_decay(h, x[0], x[1], h0) - v).powi(2)).sum::<f64>() / pts.len() as f64
    };

    let v_lo = pts[0].1;
    let v_hi = asymptote_guess.unwrap_or(pts[pts.len() - 1].1);
    let mut starts = vec![[v_lo, v_hi, 100f64.ln()]];
    // Coarse profile over h0 with the linear part solved exactly.
    let (ln_lo, ln_hi) = (H0_RANGE.0.ln(), H0_RANGE.1.ln());
    let mut profile_best: Option<([f64; 3], f64)> = None;
    for k in 0..=120 {
        let s = ln_lo + (ln_hi - ln_lo) * k as f64 / 120.0;
        if let Some((v0, vi)) = linear_given_h0(&pts, s.exp()) {
            let x = [v0, vi, s];
            let f = sse(&x);
            if profile_best.is_none_or(|(_, b)| f < b) {
                profile_best = Some((x, f));
            }
        }
    }
    if let Some((x, _)) = profile_best {
        starts.push(x);
    }

    let nm = NelderMead { f_tol: 1e-24, x_tol: 1e-14, ..NelderMead::default() };
    let scale = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max).max(1e-3);
    let mut best: Option<crate::optim::Minimum> = None;
    let mut iters = 0;
    for x0 in &starts {
        let step = [0.1 * scale, 0.1 * scale, 0.5];
        let m = nm.minimize(sse, x0, &step);
        iters += m.iters;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    if !best.f.is_finite() || !best.x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonConvergence { iters });
    }
    let h0 = h0_of(best.x[2]);
    let (v0, v_inf) = (best.x[0], best.x[1]);
    let spread = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let flat = spread <= 1e-9 * scale || (v0 - v_inf).abs() <= 1e-6 * scale;
    let on_bound = h0 <= H0_RANGE.0 * (1.0 + 1e-6) || h0 >= H0_RANGE.1 * (1.0 - 1e-6);
    let (v0, v_inf) = if spread <= 1e-9 * scale {
        let c = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        (c, c)
    } else {
        (v0, v_inf)
    };
    Ok(ExpFit { v0, v_inf, h0, rmse: best.f.max(0.0).sqrt(), points: pts.len(), iters, h0_identifiable: !flat && !on_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Splits the NLoS PLE fit into `(0, b]` and `(b, max]`.
    pub breakpoint: Option<f64>,
    pub min_links: usize,
    pub min_distance_m: f64,
    pub fc: f64,
    pub d0: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { breakpoint: None, min_links: MIN_LINKS, min_distance_m: MIN_DISTANCE_M, fc: DEFAULT_FC_HZ, d0: DEFAULT_D0_M }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    Los,
    Nlos,
}

impl State {
    pub fn name(self) -> &'static str {
        match self {
            State::Los => "los",
            State::Nlos => "nlos",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightEstimate {
    pub height_m: f64,
    pub state: State,
    pub n_hat: f64,
    pub sigma_hat: f64,
    pub count: usize,
}

/// A (height, state) slice left out of the height fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcludedHeight {
    pub height_m: f64,
    pub state: State,
    pub count: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentFit {
    pub h_min: f64,
    pub h_max: f64,
    pub fit: ExpFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionDiagnostics {
    pub breakpoint_m: Option<f64>,
    pub min_links: usize,
    pub min_distance_m: f64,
    pub reference_loss_db: f64,
    /// Count-weighted mean of the LoS estimates.
    pub los_ple_mean: f64,
    pub los_shadow_fit: ExpFit,
    pub nlos_ple_fits: Vec<SegmentFit>,
    pub nlos_shadow_fit: ExpFit,
    pub per_height: Vec<HeightEstimate>,
    pub excluded: Vec<ExcludedHeight>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    #[serde(flatten)]
    pub params: LsfParams,
    pub diagnostics: ExtractionDiagnostics,
}

impl ExtractionResult {
    pub fn estimates(&self, state: State) -> impl Iterator<Item = &HeightEstimate> {
        self.diagnostics.per_height.iter().filter(move |e| e.state == state)
    }
}

/// Per-height estimates for both states plus exponential fits over height.
pub fn extract_all(dataset: &LinkDataset, opts: &ExtractOptions) -> Result<ExtractionResult> {
    let l0 = fspl_reference(opts.fc, opts.d0);
    let mut per_height = Vec::new();
    let mut excluded = Vec::new();
    for slice in slices(dataset, opts.min_distance_m)? {
        for (state, los) in [(State::Los, true), (State::Nlos, false)] {
            let pts = slice.state(los);
            let exclude = |reason: String| ExcludedHeight { height_m: slice.height, state, count: pts.len(), reason };
            if pts.len() < opts.min_links {
                excluded.push(exclude(format!("{} links, need {}", pts.len(), opts.min_links)));
                continue;
            }
            match estimate_ple(pts, l0, opts.d0) {
                Ok(n_hat) => {
                    let sigma_hat = sample_std(&shadow_residuals(pts, n_hat, l0, opts.d0));
                    per_height.push(HeightEstimate { height_m: slice.height, state, n_hat, sigma_hat, count: pts.len() });
                }
                Err(e @ (Error::InsufficientSpread { .. } | Error::TooFewSamples { .. })) => {
                    excluded.push(exclude(e.to_string()));
                }
                Err(e) => return Err(e),
            }
        }
    }

    let series = |state: State, f: fn(&HeightEstimate) -> f64| -> Vec<(f64, f64)> {
        per_height.iter().filter(|e| e.state == state).map(|e| (e.height_m, f(e))).collect()
    };
    for state in [State::Los, State::Nlos] {
        let got = per_height.iter().filter(|e| e.state == state).count();
        if got < MIN_HEIGHTS {
            return Err(Error::TooFewHeights { what: format!("{} state", state.name()), got, need: MIN_HEIGHTS });
        }
    }

    let los_n = series(State::Los, |e| e.n_hat);
    let los_w: Vec<f64> = per_height.iter().filter(|e| e.state == State::Los).map(|e| e.count as f64).collect();
    let los_ple_mean = los_n.iter().zip(&los_w).map(|(p, w)| p.1 * w).sum::<f64>() / los_w.iter().sum::<f64>();
    let los_shadow_fit = fit_exponential(&series(State::Los, |e| e.sigma_hat), None)?;
    let nlos_shadow_fit = fit_exponential(&series(State::Nlos, |e| e.sigma_hat), None)?;

    let nlos_n = series(State::Nlos, |e| e.n_hat);
    let top = nlos_n.last().map_or(MAX_HEIGHT_M, |p| p.0).max(MAX_HEIGHT_M);
    let bounds = match opts.breakpoint {
        Some(b) => vec![(0.0, b), (b, top)],
        None => vec![(0.0, top)],
    };
    let mut nlos_ple_fits = Vec::with_capacity(bounds.len());
    for &(lo, hi) in &bounds {
        let pts: Vec<(f64, f64)> = nlos_n.iter().copied().filter(|&(h, _)| h > lo && h <= hi).collect();
        if pts.len() < MIN_FIT_POINTS {
            let what = format!("NLoS PLE regime ({lo}, {hi}] m");
            return Err(Error::TooFewHeights { what, got: pts.len(), need: MIN_FIT_POINTS });
        }
        nlos_ple_fits.push(SegmentFit { h_min: lo, h_max: hi, fit: fit_exponential(&pts, None)? });
    }

    let shadow = |f: &ExpFit| ShadowModel { sigma0: f.v0, sigma_inf: f.v_inf, h0: f.h0 };
    let params = LsfParams {
        los: LosLsf { n: los_ple_mean, shadow: shadow(&los_shadow_fit) },
        nlos: NlosLsf {
            ple: PleModel {
                segments: nlos_ple_fits
                    .iter()
                    .map(|s| HeightSegment { h_min: s.h_min, h_max: s.h_max, n0: s.fit.v0, n_inf: s.fit.v_inf, h0: s.fit.h0 })
                    .collect(),
            },
            shadow: shadow(&nlos_shadow_fit),
        },
        d0: opts.d0,
        fc: opts.fc,
        obstacle_offset_db: 0.0,
    };
    Ok(ExtractionResult {
        params,
        diagnostics: ExtractionDiagnostics {
            breakpoint_m: opts.breakpoint,
            min_links: opts.min_links,
            min_distance_m: opts.min_distance_m,
            reference_loss_db: l0,
            los_ple_mean,
            los_shadow_fit,
            nlos_ple_fits,
            nlos_shadow_fit,
            per_height,
            excluded,
        },
    })
}
