//! Dataset-versus-model comparison: KL divergence between path-loss
//! distributions, curve RMSE and rank correlation.

use serde::{Deserialize, Serialize};

use crate::geomlos::LinkDataset;
use crate::lsfmod::{sample_channel_at, ChannelModelParams, LosDraw, LosMode};
use crate::rng::{self, tag};
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 100;
pub const DEFAULT_REPORT_HEIGHTS: [f64; 3] = [30.0, 150.0, 1000.0];
pub const DEFAULT_OFFSET_FLAG_DB: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` strictly increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Equal-width histogram on `[lo, hi]`; values outside are clamped into
    /// the end cells. A degenerate range is widened to unit width.
    pub fn new(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let w = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + w * k as f64 }).collect();
        let mut counts = vec![0_u64; bins];
        for &x in samples {
            let k = (((x - lo) / w).floor().max(0.0) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Histogram { edges, counts, total: samples.len() as u64 }
    }

    /// Cell probabilities with `alpha` pseudo-counts added to every cell.
    pub fn smoothed(&self, alpha: f64) -> Vec<f64> {
        let denom = self.total as f64 + alpha * self.counts.len() as f64;
        self.counts.iter().map(|&c| (c as f64 + alpha) / denom).collect()
    }
}

fn min_max(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// `D(p || q)` in nats over a shared equal-width histogram spanning both
/// sample sets, one pseudo-count per cell.
pub fn kl_divergence(p: &[f64], q: &[f64], bins: usize) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = min_max(p.iter().chain(q).copied());
    let hp = Histogram::new(p, lo, hi, bins).smoothed(1.0);
    let hq = Histogram::new(q, lo, hi, bins).smoothed(1.0);
    let d: f64 = hp.iter().zip(&hq).map(|(&a, &b)| if a == b { 0.0 } else { a * (a / b).ln() }).sum();
    Ok(d.max(0.0))
}

/// RMSE between two curves sampled on the same abscissae.
pub fn curve_rmse(model: &[(f64, f64)], empirical: &[(f64, f64)]) -> Result<f64> {
    if model.is_empty() || empirical.is_empty() {
        return Err(Error::EmptyInput);
    }
    if model.len() != empirical.len()
        || model.iter().zip(empirical).any(|(a, b)| (a.0 - b.0).abs() > 1e-9 * a.0.abs().max(b.0.abs()).max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    let mse = model.iter().zip(empirical).map(|(a, b)| (a.1 - b.1).powi(2)).sum::<f64>() / model.len() as f64;
    Ok(mse.sqrt())
}

/// Average ranks, ties sharing the mean rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; NaN when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Empirical CDF as `(value, fraction <= value)` at every sample.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub heights: Vec<f64>,
    pub bins: usize,
    /// `Data` reuses each link's channel state; `Sigmoid` draws it.
    pub los_mode: LosMode,
    pub seed: u64,
    pub offset_flag_db: f64,
}

impl ReportOptions {
    pub fn new(seed: u64) -> Self {
        ReportOptions {
            heights: DEFAULT_REPORT_HEIGHTS.to_vec(),
            bins: DEFAULT_BINS,
            los_mode: LosMode::Data,
            seed,
            offset_flag_db: DEFAULT_OFFSET_FLAG_DB,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: usize,
    pub kl_nats: f64,
    pub data_mean_db: f64,
    pub model_mean_db: f64,
    /// Data mean minus model mean.
    pub mean_offset_db: f64,
    pub offset_flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightComparison {
    pub requested_m: f64,
    /// Nearest dataset height.
    pub height_m: f64,
    #[serde(flatten)]
    pub stats: Comparison,
    #[serde(skip)]
    pub data_cdf: Vec<(f64, f64)>,
    #[serde(skip)]
    pub model_cdf: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub options: ReportOptions,
    pub overall: Comparison,
    pub per_height: Vec<HeightComparison>,
    pub flags: Vec<String>,
}

fn compare(data: &[f64], model: &[f64], bins: usize, flag_db: f64) -> Result<Comparison> {
    let (dm, mm) = (mean(data), mean(model));
    Ok(Comparison {
        n: data.len(),
        kl_nats: kl_divergence(data, model, bins)?,
        data_mean_db: dm,
        model_mean_db: mm,
        mean_offset_db: dm - mm,
        offset_flagged: (dm - mm).abs() > flag_db,
    })
}

/// Evaluates `model` on the dataset's own links and compares the path-loss
/// distributions overall and at the requested heights.
pub fn compare_report(dataset: &LinkDataset, model: &ChannelModelParams, opts: &ReportOptions) -> Result<ComparisonReport> {
    if !dataset.has_pathloss() {
        return Err(Error::MissingPathloss);
    }
    model.lsf.validate()?;
    let mut rng = rng::substream(opts.seed, &[tag::VALIDATE]);
    let mut data = Vec::with_capacity(dataset.len());
    let mut synth = Vec::with_capacity(dataset.len());
    for s in &dataset.samples {
        let draw = match opts.los_mode {
            LosMode::Data => LosDraw::Fixed(s.channel_los()),
            mode => model.draw_for(mode, s)?,
        };
        let c = sample_channel_at(s.d_m, s.height_m, s.theta_rad, draw, &model.lsf, &mut rng)?;
        data.push(s.pathloss_db.expect("checked above"));
        synth.push(c.pathloss_db);
    }

    let overall = compare(&data, &synth, opts.bins, opts.offset_flag_db)?;
    let mut flags = Vec::new();
    if overall.offset_flagged {
        flags.push(format!("overall mean offset {:.2} dB", overall.mean_offset_db));
    }
    let heights = dataset.heights();
    let mut per_height = Vec::with_capacity(opts.heights.len());
    for &req in &opts.heights {
        let h = *heights
            .iter()
            .min_by(|a, b| (*a - req).abs().total_cmp(&(*b - req).abs()))
            .expect("non-empty dataset");
        let (d, m): (Vec<f64>, Vec<f64>) = dataset
            .samples
            .iter()
            .zip(data.iter().zip(&synth))
            .filter(|(s, _)| s.height_m == h)
            .map(|(_, (&a, &b))| (a, b))
            .unzip();
        let stats = compare(&d, &m, opts.bins, opts.offset_flag_db)?;
        if stats.offset_flagged {
            flags.push(format!("mean offset {:.2} dB at {h} m", stats.mean_offset_db));
        }
        per_height.push(HeightComparison { requested_m: req, height_m: h, stats, data_cdf: ecdf(&d), model_cdf: ecdf(&m) });
    }
    Ok(ComparisonReport { options: opts.clone(), overall, per_height, flags })
}
