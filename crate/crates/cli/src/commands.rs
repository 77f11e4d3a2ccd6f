use std::io::Write;
use std::path::{Path, PathBuf};

use a2g_core::extract::{extract_all, ExtractOptions, ExtractionResult};
use a2g_core::geomlos::{empirical_plos, run_campaign_all, CampaignConfig, HeightSpec, LinkDataset, Spacing};
use a2g_core::lsfmod::{synthesize, ChannelModelParams, LosMode, LsfParams};
use a2g_core::plosmod::{fit_sigmoid, FitDiagnostics, SigmoidParams};
use a2g_core::rng::{derive_seed, tag};
use a2g_core::tables::{self, TableEntry};
use a2g_core::urbgen::{self, BuiltUpParams, CityLayout, Highway, HighwaySpec, LayoutMeta, LayoutOptions};
use a2g_core::validate::{compare_report, ComparisonReport, ReportOptions, DEFAULT_OFFSET_FLAG_DB};
use a2g_core::{io, EnvironmentClass, LayoutKey, LayoutKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::{self, suffixed, write_csv, write_json, Envelope};
use crate::{CampaignArgs, ExtractArgs, FitPlosArgs, Format, GenArgs, ModelArgs, SynthArgs, TablesArgs, ValidateArgs};

pub const SEED_VAR: &str = "A2G_SEED";

/// Flag, then config file, then `A2G_SEED`; no seed at all is an error.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::invalid("MissingSeed", format!("{SEED_VAR}='{v}' is not an unsigned integer"))),
        Err(_) => Err(CliError::invalid("MissingSeed", format!("no seed: pass --seed, set it in the config, or set {SEED_VAR}"))),
    }
}

fn read_links(path: &Path) -> CliResult<LinkDataset> {
    io::read_links(output::open(path)?).map_err(CliError::at(path))
}

fn read_value(path: &Path) -> CliResult<Value> {
    io::read_json(output::open(path)?).map_err(CliError::at(path))
}

fn from_value<T: serde::de::DeserializeOwned>(path: &Path, v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::at(path)(e.into()))
}

// ---------------------------------------------------------------- gen

#[derive(Serialize)]
struct GenConfig {
    layout: LayoutKind,
    env: EnvironmentClass,
    params: BuiltUpParams,
    area_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    highways: Option<Vec<HighwaySpec>>,
}

#[derive(Serialize)]
struct CityBody<'a> {
    city: &'a CityLayout,
}

#[derive(Serialize)]
struct CityMeta<'a> {
    highways: &'a [Highway],
    meta: &'a LayoutMeta,
}

fn write_buildings(mut w: Box<dyn Write>, layout: &CityLayout) -> a2g_core::Result<()> {
    writeln!(w, "x,y,w,l,h")?;
    for b in &layout.buildings {
        writeln!(w, "{},{},{},{},{}", b.x, b.y, b.width, b.length, b.height)?;
    }
    w.flush()?;
    Ok(())
}

fn pick<T>(flag: Option<T>, from_cfg: Option<T>, what: &str) -> CliResult<T> {
    flag.or(from_cfg).ok_or_else(|| CliError::usage(format!("gen needs --{what} or a config listing one")))
}

pub fn gen(a: &GenArgs) -> CliResult {
    let cfg = match &a.config {
        Some(p) => Some(from_value::<PipelineConfig>(p, read_value(p)?)?.campaign),
        None => None,
    };
    let kind = pick(a.layout, cfg.as_ref().and_then(|c| c.layouts.first().copied()), "layout")?;
    let env = pick(a.env, cfg.as_ref().and_then(|c| c.envs.first().copied()), "env")?;
    let area = a.area.or(cfg.as_ref().map(|c| c.area_m)).unwrap_or(1000.0);
    let seed = resolve_seed(a.seed, cfg.as_ref().and_then(|c| c.seed))?;
    let params = env.params();
    let highways = match (kind, a.highways) {
        (LayoutKind::Heu, Some(n)) => Some(HighwaySpec::defaults(n, a.highway_width)),
        (LayoutKind::Heu, None) => Some(
            cfg.as_ref()
                .and_then(|c| c.layout_options.highways.clone())
                .unwrap_or_else(|| HighwaySpec::defaults(2, a.highway_width)),
        ),
        (_, Some(_)) => return Err(CliError::usage("--highways only applies to the heu layout")),
        _ => None,
    };
    let options = LayoutOptions { highways: highways.clone() };
    let layout = urbgen::generate(kind, &params, area, seed, &options)?;
    let config = GenConfig { layout: kind, env, params, area_m: area, highways };
    let out = a.output.as_deref();
    match a.format {
        Format::Json => write_json(out, &Envelope::new("gen", Some(seed), &config, CityBody { city: &layout })),
        Format::Csv => {
            let meta = Envelope::new("gen", Some(seed), &config, CityMeta { highways: &layout.highways, meta: &layout.meta });
            write_csv(out, |w| write_buildings(w, &layout), &meta)
        }
    }
}

// ----------------------------------------------------------- campaign

/// Builtin channel used to fill in path loss during a campaign.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(default = "combined")]
    pub layout: LayoutKey,
    #[serde(default = "data_mode")]
    pub los_mode: LosMode,
    #[serde(default)]
    pub obstacle_offset_db: f64,
}

fn combined() -> LayoutKey {
    LayoutKey::Combined
}

fn data_mode() -> LosMode {
    LosMode::Data
}

/// Campaign config plus the optional channel stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(flatten)]
    pub campaign: CampaignConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
}

#[derive(Serialize)]
struct CampaignMeta {
    env: EnvironmentClass,
    links: usize,
    heights: Vec<f64>,
}

fn campaign_config(a: &CampaignArgs) -> CliResult<PipelineConfig> {
    let mut cfg = match &a.config {
        Some(p) => from_value(p, read_value(p)?)?,
        None => {
            if a.env.is_empty() {
                return Err(CliError::usage("campaign needs --config or --env"));
            }
            PipelineConfig { campaign: CampaignConfig::new(vec![LayoutKind::Manhattan], vec![]), channel: None }
        }
    };
    let c = &mut cfg.campaign;
    if !a.layout.is_empty() {
        c.layouts = a.layout.clone();
    }
    if !a.env.is_empty() {
        c.envs = a.env.clone();
    }
    if let Some(v) = a.area {
        c.area_m = v;
    }
    if let Some(v) = a.pitch {
        c.gu_pitch_m = v;
    }
    if let Some(v) = a.gu_height {
        c.gu_height_m = v;
    }
    if let Some(v) = a.cities {
        c.cities_per_height = v;
    }
    if !a.heights.is_empty() {
        c.heights = HeightSpec::List(a.heights.clone());
    } else if let Some(count) = a.height_count {
        c.heights = HeightSpec::Range { count, min_m: a.min_height, max_m: a.max_height, spacing: Spacing::Log };
    }
    if let Some(layout) = a.channel {
        cfg.channel = Some(ChannelSpec { layout, los_mode: LosMode::Data, obstacle_offset_db: 0.0 });
    }
    cfg.campaign.validate()?;
    Ok(cfg)
}

pub fn campaign(a: &CampaignArgs) -> CliResult {
    let mut cfg = campaign_config(a)?;
    let seed = resolve_seed(a.seed, cfg.campaign.seed)?;
    cfg.campaign.seed = Some(seed);
    let out = a.output.as_deref();
    if out.is_none() && cfg.campaign.envs.len() > 1 {
        return Err(CliError::usage("several environments need -o"));
    }
    let results = run_campaign_all(&cfg.campaign, seed)?;
    for (env_index, (env, mut data)) in results.into_iter().enumerate() {
        if let Some(ch) = &cfg.channel {
            let mut model = ChannelModelParams::builtin(ch.layout, env);
            model.lsf.obstacle_offset_db = ch.obstacle_offset_db;
            data = synthesize(&data, &model, ch.los_mode, derive_seed(seed, &[tag::CHANNEL, env_index as u64]))?;
        }
        let path: Option<PathBuf> = match out {
            Some(p) if cfg.campaign.envs.len() > 1 => Some(suffixed(p, env.name())),
            Some(p) => Some(p.to_path_buf()),
            None => None,
        };
        let meta = Envelope::new("campaign", Some(seed), &cfg, CampaignMeta { env, links: data.len(), heights: data.heights() });
        write_csv(path.as_deref(), |w| io::write_links(w, &data), &meta)?;
    }
    Ok(())
}

// ----------------------------------------------------------- fit-plos

#[derive(Serialize)]
struct FitPlosConfig<'a> {
    links: &'a Path,
    bin_deg: f64,
    min_count: u64,
}

#[derive(Serialize)]
struct SigmoidBody<'a> {
    layout: Option<LayoutKey>,
    env: Option<EnvironmentClass>,
    #[serde(flatten)]
    params: SigmoidParams,
    diagnostics: &'a FitDiagnostics,
}

pub fn fit_plos(a: &FitPlosArgs) -> CliResult {
    if !(a.bin_deg > 0.0 && a.bin_deg <= 90.0) {
        return Err(CliError::usage(format!("--bin-deg {} outside (0, 90]", a.bin_deg)));
    }
    let data = read_links(&a.links)?;
    let curve = empirical_plos(&data.samples, a.bin_deg.to_radians(), a.min_count)?;
    if let Some(p) = &a.curve {
        io::write_plos(output::create(p)?, &curve).map_err(CliError::at(p))?;
    }
    let (params, diagnostics) = fit_sigmoid(&curve)?;
    let config = FitPlosConfig { links: &a.links, bin_deg: a.bin_deg, min_count: a.min_count };
    let body = SigmoidBody { layout: a.layout, env: a.env, params, diagnostics: &diagnostics };
    write_json(a.output.as_deref(), &Envelope::new("fit-plos", None, &config, body))
}

// -------------------------------------------------------------- synth

/// Model from a parameters file (channel or bare LSF schema) or a builtin
/// table block; `--sigmoid` replaces the sigmoid part.
pub fn load_model(m: &ModelArgs) -> CliResult<ChannelModelParams> {
    let mut model = match &m.model {
        Some(p) => {
            let v = read_value(p)?;
            let mut model = if v.get("lsf").is_some() {
                from_value::<ChannelModelParams>(p, v)?
            } else {
                let lsf: LsfParams = from_value(p, v)?;
                ChannelModelParams { layout: m.layout, env: m.env, sigmoid: None, lsf }
            };
            if model.sigmoid.is_none() {
                if let Some(env) = m.env {
                    model.sigmoid = Some(a2g_core::plosmod::builtin_sigmoid(m.layout.unwrap_or(LayoutKey::Combined), env));
                }
            }
            model
        }
        None => {
            let env = m.env.ok_or_else(|| CliError::usage("pass --model or --env (with optional --layout)"))?;
            ChannelModelParams::builtin(m.layout.unwrap_or(LayoutKey::Combined), env)
        }
    };
    if let Some(p) = &m.sigmoid {
        let v = read_value(p)?;
        let v = match v.get("sigmoid") {
            Some(inner) => inner.clone(),
            None => v,
        };
        model.sigmoid = Some(from_value(p, v)?);
    }
    model.lsf.validate()?;
    Ok(model)
}

#[derive(Serialize)]
struct SynthConfig<'a> {
    links: &'a Path,
    model_file: Option<&'a Path>,
    sigmoid_file: Option<&'a Path>,
    los_mode: LosMode,
    model: &'a ChannelModelParams,
}

#[derive(Serialize)]
struct Rows {
    rows: usize,
}

#[derive(Serialize)]
struct Count {
    links: usize,
}

pub fn synth(a: &SynthArgs) -> CliResult {
    let seed = resolve_seed(a.seed, None)?;
    let mut model = load_model(&a.model)?;
    if let Some(off) = a.offset_db {
        model.lsf.obstacle_offset_db = off;
    }
    let data = read_links(&a.links)?;
    let out = synthesize(&data, &model, a.los_mode, seed)?;
    let config = SynthConfig {
        links: &a.links,
        model_file: a.model.model.as_deref(),
        sigmoid_file: a.model.sigmoid.as_deref(),
        los_mode: a.los_mode,
        model: &model,
    };
    let meta = Envelope::new("synth", Some(seed), &config, Count { links: out.len() });
    write_csv(a.output.as_deref(), |w| io::write_links(w, &out), &meta)
}

// ------------------------------------------------------------ extract

#[derive(Serialize)]
struct ExtractConfig<'a> {
    links: &'a Path,
    env: Option<EnvironmentClass>,
    #[serde(flatten)]
    options: &'a ExtractOptions,
}

pub fn extract(a: &ExtractArgs) -> CliResult {
    let breakpoint = match (a.breakpoint, a.no_breakpoint, a.env) {
        (Some(b), _, _) => Some(b),
        (None, false, Some(EnvironmentClass::Suburban)) => Some(tables::SUBURBAN_BREAKPOINT_M),
        _ => None,
    };
    let options = ExtractOptions { breakpoint, min_links: a.min_links, min_distance_m: a.min_distance, ..Default::default() };
    let data = read_links(&a.links)?;
    let result: ExtractionResult = extract_all(&data, &options)?;
    let config = ExtractConfig { links: &a.links, env: a.env, options: &options };
    let rows = &result.diagnostics.per_height;
    if let Some(p) = &a.curves {
        io::write_height_estimates(output::create(p)?, rows).map_err(CliError::at(p))?;
    }
    let out = a.output.as_deref();
    match a.format {
        Format::Json => write_json(out, &Envelope::new("extract", None, &config, &result)),
        Format::Csv => {
            write_csv(out, |w| io::write_height_estimates(w, rows), &Envelope::new("extract", None, &config, &result))
        }
    }
}

// ----------------------------------------------------------- validate

#[derive(Serialize)]
struct ValidateConfig<'a> {
    links: &'a Path,
    model_file: Option<&'a Path>,
    sigmoid_file: Option<&'a Path>,
    model: &'a ChannelModelParams,
}

#[derive(Serialize)]
struct ReportBody<'a> {
    #[serde(flatten)]
    report: &'a ComparisonReport,
    cdf_files: Vec<PathBuf>,
}

pub fn validate(a: &ValidateArgs) -> CliResult {
    let seed = resolve_seed(a.seed, None)?;
    if a.bins == 0 {
        return Err(CliError::usage("--bins must be at least 1"));
    }
    let model = load_model(&a.model)?;
    let data = read_links(&a.links)?;
    let opts = ReportOptions {
        heights: a.heights.clone(),
        bins: a.bins,
        los_mode: a.los_mode,
        seed,
        offset_flag_db: DEFAULT_OFFSET_FLAG_DB,
    };
    let report = compare_report(&data, &model, &opts)?;
    let mut cdf_files = Vec::new();
    if let Some(out) = &a.output {
        let base = out.with_extension("csv");
        for h in &report.per_height {
            for (which, cdf) in [("data", &h.data_cdf), ("model", &h.model_cdf)] {
                let p = suffixed(&base, &format!("cdf_{}m_{which}", h.requested_m));
                io::write_cdf(output::create(&p)?, cdf).map_err(CliError::at(&p))?;
                cdf_files.push(p);
            }
        }
    }
    let config = ValidateConfig {
        links: &a.links,
        model_file: a.model.model.as_deref(),
        sigmoid_file: a.model.sigmoid.as_deref(),
        model: &model,
    };
    write_json(a.output.as_deref(), &Envelope::new("validate", Some(seed), &config, ReportBody { report: &report, cdf_files }))
}

// ------------------------------------------------------------- tables

#[derive(Serialize)]
struct TablesConfig {
    layout: Option<LayoutKey>,
    env: Option<EnvironmentClass>,
}

#[derive(Serialize)]
struct Entries {
    entries: Vec<TableEntry>,
}

const TABLE_COLUMNS: &str = "layout,env,x1,x2,x3,x4,los_n,los_sigma0,los_sigma_inf,los_h0,\
nlos_n0,nlos_n_inf,nlos_h0,nlos_upper_n0,nlos_upper_n_inf,nlos_upper_h0,nlos_sigma0,nlos_sigma_inf,nlos_sigma_h0";

fn write_table_rows(mut w: Box<dyn Write>, rows: &[&tables::TableRow]) -> a2g_core::Result<()> {
    writeln!(w, "{TABLE_COLUMNS}")?;
    let join = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    for r in rows {
        let upper = r.nlos_ple_upper.map_or(",,".to_string(), |u| join(&u));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.layout,
            r.env,
            join(&r.sigmoid),
            tables::LOS_PLE,
            join(&r.los_shadow),
            join(&r.nlos_ple),
            upper,
            join(&r.nlos_shadow),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn tables(a: &TablesArgs) -> CliResult {
    let rows: Vec<&tables::TableRow> = tables::TABLE
        .iter()
        .filter(|r| a.layout.is_none_or(|l| l == r.layout) && a.env.is_none_or(|e| e == r.env))
        .collect();
    let config = TablesConfig { layout: a.layout, env: a.env };
    let out = a.output.as_deref();
    match a.format {
        Format::Json => {
            let entries = rows.iter().map(|r| TableEntry::new(r.layout, r.env)).collect();
            write_json(out, &Envelope::new("tables", None, &config, Entries { entries }))
        }
        Format::Csv => write_csv(out, |w| write_table_rows(w, &rows), &Envelope::new("tables", None, &config, Rows { rows: rows.len() })),
    }
}
