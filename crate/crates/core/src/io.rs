//! File formats: link datasets and curves as CSV, parameters as JSON.
//! Floats are written in shortest round-trip form so every file reads back
//! bit-identically.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::extract::HeightEstimate;
use crate::geomlos::{LinkDataset, LinkSample, PlosCurve};
use crate::{Error, Result};

const LINK_COLUMNS: [&str; 10] = ["height_m", "city_id", "abs_x", "abs_y", "gu_x", "gu_y", "r_m", "d_m", "theta_rad", "los"];
const CHANNEL_COLUMNS: [&str; 3] = ["pathloss_db", "shadow_db", "los_model"];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes the geometry columns, plus the channel columns when every link
/// carries a path loss.
pub fn write_links<W: Write>(w: W, dataset: &LinkDataset) -> Result<()> {
    let channel = dataset.has_pathloss();
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = LINK_COLUMNS.to_vec();
    if channel {
        header.extend(CHANNEL_COLUMNS);
    }
    out.write_record(&header)?;
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for s in &dataset.samples {
        rec.clear();
        rec.extend([
            s.height_m.to_string(),
            s.city_id.to_string(),
            s.abs_x.to_string(),
            s.abs_y.to_string(),
            s.gu_x.to_string(),
            s.gu_y.to_string(),
            s.r_m.to_string(),
            s.d_m.to_string(),
            s.theta_rad.to_string(),
            flag(s.los).to_string(),
        ]);
        if channel {
            rec.push(s.pathloss_db.expect("checked").to_string());
            rec.push(s.shadow_db.map_or(String::new(), |v| v.to_string()));
            rec.push(s.los_model.map_or(String::new(), |b| flag(b).to_string()));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::Malformed(format!("missing column '{name}'")))
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.trim().parse().map_err(|_| Error::Malformed(format!("line {line}: cannot parse '{raw}'")))
}

fn parse_opt<T: std::str::FromStr>(rec: &csv::StringRecord, i: Option<usize>, line: u64) -> Result<Option<T>> {
    match i {
        Some(i) if !rec.get(i).unwrap_or("").trim().is_empty() => parse(rec, i, line).map(Some),
        _ => Ok(None),
    }
}

fn parse_flag(rec: &csv::StringRecord, i: usize, line: u64) -> Result<bool> {
    match rec.get(i).map(str::trim) {
        Some("1") | Some("true") => Ok(true),
        Some("0") | Some("false") => Ok(false),
        other => Err(Error::Malformed(format!("line {line}: bad flag {other:?}"))),
    }
}

/// Reads a link CSV by header name; channel columns are optional.
pub fn read_links<R: Read>(r: R) -> Result<LinkDataset> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = LINK_COLUMNS.iter().map(|c| column(&headers, c)).collect::<Result<_>>()?;
    let opt = |name: &str| headers.iter().position(|h| h == name);
    let (pl, sh, lm) = (opt("pathloss_db"), opt("shadow_db"), opt("los_model"));
    let mut samples = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        let los_model = match lm {
            Some(i) if !rec.get(i).unwrap_or("").trim().is_empty() => Some(parse_flag(&rec, i, line)?),
            _ => None,
        };
        samples.push(LinkSample {
            height_m: parse(&rec, idx[0], line)?,
            city_id: parse(&rec, idx[1], line)?,
            abs_x: parse(&rec, idx[2], line)?,
            abs_y: parse(&rec, idx[3], line)?,
            gu_x: parse(&rec, idx[4], line)?,
            gu_y: parse(&rec, idx[5], line)?,
            r_m: parse(&rec, idx[6], line)?,
            d_m: parse(&rec, idx[7], line)?,
            theta_rad: parse(&rec, idx[8], line)?,
            los: parse_flag(&rec, idx[9], line)?,
            pathloss_db: parse_opt(&rec, pl, line)?,
            shadow_db: parse_opt(&rec, sh, line)?,
            los_model,
        });
    }
    Ok(LinkDataset { samples })
}

pub fn write_plos<W: Write>(w: W, curve: &PlosCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta_rad", "p_los", "n_los", "n_total"])?;
    for k in 0..curve.len() {
        out.write_record([
            curve.theta[k].to_string(),
            curve.p[k].to_string(),
            curve.n_los[k].to_string(),
            curve.n_total[k].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_plos`]; bin width and reliability
/// threshold are not stored in the file.
pub fn read_plos<R: Read>(r: R, bin_width: f64, min_count: u64) -> Result<PlosCurve> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> =
        ["theta_rad", "p_los", "n_los", "n_total"].iter().map(|c| column(&headers, c)).collect::<Result<_>>()?;
    let mut c = PlosCurve { bin_width, min_count, theta: vec![], p: vec![], n_los: vec![], n_total: vec![] };
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        c.theta.push(parse(&rec, idx[0], line)?);
        c.p.push(parse(&rec, idx[1], line)?);
        c.n_los.push(parse(&rec, idx[2], line)?);
        c.n_total.push(parse(&rec, idx[3], line)?);
    }
    Ok(c)
}

pub fn write_height_estimates<W: Write>(w: W, rows: &[HeightEstimate]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["height_m", "state", "n_hat", "sigma_hat", "count"])?;
    for e in rows {
        out.write_record([
            e.height_m.to_string(),
            e.state.name().to_string(),
            e.n_hat.to_string(),
            e.sigma_hat.to_string(),
            e.count.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cdf<W: Write>(w: W, cdf: &[(f64, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["pathloss_db", "cdf"])?;
    for (x, p) in cdf {
        out.write_record([x.to_string(), p.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}
