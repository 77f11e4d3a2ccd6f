use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Every JSON output and sidecar starts with what produced it.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, B: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: Option<u64>,
    pub config: &'a C,
    #[serde(flatten)]
    pub body: B,
}

impl<'a, C: Serialize, B: Serialize> Envelope<'a, C, B> {
    pub fn new(command: &'a str, seed: Option<u64>, config: &'a C, body: B) -> Self {
        Envelope { command, version: env!("CARGO_PKG_VERSION"), seed, config, body }
    }
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    a2g_core::io::create(path).map_err(CliError::at(path))
}

pub fn open(path: &Path) -> CliResult<io::BufReader<File>> {
    a2g_core::io::open(path).map_err(CliError::at(path))
}

/// The file at `path`, or stdout.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult {
    let w = sink(path)?;
    let err = |e| match path {
        Some(p) => CliError::at(p)(e),
        None => CliError::from(e),
    };
    a2g_core::io::write_json(w, value).map_err(err)
}

/// Runs a CSV writer against `path` (or stdout), then writes the envelope
/// to `<path>.meta.json` when the output is a file.
pub fn write_csv<F, C, B>(path: Option<&Path>, write: F, meta: &Envelope<'_, C, B>) -> CliResult
where
    F: FnOnce(Box<dyn Write>) -> a2g_core::Result<()>,
    C: Serialize,
    B: Serialize,
{
    let w = sink(path)?;
    match path {
        Some(p) => {
            write(w).map_err(CliError::at(p))?;
            let side = sidecar(p);
            a2g_core::io::write_json(create(&side)?, meta).map_err(CliError::at(&side))
        }
        None => write(w).map_err(CliError::from),
    }
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// `dir/stem_suffix.ext`, used when one command writes several files.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}
