use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::engine::{WindowPlan, WindowSeries};
use crate::error::Result;

pub const SERIES_HEADER: [&str; 10] = [
    "timestamp",
    "level",
    "iota_L",
    "iota_U",
    "delta_L",
    "delta_U",
    "gaussian_delta_L",
    "gaussian_delta_U",
    "market_return",
    "n_assets",
];

fn cell(v: Option<f64>) -> String {
    // `Display` for f64 is the shortest string that round-trips
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per evaluation bar and level pair; absent values are empty cells.
pub fn write_series_csv<W: Write>(series: &WindowSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for r in &series.rows {
        w.write_record([
            r.timestamp.to_rfc3339(),
            r.level.label(),
            cell(r.iota_lower),
            cell(r.iota_upper),
            cell(r.delta_lower),
            cell(r.delta_upper),
            cell(r.gaussian_delta_lower),
            cell(r.gaussian_delta_upper),
            r.market_return.to_string(),
            r.n_assets.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_series(series: &WindowSeries, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_series_csv(series, std::io::BufWriter::new(file))
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestConfig {
    pub plan: WindowPlan,
    pub bar_minutes: u32,
    pub levels: Vec<String>,
    pub baseline: bool,
}

/// Run metadata written next to the series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub library_version: String,
    pub config: ManifestConfig,
    /// Seed of the generator that produced the panel, when known.
    pub seed: Option<u64>,
    pub panel_sha256: String,
    pub rows: usize,
}

impl RunManifest {
    pub fn new(series: &WindowSeries, panel_bytes: &[u8], seed: Option<u64>) -> Self {
        Self {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            config: ManifestConfig {
                plan: series.plan,
                bar_minutes: series.bar_minutes,
                levels: series.levels.iter().map(|l| l.label()).collect(),
                baseline: series.baseline,
            },
            seed,
            panel_sha256: sha256_hex(panel_bytes),
            rows: series.rows.len(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_ne!(sha256_hex(b"abc"), sha256_hex(b"abd"));
    }
}
