use std::io::Read;
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate};

use crate::error::{Error, Result};

/// Bar sizes the pipeline accepts.
pub const BAR_MINUTES: [u32; 4] = [5, 10, 30, 60];

/// Bars per trading day at 5 minutes.
pub const BARS_PER_DAY_5MIN: usize = 77;

fn check_bar_minutes(m: u32) -> Result<()> {
    if BAR_MINUTES.contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "bar size {m} minutes not in {BAR_MINUTES:?}"
        )))
    }
}

/// Rectangular panel of bar returns: a market series and named assets on a
/// common, strictly ascending timestamp grid with equal bars per day.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    timestamps: Vec<DateTime<FixedOffset>>,
    market: Vec<f64>,
    asset_names: Vec<String>,
    assets: Vec<Vec<f64>>,
    bar_minutes: u32,
    bars_per_day: usize,
}

impl ReturnPanel {
    pub fn new(
        timestamps: Vec<DateTime<FixedOffset>>,
        market: Vec<f64>,
        asset_names: Vec<String>,
        assets: Vec<Vec<f64>>,
        bar_minutes: u32,
    ) -> Result<Self> {
        check_bar_minutes(bar_minutes)?;
        let n = timestamps.len();
        if n == 0 {
            return Err(Error::Panel("panel has no rows".into()));
        }
        if asset_names.is_empty() || asset_names.len() != assets.len() {
            return Err(Error::Panel(format!(
                "{} asset names for {} asset columns",
                asset_names.len(),
                assets.len()
            )));
        }
        if market.len() != n {
            return Err(Error::Panel(format!(
                "market has {} values for {n} rows",
                market.len()
            )));
        }
        for (name, col) in asset_names.iter().zip(&assets) {
            if col.len() != n {
                return Err(Error::Panel(format!(
                    "{name} has {} values for {n} rows",
                    col.len()
                )));
            }
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Panel(format!(
                "timestamps not strictly ascending at row {}",
                i + 2
            )));
        }
        let columns = std::iter::once(("market", &market))
            .chain(asset_names.iter().map(String::as_str).zip(&assets));
        for (name, col) in columns {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Panel(format!(
                    "non-finite value in {name} at row {}",
                    i + 1
                )));
            }
        }
        let bars_per_day = bars_per_day(&timestamps)?;
        if bar_minutes == 5 && bars_per_day != BARS_PER_DAY_5MIN {
            log::warn!("{bars_per_day} bars per day at 5 minutes (expected {BARS_PER_DAY_5MIN})");
        }
        Ok(Self {
            timestamps,
            market,
            asset_names,
            assets,
            bar_minutes,
            bars_per_day,
        })
    }

    pub fn timestamps(&self) -> &[DateTime<FixedOffset>] {
        &self.timestamps
    }

    pub fn market(&self) -> &[f64] {
        &self.market
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn asset(&self, j: usize) -> &[f64] {
        &self.assets[j]
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_bars(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_days(&self) -> usize {
        self.timestamps.len() / self.bars_per_day
    }

    pub fn bar_minutes(&self) -> u32 {
        self.bar_minutes
    }

    pub fn bars_per_day(&self) -> usize {
        self.bars_per_day
    }

    /// Compounds bars to a coarser size: within each day, consecutive groups
    /// of `target / bar_minutes` bars become one bar `Π(1 + r) - 1` stamped
    /// with the group's last timestamp. A shorter final group closes the day.
    pub fn aggregate(&self, target_minutes: u32) -> Result<Self> {
        check_bar_minutes(target_minutes)?;
        if !target_minutes.is_multiple_of(self.bar_minutes) {
            return Err(Error::InvalidParameter(format!(
                "cannot aggregate {}-minute bars to {target_minutes} minutes",
                self.bar_minutes
            )));
        }
        let k = (target_minutes / self.bar_minutes) as usize;
        if k == 1 {
            return Ok(self.clone());
        }
        let groups: Vec<(usize, usize)> = (0..self.n_days())
            .flat_map(|d| {
                let start = d * self.bars_per_day;
                let end = start + self.bars_per_day;
                (start..end).step_by(k).map(move |s| (s, (s + k).min(end)))
            })
            .collect();
        let compound = |col: &[f64]| -> Vec<f64> {
            groups
                .iter()
                .map(|&(s, e)| col[s..e].iter().fold(1.0, |acc, r| acc * (1.0 + r)) - 1.0)
                .collect()
        };
        Self::new(
            groups
                .iter()
                .map(|&(_, e)| self.timestamps[e - 1])
                .collect(),
            compound(&self.market),
            self.asset_names.clone(),
            self.assets.iter().map(|c| compound(c)).collect(),
            target_minutes,
        )
    }

    /// The first `n_bars` rows.
    pub fn truncated(&self, n_bars: usize) -> Result<Self> {
        let n = n_bars.min(self.n_bars());
        Self::new(
            self.timestamps[..n].to_vec(),
            self.market[..n].to_vec(),
            self.asset_names.clone(),
            self.assets.iter().map(|c| c[..n].to_vec()).collect(),
            self.bar_minutes,
        )
    }

    /// Writes the panel in the input CSV layout.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["timestamp".to_string(), "market".to_string()];
        header.extend(self.asset_names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.n_bars() {
            let mut row = vec![self.timestamps[i].to_rfc3339(), self.market[i].to_string()];
            row.extend(self.assets.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Local calendar date of a bar.
fn day_of(t: &DateTime<FixedOffset>) -> NaiveDate {
    t.date_naive()
}

fn bars_per_day(timestamps: &[DateTime<FixedOffset>]) -> Result<usize> {
    let mut counts: Vec<(NaiveDate, usize)> = Vec::new();
    for t in timestamps {
        let d = day_of(t);
        match counts.last_mut() {
            Some((last, c)) if *last == d => *c += 1,
            _ => counts.push((d, 1)),
        }
    }
    let first = counts[0].1;
    if let Some((d, c)) = counts.iter().find(|(_, c)| *c != first) {
        return Err(Error::Panel(format!(
            "day {d} has {c} bars, expected {first} like {}",
            counts[0].0
        )));
    }
    Ok(first)
}

/// Reads a panel CSV (`timestamp,market,<assets…>`, RFC 3339 timestamps).
pub fn load_panel(path: impl AsRef<Path>, bar_minutes: u32) -> Result<ReturnPanel> {
    let file = std::fs::File::open(path.as_ref())?;
    read_panel(file, bar_minutes)
}

pub fn read_panel<R: Read>(input: R, bar_minutes: u32) -> Result<ReturnPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.get(0) != Some("timestamp") {
        return Err(Error::Panel(
            "missing column `timestamp` (must be first)".into(),
        ));
    }
    if header.get(1) != Some("market") {
        return Err(Error::Panel(
            "missing column `market` (must be second)".into(),
        ));
    }
    let asset_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    if asset_names.is_empty() {
        return Err(Error::Panel("no asset columns after `market`".into()));
    }
    let mut timestamps = Vec::new();
    let mut market = Vec::new();
    let mut assets = vec![Vec::new(); asset_names.len()];
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let record = record.map_err(|e| Error::Panel(format!("line {line}: {e}")))?;
        let ts = DateTime::parse_from_rfc3339(&record[0]).map_err(|e| {
            Error::Panel(format!("line {line}: bad timestamp `{}`: {e}", &record[0]))
        })?;
        timestamps.push(ts);
        let cell = |k: usize| -> Result<f64> {
            let v: f64 = record[k].parse().map_err(|_| {
                Error::Panel(format!(
                    "line {line}: `{}` in {} is not a number",
                    &record[k], &header[k]
                ))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Panel(format!(
                    "line {line}: non-finite value in {}",
                    &header[k]
                )))
            }
        };
        market.push(cell(1)?);
        for (j, col) in assets.iter_mut().enumerate() {
            col.push(cell(j + 2)?);
        }
    }
    ReturnPanel::new(timestamps, market, asset_names, assets, bar_minutes)
}
