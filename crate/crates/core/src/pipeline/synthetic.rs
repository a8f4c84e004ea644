use chrono::{Datelike, Duration, FixedOffset, NaiveDate, TimeZone, Weekday};
use rand::Rng;
use rand_distr::StandardNormal;

use super::panel::{ReturnPanel, BARS_PER_DAY_5MIN};
use crate::copula::ReferenceKind;
use crate::error::{Error, Result};
use crate::simulation::stream_rng;

/// Seeded 5-minute panel: market bar returns `σ z_m`, each asset coupled to
/// the market through the chosen copula with normal margins.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPanelConfig {
    pub assets: usize,
    pub days: usize,
    pub copula: ReferenceKind,
    /// Correlation of the Gaussian kind.
    pub rho: f64,
    /// Per-day correlation overriding `rho` (Gaussian kind only).
    pub rho_by_day: Option<Vec<f64>>,
    /// Bar-return standard deviation.
    pub volatility: f64,
    pub seed: u64,
}

impl Default for SyntheticPanelConfig {
    fn default() -> Self {
        Self {
            assets: 40,
            days: 36,
            copula: ReferenceKind::Gaussian,
            rho: 0.5,
            rho_by_day: None,
            volatility: 1e-3,
            seed: 1,
        }
    }
}

/// Weekdays from 2010-03-01, bars closing 09:35..15:55 at UTC-05:00.
fn trading_timestamps(days: usize) -> Vec<chrono::DateTime<FixedOffset>> {
    let tz = FixedOffset::west_opt(5 * 3600).expect("valid offset");
    let mut date = NaiveDate::from_ymd_opt(2010, 3, 1).expect("valid date");
    let mut out = Vec::with_capacity(days * BARS_PER_DAY_5MIN);
    let mut taken = 0;
    while taken < days {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            let open = tz
                .from_local_datetime(&date.and_hms_opt(9, 30, 0).expect("valid time"))
                .single()
                .expect("fixed offset is unambiguous");
            out.extend((1..=BARS_PER_DAY_5MIN as i64).map(|b| open + Duration::minutes(5 * b)));
            taken += 1;
        }
        date = date.succ_opt().expect("date in range");
    }
    out
}

/// Market uses stream 0, asset `j` stream `j + 1`.
pub fn simulate_panel(config: &SyntheticPanelConfig) -> Result<ReturnPanel> {
    if config.assets == 0 || config.days == 0 {
        return Err(Error::InvalidParameter(
            "need at least one asset and one day".into(),
        ));
    }
    if !(config.volatility > 0.0) {
        return Err(Error::InvalidParameter(
            "volatility must be positive".into(),
        ));
    }
    let rhos: Vec<f64> = match &config.rho_by_day {
        Some(r) if r.len() != config.days => {
            return Err(Error::InvalidParameter(format!(
                "{} daily correlations for {} days",
                r.len(),
                config.days
            )))
        }
        Some(r) => r.clone(),
        None => vec![config.rho; config.days],
    };
    if let Some(r) = rhos.iter().find(|r| !(r.abs() <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in [-1, 1], got {r}"
        )));
    }
    let n = config.days * BARS_PER_DAY_5MIN;
    let sigma = config.volatility;
    let mut rng = stream_rng(config.seed, 0);
    let z_market: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let assets = (0..config.assets)
        .map(|j| {
            let mut rng = stream_rng(config.seed, j as u64 + 1);
            (0..n)
                .map(|t| {
                    let zm = z_market[t];
                    let z = match config.copula {
                        ReferenceKind::Comonotone => zm,
                        ReferenceKind::Countermonotone => -zm,
                        ReferenceKind::Independence => rng.sample(StandardNormal),
                        ReferenceKind::Gaussian => {
                            let r = rhos[t / BARS_PER_DAY_5MIN];
                            let e: f64 = rng.sample(StandardNormal);
                            r * zm + (1.0 - r * r).sqrt() * e
                        }
                    };
                    sigma * z
                })
                .collect()
        })
        .collect();
    ReturnPanel::new(
        trading_timestamps(config.days),
        z_market.iter().map(|z| sigma * z).collect(),
        (1..=config.assets).map(|j| format!("A{j:03}")).collect(),
        assets,
        5,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_weekdays() {
        let p = simulate_panel(&SyntheticPanelConfig {
            assets: 3,
            days: 6,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(p.n_bars(), 462);
        assert_eq!(p.n_days(), 6);
        let days: Vec<_> = p.timestamps().iter().map(|t| t.date_naive()).collect();
        assert!(days
            .iter()
            .all(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)));
        assert_eq!(p.timestamps()[0].to_rfc3339(), "2010-03-01T09:35:00-05:00");
        assert_eq!(p.timestamps()[76].to_rfc3339(), "2010-03-01T15:55:00-05:00");
        assert_eq!(
            p.timestamps()[77 * 5].to_rfc3339(),
            "2010-03-08T09:35:00-05:00"
        );
    }

    #[test]
    fn comonotone_assets_equal_market() {
        let p = simulate_panel(&SyntheticPanelConfig {
            assets: 2,
            days: 1,
            copula: ReferenceKind::Comonotone,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(p.asset(0), p.market());
        assert_eq!(p.asset(1), p.market());
    }

    #[test]
    fn deterministic() {
        let c = SyntheticPanelConfig {
            assets: 2,
            days: 2,
            ..Default::default()
        };
        assert_eq!(simulate_panel(&c).unwrap(), simulate_panel(&c).unwrap());
    }
}
