use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use super::panel::ReturnPanel;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussian::fit_gaussian;
use crate::measures::{DependenceEstimate, EmpiricalQuantileFn, PairEstimator, MIN_SAMPLE};
use crate::sample::{ExpandingRanks, PairedSample, PseudoSample};
use crate::solver::QuantileLevels;

/// A lower-tail level `(p, p)` reported together with its mirrored upper
/// level `(1-p, 1-p)`; `ι^L`/`δ^L` come from the former, `ι^U`/`δ^U` from the
/// latter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPair {
    pub lower: QuantileLevels,
    pub upper: QuantileLevels,
}

impl LevelPair {
    pub fn symmetric(p: f64) -> Result<Self> {
        let lower = QuantileLevels::new(p, p)?;
        Ok(Self {
            lower,
            upper: lower.mirrored(),
        })
    }

    /// `lower/upper`, e.g. `0.01/0.99`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.lower, self.upper)
    }
}

impl fmt::Display for LevelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `0.01/0.99, 0.05/0.95, 0.1/0.9, 0.5/0.5`.
pub fn default_level_pairs() -> Vec<LevelPair> {
    [0.01, 0.05, 0.1, 0.5]
        .iter()
        .map(|&p| LevelPair::symmetric(p).expect("interior level"))
        .collect()
}

/// Expanding-window schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub burn_in_days: usize,
    /// Bars between consecutive estimates.
    pub step: usize,
}

impl Default for WindowPlan {
    fn default() -> Self {
        Self {
            burn_in_days: 30,
            step: 1,
        }
    }
}

impl WindowPlan {
    /// Index of the first evaluation bar: the last bar of the burn-in, so the
    /// first window holds exactly `burn_in_days` days.
    pub fn first_bar(&self, panel: &ReturnPanel) -> Result<usize> {
        if self.burn_in_days == 0 || self.step == 0 {
            return Err(Error::InvalidParameter(
                "burn-in days and step must be positive".into(),
            ));
        }
        let window = self.burn_in_days * panel.bars_per_day();
        if window > panel.n_bars() {
            return Err(Error::Panel(format!(
                "burn-in needs {window} bars ({} days), panel has {}",
                self.burn_in_days,
                panel.n_bars()
            )));
        }
        if window < MIN_SAMPLE {
            return Err(Error::InvalidParameter(format!(
                "burn-in window of {window} bars is below the minimum sample of {MIN_SAMPLE}"
            )));
        }
        Ok(window - 1)
    }

    pub fn evaluation_bars(&self, panel: &ReturnPanel) -> Result<Vec<usize>> {
        let first = self.first_bar(panel)?;
        Ok((first..panel.n_bars()).step_by(self.step).collect())
    }
}

/// Cross-sectional means at one evaluation bar and level pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub timestamp: DateTime<FixedOffset>,
    pub level: LevelPair,
    pub iota_lower: Option<f64>,
    pub iota_upper: Option<f64>,
    pub delta_lower: Option<f64>,
    pub delta_upper: Option<f64>,
    pub gaussian_delta_lower: Option<f64>,
    pub gaussian_delta_upper: Option<f64>,
    pub market_return: f64,
    /// Assets with a successful nonparametric estimate.
    pub n_assets: usize,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSeries {
    pub plan: WindowPlan,
    pub levels: Vec<LevelPair>,
    pub baseline: bool,
    pub bar_minutes: u32,
    pub rows: Vec<SeriesRow>,
}

impl WindowSeries {
    pub fn first_window(&self) -> Option<usize> {
        self.rows.first().map(|r| r.window)
    }

    /// Rows of one level pair, in time order.
    pub fn level_rows<'a>(
        &'a self,
        level: &'a LevelPair,
    ) -> impl Iterator<Item = &'a SeriesRow> + 'a {
        self.rows.iter().filter(move |r| r.level == *level)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairValues {
    iota_lower: f64,
    iota_upper: f64,
    delta_lower: Option<f64>,
    delta_upper: Option<f64>,
    gaussian_delta_lower: Option<f64>,
    gaussian_delta_upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub baseline: bool,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            baseline: true,
            execution: Execution::default(),
        }
    }
}

fn distinct_levels(pairs: &[LevelPair]) -> Vec<QuantileLevels> {
    let mut out: Vec<QuantileLevels> = Vec::new();
    for p in pairs {
        for l in [p.lower, p.upper] {
            if !out.contains(&l) {
                out.push(l);
            }
        }
    }
    out
}

fn find(estimates: &[DependenceEstimate], l: QuantileLevels) -> &DependenceEstimate {
    estimates
        .iter()
        .find(|e| e.alpha == l.alpha() && e.beta == l.beta())
        .expect("every level was estimated")
}

/// Estimates for one asset at one bar; the nonparametric part must succeed,
/// a baseline failure leaves the Gaussian columns absent.
fn estimate_asset_bar(
    market_ranks: &ExpandingRanks,
    asset_ranks: &ExpandingRanks,
    window: (&[f64], &[f64]),
    pairs: &[LevelPair],
    levels: &[QuantileLevels],
    baseline: bool,
) -> Result<Vec<PairValues>> {
    let pseudo =
        PseudoSample::from_ranks(market_ranks.ranks().to_vec(), asset_ranks.ranks().to_vec())?;
    let quantile = EmpiricalQuantileFn::from_sorted(asset_ranks.sorted().to_vec())?;
    let estimator = PairEstimator::from_parts(&pseudo, quantile)?;
    let est = levels
        .iter()
        .map(|&l| estimator.estimate(l))
        .collect::<Result<Vec<_>>>()?;
    let gauss = if baseline {
        let sample = PairedSample::new(window.0.to_vec(), window.1.to_vec())?;
        match fit_gaussian(&sample).and_then(|fit| {
            levels
                .iter()
                .map(|&l| fit.estimate(l))
                .collect::<Result<Vec<_>>>()
        }) {
            Ok(g) => Some(g),
            Err(e) => {
                log::debug!("gaussian baseline failed: {e}");
                None
            }
        }
    } else {
        None
    };
    Ok(pairs
        .iter()
        .map(|p| {
            let lo = find(&est, p.lower);
            let up = find(&est, p.upper);
            PairValues {
                iota_lower: lo.iota_lower,
                iota_upper: up.iota_upper,
                delta_lower: lo.delta_lower,
                delta_upper: up.delta_upper,
                gaussian_delta_lower: gauss.as_ref().and_then(|g| find(g, p.lower).delta_lower),
                gaussian_delta_upper: gauss.as_ref().and_then(|g| find(g, p.upper).delta_upper),
            }
        })
        .collect())
}

/// Walks one asset through the panel, updating ranks bar by bar and
/// estimating at every evaluation bar.
fn run_asset(
    panel: &ReturnPanel,
    j: usize,
    eval_bars: &[usize],
    pairs: &[LevelPair],
    levels: &[QuantileLevels],
    baseline: bool,
) -> Vec<Option<Vec<PairValues>>> {
    let market = panel.market();
    let asset = panel.asset(j);
    let last = eval_bars.last().copied().unwrap_or(0);
    let mut mr = ExpandingRanks::with_capacity(last + 1);
    let mut ar = ExpandingRanks::with_capacity(last + 1);
    let mut out = Vec::with_capacity(eval_bars.len());
    let mut next = eval_bars.iter().peekable();
    for t in 0..=last {
        mr.push(market[t]);
        ar.push(asset[t]);
        if next.peek() == Some(&&t) {
            next.next();
            let window = (&market[..=t], &asset[..=t]);
            match estimate_asset_bar(&mr, &ar, window, pairs, levels, baseline) {
                Ok(v) => out.push(Some(v)),
                Err(e) => {
                    log::warn!(
                        "asset {} dropped at {}: {e}",
                        panel.asset_names()[j],
                        panel.timestamps()[t].to_rfc3339()
                    );
                    out.push(None);
                }
            }
        }
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Expanding-window estimation over all assets.
///
/// At each evaluation bar `t` every asset is estimated against the market on
/// bars `0..=t`; the measures are averaged across the assets that succeeded
/// (`δ` over those where it is defined). Assets are independent work items;
/// the reduction runs in asset order, so output does not depend on the
/// execution strategy.
pub fn run_expanding(
    panel: &ReturnPanel,
    plan: WindowPlan,
    pairs: &[LevelPair],
    options: RunOptions,
) -> Result<WindowSeries> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no level pairs given".into()));
    }
    let eval_bars = plan.evaluation_bars(panel)?;
    let levels = distinct_levels(pairs);
    let per_asset = options.execution.map_range(panel.n_assets(), |j| {
        run_asset(panel, j, &eval_bars, pairs, &levels, options.baseline)
    });

    let mut rows = Vec::with_capacity(eval_bars.len() * pairs.len());
    for (k, &t) in eval_bars.iter().enumerate() {
        let ok: Vec<&Vec<PairValues>> = per_asset.iter().filter_map(|a| a[k].as_ref()).collect();
        for (i, &level) in pairs.iter().enumerate() {
            let vals = || ok.iter().map(move |v| v[i]);
            rows.push(SeriesRow {
                timestamp: panel.timestamps()[t],
                level,
                iota_lower: mean(vals().map(|v| v.iota_lower)),
                iota_upper: mean(vals().map(|v| v.iota_upper)),
                delta_lower: mean(vals().filter_map(|v| v.delta_lower)),
                delta_upper: mean(vals().filter_map(|v| v.delta_upper)),
                gaussian_delta_lower: mean(vals().filter_map(|v| v.gaussian_delta_lower)),
                gaussian_delta_upper: mean(vals().filter_map(|v| v.gaussian_delta_upper)),
                market_return: panel.market()[t],
                n_assets: ok.len(),
                window: t + 1,
            });
        }
    }
    Ok(WindowSeries {
        plan,
        levels: pairs.to_vec(),
        baseline: options.baseline,
        bar_minutes: panel.bar_minutes(),
        rows,
    })
}
