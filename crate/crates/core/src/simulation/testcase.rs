use std::io::Write;

use serde::Serialize;

use super::{
    bivariate_normal_from, lognormal_transform, ols_robust, pearson, stream_rng,
    theoretical_iota_delta_gaussian, theoretical_lognormal_corr, GaussianTheory, Regression,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measures::estimate_pair;
use crate::solver::QuantileLevels;

/// Lognormal test case: a bivariate normal sample with fixed correlation is
/// exponentiated while the second volatility sweeps a grid. The copula, and
/// so `ι`, does not change along the grid; Pearson correlation does.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestCaseConfig {
    pub n: usize,
    pub rho: f64,
    pub sigma1: f64,
    pub sigma2_grid: Vec<f64>,
    pub levels: QuantileLevels,
    pub seed: u64,
}

impl Default for TestCaseConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            rho: 0.95,
            sigma1: 0.2,
            sigma2_grid: (20..=200).map(|i| i as f64 / 100.0).collect(),
            levels: QuantileLevels::new(0.5, 0.5).expect("interior levels"),
            seed: 42,
        }
    }
}

impl TestCaseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test case needs |rho| < 1, got {}",
                self.rho
            )));
        }
        if !(self.sigma1 > 0.0) {
            return Err(Error::InvalidParameter("sigma1 must be positive".into()));
        }
        if self.sigma2_grid.len() < 3 {
            return Err(Error::InvalidParameter(
                "sigma2 grid needs at least 3 points".into(),
            ));
        }
        if !(self.sigma2_grid[0] > 0.0) || self.sigma2_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "sigma2 grid must be positive and strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestCaseRecord {
    pub sigma2: f64,
    pub iota_lower_hat: f64,
    pub iota_upper_hat: f64,
    pub delta_lower_hat: Option<f64>,
    pub delta_upper_hat: Option<f64>,
    pub pearson_hat: f64,
    pub iota_theory: f64,
    pub delta_theory: f64,
    pub pearson_theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestCaseResult {
    pub config: TestCaseConfig,
    pub theory: GaussianTheory,
    pub records: Vec<TestCaseRecord>,
    /// `ι̂^L` regressed on `σ2`.
    pub iota_regression: Regression,
    /// `δ̂^L` regressed on `σ2`.
    pub delta_regression: Regression,
}

impl TestCaseResult {
    pub fn max_iota_deviation(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (r.iota_lower_hat - r.iota_theory).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_pearson_deviation(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (r.pearson_hat - r.pearson_theory).abs())
            .fold(0.0, f64::max)
    }

    /// One CSV row per grid point; absent `δ` values are empty cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "sigma2",
            "iota_L_hat",
            "iota_U_hat",
            "delta_L_hat",
            "delta_U_hat",
            "pearson_hat",
            "iota_theory",
            "delta_theory",
            "pearson_theory",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.sigma2.to_string(),
                r.iota_lower_hat.to_string(),
                r.iota_upper_hat.to_string(),
                opt(r.delta_lower_hat),
                opt(r.delta_upper_hat),
                r.pearson_hat.to_string(),
                r.iota_theory.to_string(),
                r.delta_theory.to_string(),
                r.pearson_theory.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the sweep with the default execution strategy.
pub fn run_test_case(config: &TestCaseConfig) -> Result<TestCaseResult> {
    run_test_case_with(config, Execution::default())
}

/// Runs the sweep; grid point `i` draws a fresh sample from stream `i`.
pub fn run_test_case_with(config: &TestCaseConfig, exec: Execution) -> Result<TestCaseResult> {
    config.validate()?;
    let theory = theoretical_iota_delta_gaussian(config.rho, config.levels)?;
    let records = exec.map_range(config.sigma2_grid.len(), |i| {
        let sigma2 = config.sigma2_grid[i];
        let mut rng = stream_rng(config.seed, i as u64);
        let normal = bivariate_normal_from(
            &mut rng,
            config.n,
            config.rho,
            (0.0, 0.0),
            (config.sigma1, sigma2),
        )?;
        let lognormal = lognormal_transform(&normal)?;
        let est = estimate_pair(&lognormal, &[config.levels])?.remove(0);
        Ok(TestCaseRecord {
            sigma2,
            iota_lower_hat: est.iota_lower,
            iota_upper_hat: est.iota_upper,
            delta_lower_hat: est.delta_lower,
            delta_upper_hat: est.delta_upper,
            pearson_hat: pearson(&lognormal),
            iota_theory: theory.iota_lower,
            delta_theory: theory.delta_lower,
            pearson_theory: theoretical_lognormal_corr(config.rho, config.sigma1, sigma2),
        })
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;

    let sigmas: Vec<f64> = records.iter().map(|r| r.sigma2).collect();
    let iotas: Vec<f64> = records.iter().map(|r| r.iota_lower_hat).collect();
    let iota_regression = ols_robust(&sigmas, &iotas)?;
    let (ds, deltas): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| r.delta_lower_hat.map(|d| (r.sigma2, d)))
        .unzip();
    let delta_regression = ols_robust(&ds, &deltas)?;
    Ok(TestCaseResult {
        config: config.clone(),
        theory,
        records,
        iota_regression,
        delta_regression,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TestCaseConfig {
        TestCaseConfig {
            n: 400,
            sigma2_grid: vec![0.2, 0.8, 1.4, 2.0],
            seed: 3,
            ..TestCaseConfig::default()
        }
    }

    #[test]
    fn default_grid() {
        let c = TestCaseConfig::default();
        assert_eq!(c.sigma2_grid.len(), 181);
        assert_eq!(c.sigma2_grid[0], 0.2);
        assert_eq!(*c.sigma2_grid.last().unwrap(), 2.0);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unsorted_grid() {
        let c = TestCaseConfig {
            sigma2_grid: vec![0.2, 0.1, 0.3],
            ..TestCaseConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn strategies_agree_and_rows_align() {
        let c = small();
        let a = run_test_case_with(&c, Execution::Sequential).unwrap();
        let b = run_test_case_with(&c, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let sig: Vec<f64> = a.records.iter().map(|r| r.sigma2).collect();
        assert_eq!(sig, c.sigma2_grid);
    }

    #[test]
    fn csv_has_row_per_grid_point() {
        let r = run_test_case(&small()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("sigma2,iota_L_hat,iota_U_hat,delta_L_hat"));
    }
}
