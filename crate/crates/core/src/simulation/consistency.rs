use std::io::Write;

use serde::Serialize;

use super::{copula_sample_from, stream_rng};
use crate::copula::{ReferenceCopula, ReferenceKind};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measures::{iota_lower, PairEstimator};
use crate::solver::{solve_omega, QuantileLevels};

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    pub kind: ReferenceKind,
    /// Used by the Gaussian kind only.
    pub rho: f64,
    pub levels: QuantileLevels,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub rmse_omega: f64,
    pub rmse_iota: f64,
    pub bias_omega: f64,
    /// Standard error of `bias_omega`.
    pub bias_omega_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyTable {
    pub omega_true: f64,
    pub iota_true: f64,
    pub replications: usize,
    pub rows: Vec<ConsistencyRow>,
}

impl ConsistencyTable {
    /// `RMSE(ω̂)` of each row divided by that of the previous row.
    pub fn rmse_ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].rmse_omega / w[0].rmse_omega)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "rmse_omega",
            "rmse_iota",
            "bias_omega",
            "bias_omega_se",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.rmse_omega.to_string(),
                r.rmse_iota.to_string(),
                r.bias_omega.to_string(),
                r.bias_omega_se.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Monte Carlo RMSE of `ω̂` and `ι̂^L` against the analytic values of a
/// reference copula, for each sample size in `n_grid`.
///
/// Replication `r` at grid index `i` uses stream `i * replications + r`.
pub fn consistency_experiment(
    config: &ConsistencyConfig,
    exec: Execution,
) -> Result<ConsistencyTable> {
    if config.n_grid.is_empty() || config.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "n grid must be non-empty and ascending".into(),
        ));
    }
    if config.replications < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 replications".into(),
        ));
    }
    let surface = ReferenceCopula::new(config.kind, Some(config.rho))?;
    let omega_true = solve_omega(&surface, config.levels)?.value;
    let iota_true = iota_lower(omega_true, config.levels)?;

    let reps = config.replications;
    let draws = exec.map_range(config.n_grid.len() * reps, |job| -> Result<(f64, f64)> {
        let n = config.n_grid[job / reps];
        let mut rng = stream_rng(config.seed, job as u64);
        let sample = copula_sample_from(&mut rng, config.kind, config.rho, n)?;
        let est = PairEstimator::new(&sample)?.estimate(config.levels)?;
        Ok((est.omega, est.iota_lower))
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;

    let rows = config
        .n_grid
        .iter()
        .zip(draws.chunks(reps))
        .map(|(&n, chunk)| {
            let r = reps as f64;
            let errs: Vec<f64> = chunk.iter().map(|(w, _)| w - omega_true).collect();
            let bias = errs.iter().sum::<f64>() / r;
            let sd = (errs.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
            ConsistencyRow {
                n,
                rmse_omega: (errs.iter().map(|e| e * e).sum::<f64>() / r).sqrt(),
                rmse_iota: (chunk
                    .iter()
                    .map(|(_, i)| (i - iota_true).powi(2))
                    .sum::<f64>()
                    / r)
                    .sqrt(),
                bias_omega: bias,
                bias_omega_se: sd / r.sqrt(),
            }
        })
        .collect();
    Ok(ConsistencyTable {
        omega_true,
        iota_true,
        replications: reps,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_bias_within_two_se() {
        let cfg = ConsistencyConfig {
            kind: ReferenceKind::Independence,
            rho: 0.0,
            levels: QuantileLevels::new(0.1, 0.1).unwrap(),
            n_grid: vec![500],
            replications: 100,
            seed: 11,
        };
        let t = consistency_experiment(&cfg, Execution::default()).unwrap();
        assert_eq!(t.omega_true, 0.1);
        let row = t.rows[0];
        assert!(row.bias_omega.abs() <= 2.0 * row.bias_omega_se, "{row:?}");
    }

    #[test]
    fn rejects_bad_grid() {
        let cfg = ConsistencyConfig {
            kind: ReferenceKind::Independence,
            rho: 0.0,
            levels: QuantileLevels::new(0.1, 0.1).unwrap(),
            n_grid: vec![500, 100],
            replications: 10,
            seed: 1,
        };
        assert!(consistency_experiment(&cfg, Execution::Sequential).is_err());
    }
}
