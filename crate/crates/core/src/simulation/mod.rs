//! Samplers, theoretical values and Monte Carlo experiments.
//!
//! Every random draw comes from ChaCha8 seeded with a user seed; independent
//! work items (grid points, replications) each get their own ChaCha stream, so
//! results are reproducible regardless of execution strategy.

mod consistency;
mod ols;
mod testcase;

pub use consistency::{
    consistency_experiment, ConsistencyConfig, ConsistencyRow, ConsistencyTable,
};
pub use ols::{ols_robust, Regression};
pub use testcase::{
    run_test_case, run_test_case_with, TestCaseConfig, TestCaseRecord, TestCaseResult,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::copula::ReferenceKind;
use crate::error::{Error, Result};
use crate::gaussian::{norm_cdf, GaussianCopula, NormalQuantile};
use crate::measures::estimate_with_surface;
use crate::sample::PairedSample;
use crate::solver::QuantileLevels;

/// Generator for work item `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {sigma}"
        )))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "rho must lie in [-1, 1], got {rho}"
        )))
    }
}

/// `n` draws of `(x, y)` with `x = mu1 + sigma1 z1` and
/// `y = mu2 + sigma2 (rho z1 + sqrt(1 - rho²) z2)` from the given generator.
pub fn bivariate_normal_from<R: Rng>(
    rng: &mut R,
    n: usize,
    rho: f64,
    (mu1, mu2): (f64, f64),
    (sigma1, sigma2): (f64, f64),
) -> Result<PairedSample> {
    check_rho(rho)?;
    check_sigma("sigma1", sigma1)?;
    check_sigma("sigma2", sigma2)?;
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        xs.push(mu1 + sigma1 * z1);
        ys.push(mu2 + sigma2 * (rho * z1 + c * z2));
    }
    PairedSample::new(xs, ys)
}

/// Seeded bivariate normal sample (stream 0 of `seed`).
pub fn sample_bivariate_normal(
    n: usize,
    rho: f64,
    mu1: f64,
    mu2: f64,
    sigma1: f64,
    sigma2: f64,
    seed: u64,
) -> Result<PairedSample> {
    bivariate_normal_from(
        &mut stream_rng(seed, 0),
        n,
        rho,
        (mu1, mu2),
        (sigma1, sigma2),
    )
}

/// `n` draws from a reference copula with uniform margins.
///
/// `rho` is used by the Gaussian kind only.
pub fn copula_sample_from<R: Rng>(
    rng: &mut R,
    kind: ReferenceKind,
    rho: f64,
    n: usize,
) -> Result<PairedSample> {
    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    match kind {
        ReferenceKind::Gaussian => {
            let normal = bivariate_normal_from(rng, n, rho, (0.0, 0.0), (1.0, 1.0))?;
            let (xs, ys) = normal.into_parts();
            us.extend(xs.into_iter().map(norm_cdf));
            vs.extend(ys.into_iter().map(norm_cdf));
        }
        _ => {
            for _ in 0..n {
                let u: f64 = rng.random();
                let v = match kind {
                    ReferenceKind::Independence => rng.random(),
                    ReferenceKind::Comonotone => u,
                    _ => 1.0 - u,
                };
                us.push(u);
                vs.push(v);
            }
        }
    }
    PairedSample::new(us, vs)
}

/// Elementwise `exp` of both coordinates; rank-preserving.
pub fn lognormal_transform(sample: &PairedSample) -> Result<PairedSample> {
    let exp_all = |values: &[f64]| -> Result<Vec<f64>> {
        values
            .iter()
            .enumerate()
            .map(|(index, v)| {
                let e = v.exp();
                if e.is_finite() {
                    Ok(e)
                } else {
                    Err(Error::Overflow { op: "exp", index })
                }
            })
            .collect()
    };
    PairedSample::new(exp_all(sample.xs())?, exp_all(sample.ys())?)
}

/// Correlation of `(exp X1, exp X2)` for bivariate normal `(X1, X2)`:
/// `(exp(ρ σ1 σ2) - 1) / sqrt((exp(σ1²) - 1)(exp(σ2²) - 1))`.
pub fn theoretical_lognormal_corr(rho: f64, sigma1: f64, sigma2: f64) -> f64 {
    (rho * sigma1 * sigma2).exp_m1() / (sigma1.powi(2).exp_m1() * sigma2.powi(2).exp_m1()).sqrt()
}

/// Sample Pearson correlation.
pub fn pearson(sample: &PairedSample) -> f64 {
    let n = sample.len() as f64;
    let mx = sample.xs().iter().sum::<f64>() / n;
    let my = sample.ys().iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in sample.xs().iter().zip(sample.ys()) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Population values of the measures under a Gaussian copula with normal
/// margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTheory {
    pub omega: f64,
    pub gamma: f64,
    pub iota_lower: f64,
    pub iota_upper: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
}

/// Theoretical `ι` and `δ` for a Gaussian copula with correlation `rho`.
///
/// `δ` is location-scale free, so standard normal quantiles are used.
pub fn theoretical_iota_delta_gaussian(rho: f64, levels: QuantileLevels) -> Result<GaussianTheory> {
    let copula = GaussianCopula::new(rho)?;
    let est = estimate_with_surface(&copula, &NormalQuantile::STANDARD, levels)?;
    Ok(GaussianTheory {
        omega: est.omega,
        gamma: est.gamma,
        iota_lower: est.iota_lower,
        iota_upper: est.iota_upper,
        delta_lower: est
            .delta_lower
            .expect("normal quantiles are strictly increasing"),
        delta_upper: est
            .delta_upper
            .expect("normal quantiles are strictly increasing"),
    })
}
