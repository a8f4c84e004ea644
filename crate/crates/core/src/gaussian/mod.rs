//! Fully parametric baseline: Gaussian copula with Gaussian margins.

pub mod bvn;
pub mod normal;

pub use bvn::bvn_cdf;
pub use normal::{norm_cdf, norm_quantile};

use serde::Serialize;

use crate::copula::{CopulaKind, CopulaSurface};
use crate::error::{Error, Result};
use crate::measures::{estimate_with_surface, DependenceEstimate, QuantileFn};
use crate::sample::PairedSample;
use crate::solver::QuantileLevels;

/// Largest admissible `|ρ|` for a fitted Gaussian copula.
pub const RHO_LIMIT: f64 = 1.0 - 1e-10;

/// Gaussian copula `C(u, v) = Φ₂(Φ⁻¹(u), Φ⁻¹(v); ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCopula {
    rho: f64,
}

impl GaussianCopula {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian copula needs |rho| < 1, got {rho}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// `C(u, v)` of the Gaussian copula; boundary values by continuity.
pub fn gaussian_copula_eval(rho: f64, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v.min(1.0);
    }
    if v >= 1.0 {
        return u;
    }
    bvn_cdf(norm_quantile(u), norm_quantile(v), rho)
}

impl CopulaSurface for GaussianCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        gaussian_copula_eval(self.rho, u, v)
    }

    fn kind(&self) -> CopulaKind {
        CopulaKind::Gaussian { rho: self.rho }
    }

    fn section<'a>(&'a self, u: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> {
        if u <= 0.0 || u >= 1.0 {
            return Box::new(move |v| self.cdf(u, v));
        }
        let h = norm_quantile(u);
        let rho = self.rho;
        Box::new(move |v| {
            if v <= 0.0 {
                0.0
            } else if v >= 1.0 {
                u
            } else {
                bvn_cdf(h, norm_quantile(v), rho)
            }
        })
    }

    fn closed_form_omega(&self, levels: QuantileLevels) -> Option<f64> {
        (self.rho == 0.0).then_some(levels.beta())
    }

    fn closed_form_gamma(&self, levels: QuantileLevels) -> Option<f64> {
        (self.rho == 0.0).then_some(levels.beta())
    }
}

/// Quantile function of `N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalQuantile {
    pub mu: f64,
    pub sigma: f64,
}

impl NormalQuantile {
    pub const STANDARD: Self = Self {
        mu: 0.0,
        sigma: 1.0,
    };
}

impl QuantileFn for NormalQuantile {
    fn quantile(&self, p: f64) -> f64 {
        self.mu + self.sigma * norm_quantile(p)
    }
}

/// Moment fit of the Gaussian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub rho: f64,
    pub mu_x: f64,
    pub sigma_x: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    /// Set when the sample correlation was pulled back to `±RHO_LIMIT`.
    pub clamped: bool,
}

impl GaussianFit {
    pub fn copula(&self) -> GaussianCopula {
        GaussianCopula { rho: self.rho }
    }

    pub fn y_quantile(&self) -> NormalQuantile {
        NormalQuantile {
            mu: self.mu_y,
            sigma: self.sigma_y,
        }
    }

    /// Baseline measures at one level pair: `ω`, `γ` against the fitted
    /// copula, `δ` through normal quantiles of `Y`.
    pub fn estimate(&self, levels: QuantileLevels) -> Result<DependenceEstimate> {
        estimate_with_surface(&self.copula(), &self.y_quantile(), levels)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Pearson moments of the raw sample.
pub fn fit_gaussian(sample: &PairedSample) -> Result<GaussianFit> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::TooSmall { n, min: 3 });
    }
    let (mu_x, sigma_x) = mean_sd(sample.xs());
    let (mu_y, sigma_y) = mean_sd(sample.ys());
    if !(sigma_x > 0.0) {
        return Err(Error::ZeroVariance("xs"));
    }
    if !(sigma_y > 0.0) {
        return Err(Error::ZeroVariance("ys"));
    }
    let cov: f64 = sample
        .xs()
        .iter()
        .zip(sample.ys())
        .map(|(x, y)| (x - mu_x) * (y - mu_y))
        .sum::<f64>()
        / (n as f64 - 1.0);
    let raw = cov / (sigma_x * sigma_y);
    let rho = raw.clamp(-RHO_LIMIT, RHO_LIMIT);
    let clamped = rho != raw;
    if clamped {
        log::warn!("sample correlation {raw} clamped to {rho}");
    }
    Ok(GaussianFit {
        rho,
        mu_x,
        sigma_x,
        mu_y,
        sigma_y,
        clamped,
    })
}

/// The fully Gaussian version of the measures at each level pair.
pub fn gaussian_delta(
    sample: &PairedSample,
    levels: &[QuantileLevels],
) -> Result<Vec<DependenceEstimate>> {
    let fit = fit_gaussian(sample)?;
    levels.iter().map(|&l| fit.estimate(l)).collect()
}
