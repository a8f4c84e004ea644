//! VaR, ΔCoVaR and the dependence measures `ι` and `δ`.

use serde::Serialize;

use crate::copula::beta::EmpiricalBetaCopula;
use crate::copula::CopulaSurface;
use crate::error::{Error, Result};
use crate::sample::{rank_transform, PairedSample, PseudoSample};
use crate::solver::{QuantileLevels, Solver};

/// Smallest sample accepted by [`estimate_pair`].
pub const MIN_SAMPLE: usize = 50;

/// Slack when checking that a tail level lies in its admissible range.
const BRACKET_SLACK: f64 = 1e-12;

/// A quantile function `p ↦ F⁻¹(p)`, nondecreasing on `(0, 1)`.
pub trait QuantileFn: Send + Sync {
    fn quantile(&self, p: f64) -> f64;
}

/// Type-1 empirical quantile (left-continuous inverse of the empirical CDF).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalQuantileFn {
    sorted: Vec<f64>,
}

impl EmpiricalQuantileFn {
    pub fn new(values: &[f64]) -> Result<Self> {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self::from_sorted(sorted)
    }

    /// Takes values already in ascending order.
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.len() < 2 {
            return Err(Error::TooSmall {
                n: sorted.len(),
                min: 2,
            });
        }
        if let Some(i) = sorted.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter(format!(
                "values not ascending at index {}",
                i + 1
            )));
        }
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }
}

impl QuantileFn for EmpiricalQuantileFn {
    fn quantile(&self, p: f64) -> f64 {
        empirical_quantile(self, p)
    }
}

/// Smallest sample value `x` whose empirical CDF `rank(x)/n` reaches `p`.
///
/// # Panics
///
/// When `p` is outside `(0, 1)`.
pub fn empirical_quantile(q: &EmpiricalQuantileFn, p: f64) -> f64 {
    assert!(
        p > 0.0 && p < 1.0,
        "empirical_quantile: p = {p} outside (0, 1)"
    );
    let n = q.sorted.len();
    let nf = n as f64;
    let mut k = ((nf * p).ceil() as usize).clamp(1, n);
    // guard against rounding in n·p
    while k > 1 && (k - 1) as f64 / nf >= p {
        k -= 1;
    }
    while k < n && (k as f64) / nf < p {
        k += 1;
    }
    q.sorted[k - 1]
}

/// Exact quantile of `U(a, b)`: `a + p (b - a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantile {
    pub a: f64,
    pub b: f64,
}

impl QuantileFn for UniformQuantile {
    fn quantile(&self, p: f64) -> f64 {
        self.a + p * (self.b - self.a)
    }
}

fn check_bracket(value: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if value >= lo - BRACKET_SLACK && value <= hi + BRACKET_SLACK {
        Ok(())
    } else {
        Err(Error::OutOfBracket { value, lo, hi })
    }
}

/// `ι^L`: position of `ω` between independence (`ω = β`, 0) and the
/// comonotone (`αβ`, 1) or countermonotone (`1 - α(1-β)`, -1) extremes.
pub fn iota_lower(omega: f64, levels: QuantileLevels) -> Result<f64> {
    let (lo, hi) = levels.omega_bracket();
    check_bracket(omega, (lo, hi))?;
    // scaled by the distance to the active extreme, written as a difference
    // so the identity quantile reproduces it exactly in `delta_lower`
    let b = levels.beta();
    let d = omega - b;
    let iota = if d <= 0.0 {
        d / (lo - b)
    } else {
        -d / (hi - b)
    };
    Ok(iota.clamp(-1.0, 1.0))
}

/// `ι^U`: position of `γ` between `β` (0), `α + β - αβ` (1) and `β(1-α)` (-1).
pub fn iota_upper(gamma: f64, levels: QuantileLevels) -> Result<f64> {
    let (lo, hi) = levels.gamma_bracket();
    check_bracket(gamma, (lo, hi))?;
    let b = levels.beta();
    let d = gamma - b;
    let iota = if d > 0.0 { d / (hi - b) } else { -d / (lo - b) };
    Ok(iota.clamp(-1.0, 1.0))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

/// `δ^L`: the lower-left ΔCoVaR `q(ω) - q(β)` scaled by its value under
/// comonotonicity (when nonpositive) or countermonotonicity (when positive).
///
/// `Ok(None)` when the active denominator is zero, which happens only with
/// tied target values.
pub fn delta_lower(q: &dyn QuantileFn, omega: f64, levels: QuantileLevels) -> Result<Option<f64>> {
    let (lo, hi) = levels.omega_bracket();
    check_bracket(omega, (lo, hi))?;
    let var_b = q.quantile(levels.beta());
    let dcov = q.quantile(omega) - var_b;
    Ok(if dcov <= 0.0 {
        ratio(dcov, q.quantile(lo) - var_b)
    } else {
        ratio(-dcov, q.quantile(hi) - var_b)
    })
}

/// `δ^U`: mirror of [`delta_lower`] for the upper-right ΔCoVaR `q(γ) - q(β)`.
pub fn delta_upper(q: &dyn QuantileFn, gamma: f64, levels: QuantileLevels) -> Result<Option<f64>> {
    let (lo, hi) = levels.gamma_bracket();
    check_bracket(gamma, (lo, hi))?;
    let var_b = q.quantile(levels.beta());
    let dcov = q.quantile(gamma) - var_b;
    Ok(if dcov > 0.0 {
        ratio(dcov, q.quantile(hi) - var_b)
    } else {
        ratio(-dcov, q.quantile(lo) - var_b)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateNote {
    /// `C(α, ·) = αβ` holds on an interval; `ω` is its right end.
    FlatOmega,
    /// `C̄(α, ·) = (1-α)(1-β)` holds on an interval; `γ` is its left end.
    FlatGamma,
    DeltaLowerUndefined,
    DeltaUpperUndefined,
}

/// All measures for one sample (or surface) at one `(α, β)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub gamma: f64,
    pub iota_lower: f64,
    pub iota_upper: f64,
    pub delta_lower: Option<f64>,
    pub delta_upper: Option<f64>,
    /// `q(ω)`, the lower-left CoVaR in units of `Y`.
    pub covar_lower: f64,
    /// `q(γ)`, the upper-right CoVaR.
    pub covar_upper: f64,
    pub dcov_lower: f64,
    pub dcov_upper: f64,
    pub notes: Vec<EstimateNote>,
}

impl DependenceEstimate {
    pub fn levels(&self) -> QuantileLevels {
        QuantileLevels::new(self.alpha, self.beta).expect("estimate holds interior levels")
    }
}

/// Measures from an explicit copula surface and quantile function of `Y`.
pub fn estimate_with_surface(
    c: &dyn CopulaSurface,
    q: &dyn QuantileFn,
    levels: QuantileLevels,
) -> Result<DependenceEstimate> {
    let solver = Solver::default();
    let omega = solver.omega(c, levels)?;
    let gamma = solver.gamma(c, levels)?;
    let mut notes = Vec::new();
    if omega.flat_segment {
        notes.push(EstimateNote::FlatOmega);
    }
    if gamma.flat_segment {
        notes.push(EstimateNote::FlatGamma);
    }
    let (w, g) = (omega.value, gamma.value);
    let delta_lower = delta_lower(q, w, levels)?;
    let delta_upper = delta_upper(q, g, levels)?;
    if delta_lower.is_none() {
        log::debug!("delta_lower undefined at {levels}: zero quantile spread");
        notes.push(EstimateNote::DeltaLowerUndefined);
    }
    if delta_upper.is_none() {
        log::debug!("delta_upper undefined at {levels}: zero quantile spread");
        notes.push(EstimateNote::DeltaUpperUndefined);
    }
    let var_b = q.quantile(levels.beta());
    let covar_lower = q.quantile(w);
    let covar_upper = q.quantile(g);
    Ok(DependenceEstimate {
        alpha: levels.alpha(),
        beta: levels.beta(),
        omega: w,
        gamma: g,
        iota_lower: iota_lower(w, levels)?,
        iota_upper: iota_upper(g, levels)?,
        delta_lower,
        delta_upper,
        covar_lower,
        covar_upper,
        dcov_lower: covar_lower - var_b,
        dcov_upper: covar_upper - var_b,
        notes,
    })
}

/// The nonparametric estimator for one window: the empirical beta copula of
/// the ranks and the empirical quantile function of `Y`, built once and
/// reused across levels.
#[derive(Debug, Clone)]
pub struct PairEstimator {
    copula: EmpiricalBetaCopula,
    quantile: EmpiricalQuantileFn,
}

impl PairEstimator {
    pub fn new(sample: &PairedSample) -> Result<Self> {
        if sample.len() < MIN_SAMPLE {
            return Err(Error::TooSmall {
                n: sample.len(),
                min: MIN_SAMPLE,
            });
        }
        let pseudo = rank_transform(sample);
        Self::from_parts(&pseudo, EmpiricalQuantileFn::new(sample.ys())?)
    }

    pub fn from_parts(pseudo: &PseudoSample, quantile: EmpiricalQuantileFn) -> Result<Self> {
        if pseudo.n() != quantile.len() {
            return Err(Error::LengthMismatch {
                xs: pseudo.n(),
                ys: quantile.len(),
            });
        }
        if pseudo.n() < MIN_SAMPLE {
            return Err(Error::TooSmall {
                n: pseudo.n(),
                min: MIN_SAMPLE,
            });
        }
        Ok(Self {
            copula: EmpiricalBetaCopula::new(pseudo),
            quantile,
        })
    }

    pub fn estimate(&self, levels: QuantileLevels) -> Result<DependenceEstimate> {
        estimate_with_surface(&self.copula, &self.quantile, levels)
    }

    pub fn copula(&self) -> &EmpiricalBetaCopula {
        &self.copula
    }
}

/// Nonparametric `ι` and `δ` of `Y | X` at each level pair.
pub fn estimate_pair(
    sample: &PairedSample,
    levels: &[QuantileLevels],
) -> Result<Vec<DependenceEstimate>> {
    let estimator = PairEstimator::new(sample)?;
    levels.iter().map(|&l| estimator.estimate(l)).collect()
}
