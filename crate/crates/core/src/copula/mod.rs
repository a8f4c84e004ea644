//! Copula surfaces: the empirical beta copula, the empirical copula used as a
//! test oracle, and the analytic reference copulas.

pub mod beta;
pub mod empirical;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::GaussianCopula;
use crate::solver::QuantileLevels;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaKind {
    EmpiricalBeta,
    Empirical,
    Gaussian { rho: f64 },
    Independence,
    Comonotone,
    Countermonotone,
}

/// A bivariate copula `C(u, v)` on `[0, 1]²` with uniform margins.
pub trait CopulaSurface: Send + Sync {
    fn cdf(&self, u: f64, v: f64) -> f64;

    fn kind(&self) -> CopulaKind;

    /// `v ↦ C(u, v)` for a fixed `u`. Surfaces with expensive per-`u` setup
    /// override this so repeated queries along `v` are cheap.
    fn section<'a>(&'a self, u: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> {
        Box::new(move |v| self.cdf(u, v))
    }

    /// Exact `ω(α, β)` where a closed form exists.
    fn closed_form_omega(&self, _levels: QuantileLevels) -> Option<f64> {
        None
    }

    /// Exact `γ(α, β)` where a closed form exists.
    fn closed_form_gamma(&self, _levels: QuantileLevels) -> Option<f64> {
        None
    }
}

/// Joint survival function `C̄(u, v) = 1 - u - v + C(u, v) = P(U > u, V > v)`.
pub fn joint_tail_eval(c: &dyn CopulaSurface, u: f64, v: f64) -> f64 {
    (1.0 - u - v + c.cdf(u, v)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Independence,
    Comonotone,
    Countermonotone,
    Gaussian,
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independence" => Ok(Self::Independence),
            "comonotone" => Ok(Self::Comonotone),
            "countermonotone" => Ok(Self::Countermonotone),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown copula kind `{other}`"
            ))),
        }
    }
}

/// Analytic copulas: `Π(u,v) = uv`, `M(u,v) = min(u,v)`,
/// `W(u,v) = max(u+v-1, 0)` and the Gaussian copula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceCopula {
    Independence,
    Comonotone,
    Countermonotone,
    Gaussian(GaussianCopula),
}

impl ReferenceCopula {
    /// `rho` is required for, and only used by, the Gaussian kind; it must lie
    /// strictly inside `(-1, 1)`.
    pub fn new(kind: ReferenceKind, rho: Option<f64>) -> Result<Self> {
        Ok(match kind {
            ReferenceKind::Independence => Self::Independence,
            ReferenceKind::Comonotone => Self::Comonotone,
            ReferenceKind::Countermonotone => Self::Countermonotone,
            ReferenceKind::Gaussian => {
                let rho = rho.ok_or_else(|| {
                    Error::InvalidParameter("gaussian copula requires rho".into())
                })?;
                Self::Gaussian(GaussianCopula::new(rho)?)
            }
        })
    }
}

impl CopulaSurface for ReferenceCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        match self {
            Self::Independence => u * v,
            Self::Comonotone => u.min(v),
            Self::Countermonotone => (u + v - 1.0).max(0.0),
            Self::Gaussian(g) => g.cdf(u, v),
        }
    }

    fn kind(&self) -> CopulaKind {
        match self {
            Self::Independence => CopulaKind::Independence,
            Self::Comonotone => CopulaKind::Comonotone,
            Self::Countermonotone => CopulaKind::Countermonotone,
            Self::Gaussian(g) => g.kind(),
        }
    }

    fn section<'a>(&'a self, u: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> {
        match self {
            Self::Gaussian(g) => g.section(u),
            _ => Box::new(move |v| self.cdf(u, v)),
        }
    }

    fn closed_form_omega(&self, levels: QuantileLevels) -> Option<f64> {
        let (a, b) = (levels.alpha(), levels.beta());
        match self {
            Self::Independence => Some(b),
            Self::Comonotone => Some(a * b),
            Self::Countermonotone => Some(1.0 - a * (1.0 - b)),
            Self::Gaussian(g) => g.closed_form_omega(levels),
        }
    }

    fn closed_form_gamma(&self, levels: QuantileLevels) -> Option<f64> {
        let (a, b) = (levels.alpha(), levels.beta());
        match self {
            Self::Independence => Some(b),
            Self::Comonotone => Some(a + b - a * b),
            Self::Countermonotone => Some(b * (1.0 - a)),
            Self::Gaussian(g) => g.closed_form_gamma(levels),
        }
    }
}
