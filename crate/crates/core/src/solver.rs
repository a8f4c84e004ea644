//! Solves the CoVaR level equations against a copula surface.
//!
//! * `ω(α, β)`: the largest solution of `C(α, ω) = αβ` (lower-left tail);
//! * `γ(α, β)`: the smallest solution of `C̄(α, γ) = (1-α)(1-β)` (upper-right).
//!
//! Both are found by bracketed bisection. The brackets are the
//! Fréchet–Hoeffding ranges `[αβ, 1-α(1-β)]` and `[β(1-α), α+β-αβ]`, on which
//! every copula changes sign. The bisection predicate keeps the bracket on the
//! sup (resp. inf) of the solution set, so flat stretches resolve to the
//! rightmost (resp. leftmost) crossing without a separate scan.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::copula::CopulaSurface;
use crate::error::{Error, Result, SolverError};

/// Quantile levels `(α, β)`, both strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileLevels {
    alpha: f64,
    beta: f64,
}

impl QuantileLevels {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(1 - α, 1 - β)`.
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: 1.0 - self.alpha,
            beta: 1.0 - self.beta,
        }
    }

    /// `[αβ, 1 - α(1 - β)]`.
    pub fn omega_bracket(&self) -> (f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        (a * b, 1.0 - a * (1.0 - b))
    }

    /// `[β(1 - α), α + β - αβ]`.
    pub fn gamma_bracket(&self) -> (f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        (b * (1.0 - a), a + b - a * b)
    }
}

impl fmt::Display for QuantileLevels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha == self.beta {
            write!(f, "{}", self.alpha)
        } else {
            write!(f, "{}:{}", self.alpha, self.beta)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSolution {
    pub value: f64,
    /// Equation residual at `value`.
    pub residual: f64,
    pub iterations: usize,
    /// The solution set contains an interval wider than the probe width.
    pub flat_segment: bool,
}

impl RootSolution {
    fn exact(value: f64) -> Self {
        Self {
            value,
            residual: 0.0,
            iterations: 0,
            flat_segment: false,
        }
    }
}

/// Both tail levels at one `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailLevelSolution {
    pub levels: QuantileLevels,
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    /// Accepted residual at the bracket endpoints.
    pub tolerance: f64,
    /// Final bracket width.
    pub width: f64,
    pub max_iterations: usize,
    /// Use a surface's closed-form `ω`/`γ` when it has one.
    pub use_closed_forms: bool,
    /// Distance used to detect flat stretches of the solution set.
    pub flat_probe: f64,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            width: 1e-12,
            max_iterations: 200,
            use_closed_forms: true,
            flat_probe: 1e-6,
        }
    }
}

impl Solver {
    /// Largest `ω` with `C(α, ω) = αβ`.
    pub fn omega(
        &self,
        c: &dyn CopulaSurface,
        levels: QuantileLevels,
    ) -> std::result::Result<RootSolution, SolverError> {
        if self.use_closed_forms {
            if let Some(w) = c.closed_form_omega(levels) {
                return Ok(RootSolution::exact(w));
            }
        }
        let section = c.section(levels.alpha());
        let target = levels.alpha() * levels.beta();
        // nondecreasing in w
        let g = |w: f64| section(w) - target;
        let (lo, hi) = levels.omega_bracket();
        let (f_lo, f_hi) = (g(lo), g(hi));
        if f_lo > self.tolerance || f_hi < -self.tolerance {
            return Err(SolverError::NoSignChange { lo, hi, f_lo, f_hi });
        }
        if f_hi <= 0.0 {
            return Ok(RootSolution {
                value: hi,
                residual: f_hi,
                iterations: 0,
                flat_segment: g(hi - self.flat_probe) >= -self.tolerance,
            });
        }
        let (value, iterations) = self.bisect(lo, hi, |w| g(w) <= 0.0)?;
        let probe = value - self.flat_probe;
        Ok(RootSolution {
            value,
            residual: g(value),
            iterations,
            flat_segment: probe >= lo && g(probe) >= -self.tolerance,
        })
    }

    /// Smallest `γ` with `C̄(α, γ) = (1-α)(1-β)`.
    pub fn gamma(
        &self,
        c: &dyn CopulaSurface,
        levels: QuantileLevels,
    ) -> std::result::Result<RootSolution, SolverError> {
        if self.use_closed_forms {
            if let Some(w) = c.closed_form_gamma(levels) {
                return Ok(RootSolution::exact(w));
            }
        }
        let alpha = levels.alpha();
        let section = c.section(alpha);
        let target = (1.0 - alpha) * (1.0 - levels.beta());
        // nonincreasing in w
        let h = |w: f64| 1.0 - alpha - w + section(w) - target;
        let (lo, hi) = levels.gamma_bracket();
        let (f_lo, f_hi) = (h(lo), h(hi));
        if f_lo < -self.tolerance || f_hi > self.tolerance {
            return Err(SolverError::NoSignChange { lo, hi, f_lo, f_hi });
        }
        if f_lo <= 0.0 {
            return Ok(RootSolution {
                value: lo,
                residual: f_lo,
                iterations: 0,
                flat_segment: h(lo + self.flat_probe) >= -self.tolerance,
            });
        }
        let (value, iterations) = self.bisect(lo, hi, |w| h(w) > 0.0)?;
        let probe = value + self.flat_probe;
        Ok(RootSolution {
            value,
            residual: h(value),
            iterations,
            flat_segment: probe <= hi && h(probe) >= -self.tolerance,
        })
    }

    /// Shrinks `[lo, hi]` keeping `keep_left(lo)` true and `keep_left(hi)`
    /// false; returns the final midpoint.
    fn bisect(
        &self,
        mut lo: f64,
        mut hi: f64,
        keep_left: impl Fn(f64) -> bool,
    ) -> std::result::Result<(f64, usize), SolverError> {
        let mut iterations = 0;
        while hi - lo > self.width {
            if iterations == self.max_iterations {
                return Err(SolverError::NoConvergence {
                    width: hi - lo,
                    iterations,
                });
            }
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if keep_left(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        Ok((lo + 0.5 * (hi - lo), iterations))
    }

    pub fn levels(
        &self,
        c: &dyn CopulaSurface,
        levels: QuantileLevels,
    ) -> std::result::Result<TailLevelSolution, SolverError> {
        let omega = self.omega(c, levels)?;
        let gamma = self.gamma(c, levels)?;
        Ok(TailLevelSolution {
            levels,
            omega: Some(omega.value),
            gamma: Some(gamma.value),
            residual: omega.residual.abs().max(gamma.residual.abs()),
            iterations: omega.iterations + gamma.iterations,
        })
    }
}

/// Largest solution `ω` of `C(α, ω) = αβ` with the default solver settings.
pub fn solve_omega(
    c: &dyn CopulaSurface,
    levels: QuantileLevels,
) -> std::result::Result<RootSolution, SolverError> {
    Solver::default().omega(c, levels)
}

/// Smallest solution `γ` of `C̄(α, γ) = (1-α)(1-β)` with the default solver
/// settings.
pub fn solve_gamma(
    c: &dyn CopulaSurface,
    levels: QuantileLevels,
) -> std::result::Result<RootSolution, SolverError> {
    Solver::default().gamma(c, levels)
}
