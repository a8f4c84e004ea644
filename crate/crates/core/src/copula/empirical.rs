//! The empirical (step-function) copula, used as an oracle for the beta copula.

use super::{CopulaKind, CopulaSurface};
use crate::sample::PseudoSample;

/// `Ĉ_n(u, v) = (1/n) Σ 1{Û_i <= u, V̂_i <= v}` with pseudo-observations
/// `Û_i = R_i / (n + 1)`.
#[derive(Debug, Clone)]
pub struct EmpiricalCopula {
    points: Vec<(f64, f64)>,
}

impl EmpiricalCopula {
    pub fn new(pseudo: &PseudoSample) -> Self {
        let scale = (pseudo.n() + 1) as f64;
        let points = pseudo
            .rank_x()
            .iter()
            .zip(pseudo.rank_y())
            .map(|(&rx, &ry)| (f64::from(rx) / scale, f64::from(ry) / scale))
            .collect();
        Self { points }
    }
}

impl CopulaSurface for EmpiricalCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u >= 1.0 && v >= 1.0 {
            return 1.0;
        }
        let hits = self
            .points
            .iter()
            .filter(|&&(pu, pv)| pu <= u && pv <= v)
            .count();
        hits as f64 / self.points.len() as f64
    }

    fn kind(&self) -> CopulaKind {
        CopulaKind::Empirical
    }
}

/// Evaluates the empirical copula of `pseudo` at `(u, v)`.
pub fn empirical_copula_eval(pseudo: &PseudoSample, u: f64, v: f64) -> f64 {
    EmpiricalCopula::new(pseudo).cdf(u, v)
}
