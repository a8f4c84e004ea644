//! Local, asymmetric copula-based dependence measures.
//!
//! The crate estimates the lower-left and upper-right CoVaR quantile levels
//! `ω` and `γ` of a target series `Y` conditional on a conditioning series
//! `X`, and turns them into two families of measures:
//!
//! * `ι` (iota), the normalized position of `ω`/`γ` between independence and
//!   the Fréchet–Hoeffding extremes, a local generalized correlation;
//! * `δ` (delta), the ΔCoVaR normalized by its attainable extremes through the
//!   quantile function of `Y`, a local generalized regression beta.
//!
//! Copulas are estimated nonparametrically with the empirical beta copula;
//! a fully Gaussian baseline, simulation oracles and an expanding-window
//! panel engine are included.
//!
//! ```
//! use localdep::{estimate_pair, PairedSample, QuantileLevels};
//!
//! let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64).collect();
//! let ys = xs.clone();
//! let sample = PairedSample::new(xs, ys).unwrap();
//! let est = estimate_pair(&sample, &[QuantileLevels::new(0.5, 0.5).unwrap()]).unwrap();
//! assert!(est[0].iota_lower > 0.9);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
pub mod error;
pub mod exec;
pub mod gaussian;
pub mod measures;
pub mod pipeline;
pub mod sample;
pub mod simulation;
pub mod solver;

pub use copula::{
    beta::{beta_cdf, EmpiricalBetaCopula},
    empirical::EmpiricalCopula,
    joint_tail_eval, CopulaKind, CopulaSurface, ReferenceCopula, ReferenceKind,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use measures::{
    delta_lower, delta_upper, empirical_quantile, estimate_pair, estimate_with_surface, iota_lower,
    iota_upper, DependenceEstimate, EmpiricalQuantileFn, EstimateNote, PairEstimator, QuantileFn,
    UniformQuantile, MIN_SAMPLE,
};
pub use sample::{rank_transform, PairedSample, PseudoSample};
pub use solver::{
    solve_gamma, solve_omega, QuantileLevels, RootSolution, Solver, TailLevelSolution,
};
