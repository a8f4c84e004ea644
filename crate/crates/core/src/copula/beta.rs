//! The empirical beta copula and the beta CDFs it is built from.
//!
//! `C(u, v) = (1/n) Σ_i F_{n,R_i}(u) F_{n,S_i}(v)` where `F_{n,r}` is the CDF
//! of `Beta(r, n + 1 - r)`, equivalently `P(Binomial(n, u) >= r)`.

use std::f64::consts::PI;

use super::{CopulaKind, CopulaSurface};
use crate::sample::PseudoSample;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Error term of Stirling's approximation,
/// `ln(x!) - ((x + 1/2) ln x - x + ln sqrt(2π))`, for integer `x >= 1`.
fn stirlerr(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if x <= 15.0 {
        let mut fact = 1.0f64;
        let mut k = 2.0;
        while k <= x {
            fact *= k;
            k += 1.0;
        }
        return fact.ln() - (x + 0.5) * x.ln() + x - LN_SQRT_2PI;
    }
    let xx = x * x;
    if x > 500.0 {
        (S0 - S1 / xx) / x
    } else if x > 80.0 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if x > 35.0 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Binomial probability `P(Binomial(n, p) = k)` via the saddle-point
/// expansion; relative accuracy near machine precision for all `n`.
pub(crate) fn binomial_pmf(k: usize, n: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let q = 1.0 - p;
    let nf = n as f64;
    let kf = k as f64;
    if k == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
        return lc.exp();
    }
    if k == n {
        let lc = if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
        return lc.exp();
    }
    let lc =
        stirlerr(nf) - stirlerr(kf) - stirlerr(nf - kf) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let max_iter = 200 + 20 * ((a + b).sqrt() as usize);
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// `I_x(k, n + 1 - k)` on the side of the distribution where the continued
/// fraction converges quickly.
fn beta_cdf_lower_side(k: usize, n: usize, x: f64) -> f64 {
    let a = k as f64;
    let b = (n + 1 - k) as f64;
    // x^a (1-x)^b / (a B(a, b)) == P(Bin(n, x) = k) (1 - x) for integer a, b
    binomial_pmf(k, n, x) * (1.0 - x) * beta_continued_fraction(a, b, x)
}

/// CDF of `Beta(r, n + 1 - r)` at `u`, i.e. `Σ_{s=r}^{n} C(n,s) u^s (1-u)^(n-s)`.
///
/// Evaluated as a regularized incomplete beta function by continued fraction,
/// stable for large `n` where the binomial sum cancels.
///
/// # Panics
///
/// When `r` is not in `1..=n`.
pub fn beta_cdf(r: usize, n: usize, u: f64) -> f64 {
    assert!((1..=n).contains(&r), "beta_cdf: rank {r} outside 1..={n}");
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = r as f64;
    let b = (n + 1 - r) as f64;
    let value = if u < (a + 1.0) / (a + b + 2.0) {
        beta_cdf_lower_side(r, n, u)
    } else {
        1.0 - beta_cdf_lower_side(n + 1 - r, n, 1.0 - u)
    };
    value.clamp(0.0, 1.0)
}

/// All `F_{n,r}(t)` for `r = 1..=n`, stored as a band.
///
/// Outside the band the values are 1 (for `r < lo`) or 0 (for `r > hi`) to
/// within `1e-22` of the binomial mass.
#[derive(Debug, Clone)]
pub(crate) struct BernsteinBand {
    lo: usize,
    values: Vec<f64>,
}

const BAND_CUTOFF: f64 = 1e-22;

impl BernsteinBand {
    pub(crate) fn new(n: usize, t: f64) -> Self {
        if t <= 0.0 {
            return Self {
                lo: 1,
                values: Vec::new(),
            };
        }
        if t >= 1.0 {
            return Self {
                lo: n + 1,
                values: Vec::new(),
            };
        }
        let odds = t / (1.0 - t);
        let mode = (((n + 1) as f64 * t).floor() as usize).min(n);

        // unnormalized binomial weights, walking out from the mode
        let mut above = vec![1.0f64];
        let mut s = mode;
        while s < n {
            let w = above[above.len() - 1] * (n - s) as f64 / (s + 1) as f64 * odds;
            if w < BAND_CUTOFF {
                break;
            }
            above.push(w);
            s += 1;
        }
        let mut below = Vec::new();
        let mut w_prev = 1.0f64;
        let mut s = mode;
        while s > 0 {
            let w = w_prev * s as f64 / (n - s + 1) as f64 / odds;
            if w < BAND_CUTOFF {
                break;
            }
            below.push(w);
            w_prev = w;
            s -= 1;
        }
        let first = mode - below.len();
        let last = mode + above.len() - 1;
        let total: f64 = above.iter().chain(below.iter()).sum();

        // tail sums P(S >= r) for r in first+1..=last, accumulated from the top
        let lo = first + 1;
        let mut values = vec![0.0; last + 1 - lo];
        let mut acc = 0.0;
        for r in (lo..=last).rev() {
            let w = if r >= mode {
                above[r - mode]
            } else {
                below[mode - r - 1]
            };
            acc += w / total;
            values[r - lo] = acc.min(1.0);
        }
        Self { lo, values }
    }

    #[inline]
    pub(crate) fn get(&self, r: usize) -> f64 {
        if r < self.lo {
            1.0
        } else {
            self.values.get(r - self.lo).copied().unwrap_or(0.0)
        }
    }
}

/// The empirical beta copula of a pseudo-sample.
///
/// Holds only the rank pairing; evaluation is `O(n)` per point, and a
/// [`section`](CopulaSurface::section) at fixed `u` answers each further `v`
/// query in `O(sqrt(n))` after an `O(n)` setup.
#[derive(Debug, Clone)]
pub struct EmpiricalBetaCopula {
    /// `x_rank_by_y_rank[s - 1]` is the x-rank of the observation with y-rank `s`.
    x_rank_by_y_rank: Vec<u32>,
}

impl EmpiricalBetaCopula {
    pub fn new(pseudo: &PseudoSample) -> Self {
        let mut x_rank_by_y_rank = vec![0u32; pseudo.n()];
        for (&rx, &ry) in pseudo.rank_x().iter().zip(pseudo.rank_y()) {
            x_rank_by_y_rank[ry as usize - 1] = rx;
        }
        Self { x_rank_by_y_rank }
    }

    pub fn n(&self) -> usize {
        self.x_rank_by_y_rank.len()
    }

    fn prefix_for(&self, u: f64) -> (BernsteinBand, Vec<f64>) {
        let n = self.n();
        let band = BernsteinBand::new(n, u);
        let mut prefix = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for &rx in &self.x_rank_by_y_rank {
            acc += band.get(rx as usize);
            prefix.push(acc);
        }
        (band, prefix)
    }

    fn eval_with(&self, x_band: &BernsteinBand, prefix: &[f64], v: f64) -> f64 {
        let n = self.n();
        let y_band = BernsteinBand::new(n, v);
        let full = (y_band.lo - 1).min(n);
        let mut sum = prefix[full];
        for (offset, &fy) in y_band.values.iter().enumerate() {
            let s = y_band.lo + offset;
            sum += x_band.get(self.x_rank_by_y_rank[s - 1] as usize) * fy;
        }
        (sum / n as f64).clamp(0.0, 1.0)
    }
}

impl CopulaSurface for EmpiricalBetaCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        let (band, prefix) = self.prefix_for(u);
        self.eval_with(&band, &prefix, v)
    }

    fn kind(&self) -> CopulaKind {
        CopulaKind::EmpiricalBeta
    }

    fn section<'a>(&'a self, u: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> {
        let (band, prefix) = self.prefix_for(u);
        Box::new(move |v| self.eval_with(&band, &prefix, v))
    }
}

/// Evaluates the empirical beta copula of `pseudo` at `(u, v)`.
pub fn beta_copula_eval(pseudo: &PseudoSample, u: f64, v: f64) -> f64 {
    EmpiricalBetaCopula::new(pseudo).cdf(u, v)
}
