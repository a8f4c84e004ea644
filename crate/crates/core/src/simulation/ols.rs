use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Simple regression `y = a + b x` with a heteroskedasticity-robust (HC1)
/// standard error for the slope and a two-sided t test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regression {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

impl Regression {
    pub fn significant(&self, level: f64) -> bool {
        self.p_value < level
    }
}

pub fn ols_robust(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::TooSmall { n, min: 3 });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::ZeroVariance("regressor"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let meat: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            (x - mx).powi(2) * e * e
        })
        .sum();
    let var = nf / (nf - 2.0) * meat / (sxx * sxx);
    let slope_se = var.sqrt();
    let t_stat = slope / slope_se;
    let dist = StudentsT::new(0.0, 1.0, nf - 2.0).expect("positive degrees of freedom");
    let p_value = 2.0 * dist.cdf(-t_stat.abs());
    Ok(Regression {
        intercept,
        slope,
        slope_se,
        t_stat,
        p_value,
        n,
    })
}
