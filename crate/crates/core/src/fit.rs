//! Power-law fits on log–log axes.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math without std
use num_traits::Float;

use crate::{Error, Result};

/// Slope of `ln y` against `ln x` by ordinary least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub stderr: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn loglog_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::NonPositive(x, y));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    Ok(PowerLawFit { exponent: slope, stderr, points: points.to_vec() })
}
