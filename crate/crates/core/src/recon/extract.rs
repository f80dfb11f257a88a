//! `σ → ∞` limit of the normalized pairings.

use crate::error::{Error, Result};
use crate::prelude::*;
use alloc::format;

#[derive(Debug, Clone, PartialEq)]
pub struct RaySample {
    pub estimate: C64,
    /// `|D(σ_max) − estimate|`.
    pub error_bar: f64,
    pub by_sigma: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub sigmas: Vec<f64>,
    pub samples: Vec<RaySample>,
    /// RMS change of the samples between consecutive `σ`.
    pub spread: Vec<f64>,
    /// Order `k` of the assumed `σ^{−k}` error, fitted from the spreads when
    /// three or more `σ` are available and 1 otherwise.
    pub order: f64,
    /// `false` when the spread fails to shrink; `None` with fewer than three `σ`.
    pub asymptotic: Option<bool>,
}

impl Extraction {
    pub fn estimates(&self) -> Vec<C64> {
        self.samples.iter().map(|s| s.estimate).collect()
    }
}

/// Richardson extrapolation in `1/σ` of `values[i][row]` measured at `sigmas[i]`.
pub fn extract_ray_data(sigmas: &[f64], values: &[Vec<C64>]) -> Result<Extraction> {
    if sigmas.len() < 2 || sigmas.len() != values.len() {
        return Err(Error::InsufficientData(format!("need >= 2 sigma values with matching data, got {} and {}", sigmas.len(), values.len())));
    }
    if sigmas.windows(2).any(|w| !(w[1] > w[0])) || !(sigmas[0] > 0.0) {
        return Err(Error::Argument("sigma values must be positive and increasing".into()));
    }
    let nrow = values[0].len();
    if values.iter().any(|v| v.len() != nrow) {
        return Err(Error::Shape("rows differ between sigma values".into()));
    }
    let spread: Vec<f64> = values
        .windows(2)
        .map(|w| (w[1].iter().zip(&w[0]).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / nrow.max(1) as f64).sqrt())
        .collect();
    let (order, asymptotic) = if spread.len() >= 2 {
        let m = spread.len();
        let ratio = sigmas[m] / sigmas[m - 1];
        let shrinking = spread.windows(2).all(|w| w[1] < w[0]);
        let k = if spread[m - 1] > 0.0 && spread[m - 2] > 0.0 {
            ((spread[m - 2] / spread[m - 1]).ln() / ratio.ln()).clamp(0.5, 2.0)
        } else {
            1.0
        };
        (k, Some(shrinking))
    } else {
        (1.0, None)
    };
    if asymptotic == Some(false) {
        log::warn!("asymptotic regime not reached: sigma spread {spread:?} does not decrease");
    }
    let n = sigmas.len();
    let factor = 1.0 / ((sigmas[n - 1] / sigmas[n - 2]).powf(order) - 1.0);
    let samples = (0..nrow)
        .map(|r| {
            let (a, b) = (values[n - 2][r], values[n - 1][r]);
            let estimate = b + (b - a) * factor;
            RaySample { estimate, error_bar: (b - estimate).norm(), by_sigma: values.iter().map(|v| v[r]).collect() }
        })
        .collect();
    Ok(Extraction { sigmas: sigmas.to_vec(), samples, spread, order, asymptotic })
}
