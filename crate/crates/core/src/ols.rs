//! Ordinary least squares with the classical diagnostic block.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::durbin_watson;
use crate::error::{Error, Result};
use crate::garch::information_criteria;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// Intercept first when one was requested.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    /// `None` when the model has no slope regressors.
    pub f_statistic: Option<f64>,
    pub f_p_value: Option<f64>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub sic: f64,
    /// `None` when every residual is zero.
    pub dw: Option<f64>,
    pub residuals: Vec<f64>,
    pub n: usize,
    pub k: usize,
}

impl OlsFit {
    pub fn ssr(&self) -> f64 {
        self.residuals.iter().map(|e| e * e).sum()
    }
}

/// Fits `y` on `x_columns` (plus a leading constant if requested) via a QR
/// decomposition of the design matrix.
pub fn fit_ols(y: &[f64], x_columns: &[Vec<f64>], include_intercept: bool) -> Result<OlsFit> {
    let n = y.len();
    for col in x_columns {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: col.len(),
            });
        }
    }
    let k = x_columns.len() + usize::from(include_intercept);
    if k == 0 {
        return Err(Error::InvalidParameter("no regressors".into()));
    }
    if n <= k {
        return Err(Error::InsufficientData {
            required: k + 1,
            available: n,
        });
    }
    if y.iter().chain(x_columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression data"));
    }

    let offset = usize::from(include_intercept);
    let design = DMatrix::from_fn(n, k, |i, j| {
        if include_intercept && j == 0 {
            1.0
        } else {
            x_columns[j - offset][i]
        }
    });
    let y_vec = DVector::from_column_slice(y);

    let qr = design.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * &y_vec;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient)?;

    let fitted = &design * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let nf = n as f64;
    let kf = k as f64;
    let s2 = ssr / (nf - kf);

    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or(Error::RankDeficient)?;
    let cov_unscaled = &r_inv * r_inv.transpose();
    let std_errors: Vec<f64> = (0..k).map(|i| (s2 * cov_unscaled[(i, i)]).sqrt()).collect();
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let t_stats: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| b / se)
        .collect();
    let p_values = t_stats
        .iter()
        .map(|&t| stats::t_two_sided(t, nf - kf))
        .collect();

    let r_squared = if include_intercept {
        let y_mean = stats::mean(y);
        let sst: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
        if sst > 0.0 {
            1.0 - ssr / sst
        } else {
            1.0
        }
    } else {
        let sst: f64 = y.iter().map(|v| v * v).sum();
        if sst > 0.0 {
            1.0 - ssr / sst
        } else {
            1.0
        }
    };

    let slopes = k - offset;
    let (f_statistic, f_p_value) = if include_intercept && slopes > 0 {
        let f = (r_squared / slopes as f64) / ((1.0 - r_squared) / (nf - kf));
        (Some(f), Some(stats::f_sf(f, slopes as f64, nf - kf)))
    } else {
        (None, None)
    };

    let log_likelihood = gaussian_log_likelihood(ssr, n);
    let (aic, sic) = information_criteria(log_likelihood, k, n);

    Ok(OlsFit {
        coefficients,
        std_errors,
        t_stats,
        p_values,
        r_squared,
        f_statistic,
        f_p_value,
        log_likelihood,
        aic,
        sic,
        dw: durbin_watson(&residuals).ok(),
        residuals,
        n,
        k,
    })
}

/// Concentrated Gaussian log-likelihood at the least-squares estimate.
pub fn gaussian_log_likelihood(ssr: f64, n: usize) -> f64 {
    let nf = n as f64;
    -0.5 * nf * (1.0 + (2.0 * std::f64::consts::PI).ln() + (ssr / nf).ln())
}
