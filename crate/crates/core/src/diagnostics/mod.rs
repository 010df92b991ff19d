//! Specification tests run before and after model fitting.

mod adf;

pub use adf::{
    adf_critical_values, adf_test, mackinnon_p_value, AdfResult, LagPolicy,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ols::fit_ols;
use crate::stats;

/// Ljung-Box statistic at one lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QStat {
    pub lag: usize,
    pub q: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JbResult {
    pub jb: f64,
    pub p_value: f64,
    pub skewness: f64,
    /// Raw moment-ratio kurtosis (3 under normality).
    pub kurtosis: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchLmResult {
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub f_df: (usize, usize),
    pub obs_r_squared: f64,
    pub chi2_p_value: f64,
    pub lags: usize,
    /// Observations in the auxiliary regression.
    pub n_effective: usize,
}

/// Sample autocorrelations at lags 1..=max_lag.
pub fn autocorrelations(series: &[f64], max_lag: usize) -> Vec<f64> {
    let m = stats::mean(series);
    let dev: Vec<f64> = series.iter().map(|v| v - m).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    (1..=max_lag)
        .map(|j| {
            let num: f64 = dev[j..].iter().zip(&dev).map(|(a, b)| a * b).sum();
            num / denom
        })
        .collect()
}

/// Q(k) = n(n+2) sum_{j<=k} rho_j^2 / (n-j) for every k up to `max_lag`.
pub fn ljung_box(series: &[f64], max_lag: usize) -> Result<Vec<QStat>> {
    let n = series.len();
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(Error::InvalidParameter(format!(
            "ljung_box max_lag {max_lag} must be in 1..{}",
            n.div_ceil(2)
        )));
    }
    if stats::central_moment(series, 2) == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let nf = n as f64;
    let mut acc = 0.0;
    Ok(autocorrelations(series, max_lag)
        .into_iter()
        .enumerate()
        .map(|(i, rho)| {
            let lag = i + 1;
            acc += rho * rho / (nf - lag as f64);
            let q = nf * (nf + 2.0) * acc;
            QStat {
                lag,
                q,
                p_value: stats::chi2_sf(q, lag as f64),
            }
        })
        .collect())
}

/// JB = n/6 (S^2 + (K-3)^2/4) with moment-ratio skewness and raw kurtosis.
pub fn jarque_bera(series: &[f64]) -> Result<JbResult> {
    let n = series.len();
    if n < 4 {
        return Err(Error::InsufficientData {
            required: 4,
            available: n,
        });
    }
    let m2 = stats::central_moment(series, 2);
    if m2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let skewness = stats::central_moment(series, 3) / m2.powf(1.5);
    let kurtosis = stats::central_moment(series, 4) / (m2 * m2);
    let jb = jarque_bera_from_moments(n, skewness, kurtosis);
    Ok(JbResult {
        jb,
        p_value: stats::chi2_sf(jb, 2.0),
        skewness,
        kurtosis,
        n,
    })
}

pub fn jarque_bera_from_moments(n: usize, skewness: f64, kurtosis: f64) -> f64 {
    n as f64 / 6.0 * (skewness * skewness + (kurtosis - 3.0).powi(2) / 4.0)
}

/// Engle's LM test: regress e_t^2 on a constant and `lags` of its own lags.
///
/// With N residuals the auxiliary regression has N - lags rows, so the F
/// form has (lags, N - 2*lags - 1) degrees of freedom.
pub fn arch_lm(residuals: &[f64], lags: usize) -> Result<ArchLmResult> {
    let n = residuals.len();
    if lags == 0 {
        return Err(Error::InvalidParameter("arch_lm needs lags >= 1".into()));
    }
    if n <= 2 * lags + 1 {
        return Err(Error::InsufficientData {
            required: 2 * lags + 2,
            available: n,
        });
    }
    let sq: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let y = sq[lags..].to_vec();
    let columns: Vec<Vec<f64>> = (1..=lags).map(|j| sq[lags - j..n - j].to_vec()).collect();
    let fit = fit_ols(&y, &columns, true)?;
    let n_eff = y.len();
    let df2 = n_eff - lags - 1;
    let f_statistic = fit.f_statistic.unwrap_or(0.0);
    let obs_r_squared = n_eff as f64 * fit.r_squared;
    Ok(ArchLmResult {
        f_statistic,
        f_p_value: stats::f_sf(f_statistic, lags as f64, df2 as f64),
        f_df: (lags, df2),
        obs_r_squared,
        chi2_p_value: stats::chi2_sf(obs_r_squared, lags as f64),
        lags,
        n_effective: n_eff,
    })
}

/// sum (e_t - e_{t-1})^2 / sum e_t^2.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: residuals.len(),
        });
    }
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(num / denom)
}
