//! Augmented Dickey-Fuller test, constant-only deterministic term.
//!
//! Critical values come from MacKinnon's finite-sample response surfaces
//! (2010 revision); p-values from MacKinnon's (1994/1996) normal-CDF
//! polynomial approximation for one integrated variable with a constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ols::fit_ols;
use crate::stats;

// Response surface beta_inf + b1/T + b2/T^2 + b3/T^3 at 1%, 5%, 10%.
const CRIT_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const SMALL_P: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const LARGE_P: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "lags")]
pub enum LagPolicy {
    Fixed(usize),
    /// Schwarz criterion over 0..=max lags; `None` uses floor(12 (n/100)^0.25).
    AutoSic(Option<usize>),
}

impl Default for LagPolicy {
    fn default() -> Self {
        LagPolicy::AutoSic(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub critical_1pct: f64,
    pub critical_5pct: f64,
    pub critical_10pct: f64,
    pub lags_used: usize,
    /// Rows in the test regression.
    pub n_obs: usize,
}

/// Finite-sample critical values (1%, 5%, 10%) at `n_obs` observations.
pub fn adf_critical_values(n_obs: usize) -> [f64; 3] {
    let t = n_obs as f64;
    CRIT_CONSTANT.map(|b| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t))
}

/// Approximate asymptotic p-value for a constant-only ADF t-ratio.
pub fn mackinnon_p_value(t_stat: f64) -> f64 {
    if t_stat > TAU_MAX {
        return 1.0;
    }
    if t_stat < TAU_MIN {
        return 0.0;
    }
    let poly = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &b| acc * t_stat + b);
    let z = if t_stat <= TAU_STAR {
        poly(&SMALL_P)
    } else {
        poly(&LARGE_P)
    };
    stats::normal_cdf(z)
}

fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

struct LagRegression {
    t_stat: f64,
    ssr: f64,
    n_obs: usize,
    n_params: usize,
}

/// Regresses dy_t on [1, y_{t-1}, dy_{t-1..t-lags}] for t >= start.
fn lag_regression(y: &[f64], dy: &[f64], lags: usize, start: usize) -> Result<LagRegression> {
    // dy[i] = y[i+1] - y[i]; row for dy[i] uses level y[i]
    let rows = start..dy.len();
    let target: Vec<f64> = rows.clone().map(|i| dy[i]).collect();
    let mut columns = vec![rows.clone().map(|i| y[i]).collect::<Vec<_>>()];
    for j in 1..=lags {
        columns.push(rows.clone().map(|i| dy[i - j]).collect());
    }
    let fit = fit_ols(&target, &columns, true)?;
    Ok(LagRegression {
        t_stat: fit.t_stats[1],
        ssr: fit.ssr(),
        n_obs: fit.n,
        n_params: fit.k,
    })
}

pub fn adf_test(series: &[f64], lag_policy: LagPolicy) -> Result<AdfResult> {
    let n = series.len();
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("adf input"));
    }
    if stats::central_moment(series, 2) == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ensure_length = |lags: usize| {
        if n < lags + 10 {
            Err(Error::InsufficientData {
                required: lags + 10,
                available: n,
            })
        } else {
            Ok(())
        }
    };
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();

    let lags = match lag_policy {
        LagPolicy::Fixed(k) => {
            ensure_length(k)?;
            k
        }
        LagPolicy::AutoSic(max) => {
            let cap = (n / 2).saturating_sub(3);
            let max_lag = max.unwrap_or_else(|| default_max_lag(n)).min(cap);
            ensure_length(max_lag)?;
            let mut best = (f64::INFINITY, 0);
            for k in 0..=max_lag {
                let reg = lag_regression(series, &dy, k, max_lag)?;
                let nobs = reg.n_obs as f64;
                let sic = (reg.ssr / nobs).ln() + reg.n_params as f64 * nobs.ln() / nobs;
                if sic < best.0 {
                    best = (sic, k);
                }
            }
            best.1
        }
    };

    let reg = lag_regression(series, &dy, lags, lags)?;
    let [c1, c5, c10] = adf_critical_values(reg.n_obs);
    Ok(AdfResult {
        t_statistic: reg.t_stat,
        p_value: mackinnon_p_value(reg.t_stat),
        critical_1pct: c1,
        critical_5pct: c5,
        critical_10pct: c10,
        lags_used: lags,
        n_obs: reg.n_obs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_values_near_243() {
        let [c1, c5, c10] = adf_critical_values(243);
        assert!((c1 + 3.4568).abs() < 0.01, "{c1}");
        assert!((c5 + 2.8730).abs() < 0.01, "{c5}");
        assert!((c10 + 2.5730).abs() < 0.01, "{c10}");
        assert!(c1 < c5 && c5 < c10 && c10 < 0.0);
    }

    #[test]
    fn p_value_is_consistent_with_critical_values() {
        let [c1, c5, c10] = adf_critical_values(100_000);
        assert!((mackinnon_p_value(c1) - 0.01).abs() < 0.002);
        assert!((mackinnon_p_value(c5) - 0.05).abs() < 0.005);
        assert!((mackinnon_p_value(c10) - 0.10).abs() < 0.01);
        assert_eq!(mackinnon_p_value(-20.0), 0.0);
        assert_eq!(mackinnon_p_value(3.0), 1.0);
        assert!(mackinnon_p_value(-15.28) < 0.001);
    }

    #[test]
    fn p_value_monotone() {
        let mut last = 0.0;
        for i in 0..400 {
            let t = -18.0 + i as f64 * 0.05;
            let p = mackinnon_p_value(t);
            assert!(p >= last - 1e-12, "t={t}");
            last = p;
        }
    }

    #[test]
    fn white_noise_rejects_unit_root() {
        // deterministic pseudo-noise
        let mut state = 12345u64;
        let x: Vec<f64> = (0..300)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let r = adf_test(&x, LagPolicy::Fixed(0)).unwrap();
        assert!(r.t_statistic < r.critical_1pct);
        assert!(r.p_value < 0.001);
        assert_eq!(r.n_obs, 299);
        let auto = adf_test(&x, LagPolicy::default()).unwrap();
        assert!(auto.lags_used <= 15);
    }

    #[test]
    fn rejects_short_and_flat() {
        assert!(matches!(
            adf_test(&[1.0; 40], LagPolicy::Fixed(1)),
            Err(Error::ZeroVariance)
        ));
        let short: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        assert!(matches!(
            adf_test(&short, LagPolicy::Fixed(5)),
            Err(Error::InsufficientData { .. })
        ));
    }
}
