//! Daily percentage returns and summary statistics.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::PriceSeries;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMethod {
    /// 100 * ln(P_t / P_{t-1})
    #[default]
    Log,
    /// 100 * (P_t / P_{t-1} - 1)
    Simple,
}

impl std::str::FromStr for ReturnMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Self::Log),
            "simple" => Ok(Self::Simple),
            other => Err(Error::Config(format!("unknown return method `{other}`"))),
        }
    }
}

/// Percent-per-day returns, each dated at the later of its two prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn compute_returns(prices: &PriceSeries, method: ReturnMethod) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: prices.len(),
        });
    }
    let obs = prices.observations();
    let values = obs
        .windows(2)
        .map(|w| {
            let ratio = w[1].value / w[0].value;
            match method {
                ReturnMethod::Log => 100.0 * ratio.ln(),
                ReturnMethod::Simple => 100.0 * (ratio - 1.0),
            }
        })
        .collect();
    Ok(ReturnSeries {
        name: prices.name().to_string(),
        dates: obs[1..].iter().map(|o| o.date).collect(),
        values,
    })
}

/// Summary block. Skewness and excess kurtosis are `None` when undefined
/// (too few points or zero variance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub se_mean: f64,
    pub std_dev: f64,
    pub minimum: f64,
    pub median: f64,
    pub maximum: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Sample statistics with the n-1 standard deviation and the bias-adjusted
/// (G1, G2) skewness and excess kurtosis.
pub fn descriptive_stats(series: &[f64]) -> Result<DescriptiveStats> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: n,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("descriptive_stats input"));
    }
    let nf = n as f64;
    let mean = stats::mean(series);
    let std_dev = stats::sample_variance(series).sqrt();

    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    let m2 = stats::central_moment(series, 2);
    let scale = sorted[0].abs().max(sorted[n - 1].abs());
    let degenerate = m2.sqrt() <= 1e-12 * scale;
    let skewness = if n >= 3 && !degenerate {
        let g1 = stats::central_moment(series, 3) / m2.powf(1.5);
        Some(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
    } else {
        None
    };
    let excess_kurtosis = if n >= 4 && !degenerate {
        let g2 = stats::central_moment(series, 4) / (m2 * m2) - 3.0;
        Some(((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)))
    } else {
        None
    };

    Ok(DescriptiveStats {
        n,
        mean,
        se_mean: std_dev / nf.sqrt(),
        std_dev,
        minimum: sorted[0],
        median,
        maximum: sorted[n - 1],
        skewness,
        excess_kurtosis,
    })
}
