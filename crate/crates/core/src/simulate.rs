//! Synthetic GARCH(1,1)-X paths with known parameters.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution as _, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::{Distribution, GarchParams, VARIANCE_FLOOR};
use crate::market_data::{build_dummy, DummySeries, DummyWindow, Observation, PriceSeries};
use crate::stats::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum XProcess {
    Zeros,
    IidNormal { sd: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: GarchParams,
    pub distribution: Distribution,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Must have length `n` when present.
    pub dummy: Option<DummySeries>,
    pub x_process: XProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPath {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub true_variances: Vec<f64>,
    pub dummy: DummySeries,
}

/// Unit-variance innovation sampler.
#[derive(Debug, Clone, Copy)]
pub enum Innovation {
    Gaussian,
    StudentT { nu: f64 },
    Ged { nu: f64, lambda: f64 },
}

impl Innovation {
    pub fn new(dist: Distribution, nu: Option<f64>) -> Result<Self> {
        dist.validate_shape(nu)?;
        Ok(match dist {
            Distribution::Gaussian => Self::Gaussian,
            Distribution::StudentT => Self::StudentT { nu: nu.unwrap() },
            Distribution::Ged => {
                let nu = nu.unwrap();
                let lambda = (0.5
                    * (-2.0 / nu * std::f64::consts::LN_2 + ln_gamma(1.0 / nu)
                        - ln_gamma(3.0 / nu)))
                .exp();
                Self::Ged { nu, lambda }
            }
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::StudentT { nu } => {
                let z: f64 = rng.sample(StandardNormal);
                let chi2 = ChiSquared::new(nu).expect("nu > 2").sample(rng);
                z / (chi2 / nu).sqrt() * ((nu - 2.0) / nu).sqrt()
            }
            Self::Ged { nu, lambda } => {
                let g = Gamma::new(1.0 / nu, 1.0).expect("nu > 0").sample(rng);
                let magnitude = lambda * (2.0 * g).powf(1.0 / nu);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }
}

/// Simulates the model; the recursion starts at c3 / (1 - c4 - c5) and the
/// dummy only acts on the retained points.
pub fn simulate_garch(config: &SimConfig) -> Result<SimulatedPath> {
    let p = &config.params;
    if config.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !p.is_finite() {
        return Err(Error::NonFinite("simulation parameters"));
    }
    let persistence = p.c4 + p.c5;
    if persistence >= 1.0 || p.c3 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "non-stationary parameters: c3 = {}, c4 + c5 = {persistence}",
            p.c3
        )));
    }
    let innovation = Innovation::new(config.distribution, p.nu)?;
    let dummy = match &config.dummy {
        Some(d) if d.len() != config.n => {
            return Err(Error::LengthMismatch {
                left: config.n,
                right: d.len(),
            })
        }
        Some(d) => d.clone(),
        None => DummySeries::zeros(config.n),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let total = config.burn_in + config.n;
    let mut y = Vec::with_capacity(config.n);
    let mut x = Vec::with_capacity(config.n);
    let mut variances = Vec::with_capacity(config.n);
    let mut prev_var = p.c3 / (1.0 - persistence);
    let mut prev_eps = 0.0;
    for t in 0..total {
        let d = if t >= config.burn_in {
            dummy.values()[t - config.burn_in]
        } else {
            0.0
        };
        let s2 = if t == 0 {
            prev_var + p.c6 * d
        } else {
            p.c3 + p.c4 * prev_eps * prev_eps + p.c5 * prev_var + p.c6 * d
        }
        .max(VARIANCE_FLOOR);
        let xt = match config.x_process {
            XProcess::Zeros => 0.0,
            XProcess::IidNormal { sd } => sd * rng.sample::<f64, _>(StandardNormal),
        };
        let eps = s2.sqrt() * innovation.sample(&mut rng);
        if t >= config.burn_in {
            x.push(xt);
            y.push(p.c1 + p.c2 * xt + eps);
            variances.push(s2);
        }
        prev_var = s2;
        prev_eps = eps;
    }
    Ok(SimulatedPath {
        y,
        x,
        true_variances: variances,
        dummy,
    })
}

/// Parameters used for the bundled synthetic market: a strongly persistent
/// ARCH process with a positive variance shift inside the dummy window.
pub fn demo_params() -> GarchParams {
    GarchParams::new(0.05, -0.9, 0.15, 0.25, 0.6, 0.8)
}

/// Weekday calendar covering `start..=end`.
pub fn business_days(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

/// Builds an index and an exchange-rate price series on the weekday calendar
/// from 2016-04-01 to 2017-03-31 whose percentage log returns follow the model
/// with `params`, the exchange-rate return as the mean regressor and the
/// default event window as the variance dummy.
pub fn synthetic_price_pair(
    params: GarchParams,
    distribution: Distribution,
    seed: u64,
) -> Result<(PriceSeries, PriceSeries)> {
    let ymd = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).expect("valid date");
    let dates = business_days(ymd(2016, 4, 1), ymd(2017, 3, 31));
    let dummy = build_dummy(&dates[1..], &DummyWindow::default());
    let path = simulate_garch(&SimConfig {
        params,
        distribution,
        n: dates.len() - 1,
        burn_in: 500,
        seed,
        dummy: Some(dummy),
        x_process: XProcess::IidNormal { sd: 0.35 },
    })?;
    let level = |start: f64, returns: &[f64]| {
        let mut v = start;
        let mut out = vec![v];
        for r in returns {
            v *= (r / 100.0).exp();
            out.push(v);
        }
        out
    };
    let to_series = |name: &str, values: Vec<f64>| {
        let obs = dates
            .iter()
            .zip(values)
            .map(|(&date, value)| Observation { date, value })
            .collect();
        PriceSeries::new(name, obs)
    };
    Ok((
        to_series("INDEX", level(7700.0, &path.y))?,
        to_series("FX", level(66.4, &path.x))?,
    ))
}
