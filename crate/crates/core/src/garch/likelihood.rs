use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::{Distribution, GarchParams, VARIANCE_FLOOR};
use crate::error::{Error, Result};
use crate::market_data::DummySeries;
use crate::ols::fit_ols;
use crate::stats::{self, ln_gamma};

/// Aligned estimation sample plus the variance used to start the recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchData {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub dummy: Vec<f64>,
    pub initial_variance: f64,
}

impl GarchData {
    /// Seeds the recursion with the sample variance of the OLS residuals of
    /// y on a constant and x.
    pub fn new(y: &[f64], x: &[f64], dummy: &DummySeries) -> Result<Self> {
        if dummy.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: dummy.len(),
            });
        }
        let ols = fit_ols(y, &[x.to_vec()], true)?;
        let initial_variance = stats::sample_variance(&ols.residuals);
        Self::with_initial_variance(y, x, dummy, initial_variance)
    }

    pub fn with_initial_variance(
        y: &[f64],
        x: &[f64],
        dummy: &DummySeries,
        initial_variance: f64,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: x.len(),
            });
        }
        if dummy.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: dummy.len(),
            });
        }
        if !(initial_variance.is_finite() && initial_variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial variance {initial_variance} must be positive"
            )));
        }
        Ok(Self {
            y: y.to_vec(),
            x: x.to_vec(),
            dummy: dummy.values().to_vec(),
            initial_variance,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn residuals(&self, params: &GarchParams) -> Vec<f64> {
        self.y
            .iter()
            .zip(&self.x)
            .map(|(y, x)| y - params.c1 - params.c2 * x)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    pub variances: Vec<f64>,
    /// Steps where the recursion fell below the floor.
    pub clamp_count: usize,
}

/// s2_1 = initial; s2_t = c3 + c4 e_{t-1}^2 + c5 s2_{t-1} + c6 d_t, floored.
pub fn variance_recursion(
    params: &GarchParams,
    residuals: &[f64],
    dummy: &[f64],
    initial_variance: f64,
) -> Result<VariancePath> {
    if residuals.len() != dummy.len() {
        return Err(Error::LengthMismatch {
            left: residuals.len(),
            right: dummy.len(),
        });
    }
    if !params.is_finite() {
        return Err(Error::NonFinite("variance parameters"));
    }
    if !(initial_variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial variance {initial_variance} must be positive"
        )));
    }
    let mut variances = Vec::with_capacity(residuals.len());
    let mut clamp_count = 0;
    if residuals.is_empty() {
        return Ok(VariancePath {
            variances,
            clamp_count,
        });
    }
    let mut prev = initial_variance;
    variances.push(prev);
    for t in 1..residuals.len() {
        let e = residuals[t - 1];
        let mut s2 = params.c3 + params.c4 * e * e + params.c5 * prev + params.c6 * dummy[t];
        // NaN also lands here
        if !(s2 >= VARIANCE_FLOOR) {
            if s2.is_nan() {
                return Err(Error::NonFinite("conditional variance"));
            }
            s2 = VARIANCE_FLOOR;
            clamp_count += 1;
        }
        variances.push(s2);
        prev = s2;
    }
    Ok(VariancePath {
        variances,
        clamp_count,
    })
}

/// Shape-dependent constants computed once per likelihood evaluation.
#[derive(Debug, Clone, Copy)]
enum Density {
    Gaussian,
    StudentT { nu: f64, constant: f64 },
    Ged { nu: f64, lambda: f64, constant: f64 },
}

impl Density {
    fn new(dist: Distribution, nu: Option<f64>) -> Result<Self> {
        dist.validate_shape(nu)?;
        Ok(match dist {
            Distribution::Gaussian => Density::Gaussian,
            Distribution::StudentT => {
                let nu = nu.unwrap();
                let constant = half_step_ln_gamma_ratio(nu / 2.0) - 0.5 * (PI * (nu - 2.0)).ln();
                Density::StudentT { nu, constant }
            }
            Distribution::Ged => {
                let nu = nu.unwrap();
                let lg1 = ln_gamma(1.0 / nu);
                let lambda = (0.5 * (-2.0 / nu * LN_2 + lg1 - ln_gamma(3.0 / nu))).exp();
                let constant = (nu / lambda).ln() - (1.0 + 1.0 / nu) * LN_2 - lg1;
                Density::Ged {
                    nu,
                    lambda,
                    constant,
                }
            }
        })
    }

    fn log_density(&self, residual: f64, variance: f64) -> f64 {
        let ln_var = variance.ln();
        let z2 = residual * residual / variance;
        match *self {
            Density::Gaussian => -0.5 * ((2.0 * PI).ln() + ln_var + z2),
            Density::StudentT { nu, constant } => {
                constant - 0.5 * ln_var - 0.5 * (nu + 1.0) * (z2 / (nu - 2.0)).ln_1p()
            }
            Density::Ged {
                nu,
                lambda,
                constant,
            } => {
                let scaled = z2.sqrt() / lambda;
                constant - 0.5 * scaled.powf(nu) - 0.5 * ln_var
            }
        }
    }
}

/// ln Γ(a + 1/2) - ln Γ(a). The direct difference cancels catastrophically
/// once a is large, so the asymptotic series takes over there.
fn half_step_ln_gamma_ratio(a: f64) -> f64 {
    if a < 1e4 {
        ln_gamma(a + 0.5) - ln_gamma(a)
    } else {
        let inv = 1.0 / a;
        0.5 * a.ln() - inv / 8.0 + inv.powi(3) / 192.0
    }
}

/// Log-density of one residual with the given conditional variance.
pub fn observation_log_density(
    dist: Distribution,
    nu: Option<f64>,
    residual: f64,
    variance: f64,
) -> Result<f64> {
    Ok(Density::new(dist, nu)?.log_density(residual, variance))
}

/// Per-observation log-likelihood contributions.
pub fn log_likelihood_terms(
    params: &GarchParams,
    data: &GarchData,
    dist: Distribution,
) -> Result<Vec<f64>> {
    let density = Density::new(dist, params.nu)?;
    let residuals = data.residuals(params);
    let path = variance_recursion(params, &residuals, &data.dummy, data.initial_variance)?;
    let terms: Vec<f64> = residuals
        .iter()
        .zip(&path.variances)
        .map(|(&e, &s2)| density.log_density(e, s2))
        .collect();
    if terms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log-likelihood"));
    }
    Ok(terms)
}

pub fn log_likelihood(params: &GarchParams, data: &GarchData, dist: Distribution) -> Result<f64> {
    Ok(log_likelihood_terms(params, data, dist)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_ratio_is_continuous_at_switch() {
        let below = ln_gamma(1e4 + 0.5) - ln_gamma(1e4);
        let above = half_step_ln_gamma_ratio(1e4);
        assert!((below - above).abs() < 1e-9, "{below} {above}");
    }

    #[test]
    fn large_dof_gap_follows_first_order_term() {
        // ln t_nu(z) - ln phi(z) = (3/4 - 3z^2/2 + z^4/4) / nu + O(z^6 / nu^2)
        let nu = 1e6;
        for z in [0.0, 0.5, 2.0, 5.0, 12.0] {
            let t = observation_log_density(Distribution::StudentT, Some(nu), z, 1.0).unwrap();
            let g = observation_log_density(Distribution::Gaussian, None, z, 1.0).unwrap();
            let z2: f64 = z * z;
            let first = (0.75 - 1.5 * z2 + 0.25 * z2 * z2) / nu;
            assert!((t - g - first).abs() < 1e-9 + 2.0 * z2.powi(3) / (nu * nu), "z {z}: {} vs {first}", t - g);
        }
    }

    #[test]
    fn huge_dof_approaches_gaussian() {
        for nu in [1e8, 1e12, 1e16] {
            let t = observation_log_density(Distribution::StudentT, Some(nu), 1.3, 0.7).unwrap();
            let g = observation_log_density(Distribution::Gaussian, None, 1.3, 0.7).unwrap();
            assert!((t - g).abs() < 1e-6, "{nu}: {t} vs {g}");
        }
    }

    fn params(c3: f64, c4: f64, c5: f64, c6: f64) -> GarchParams {
        GarchParams::new(0.0, 0.0, c3, c4, c5, c6)
    }

    #[test]
    fn constant_variance_degeneration() {
        let p = params(0.5, 0.0, 0.0, 0.0);
        let path = variance_recursion(&p, &[1.0, -3.0, 2.0, 0.1], &[0.0, 1.0, 0.0, 0.0], 2.0).unwrap();
        assert_eq!(path.variances, vec![2.0, 0.5, 0.5, 0.5]);
        assert_eq!(path.clamp_count, 0);
    }

    #[test]
    fn hand_stepped_recursion() {
        let p = params(0.1, 0.2, 0.5, 0.0);
        let path = variance_recursion(&p, &[1.0, 2.0, 0.0], &[0.0; 3], 1.0).unwrap();
        assert!((path.variances[1] - 0.8).abs() < 1e-15);
        assert!((path.variances[2] - 1.3).abs() < 1e-15);
    }

    #[test]
    fn dummy_enters_at_same_date() {
        let p = params(0.1, 0.0, 0.0, 2.0);
        let path = variance_recursion(&p, &[0.0; 3], &[1.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(path.variances, vec![1.0, 0.1, 2.1]);
    }

    #[test]
    fn negative_excursions_are_clamped() {
        let p = params(-1.0, 0.0, 0.0, 0.0);
        let path = variance_recursion(&p, &[0.0; 4], &[0.0; 4], 1.0).unwrap();
        assert_eq!(path.clamp_count, 3);
        assert!(path.variances.iter().all(|&v| v >= VARIANCE_FLOOR));
    }

    #[test]
    fn recursion_errors() {
        let p = params(f64::NAN, 0.0, 0.0, 0.0);
        assert!(matches!(
            variance_recursion(&p, &[0.0; 2], &[0.0; 2], 1.0),
            Err(Error::NonFinite(_))
        ));
        let p = params(0.1, 0.0, 0.0, 0.0);
        assert!(matches!(
            variance_recursion(&p, &[0.0; 2], &[0.0; 3], 1.0),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(variance_recursion(&p, &[0.0; 2], &[0.0; 2], 0.0).is_err());
    }

    #[test]
    fn standard_normal_at_mode() {
        let v = observation_log_density(Distribution::Gaussian, None, 0.0, 1.0).unwrap();
        assert!((v + 0.918938533204673).abs() < 1e-12);
    }

    #[test]
    fn ged_two_is_gaussian() {
        for &(e, s2) in &[(0.0, 1.0), (1.3, 0.4), (-2.2, 3.1)] {
            let g = observation_log_density(Distribution::Gaussian, None, e, s2).unwrap();
            let d = observation_log_density(Distribution::Ged, Some(2.0), e, s2).unwrap();
            assert!((g - d).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_shape_is_rejected() {
        assert!(observation_log_density(Distribution::StudentT, Some(1.5), 0.0, 1.0).is_err());
        assert!(observation_log_density(Distribution::Ged, Some(-1.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        // trapezoid over a wide grid, unit variance
        for (dist, nu) in [
            (Distribution::Gaussian, None),
            (Distribution::Ged, Some(1.2)),
            (Distribution::StudentT, Some(5.0)),
        ] {
            let h = 1e-3;
            let (mut mass, mut second) = (0.0, 0.0);
            let mut z = -60.0;
            while z <= 60.0 {
                let p = observation_log_density(dist, nu, z, 1.0).unwrap().exp();
                mass += p * h;
                second += z * z * p * h;
                z += h;
            }
            assert!((mass - 1.0).abs() < 1e-4, "{dist:?} mass {mass}");
            assert!((second - 1.0).abs() < 5e-3, "{dist:?} variance {second}");
        }
    }
}
