use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::likelihood::{log_likelihood, variance_recursion, GarchData};
use super::{information_criteria, Distribution, GarchParams, GarchSpec};
use crate::diagnostics::durbin_watson;
use crate::error::{Error, Result};
use crate::market_data::DummySeries;
use crate::ols::fit_ols;
use crate::optimize::{minimize, numerical_hessian, BfgsOptions};
use crate::stats;

/// Smallest sample `fit_garch` accepts.
pub const MIN_OBSERVATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub gtol: f64,
    pub ftol: f64,
    /// Extra randomly perturbed starting points besides the default start.
    pub perturbed_starts: usize,
    /// Seed for the perturbations.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            gtol: 1e-5,
            ftol: 1e-8,
            perturbed_starts: 3,
            seed: 20161108,
        }
    }
}

/// One row of the coefficient table. Inference fields are `None` when the
/// Hessian could not be inverted or the parameter was held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub z_stat: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub distribution: Distribution,
    pub params: GarchParams,
    /// c1..c6 then the shape parameter when present.
    pub estimates: Vec<ParamEstimate>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub sic: f64,
    /// Mean-equation R-squared at the GARCH coefficients.
    pub r_squared: f64,
    pub dw: Option<f64>,
    pub residuals: Vec<f64>,
    pub conditional_variances: Vec<f64>,
    pub standardized_residuals: Vec<f64>,
    pub converged: bool,
    pub clamp_count: usize,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub n: usize,
    /// Estimated parameter count.
    pub k: usize,
}

impl GarchFit {
    pub fn std_errors(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.std_error).collect()
    }

    pub fn z_stats(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.z_stat).collect()
    }

    pub fn p_values(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.p_value).collect()
    }

    pub fn estimate(&self, name: &str) -> Option<&ParamEstimate> {
        self.estimates.iter().find(|e| e.name == name)
    }
}

pub fn standardized_residuals(fit: &GarchFit) -> Vec<f64> {
    fit.residuals
        .iter()
        .zip(&fit.conditional_variances)
        .map(|(e, s2)| e / s2.sqrt())
        .collect()
}

/// Standard errors from the inverse of the negative numerical Hessian of
/// `log_lik` at `at`. A non-invertible Hessian or a non-positive variance
/// yields `None` for the affected entries.
pub fn standard_errors<F: Fn(&[f64]) -> f64>(log_lik: &F, at: &[f64]) -> Vec<Option<f64>> {
    let steps: Vec<f64> = at.iter().map(|v| (1e-4 * v.abs()).max(1e-5)).collect();
    let neg = |x: &[f64]| -log_lik(x);
    let hessian: DMatrix<f64> = numerical_hessian(&neg, at, &steps);
    if hessian.iter().any(|v| !v.is_finite()) {
        return vec![None; at.len()];
    }
    match hessian.try_inverse() {
        Some(cov) => (0..at.len())
            .map(|i| {
                let v = cov[(i, i)];
                (v.is_finite() && v > 0.0).then(|| v.sqrt())
            })
            .collect(),
        None => vec![None; at.len()],
    }
}

const COEFFICIENT_NAMES: [&str; 6] = ["C1", "C2", "C3", "C4", "C5", "C6"];

/// Maps between natural parameters and the unconstrained optimiser vector.
struct Layout {
    dist: Distribution,
    fixed_nu: Option<f64>,
}

impl Layout {
    fn estimates_shape(&self) -> bool {
        self.dist.has_shape() && self.fixed_nu.is_none()
    }

    fn dim(&self) -> usize {
        6 + usize::from(self.estimates_shape())
    }

    fn shape_offset(&self) -> f64 {
        match self.dist {
            Distribution::StudentT => 2.0,
            _ => 0.0,
        }
    }

    fn to_internal(&self, p: &GarchParams) -> Vec<f64> {
        let mut v = p.coefficients().to_vec();
        if self.estimates_shape() {
            v.push((p.nu.unwrap() - self.shape_offset()).ln());
        }
        v
    }

    fn from_internal(&self, v: &[f64]) -> GarchParams {
        let mut p = GarchParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        if self.estimates_shape() {
            p.nu = Some(self.shape_offset() + v[6].exp());
        } else if self.dist.has_shape() {
            p.nu = self.fixed_nu;
        }
        p
    }

    /// Natural-scale vector used for inference.
    fn to_natural(&self, p: &GarchParams) -> Vec<f64> {
        let mut v = p.coefficients().to_vec();
        if self.estimates_shape() {
            v.push(p.nu.unwrap());
        }
        v
    }

    fn from_natural(&self, v: &[f64]) -> GarchParams {
        let mut p = GarchParams::new(v[0], v[1], v[2], v[3], v[4], v[5]);
        if self.estimates_shape() {
            p.nu = Some(v[6]);
        } else if self.dist.has_shape() {
            p.nu = self.fixed_nu;
        }
        p
    }
}

/// Maximum-likelihood fit of the GARCH(1,1)-X model.
///
/// BFGS on the mean negative log-likelihood from the default start and
/// `perturbed_starts` seeded perturbations of it; the best likelihood wins.
pub fn fit_garch(
    spec: &GarchSpec,
    y: &[f64],
    x: &[f64],
    dummy: &DummySeries,
    options: &FitOptions,
) -> Result<GarchFit> {
    let n = y.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            required: MIN_OBSERVATIONS,
            available: n,
        });
    }
    if stats::central_moment(y, 2) == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let dist = spec.distribution;
    match (dist, spec.shape_fixed) {
        (Distribution::Gaussian, Some(_)) => {
            return Err(Error::InvalidParameter(
                "gaussian distribution takes no shape parameter".into(),
            ))
        }
        (_, Some(nu)) => dist.validate_shape(Some(nu))?,
        _ => {}
    }

    let ols = fit_ols(y, &[x.to_vec()], true)?;
    let resid_var = stats::sample_variance(&ols.residuals);
    let data = GarchData::with_initial_variance(y, x, dummy, resid_var)?;
    let layout = Layout {
        dist,
        fixed_nu: spec.shape_fixed,
    };

    let mut start = GarchParams::new(
        ols.coefficients[0],
        ols.coefficients[1],
        0.1 * resid_var,
        0.05,
        0.90,
        0.0,
    );
    start.nu = match dist {
        Distribution::Gaussian => None,
        Distribution::StudentT => Some(spec.shape_fixed.unwrap_or(10.0)),
        Distribution::Ged => Some(spec.shape_fixed.unwrap_or(1.5)),
    };

    let nf = n as f64;
    let objective = |v: &[f64]| {
        let p = layout.from_internal(v);
        match log_likelihood(&p, &data, dist) {
            Ok(ll) => -ll / nf,
            Err(_) => f64::NAN,
        }
    };
    let bfgs = BfgsOptions {
        max_iter: options.max_iter,
        gtol: options.gtol,
        ftol: options.ftol,
    };

    let base = layout.to_internal(&start);
    let y_sd = resid_var.sqrt();
    let mut starts = vec![base.clone()];
    for s in 0..options.perturbed_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(s as u64 + 1));
        let mut u = || rng.random_range(-1.0..1.0);
        let mut p = base.clone();
        p[0] += 0.1 * y_sd * u();
        p[1] += 0.2 * (p[1].abs() + 0.1) * u();
        p[2] *= (1.5 * u()).exp();
        p[3] = 0.05 + 0.1 * u();
        p[4] = 0.9 * (1.0 - 0.6 * u().abs());
        p[5] += 0.1 * resid_var * u();
        if layout.estimates_shape() {
            p[6] += 0.5 * u();
        }
        starts.push(p);
    }

    let best = starts
        .iter()
        .map(|s| minimize(&objective, s, &bfgs))
        .filter(|m| m.value.is_finite())
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(Error::NonFinite("log-likelihood at every starting point"))?;

    let params = layout.from_internal(&best.x);
    let log_lik = log_likelihood(&params, &data, dist)?;
    let natural = layout.to_natural(&params);
    let ll_natural = |v: &[f64]| {
        let p = layout.from_natural(v);
        if layout.estimates_shape() && dist.validate_shape(p.nu).is_err() {
            return f64::NAN;
        }
        log_likelihood(&p, &data, dist).unwrap_or(f64::NAN)
    };
    let ses = standard_errors(&ll_natural, &natural);

    let mut names: Vec<String> = COEFFICIENT_NAMES.iter().map(|s| s.to_string()).collect();
    if layout.estimates_shape() {
        names.push(shape_name(dist).to_string());
    }
    let estimates = names
        .into_iter()
        .zip(natural.iter().zip(&ses))
        .map(|(name, (&value, &se))| {
            let z = se.map(|s| value / s);
            ParamEstimate {
                name,
                value,
                std_error: se,
                z_stat: z,
                p_value: z.map(stats::normal_two_sided),
            }
        })
        .collect();

    let residuals = data.residuals(&params);
    let path = variance_recursion(&params, &residuals, &data.dummy, data.initial_variance)?;
    let standardized: Vec<f64> = residuals
        .iter()
        .zip(&path.variances)
        .map(|(e, s2)| e / s2.sqrt())
        .collect();
    let y_mean = stats::mean(y);
    let sst: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let k = layout.dim();
    let (aic, sic) = information_criteria(log_lik, k, n);

    Ok(GarchFit {
        distribution: dist,
        params,
        estimates,
        log_likelihood: log_lik,
        aic,
        sic,
        r_squared: 1.0 - ssr / sst,
        dw: durbin_watson(&residuals).ok(),
        conditional_variances: path.variances,
        standardized_residuals: standardized,
        residuals,
        converged: best.converged,
        clamp_count: path.clamp_count,
        iterations: best.iterations,
        gradient_norm: best.gradient_norm,
        n,
        k,
    })
}

fn shape_name(dist: Distribution) -> &'static str {
    match dist {
        Distribution::Ged => "GED Parameter",
        Distribution::StudentT => "T-Dist. DOF",
        Distribution::Gaussian => unreachable!("gaussian has no shape"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_standard_error_is_exact() {
        for s in [0.01, 0.5, 3.0] {
            let ll = |v: &[f64]| -0.5 * v[0] * v[0] / (s * s);
            let se = standard_errors(&ll, &[0.0]);
            assert!((se[0].unwrap() - s).abs() < 1e-6 * s.max(1.0), "{s}: {se:?}");
        }
    }

    #[test]
    fn flat_direction_has_no_standard_error() {
        let ll = |v: &[f64]| -0.5 * v[0] * v[0];
        let se = standard_errors(&ll, &[0.0, 1.0]);
        assert_eq!(se, vec![None, None]);
    }

    #[test]
    fn rejects_short_or_flat_samples() {
        let spec = GarchSpec::new(Distribution::Gaussian);
        let y = vec![1.0; 60];
        let x: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let dummy = DummySeries::zeros(60);
        assert!(matches!(
            fit_garch(&spec, &y, &x, &dummy, &FitOptions::default()),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            fit_garch(&spec, &x[..20], &x[..20], &DummySeries::zeros(20), &FitOptions::default()),
            Err(Error::InsufficientData { .. })
        ));
        let mut fixed = GarchSpec::new(Distribution::Gaussian);
        fixed.shape_fixed = Some(5.0);
        assert!(fit_garch(&fixed, &x, &x, &dummy, &FitOptions::default()).is_err());
    }
}
