//! GARCH(1,1) with one mean regressor and one exogenous variance regressor.
//!
//! Mean:     y_t = c1 + c2 x_t + e_t
//! Variance: s2_t = c3 + c4 e_{t-1}^2 + c5 s2_{t-1} + c6 d_t
//!
//! No sign restrictions are imposed on c3..c6. Variance paths that dip
//! below [`VARIANCE_FLOOR`] are clamped and counted.

mod estimate;
mod likelihood;

pub use estimate::{
    fit_garch, standard_errors, standardized_residuals, FitOptions, GarchFit, ParamEstimate,
};
pub use likelihood::{
    log_likelihood, log_likelihood_terms, observation_log_density, variance_recursion,
    GarchData, VariancePath,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Innovation distribution, ordered for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Gaussian,
    Ged,
    StudentT,
}

impl Distribution {
    pub const ALL: [Distribution; 3] = [Self::Gaussian, Self::Ged, Self::StudentT];

    pub fn has_shape(self) -> bool {
        !matches!(self, Self::Gaussian)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Gaussian => "Normal Gaussian",
            Self::Ged => "Generalised Error",
            Self::StudentT => "Student's t",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Ged => "ged",
            Self::StudentT => "student_t",
        }
    }

    /// Checks the shape parameter domain: none for gaussian, nu > 0 for
    /// GED, nu > 2 for Student-t.
    pub fn validate_shape(self, nu: Option<f64>) -> Result<()> {
        match (self, nu) {
            (Self::Gaussian, None) => Ok(()),
            (Self::Ged, Some(v)) if v.is_finite() && v > 0.0 => Ok(()),
            (Self::StudentT, Some(v)) if v.is_finite() && v > 2.0 => Ok(()),
            (d, v) => Err(Error::InvalidParameter(format!(
                "shape {v:?} invalid for {} distribution",
                d.key()
            ))),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "ged" => Ok(Self::Ged),
            "student_t" | "t" => Ok(Self::StudentT),
            other => Err(Error::Config(format!("unknown distribution `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    /// Mean intercept.
    pub c1: f64,
    /// Mean slope on the regressor.
    pub c2: f64,
    /// Variance intercept.
    pub c3: f64,
    /// ARCH term, lagged squared residual.
    pub c4: f64,
    /// GARCH term, lagged variance.
    pub c5: f64,
    /// Variance-equation dummy.
    pub c6: f64,
    /// GED shape or Student-t degrees of freedom.
    pub nu: Option<f64>,
}

impl GarchParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64, c5: f64, c6: f64) -> Self {
        Self {
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            nu: None,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.c1, self.c2, self.c3, self.c4, self.c5, self.c6]
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients().iter().all(|v| v.is_finite()) && self.nu.is_none_or(f64::is_finite)
    }
}

/// Model specification: labels, innovation law, optional fixed shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    pub mean_regressor: String,
    pub variance_regressor: String,
    pub distribution: Distribution,
    pub shape_fixed: Option<f64>,
}

impl GarchSpec {
    pub fn new(distribution: Distribution) -> Self {
        Self {
            mean_regressor: "X".into(),
            variance_regressor: "DUMMY".into(),
            distribution,
            shape_fixed: None,
        }
    }
}

/// Per-observation criteria: ((-2 ll + 2k)/n, (-2 ll + k ln n)/n).
pub fn information_criteria(log_likelihood: f64, k: usize, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let kf = k as f64;
    (
        (-2.0 * log_likelihood + 2.0 * kf) / nf,
        (-2.0 * log_likelihood + kf * nf.ln()) / nf,
    )
}
