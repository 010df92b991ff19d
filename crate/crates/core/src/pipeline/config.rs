use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::diagnostics::LagPolicy;
use crate::error::{Error, Result};
use crate::garch::{Distribution, FitOptions};
use crate::market_data::{DummyWindow, DEFAULT_DATE_FORMAT};
use crate::returns::ReturnMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Structured,
    /// Text, CSV tables and the structured document together.
    All,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            "structured" | "json" => Ok(Self::Structured),
            "all" => Ok(Self::All),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Dependent series (the stock index).
    pub prices_a: PathBuf,
    /// Regressor series (the exchange rate).
    pub prices_b: PathBuf,
    pub date_col: String,
    pub value_col: String,
    pub date_format: String,
    pub return_method: ReturnMethod,
    pub dummy_window: DummyWindow,
    pub adf_lags: LagPolicy,
    pub pretest_lags: usize,
    pub post_fit_arch_lags: usize,
    pub distributions: Vec<Distribution>,
    pub student_t_fixed_dof: Option<f64>,
    pub ged_fixed_shape: Option<f64>,
    pub ljung_box_max_lag: usize,
    pub output_format: OutputFormat,
    pub output_dir: Option<PathBuf>,
    pub fit: FitOptions,
    pub parallel: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            prices_a: PathBuf::from("nifty.csv"),
            prices_b: PathBuf::from("usdinr.csv"),
            date_col: "Date".into(),
            value_col: "Close".into(),
            date_format: DEFAULT_DATE_FORMAT.into(),
            return_method: ReturnMethod::Log,
            dummy_window: DummyWindow::default(),
            adf_lags: LagPolicy::default(),
            pretest_lags: 1,
            post_fit_arch_lags: 1,
            distributions: Distribution::ALL.to_vec(),
            student_t_fixed_dof: None,
            ged_fixed_shape: None,
            ljung_box_max_lag: 5,
            output_format: OutputFormat::Text,
            output_dir: None,
            fit: FitOptions::default(),
            parallel: true,
        }
    }
}

/// Flat key-value file layout. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    prices_a: Option<String>,
    prices_b: Option<String>,
    date_col: Option<String>,
    value_col: Option<String>,
    date_format: Option<String>,
    return_method: Option<String>,
    dummy_start: Option<String>,
    dummy_end: Option<String>,
    adf_lags: Option<toml::Value>,
    adf_max_lag: Option<usize>,
    pretest_lags: Option<usize>,
    post_fit_arch_lags: Option<usize>,
    distributions: Option<toml::Value>,
    student_t_fixed_dof: Option<f64>,
    ged_fixed_shape: Option<f64>,
    ljung_box_max_lag: Option<usize>,
    output_format: Option<String>,
    output_dir: Option<String>,
    seed: Option<u64>,
    perturbed_starts: Option<usize>,
    max_iter: Option<usize>,
    parallel: Option<bool>,
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DEFAULT_DATE_FORMAT)
        .map_err(|e| Error::Config(format!("bad date `{s}`: {e}")))
}

/// Parses a comma-separated distribution list.
pub fn parse_distributions(s: &str) -> Result<Vec<Distribution>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

impl PipelineConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        // relative data paths resolve against the config file's directory
        if let Some(dir) = path.parent() {
            for p in [&mut config.prices_a, &mut config.prices_b] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
            if let Some(out) = config.output_dir.as_mut() {
                if out.is_relative() {
                    *out = dir.join(&*out);
                }
            }
        }
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let mut c = Self::default();
        if let Some(v) = raw.prices_a {
            c.prices_a = v.into();
        }
        if let Some(v) = raw.prices_b {
            c.prices_b = v.into();
        }
        if let Some(v) = raw.date_col {
            c.date_col = v;
        }
        if let Some(v) = raw.value_col {
            c.value_col = v;
        }
        if let Some(v) = raw.date_format {
            c.date_format = v;
        }
        if let Some(v) = raw.return_method {
            c.return_method = v.parse()?;
        }
        let start = raw
            .dummy_start
            .as_deref()
            .map(parse_date)
            .transpose()?
            .unwrap_or(c.dummy_window.start());
        let end = raw
            .dummy_end
            .as_deref()
            .map(parse_date)
            .transpose()?
            .unwrap_or(c.dummy_window.end());
        c.dummy_window = DummyWindow::new(start, end)?;
        c.adf_lags = match raw.adf_lags {
            None => LagPolicy::AutoSic(raw.adf_max_lag),
            Some(toml::Value::String(s)) if s == "auto" => LagPolicy::AutoSic(raw.adf_max_lag),
            Some(toml::Value::Integer(k)) if k >= 0 => LagPolicy::Fixed(k as usize),
            Some(other) => {
                return Err(Error::Config(format!(
                    "adf_lags must be \"auto\" or a non-negative integer, got {other}"
                )))
            }
        };
        if let Some(v) = raw.pretest_lags {
            c.pretest_lags = v;
        }
        if let Some(v) = raw.post_fit_arch_lags {
            c.post_fit_arch_lags = v;
        }
        if let Some(v) = raw.distributions {
            c.distributions = match v {
                toml::Value::String(s) => parse_distributions(&s)?,
                toml::Value::Array(items) => items
                    .iter()
                    .map(|i| {
                        i.as_str()
                            .ok_or_else(|| Error::Config("distributions must be strings".into()))?
                            .parse()
                    })
                    .collect::<Result<_>>()?,
                other => {
                    return Err(Error::Config(format!(
                        "distributions must be a list, got {other}"
                    )))
                }
            };
        }
        c.student_t_fixed_dof = raw.student_t_fixed_dof;
        c.ged_fixed_shape = raw.ged_fixed_shape;
        if let Some(v) = raw.ljung_box_max_lag {
            c.ljung_box_max_lag = v;
        }
        if let Some(v) = raw.output_format {
            c.output_format = v.parse()?;
        }
        c.output_dir = raw.output_dir.map(PathBuf::from);
        if let Some(v) = raw.seed {
            c.fit.seed = v;
        }
        if let Some(v) = raw.perturbed_starts {
            c.fit.perturbed_starts = v;
        }
        if let Some(v) = raw.max_iter {
            c.fit.max_iter = v;
        }
        if let Some(v) = raw.parallel {
            c.parallel = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.distributions.is_empty() {
            return Err(Error::Config("select at least one distribution".into()));
        }
        let mut seen = self.distributions.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.distributions.len() {
            return Err(Error::Config("distribution listed twice".into()));
        }
        if self.ljung_box_max_lag == 0 || self.pretest_lags == 0 || self.post_fit_arch_lags == 0 {
            return Err(Error::Config("lag counts must be at least 1".into()));
        }
        if let Some(nu) = self.student_t_fixed_dof {
            Distribution::StudentT.validate_shape(Some(nu))?;
        }
        if let Some(nu) = self.ged_fixed_shape {
            Distribution::Ged.validate_shape(Some(nu))?;
        }
        Ok(())
    }

    pub(crate) fn fixed_shape(&self, dist: Distribution) -> Option<f64> {
        match dist {
            Distribution::Gaussian => None,
            Distribution::Ged => self.ged_fixed_shape,
            Distribution::StudentT => self.student_t_fixed_dof,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = PipelineConfig::from_toml_str("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.ljung_box_max_lag, 5);
        assert_eq!(c.distributions.len(), 3);
    }

    #[test]
    fn parses_flat_keys() {
        let c = PipelineConfig::from_toml_str(
            r#"
            prices_a = "a.csv"
            prices_b = "b.csv"
            dummy_start = "2016-11-10"
            dummy_end = "2016-12-30"
            adf_lags = 2
            distributions = "gaussian, ged"
            output_format = "all"
            seed = 7
            "#,
        )
        .unwrap();
        assert_eq!(c.prices_a, PathBuf::from("a.csv"));
        assert_eq!(c.adf_lags, LagPolicy::Fixed(2));
        assert_eq!(c.distributions, vec![Distribution::Gaussian, Distribution::Ged]);
        assert_eq!(c.output_format, OutputFormat::All);
        assert_eq!(c.fit.seed, 7);
        assert_eq!(c.dummy_window.start(), NaiveDate::from_ymd_opt(2016, 11, 10).unwrap());

        let c = PipelineConfig::from_toml_str(r#"distributions = ["student_t"]"#).unwrap();
        assert_eq!(c.distributions, vec![Distribution::StudentT]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PipelineConfig::from_toml_str(r#"distributions = """#).is_err());
        assert!(PipelineConfig::from_toml_str(r#"distributions = "gaussian,gaussian""#).is_err());
        assert!(PipelineConfig::from_toml_str(r#"unknown_key = 1"#).is_err());
        assert!(PipelineConfig::from_toml_str(r#"dummy_start = "2017-01-01""#).is_err());
        assert!(PipelineConfig::from_toml_str(r#"student_t_fixed_dof = 1.5"#).is_err());
        assert!(PipelineConfig::from_toml_str(r#"adf_lags = "sometimes""#).is_err());
    }
}
