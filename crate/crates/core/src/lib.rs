//! Volatility modelling of daily index returns with a GARCH(1,1) whose
//! variance equation carries an exogenous event dummy.
//!
//! The workflow runs: price loading and calendar alignment, percentage
//! returns, ADF unit-root tests, an OLS mean equation, an ARCH-LM pretest,
//! maximum-likelihood GARCH fits under Gaussian, GED and Student-t
//! innovations, residual diagnostics and AIC-based model selection.
//!
//! ```no_run
//! use garchx::pipeline::{run_pipeline, PipelineConfig};
//!
//! let config = PipelineConfig::from_file("pipeline.toml")?;
//! let report = run_pipeline(&config)?;
//! println!("{:?}", report.selection);
//! # Ok::<(), garchx::Error>(())
//! ```

pub mod diagnostics;
mod error;
pub mod garch;
pub mod market_data;
pub mod ols;
pub mod optimize;
pub mod pipeline;
pub mod returns;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
