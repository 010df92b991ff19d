//! End-to-end workflow: data → returns → stationarity → OLS → ARCH pretest
//! → GARCH fits → residual diagnostics → model selection.

mod config;
mod render;

pub use config::{parse_date, parse_distributions, OutputFormat, PipelineConfig};
pub use render::{render_report, write_outputs, OutputFile};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    adf_test, arch_lm, jarque_bera, ljung_box, AdfResult, ArchLmResult, JbResult, QStat,
};
use crate::error::{Error, Result};
use crate::garch::{fit_garch, Distribution, GarchFit, GarchSpec};
use crate::market_data::{align_by_date, build_dummy, load_price_csv, PriceSeries};
use crate::ols::{fit_ols, OlsFit};
use crate::returns::{compute_returns, descriptive_stats, DescriptiveStats};

/// Significance level used by every gating decision.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveBlock {
    pub variable: String,
    pub stats: DescriptiveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfBlock {
    pub variable: String,
    pub result: AdfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretestBlock {
    pub result: ArchLmResult,
    pub rejects_no_arch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// On squared standardized residuals.
    pub ljung_box: Vec<QStat>,
    /// On standardized residuals.
    pub arch_lm: ArchLmResult,
    pub jarque_bera: JbResult,
    pub no_serial_correlation: bool,
    pub no_remaining_arch: bool,
    pub normality_not_rejected: bool,
}

impl FitDiagnostics {
    pub fn compute(standardized: &[f64], max_lag: usize, arch_lags: usize) -> Result<Self> {
        let squared: Vec<f64> = standardized.iter().map(|z| z * z).collect();
        let ljung_box = ljung_box(&squared, max_lag)?;
        let arch = arch_lm(standardized, arch_lags)?;
        let jb = jarque_bera(standardized)?;
        Ok(Self {
            no_serial_correlation: ljung_box.iter().all(|q| q.p_value >= SIGNIFICANCE),
            no_remaining_arch: arch.chi2_p_value >= SIGNIFICANCE,
            normality_not_rejected: jb.p_value >= SIGNIFICANCE,
            ljung_box,
            arch_lm: arch,
            jarque_bera: jb,
        })
    }

    /// Eligibility for selection. Normality is reported but not required.
    pub fn passes(&self) -> bool {
        self.no_serial_correlation && self.no_remaining_arch
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBlock {
    pub fit: GarchFit,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub distribution: Distribution,
    pub aic: f64,
    pub sic: f64,
    /// False when no converged fit passed the diagnostics and the choice
    /// fell back to all converged fits.
    pub diagnostics_passed: bool,
    pub reason: String,
}

/// Aligned inputs kept for the plot-ready series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesData {
    pub name_a: String,
    pub name_b: String,
    pub level_dates: Vec<NaiveDate>,
    pub levels_a: Vec<f64>,
    pub levels_b: Vec<f64>,
    pub return_dates: Vec<NaiveDate>,
    pub returns_a: Vec<f64>,
    pub returns_b: Vec<f64>,
    pub dummy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    /// Stages in execution order.
    pub stages: Vec<String>,
    pub warnings: Vec<String>,
    pub descriptive: Vec<DescriptiveBlock>,
    pub adf: Vec<AdfBlock>,
    pub ols: OlsFit,
    pub pretest: PretestBlock,
    pub fits: Vec<FitBlock>,
    pub selection: Option<Selection>,
    pub data: SeriesData,
}

impl PipelineReport {
    /// True when the pretest found no ARCH effect and fitting was skipped.
    pub fn halted_at_pretest(&self) -> bool {
        !self.pretest.rejects_no_arch
    }
}

/// Loads both price files and runs the workflow.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate().map_err(|e| e.at_stage("config"))?;
    let load = |path| {
        load_price_csv(path, &config.date_col, &config.value_col, &config.date_format)
            .map_err(|e| e.at_stage("load"))
    };
    let a = load(&config.prices_a)?;
    let b = load(&config.prices_b)?;
    run_pipeline_on(&a, &b, config)
}

/// Runs the workflow on already-loaded series; `a` is the dependent series.
pub fn run_pipeline_on(
    a: &PriceSeries,
    b: &PriceSeries,
    config: &PipelineConfig,
) -> Result<PipelineReport> {
    config.validate().map_err(|e| e.at_stage("config"))?;
    let mut stages = vec!["load".to_string()];
    let mut warnings = Vec::new();

    let mut descriptive = Vec::new();
    for s in [a, b] {
        descriptive.push(DescriptiveBlock {
            variable: s.name().to_string(),
            stats: descriptive_stats(&s.values()).map_err(|e| e.at_stage("descriptive"))?,
        });
    }

    let (a, b) = align_by_date(a, b).map_err(|e| e.at_stage("align"))?;
    stages.push("align".into());

    let ra = compute_returns(&a, config.return_method).map_err(|e| e.at_stage("returns"))?;
    let rb = compute_returns(&b, config.return_method).map_err(|e| e.at_stage("returns"))?;
    stages.push("returns".into());

    for r in [&ra, &rb] {
        descriptive.push(DescriptiveBlock {
            variable: format!("Return on {}", r.name),
            stats: descriptive_stats(&r.values).map_err(|e| e.at_stage("descriptive"))?,
        });
    }
    stages.push("descriptive".into());

    let dummy = build_dummy(&ra.dates, &config.dummy_window);
    if dummy.active_count() == 0 {
        warnings.push(format!(
            "dummy window {}..{} contains no return dates; the dummy column is all zeros",
            config.dummy_window.start(),
            config.dummy_window.end()
        ));
    }

    let mut adf = Vec::new();
    for r in [&ra, &rb] {
        adf.push(AdfBlock {
            variable: r.name.clone(),
            result: adf_test(&r.values, config.adf_lags).map_err(|e| e.at_stage("adf"))?,
        });
    }
    stages.push("adf".into());

    let ols = fit_ols(&ra.values, std::slice::from_ref(&rb.values), true).map_err(|e| e.at_stage("ols"))?;
    stages.push("ols".into());

    let pre = arch_lm(&ols.residuals, config.pretest_lags).map_err(|e| e.at_stage("pretest"))?;
    let pretest = PretestBlock {
        rejects_no_arch: pre.chi2_p_value < SIGNIFICANCE,
        result: pre,
    };
    stages.push("pretest".into());

    let data = SeriesData {
        name_a: a.name().to_string(),
        name_b: b.name().to_string(),
        level_dates: a.dates(),
        levels_a: a.values(),
        levels_b: b.values(),
        return_dates: ra.dates.clone(),
        returns_a: ra.values.clone(),
        returns_b: rb.values.clone(),
        dummy: dummy.values().to_vec(),
    };

    let mut report = PipelineReport {
        config: config.clone(),
        stages,
        warnings,
        descriptive,
        adf,
        ols,
        pretest,
        fits: Vec::new(),
        selection: None,
        data,
    };

    if !report.pretest.rejects_no_arch {
        report.warnings.push(format!(
            "ARCH-LM pretest does not reject the no-ARCH null (p = {:.4}); GARCH estimation skipped",
            report.pretest.result.chi2_p_value
        ));
        return Ok(report);
    }

    let fit_one = |dist: Distribution| -> Result<FitBlock> {
        let mut spec = GarchSpec::new(dist);
        spec.mean_regressor = rb.name.clone();
        spec.shape_fixed = config.fixed_shape(dist);
        let fit = fit_garch(&spec, &ra.values, &rb.values, &dummy, &config.fit)
            .map_err(|e| e.at_stage("garch"))?;
        let diagnostics = FitDiagnostics::compute(
            &fit.standardized_residuals,
            config.ljung_box_max_lag,
            config.post_fit_arch_lags,
        )
        .map_err(|e| e.at_stage("diagnostics"))?;
        Ok(FitBlock { fit, diagnostics })
    };

    let fits: Vec<Result<FitBlock>> = if config.parallel && config.distributions.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = config
                .distributions
                .iter()
                .map(|&d| scope.spawn(move || fit_one(d)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("fit thread panicked"))
                .collect()
        })
    } else {
        config.distributions.iter().map(|&d| fit_one(d)).collect()
    };
    report.fits = fits.into_iter().collect::<Result<_>>()?;
    report.stages.push("garch".into());
    report.stages.push("diagnostics".into());
    for block in &report.fits {
        if !block.fit.converged {
            report.warnings.push(format!(
                "{} fit did not meet the convergence tolerances (gradient norm {:.2e})",
                block.fit.distribution, block.fit.gradient_norm
            ));
        }
    }

    report.selection = Some(select_model(&report.fits).map_err(|e| e.at_stage("select"))?);
    report.stages.push("select".into());
    Ok(report)
}

/// Minimum AIC among converged fits that pass the diagnostics; ties (to
/// 1e-10) go to the lower SIC, then to the earlier distribution.
pub fn select_model(fits: &[FitBlock]) -> Result<Selection> {
    let converged: Vec<&FitBlock> = fits.iter().filter(|f| f.fit.converged).collect();
    if converged.is_empty() {
        return Err(Error::NoConvergedFit);
    }
    let passing: Vec<&FitBlock> = converged
        .iter()
        .copied()
        .filter(|f| f.diagnostics.passes())
        .collect();
    let diagnostics_passed = !passing.is_empty();
    let pool = if diagnostics_passed { passing } else { converged };

    let best = pool
        .into_iter()
        .min_by(|x, y| {
            let (fx, fy) = (&x.fit, &y.fit);
            if (fx.aic - fy.aic).abs() > 1e-10 {
                fx.aic.total_cmp(&fy.aic)
            } else if (fx.sic - fy.sic).abs() > 1e-10 {
                fx.sic.total_cmp(&fy.sic)
            } else {
                fx.distribution.cmp(&fy.distribution)
            }
        })
        .expect("non-empty pool");

    let reason = if diagnostics_passed {
        format!(
            "lowest Akaike info criterion ({:.4}) among fits with no remaining serial correlation or ARCH effect",
            best.fit.aic
        )
    } else {
        format!(
            "no fit passed the residual diagnostics; lowest Akaike info criterion ({:.4}) among converged fits",
            best.fit.aic
        )
    };
    Ok(Selection {
        distribution: best.fit.distribution,
        aic: best.fit.aic,
        sic: best.fit.sic,
        diagnostics_passed,
        reason,
    })
}
