use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{FitBlock, OutputFormat, PipelineReport};
use crate::error::{Error, Result};
use crate::garch::GarchFit;

/// Rendered artifact; `path` is relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

impl OutputFile {
    fn new(path: impl Into<PathBuf>, contents: String) -> Self {
        Self {
            path: path.into(),
            contents,
        }
    }
}

/// Renders the report in `format`. Plot-ready series are always included.
pub fn render_report(report: &PipelineReport, format: OutputFormat) -> Result<Vec<OutputFile>> {
    let mut files = Vec::new();
    if matches!(format, OutputFormat::Text | OutputFormat::All) {
        files.push(OutputFile::new("report.txt", render_text(report)));
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::All) {
        files.extend(render_tables(report)?);
    }
    if matches!(format, OutputFormat::Structured | OutputFormat::All) {
        files.push(OutputFile::new("report.json", render_structured(report)?));
    }
    files.extend(render_series(report)?);
    Ok(files)
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<()> {
    for file in files {
        let path = dir.join(&file.path);
        let io = |source| Error::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(&path, &file.contents).map_err(io)?;
    }
    Ok(())
}

fn render_structured(report: &PipelineReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn star(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.01 => "*",
        _ => " ",
    }
}

fn num(v: Option<f64>, width: usize, prec: usize) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:>width$.prec$}"),
        _ => format!("{:>width$}", "NA"),
    }
}

fn rule(out: &mut String) {
    out.push_str(&"=".repeat(72));
    out.push('\n');
}

fn render_text(r: &PipelineReport) -> String {
    let mut out = String::new();
    let w = &mut out;

    rule(w);
    w.push_str("Descriptive statistics\n");
    rule(w);
    let _ = write!(w, "{:<22}", "");
    for b in &r.descriptive {
        let _ = write!(w, "{:>20}", truncate(&b.variable, 19));
    }
    w.push('\n');
    type Row = fn(&crate::returns::DescriptiveStats) -> Option<f64>;
    let rows: [(&str, Row); 9] = [
        ("Mean", |s| Some(s.mean)),
        ("Standard Error", |s| Some(s.se_mean)),
        ("Median", |s| Some(s.median)),
        ("Standard Deviation", |s| Some(s.std_dev)),
        ("Kurtosis", |s| s.excess_kurtosis),
        ("Skewness", |s| s.skewness),
        ("Minimum", |s| Some(s.minimum)),
        ("Maximum", |s| Some(s.maximum)),
        ("Count", |s| Some(s.n as f64)),
    ];
    for (label, get) in rows {
        let _ = write!(w, "{label:<22}");
        for b in &r.descriptive {
            let _ = write!(w, "{}", num(get(&b.stats), 20, 4));
        }
        w.push('\n');
    }
    w.push('\n');

    rule(w);
    w.push_str("Augmented Dickey-Fuller unit root test (constant)\n");
    rule(w);
    for b in &r.adf {
        let a = &b.result;
        let _ = writeln!(w, "H0: {} has a unit root", b.variable);
        let _ = writeln!(w, "  lags: {}   observations: {}", a.lags_used, a.n_obs);
        let _ = writeln!(w, "  {:<30}{:>12}{:>10}", "", "t-Statistic", "Prob.");
        let _ = writeln!(
            w,
            "  {:<30}{}{}",
            "ADF test statistic",
            num(Some(a.t_statistic), 12, 4),
            num(Some(a.p_value), 10, 4)
        );
        for (label, v) in [
            ("1% level", a.critical_1pct),
            ("5% level", a.critical_5pct),
            ("10% level", a.critical_10pct),
        ] {
            let _ = writeln!(w, "  {:<30}{}", label, num(Some(v), 12, 4));
        }
        w.push('\n');
    }

    rule(w);
    let _ = writeln!(
        w,
        "Least squares: {} on {}",
        r.data.name_a, r.data.name_b
    );
    rule(w);
    coef_header(w);
    let names = [("C", "C1"), (r.data.name_b.as_str(), "C2")];
    for (i, (label, name)) in names.iter().enumerate().take(r.ols.coefficients.len()) {
        coef_row(
            w,
            label,
            name,
            r.ols.coefficients[i],
            Some(r.ols.std_errors[i]),
            Some(r.ols.t_stats[i]),
            Some(r.ols.p_values[i]),
        );
    }
    w.push('\n');
    for (label, v) in [
        ("R-squared", Some(r.ols.r_squared)),
        ("F-statistic", r.ols.f_statistic),
        ("Prob(F-statistic)", r.ols.f_p_value),
        ("Log likelihood", Some(r.ols.log_likelihood)),
        ("Akaike info criterion", Some(r.ols.aic)),
        ("Schwarz criterion", Some(r.ols.sic)),
        ("Durbin-Watson stat", r.ols.dw),
    ] {
        let _ = writeln!(w, "{label:<30}{}", num(v, 14, 6));
    }
    w.push('\n');

    rule(w);
    w.push_str("Heteroskedasticity test: ARCH (OLS residuals)\n");
    rule(w);
    w.push_str("H0: no ARCH effect\n");
    arch_block(w, &r.pretest.result);
    let _ = writeln!(
        w,
        "Decision: {}",
        if r.pretest.rejects_no_arch {
            "reject H0 at 5%; GARCH estimation warranted"
        } else {
            "do not reject H0 at 5%"
        }
    );
    w.push('\n');

    for block in &r.fits {
        garch_block(w, r, block);
    }

    if let Some(sel) = &r.selection {
        rule(w);
        w.push_str("Model selection\n");
        rule(w);
        let _ = writeln!(w, "Selected: {}", sel.distribution.label());
        let _ = writeln!(w, "  AIC {:.4}   SIC {:.4}", sel.aic, sel.sic);
        let _ = writeln!(w, "Reason: {}", sel.reason);
        w.push('\n');
    }

    if !r.warnings.is_empty() {
        rule(w);
        w.push_str("Warnings\n");
        rule(w);
        for warning in &r.warnings {
            let _ = writeln!(w, "- {warning}");
        }
        w.push('\n');
    }
    w.push_str("*Significant at 1%\n");
    out
}

fn truncate(s: &str, max: usize) -> String {
    s.chars().take(max).collect()
}

fn coef_header(w: &mut String) {
    let _ = writeln!(
        w,
        "{:<12}{:<14}{:>13}{:>12}{:>12}{:>9}",
        "Variable", "Coef.", "Coefficient", "Std. Error", "Statistic", "Prob."
    );
}

fn coef_row(
    w: &mut String,
    label: &str,
    name: &str,
    value: f64,
    se: Option<f64>,
    stat: Option<f64>,
    p: Option<f64>,
) {
    let _ = writeln!(
        w,
        "{:<12}{:<14}{}{}{}{}{}",
        truncate(label, 11),
        truncate(name, 13),
        num(Some(value), 12, 4),
        star(p),
        num(se, 12, 4),
        num(stat, 12, 4),
        num(p, 9, 4),
    );
}

fn arch_block(w: &mut String, a: &crate::diagnostics::ArchLmResult) {
    let _ = writeln!(
        w,
        "{:<30}{}   Prob. F({},{}){}",
        "F-statistic",
        num(Some(a.f_statistic), 12, 4),
        a.f_df.0,
        a.f_df.1,
        num(Some(a.f_p_value), 10, 4)
    );
    let _ = writeln!(
        w,
        "{:<30}{}   Prob. Chi-Square({}){}",
        "Obs*R-squared",
        num(Some(a.obs_r_squared), 12, 4),
        a.lags,
        num(Some(a.chi2_p_value), 10, 4)
    );
}

fn garch_block(w: &mut String, r: &PipelineReport, block: &FitBlock) {
    let fit: &GarchFit = &block.fit;
    rule(w);
    let _ = writeln!(w, "GARCH(1,1) with variance regressor: {}", fit.distribution.label());
    rule(w);
    let _ = writeln!(
        w,
        "observations: {}   iterations: {}   converged: {}",
        fit.n,
        fit.iterations,
        if fit.converged { "yes" } else { "no" }
    );
    coef_header(w);
    let labels = [
        "C",
        r.data.name_b.as_str(),
        "C",
        "RESID(-1)^2",
        "GARCH(-1)",
        "DUMMY",
    ];
    for (i, e) in fit.estimates.iter().enumerate() {
        if i == 2 {
            w.push_str("Variance equation\n");
        }
        let label = labels.get(i).copied().unwrap_or("");
        coef_row(w, label, &e.name, e.value, e.std_error, e.z_stat, e.p_value);
    }
    w.push('\n');
    for (label, v) in [
        ("R-squared", Some(fit.r_squared)),
        ("Log likelihood", Some(fit.log_likelihood)),
        ("Akaike info criterion", Some(fit.aic)),
        ("Schwarz criterion", Some(fit.sic)),
        ("Durbin-Watson stat", fit.dw),
    ] {
        let _ = writeln!(w, "{label:<30}{}", num(v, 14, 6));
    }
    if fit.clamp_count > 0 {
        let _ = writeln!(w, "variance floor applied {} times", fit.clamp_count);
    }
    w.push('\n');

    let d = &block.diagnostics;
    let _ = writeln!(w, "Ljung-Box Q on squared standardized residuals ({})", fit.distribution);
    w.push_str("H0: no serial correlation\n");
    let _ = writeln!(w, "{:>6}{:>12}{:>10}", "Lag", "Q-Stat", "Prob.");
    for q in &d.ljung_box {
        let _ = writeln!(w, "{:>6}{}{}", q.lag, num(Some(q.q), 12, 4), num(Some(q.p_value), 10, 4));
    }
    w.push('\n');
    let _ = writeln!(w, "ARCH test on standardized residuals ({})", fit.distribution);
    w.push_str("H0: no remaining ARCH effect\n");
    arch_block(w, &d.arch_lm);
    w.push('\n');
    let jb = &d.jarque_bera;
    let _ = writeln!(w, "Jarque-Bera on standardized residuals ({})", fit.distribution);
    w.push_str("H0: residuals are normally distributed\n");
    let _ = writeln!(
        w,
        "Skewness {:.4}   Kurtosis {:.4}   Jarque-Bera {:.4}   Prob. {:.4}",
        jb.skewness, jb.kurtosis, jb.jb, jb.p_value
    );
    let _ = writeln!(
        w,
        "Diagnostics pass: {}",
        if d.passes() { "yes" } else { "no" }
    );
    w.push('\n');
}

fn csv_string<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Config(format!("cannot write csv: {e}"));
    wtr.write_record(header).map_err(fail)?;
    for row in rows {
        wtr.serialize(row).map_err(fail)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Config(format!("cannot write csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_tables(r: &PipelineReport) -> Result<Vec<OutputFile>> {
    let mut files = Vec::new();

    let rows: Vec<_> = r
        .descriptive
        .iter()
        .map(|b| {
            let s = &b.stats;
            (
                &b.variable,
                s.mean,
                s.se_mean,
                s.median,
                s.std_dev,
                s.excess_kurtosis,
                s.skewness,
                s.minimum,
                s.maximum,
                s.n,
            )
        })
        .collect();
    files.push(OutputFile::new(
        "tables/descriptive.csv",
        csv_string(
            &[
                "variable", "mean", "se_mean", "median", "std_dev", "excess_kurtosis",
                "skewness", "minimum", "maximum", "count",
            ],
            &rows,
        )?,
    ));

    let rows: Vec<_> = r
        .adf
        .iter()
        .map(|b| {
            let a = &b.result;
            (
                &b.variable,
                a.t_statistic,
                a.p_value,
                a.critical_1pct,
                a.critical_5pct,
                a.critical_10pct,
                a.lags_used,
                a.n_obs,
            )
        })
        .collect();
    files.push(OutputFile::new(
        "tables/adf.csv",
        csv_string(
            &["variable", "t_statistic", "p_value", "cv_1pct", "cv_5pct", "cv_10pct", "lags", "n_obs"],
            &rows,
        )?,
    ));

    let names = ["C".to_string(), r.data.name_b.clone()];
    let rows: Vec<_> = (0..r.ols.coefficients.len())
        .map(|i| {
            (
                &names[i],
                r.ols.coefficients[i],
                r.ols.std_errors[i],
                r.ols.t_stats[i],
                r.ols.p_values[i],
            )
        })
        .collect();
    files.push(OutputFile::new(
        "tables/ols.csv",
        csv_string(&["variable", "coefficient", "std_error", "t_stat", "p_value"], &rows)?,
    ));
    let stats = [(
        r.ols.r_squared,
        r.ols.f_statistic,
        r.ols.f_p_value,
        r.ols.log_likelihood,
        r.ols.aic,
        r.ols.sic,
        r.ols.dw,
        r.ols.n,
    )];
    files.push(OutputFile::new(
        "tables/ols_summary.csv",
        csv_string(&["r_squared", "f_statistic", "f_p_value", "log_likelihood", "aic", "sic", "dw", "n"], &stats)?,
    ));

    let arch_header = [
        "model", "f_statistic", "f_p_value", "df1", "df2", "obs_r_squared", "chi2_p_value", "lags", "n_effective",
    ];
    let arch_row = |model: String, a: &crate::diagnostics::ArchLmResult| {
        (
            model,
            a.f_statistic,
            a.f_p_value,
            a.f_df.0,
            a.f_df.1,
            a.obs_r_squared,
            a.chi2_p_value,
            a.lags,
            a.n_effective,
        )
    };
    files.push(OutputFile::new(
        "tables/arch_pretest.csv",
        csv_string(&arch_header, &[arch_row("ols".into(), &r.pretest.result)])?,
    ));

    if r.fits.is_empty() {
        return Ok(files);
    }

    let mut lb = Vec::new();
    let mut arch = Vec::new();
    let mut jb = Vec::new();
    for block in &r.fits {
        let fit = &block.fit;
        let key = fit.distribution.key();
        let rows: Vec<_> = fit
            .estimates
            .iter()
            .map(|e| (&e.name, e.value, e.std_error, e.z_stat, e.p_value))
            .collect();
        let mut text = csv_string(&["parameter", "coefficient", "std_error", "z_stat", "p_value"], &rows)?;
        text.push_str(&csv_string(
            &["log_likelihood", "aic", "sic", "r_squared", "dw", "converged", "clamp_count"],
            &[(fit.log_likelihood, fit.aic, fit.sic, fit.r_squared, fit.dw, fit.converged, fit.clamp_count)],
        )?);
        files.push(OutputFile::new(format!("tables/garch_{key}.csv"), text));

        let d = &block.diagnostics;
        lb.extend(d.ljung_box.iter().map(|q| (key, q.lag, q.q, q.p_value)));
        arch.push(arch_row(key.to_string(), &d.arch_lm));
        jb.push((key, d.jarque_bera.skewness, d.jarque_bera.kurtosis, d.jarque_bera.jb, d.jarque_bera.p_value, d.passes()));
    }
    files.push(OutputFile::new(
        "tables/ljung_box.csv",
        csv_string(&["model", "lag", "q_stat", "p_value"], &lb)?,
    ));
    files.push(OutputFile::new("tables/arch_lm.csv", csv_string(&arch_header, &arch)?));
    files.push(OutputFile::new(
        "tables/jarque_bera.csv",
        csv_string(&["model", "skewness", "kurtosis", "jarque_bera", "p_value", "diagnostics_pass"], &jb)?,
    ));

    let selected = r.selection.as_ref().map(|s| s.distribution);
    let rows: Vec<_> = r
        .fits
        .iter()
        .map(|b| {
            (
                b.fit.distribution.key(),
                b.fit.aic,
                b.fit.sic,
                b.fit.converged,
                b.diagnostics.passes(),
                Some(b.fit.distribution) == selected,
            )
        })
        .collect();
    files.push(OutputFile::new(
        "tables/selection.csv",
        csv_string(&["model", "aic", "sic", "converged", "diagnostics_pass", "selected"], &rows)?,
    ));
    Ok(files)
}

fn render_series(r: &PipelineReport) -> Result<Vec<OutputFile>> {
    let d = &r.data;
    let mut files = Vec::new();
    let rows: Vec<_> = (0..d.level_dates.len())
        .map(|i| (d.level_dates[i].to_string(), d.levels_a[i], d.levels_b[i]))
        .collect();
    files.push(OutputFile::new(
        "series/levels.csv",
        csv_string(&["date", &d.name_a, &d.name_b], &rows)?,
    ));
    let rows: Vec<_> = (0..d.return_dates.len())
        .map(|i| (d.return_dates[i].to_string(), d.returns_a[i], d.returns_b[i], d.dummy[i]))
        .collect();
    files.push(OutputFile::new(
        "series/returns.csv",
        csv_string(&["date", &d.name_a, &d.name_b, "dummy"], &rows)?,
    ));
    let rows: Vec<_> = d
        .return_dates
        .iter()
        .zip(&r.ols.residuals)
        .map(|(date, e)| (date.to_string(), e))
        .collect();
    files.push(OutputFile::new(
        "series/ols_residuals.csv",
        csv_string(&["date", "residual"], &rows)?,
    ));
    for block in &r.fits {
        let fit = &block.fit;
        let rows: Vec<_> = (0..fit.n)
            .map(|i| {
                (
                    d.return_dates[i].to_string(),
                    fit.residuals[i],
                    fit.conditional_variances[i],
                    fit.standardized_residuals[i],
                )
            })
            .collect();
        files.push(OutputFile::new(
            format!("series/conditional_variance_{}.csv", fit.distribution.key()),
            csv_string(&["date", "residual", "conditional_variance", "standardized_residual"], &rows)?,
        ));
    }
    Ok(files)
}
