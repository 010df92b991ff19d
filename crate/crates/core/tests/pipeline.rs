use garchx::garch::{Distribution, GarchParams};
use garchx::pipeline::{
    render_report, run_pipeline, run_pipeline_on, select_model, write_outputs, FitBlock,
    OutputFormat, PipelineConfig, PipelineReport,
};
use garchx::simulate::{demo_params, synthetic_price_pair};
use garchx::Error;

fn demo_report(config: &PipelineConfig) -> PipelineReport {
    let (a, b) = synthetic_price_pair(demo_params().with_nu(1.3), Distribution::Ged, 1).unwrap();
    run_pipeline_on(&a, &b, config).unwrap()
}

fn no_arch_report() -> PipelineReport {
    let params = GarchParams::new(0.05, -0.9, 1.0, 0.0, 0.0, 0.0);
    let (a, b) = synthetic_price_pair(params, Distribution::Gaussian, 0).unwrap();
    run_pipeline_on(&a, &b, &PipelineConfig::default()).unwrap()
}

#[test]
fn stages_run_in_order() {
    let r = demo_report(&PipelineConfig::default());
    assert_eq!(
        r.stages,
        ["load", "align", "returns", "descriptive", "adf", "ols", "pretest", "garch", "diagnostics", "select"]
    );
    assert_eq!(r.descriptive.len(), 4);
    assert_eq!(r.adf.len(), 2);
    assert_eq!(r.fits.len(), 3);
    let order: Vec<_> = r.fits.iter().map(|f| f.fit.distribution).collect();
    assert_eq!(order, Distribution::ALL);
    for f in &r.fits {
        assert_eq!(f.diagnostics.ljung_box.len(), 5);
        assert_eq!(f.fit.n, r.data.returns_a.len());
    }
    assert!(r.data.dummy.iter().filter(|d| **d == 1.0).count() > 30);
}

#[test]
fn selection_has_minimum_aic_among_passing_fits() {
    let r = demo_report(&PipelineConfig::default());
    let sel = r.selection.as_ref().unwrap();
    assert!(sel.diagnostics_passed);
    for f in r.fits.iter().filter(|f| f.fit.converged && f.diagnostics.passes()) {
        assert!(sel.aic <= f.fit.aic);
    }
    assert_eq!(sel.distribution, Distribution::Ged);
}

#[test]
fn concurrent_fits_equal_sequential_fits() {
    let parallel = demo_report(&PipelineConfig::default());
    let sequential = demo_report(&PipelineConfig {
        parallel: false,
        ..PipelineConfig::default()
    });
    assert_eq!(parallel.fits, sequential.fits);
    assert_eq!(parallel.selection, sequential.selection);
}

#[test]
fn no_arch_data_halts_after_pretest() {
    let r = no_arch_report();
    assert!(r.halted_at_pretest());
    assert!(r.fits.is_empty());
    assert!(r.selection.is_none());
    assert!(r.warnings.iter().any(|w| w.contains("pretest")));
    assert_eq!(r.ols.coefficients.len(), 2);
    assert_eq!(r.stages.last().map(String::as_str), Some("pretest"));

    let files = render_report(&r, OutputFormat::All).unwrap();
    let text = &files.iter().find(|f| f.path.ends_with("report.txt")).unwrap().contents;
    assert!(text.contains("Least squares"));
    assert!(!text.contains("GARCH(1,1)"));
    assert!(!files.iter().any(|f| f.path.to_string_lossy().contains("garch_")));
}

#[test]
fn single_distribution_gives_one_block() {
    let r = demo_report(&PipelineConfig {
        distributions: vec![Distribution::Gaussian],
        ..PipelineConfig::default()
    });
    assert_eq!(r.fits.len(), 1);
    assert_eq!(r.selection.unwrap().distribution, Distribution::Gaussian);
}

#[test]
fn structured_output_round_trips() {
    let r = demo_report(&PipelineConfig::default());
    let files = render_report(&r, OutputFormat::Structured).unwrap();
    let json = &files.iter().find(|f| f.path.ends_with("report.json")).unwrap().contents;
    let back: PipelineReport = serde_json::from_str(json).unwrap();
    assert_eq!(back, r);
    let value: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(value["config"]["fit"]["seed"], 20161108);
}

#[test]
fn reruns_are_byte_identical() {
    let render = || {
        let r = demo_report(&PipelineConfig::default());
        render_report(&r, OutputFormat::All).unwrap()
    };
    assert_eq!(render(), render());
}

fn fit_with(template: &FitBlock, dist: Distribution, aic: f64, sic: f64, converged: bool, passes: bool) -> FitBlock {
    let mut b = template.clone();
    b.fit.distribution = dist;
    b.fit.aic = aic;
    b.fit.sic = sic;
    b.fit.converged = converged;
    b.diagnostics.no_serial_correlation = passes;
    b
}

#[test]
fn select_model_rules() {
    let r = demo_report(&PipelineConfig::default());
    let t = &r.fits[0];
    use Distribution::*;

    let fits = [
        fit_with(t, Gaussian, 2.2591, 2.3, true, true),
        fit_with(t, Ged, 2.1775, 2.3, true, true),
        fit_with(t, StudentT, 2.1909, 2.3, true, true),
    ];
    assert_eq!(select_model(&fits).unwrap().distribution, Ged);
    assert_eq!(select_model(&fits[..1]).unwrap().distribution, Gaussian);

    // equal AIC to 10 decimals: lower SIC wins
    let tied = [
        fit_with(t, Gaussian, 2.5, 2.61, true, true),
        fit_with(t, StudentT, 2.5 + 1e-12, 2.60, true, true),
    ];
    assert_eq!(select_model(&tied).unwrap().distribution, StudentT);
    let both = [
        fit_with(t, StudentT, 2.5, 2.6, true, true),
        fit_with(t, Ged, 2.5, 2.6, true, true),
    ];
    assert_eq!(select_model(&both).unwrap().distribution, Ged);

    // a failing fit is passed over even with lower AIC
    let gated = [
        fit_with(t, Gaussian, 2.0, 2.1, true, false),
        fit_with(t, Ged, 2.3, 2.4, true, true),
    ];
    let sel = select_model(&gated).unwrap();
    assert_eq!(sel.distribution, Ged);
    assert!(sel.diagnostics_passed);

    let none_pass = [
        fit_with(t, Gaussian, 2.0, 2.1, true, false),
        fit_with(t, Ged, 1.9, 2.4, false, true),
    ];
    let sel = select_model(&none_pass).unwrap();
    assert_eq!(sel.distribution, Gaussian);
    assert!(!sel.diagnostics_passed);

    let unconverged = [fit_with(t, Gaussian, 2.0, 2.1, false, true)];
    assert!(matches!(select_model(&unconverged), Err(Error::NoConvergedFit)));
}

#[test]
fn text_report_marks_one_percent_significance() {
    let mut r = demo_report(&PipelineConfig::default());
    let e = &mut r.fits[1].fit.estimates[5];
    e.value = 1.2325;
    e.p_value = Some(0.0004);
    let files = render_report(&r, OutputFormat::Text).unwrap();
    let text = &files[0].contents;
    let row = text
        .lines()
        .find(|l| l.starts_with("DUMMY") && l.contains("1.2325"))
        .expect("dummy row");
    assert!(row.contains("1.2325*"), "{row}");
    assert!(text.contains("*Significant at 1%"));
}

#[test]
fn csv_format_writes_one_file_per_table() {
    let r = demo_report(&PipelineConfig::default());
    let files = render_report(&r, OutputFormat::Csv).unwrap();
    let names: Vec<String> = files.iter().map(|f| f.path.to_string_lossy().into_owned()).collect();
    for expected in [
        "tables/descriptive.csv",
        "tables/adf.csv",
        "tables/ols.csv",
        "tables/arch_pretest.csv",
        "tables/garch_ged.csv",
        "tables/ljung_box.csv",
        "tables/jarque_bera.csv",
        "tables/selection.csv",
        "series/levels.csv",
        "series/returns.csv",
        "series/conditional_variance_student_t.csv",
    ] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    assert!(!names.iter().any(|n| n == "report.txt"));
    let lb = &files.iter().find(|f| f.path.ends_with("ljung_box.csv")).unwrap().contents;
    assert_eq!(lb.lines().count(), 1 + 3 * 5);
}

#[test]
fn run_from_files_and_errors_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = synthetic_price_pair(demo_params(), Distribution::Gaussian, 3).unwrap();
    for (name, s) in [("a.csv", &a), ("b.csv", &b)] {
        let mut text = String::from("Date,Close\n");
        for o in s.observations() {
            text.push_str(&format!("{},{}\n", o.date, o.value));
        }
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    std::fs::write(
        dir.path().join("run.toml"),
        "prices_a = \"a.csv\"\nprices_b = \"b.csv\"\ndistributions = \"gaussian\"\noutput_dir = \"out\"\n",
    )
    .unwrap();
    let config = PipelineConfig::from_file(dir.path().join("run.toml")).unwrap();
    let report = run_pipeline(&config).unwrap();
    assert_eq!(report.fits.len(), 1);
    assert_eq!(report.data.name_a, "a");
    let out = config.output_dir.clone().unwrap();
    write_outputs(&out, &render_report(&report, OutputFormat::All).unwrap()).unwrap();
    assert!(out.join("report.json").exists());
    assert!(out.join("series/conditional_variance_gaussian.csv").exists());

    let missing = PipelineConfig {
        prices_a: dir.path().join("nope.csv"),
        ..config
    };
    match run_pipeline(&missing) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "load"),
        other => panic!("expected a load-stage error, got {other:?}"),
    }
}

#[test]
fn empty_dummy_window_warns() {
    let (a, b) = synthetic_price_pair(demo_params(), Distribution::Gaussian, 1).unwrap();
    let mut config = PipelineConfig::default();
    config.dummy_window = garchx::market_data::DummyWindow::new(
        chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        chrono::NaiveDate::from_ymd_opt(2020, 2, 1).unwrap(),
    )
    .unwrap();
    config.distributions = vec![Distribution::Gaussian];
    let r = run_pipeline_on(&a, &b, &config).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("dummy")));
}
