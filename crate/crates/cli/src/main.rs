use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use garchx::garch::{Distribution, GarchParams};
use garchx::market_data::{DummySeries, DummyWindow, PriceSeries};
use garchx::pipeline::{
    parse_date, parse_distributions, render_report, run_pipeline, write_outputs,
    PipelineConfig,
};
use garchx::simulate::{demo_params, simulate_garch, synthetic_price_pair, SimConfig, XProcess};

const EXIT_PRETEST_WARNING: u8 = 2;

#[derive(Parser)]
#[command(name = "pipeline", version, about = "GARCH(1,1) with an event dummy: estimation and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full workflow on two price files.
    Run(RunArgs),
    /// Simulate a path with known parameters and print it as CSV.
    Simulate(SimulateArgs),
    /// Write a synthetic index/exchange-rate price pair for demos.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dependent price series (the index).
    #[arg(long)]
    prices_a: Option<PathBuf>,
    /// Regressor price series (the exchange rate).
    #[arg(long)]
    prices_b: Option<PathBuf>,
    #[arg(long)]
    date_col: Option<String>,
    #[arg(long)]
    value_col: Option<String>,
    #[arg(long)]
    date_format: Option<String>,
    /// First day of the dummy window (YYYY-MM-DD).
    #[arg(long)]
    dummy_start: Option<String>,
    /// Last day of the dummy window (YYYY-MM-DD).
    #[arg(long)]
    dummy_end: Option<String>,
    /// Comma-separated subset of gaussian, ged, student_t.
    #[arg(long)]
    distributions: Option<String>,
    /// text, csv, structured or all.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fit the distributions one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "gaussian")]
    distribution: String,
    /// Shape for ged or student_t.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c1: f64,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    c2: f64,
    #[arg(long, default_value_t = 0.1)]
    c3: f64,
    #[arg(long, default_value_t = 0.1)]
    c4: f64,
    #[arg(long, default_value_t = 0.8)]
    c5: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c6: f64,
    /// Standard deviation of the iid normal regressor; 0 gives x = 0.
    #[arg(long, default_value_t = 1.0)]
    x_sd: f64,
    /// Dummy window as START:LEN in observation indices.
    #[arg(long)]
    dummy: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "ged")]
    distribution: String,
    #[arg(long, default_value_t = 1.3)]
    nu: f64,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Simulate(args) => simulate(args).map(|()| ExitCode::SUCCESS),
        Command::Synth(args) => synth(args).map(|()| ExitCode::SUCCESS),
    }
}

fn build_config(args: &RunArgs) -> Result<PipelineConfig> {
    let mut c = match &args.config {
        Some(path) => PipelineConfig::from_file(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = &args.prices_a {
        c.prices_a = v.clone();
    }
    if let Some(v) = &args.prices_b {
        c.prices_b = v.clone();
    }
    if let Some(v) = &args.date_col {
        c.date_col = v.clone();
    }
    if let Some(v) = &args.value_col {
        c.value_col = v.clone();
    }
    if let Some(v) = &args.date_format {
        c.date_format = v.clone();
    }
    if args.dummy_start.is_some() || args.dummy_end.is_some() {
        let start = match &args.dummy_start {
            Some(s) => parse_date(s)?,
            None => c.dummy_window.start(),
        };
        let end = match &args.dummy_end {
            Some(s) => parse_date(s)?,
            None => c.dummy_window.end(),
        };
        c.dummy_window = DummyWindow::new(start, end)?;
    }
    if let Some(v) = &args.distributions {
        c.distributions = parse_distributions(v)?;
    }
    if let Some(v) = &args.format {
        c.output_format = v.parse()?;
    }
    if let Some(v) = &args.output_dir {
        c.output_dir = Some(v.clone());
    }
    if let Some(v) = args.seed {
        c.fit.seed = v;
    }
    if args.sequential {
        c.parallel = false;
    }
    c.validate()?;
    Ok(c)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let config = build_config(&args)?;
    let report = run_pipeline(&config)?;
    let files = render_report(&report, config.output_format)?;
    match &config.output_dir {
        Some(dir) => {
            write_outputs(dir, &files)?;
            eprintln!("wrote {} files to {}", files.len(), dir.display());
        }
        None => {
            let primary = files
                .iter()
                .find(|f| f.path == Path::new("report.txt"))
                .or_else(|| files.iter().find(|f| f.path == Path::new("report.json")));
            match primary {
                Some(f) => print!("{}", f.contents),
                None => bail!("csv output needs --output-dir"),
            }
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(sel) = &report.selection {
        eprintln!("selected: {} (AIC {:.4})", sel.distribution.key(), sel.aic);
    }
    Ok(if report.halted_at_pretest() {
        ExitCode::from(EXIT_PRETEST_WARNING)
    } else {
        ExitCode::SUCCESS
    })
}

fn parse_dummy(spec: &str, n: usize) -> Result<DummySeries> {
    let (start, len) = spec
        .split_once(':')
        .context("dummy must look like START:LEN")?;
    let start: usize = start.trim().parse().context("dummy start")?;
    let len: usize = len.trim().parse().context("dummy length")?;
    if start + len > n {
        bail!("dummy window {start}:{len} runs past n = {n}");
    }
    let values = (0..n)
        .map(|i| if (start..start + len).contains(&i) { 1.0 } else { 0.0 })
        .collect();
    Ok(DummySeries::from_values(values)?)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let distribution: Distribution = args.distribution.parse()?;
    let mut params = GarchParams::new(args.c1, args.c2, args.c3, args.c4, args.c5, args.c6);
    params.nu = args.nu;
    let dummy = args.dummy.as_deref().map(|s| parse_dummy(s, args.n)).transpose()?;
    let x_process = if args.x_sd > 0.0 {
        XProcess::IidNormal { sd: args.x_sd }
    } else {
        XProcess::Zeros
    };
    let path = simulate_garch(&SimConfig {
        params,
        distribution,
        n: args.n,
        burn_in: args.burn_in,
        seed: args.seed,
        dummy,
        x_process,
    })?;
    let mut out = String::from("index,x,y,true_variance,dummy\n");
    for i in 0..args.n {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            path.x[i],
            path.y[i],
            path.true_variances[i],
            path.dummy.values()[i]
        );
    }
    match args.output {
        Some(file) => std::fs::write(&file, out).with_context(|| format!("writing {}", file.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn price_csv(series: &PriceSeries) -> String {
    let mut out = String::from("Date,Close\n");
    for o in series.observations() {
        let _ = writeln!(out, "{},{}", o.date.format("%Y-%m-%d"), o.value);
    }
    out
}

fn synth(args: SynthArgs) -> Result<()> {
    let distribution: Distribution = args.distribution.parse()?;
    let mut params = demo_params();
    if distribution.has_shape() {
        params.nu = Some(args.nu);
    }
    let (a, b) = synthetic_price_pair(params, distribution, args.seed)?;
    std::fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("creating {}", args.output_dir.display()))?;
    for (name, series) in [("index.csv", &a), ("fx.csv", &b)] {
        let path = args.output_dir.join(name);
        std::fs::write(&path, price_csv(series)).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "wrote index.csv and fx.csv ({} days) to {}",
        a.len(),
        args.output_dir.display()
    );
    Ok(())
}
