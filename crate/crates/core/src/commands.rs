//! The four CLI commands. Each writes its files under `config.out` and
//! returns the JSON report, which always echoes the resolved config.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bench::{self, BenchResult};
use crate::config::{Command, RunConfig};
use crate::error::{Result, StageExt};
use crate::io::{self, Cell};
use crate::pipeline::{self, HurstReport, ScaleReport};
use crate::hurst;
use crate::series::TimeSeries;
use crate::sim;
use crate::stats::{self, IncrementOrder};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    samples: usize,
    files: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ScaleSummary<'a> {
    source: &'a str,
    scale: ScaleReport,
}

#[derive(Debug, Serialize)]
struct HurstSummary<'a> {
    source: &'a str,
    scale: Option<ScaleReport>,
    hurst: HurstReport,
}

pub fn run(config: &RunConfig) -> Result<String> {
    match config.command {
        Command::Simulate => run_simulate(config),
        Command::EstimateScale => run_estimate_scale(config),
        Command::EstimateHurst => run_estimate_hurst(config),
        Command::Bench => run_bench(config),
    }
}

fn finish<T: Serialize>(config: &RunConfig, body: T) -> Result<String> {
    let text = io::to_json(&Report { config, body });
    io::write_text(&config.out.join(REPORT_FILE), &text)?;
    Ok(text)
}

fn simulate(config: &RunConfig) -> Result<TimeSeries> {
    sim::simulate_sfbm(&config.sfbm_params()?, &config.sampling_grid(), config.seed)
}

/// The series to analyse and a label for where it came from.
fn load(config: &RunConfig) -> Result<(TimeSeries, String)> {
    match &config.input {
        Some(path) => Ok((io::read_series(path).stage("input")?, path.display().to_string())),
        None => Ok((simulate(config).stage("simulation")?, "simulated".into())),
    }
}

fn write_indexed(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let len = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    io::write_csv(
        path,
        header,
        (0..len).map(|i| {
            let mut row: Vec<Cell> = vec![i.into()];
            row.extend(columns.iter().map(|c| Cell::Float(c.get(i).copied().unwrap_or(f64::NAN))));
            row
        }),
    )
}

pub fn run_simulate(config: &RunConfig) -> Result<String> {
    let x = simulate(config)?;
    let path_file = config.out.join("path.csv");
    io::write_series(&path_file, &x)?;
    let mut files = vec![path_file];
    // moving-variance companion trace, when the path is long enough
    let y = stats::difference(x.values(), IncrementOrder::First)?;
    if let Ok(msv) = stats::moving_sample_variance(&y, config.b_star) {
        if let Ok(avg) = stats::moving_average(&msv, config.d_star) {
            let cum = stats::cumulative_sum(&avg);
            let f = config.out.join("msv.csv");
            write_indexed(&f, &["i", "msv", "averaged", "cumulative"], &[&msv, &avg, &cum])?;
            files.push(f);
        }
    }
    finish(
        config,
        SimulateSummary {
            samples: x.len(),
            files,
        },
    )
}

fn write_scale_traces(dir: &Path, report: &ScaleReport, traces: &pipeline::ScaleTraces) -> Result<()> {
    write_indexed(
        &dir.join("msv.csv"),
        &["i", "msv", "averaged", "cumulative"],
        &[&traces.msv, &traces.averaged, &traces.cumulative],
    )?;
    io::write_csv(
        &dir.join("split_scan.csv"),
        &["z", "s"],
        traces.split_scan.iter().map(|&(z, s)| vec![z.into(), s.into()]),
    )?;
    io::write_csv(
        &dir.join("objective.csv"),
        &["a", "r", "v"],
        report
            .estimate
            .refinement
            .trace
            .iter()
            .map(|p| vec![p.a.into(), p.r.into(), p.v.into()]),
    )
}

pub fn run_estimate_scale(config: &RunConfig) -> Result<String> {
    let (x, source) = load(config)?;
    let (scale, traces) = pipeline::estimate_scale(&x, &config.scale_settings())?;
    write_scale_traces(&config.out, &scale, &traces)?;
    finish(
        config,
        ScaleSummary {
            source: &source,
            scale,
        },
    )
}

pub fn run_estimate_hurst(config: &RunConfig) -> Result<String> {
    let (x, source) = load(config)?;
    let mut scale = None;
    let prior = match (config.lambda_star, config.h_gap) {
        (Some(l), Some(g)) => Some((l, g)),
        _ if config.rescale => {
            let (report, traces) = pipeline::estimate_scale(&x, &config.scale_settings())?;
            write_scale_traces(&config.out, &report, &traces)?;
            let est = &report.estimate;
            let prior = (est.lambda_star, est.h_minus_hprime);
            scale = Some(report);
            Some(prior)
        }
        _ => None,
    };
    if let Some(w) = hurst::short_subsample_warning(x.len(), config.kmax) {
        eprintln!("{w}");
    }
    let hurst = pipeline::estimate_hurst(&x, config.hurst_choice()?, config.kmax, prior)?;
    finish(
        config,
        HurstSummary {
            source: &source,
            scale,
            hurst,
        },
    )
}

pub fn write_bench_csv(path: &Path, result: &BenchResult) -> Result<()> {
    io::write_csv(
        path,
        &["true_h", "method", "n", "repetitions", "mean_estimate", "bias", "variance", "mse"],
        result.rows.iter().map(|r| {
            vec![
                r.true_h.into(),
                r.method.name().into(),
                r.n.into(),
                r.repetitions.into(),
                r.mean_estimate.into(),
                r.bias.into(),
                r.variance.into(),
                r.mse.into(),
            ]
        }),
    )
}

pub fn run_bench(config: &RunConfig) -> Result<String> {
    if let Some(w) = hurst::short_subsample_warning(config.n, config.kmax) {
        eprintln!("{w}");
    }
    let result = bench::run_bench(&config.bench_settings()?)?;
    write_bench_csv(&config.out.join("bench.csv"), &result)?;
    finish(config, result)
}
